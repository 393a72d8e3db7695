#include "enrichfp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "enrichfp/error.hpp"
#include "enrichfp/serialize.hpp"

namespace enrichfp {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Scheme scheme) noexcept
{
    switch (scheme) {
    case Scheme::picard: return "picard";
    case Scheme::krasnoselskij: return "krasnoselskij";
    case Scheme::solve_modified: return "solve_modified";
    case Scheme::verify: return "verify";
    case Scheme::min_b: return "min_b";
    }
    return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view text) noexcept
{
    if (text == "picard") return Scheme::picard;
    if (text == "krasnoselskij") return Scheme::krasnoselskij;
    if (text == "solve_modified") return Scheme::solve_modified;
    if (text == "verify") return Scheme::verify;
    if (text == "min_b") return Scheme::min_b;
    return std::nullopt;
}

namespace {

[[noreturn]] void config_error(const std::string& message, const std::string& path)
{
    throw Error(ErrorCode::ConfigError, message, path);
}

// Reads typed fields out of one JSON object, tracking which keys were seen.
class ObjectReader {
public:
    ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path))
    {
        if (!doc_.is_object()) config_error("expected a JSON object", path_.empty() ? "/" : path_);
    }

    std::string at(const char* key) const { return path_ + "/" + key; }

    const json* find(const char* key)
    {
        seen_.emplace_back(key);
        auto it = doc_.find(key);
        if (it == doc_.end() || it->is_null()) return nullptr;
        return &*it;
    }

    std::optional<double> number(const char* key)
    {
        const json* value = find(key);
        if (!value) return std::nullopt;
        if (!value->is_number()) config_error("expected a number", at(key));
        const double out = value->get<double>();
        if (!std::isfinite(out)) config_error("number must be finite", at(key));
        return out;
    }

    std::optional<std::uint64_t> unsigned_integer(const char* key)
    {
        const json* value = find(key);
        if (!value) return std::nullopt;
        const bool non_negative = value->is_number_unsigned() ||
                                  (value->is_number_integer() && value->get<std::int64_t>() >= 0);
        if (!non_negative) config_error("expected a non-negative integer", at(key));
        return value->get<std::uint64_t>();
    }

    std::optional<bool> boolean(const char* key)
    {
        const json* value = find(key);
        if (!value) return std::nullopt;
        if (!value->is_boolean()) config_error("expected true or false", at(key));
        return value->get<bool>();
    }

    std::optional<std::string> string(const char* key)
    {
        const json* value = find(key);
        if (!value) return std::nullopt;
        if (!value->is_string()) config_error("expected a string", at(key));
        return value->get<std::string>();
    }

    std::optional<Vector> vector(const char* key)
    {
        const json* value = find(key);
        if (!value) return std::nullopt;
        if (!value->is_array() || value->empty()) config_error("expected a non-empty array of numbers", at(key));
        Vector out(value->size());
        for (std::size_t i = 0; i < value->size(); ++i) {
            const json& item = (*value)[i];
            if (!item.is_number() || !std::isfinite(item.get<double>())) {
                config_error("expected a finite number", at(key) + "/" + std::to_string(i));
            }
            out[i] = item.get<double>();
        }
        return out;
    }

    void reject_unknown() const
    {
        for (const auto& item : doc_.items()) {
            if (std::find(seen_.begin(), seen_.end(), item.key()) == seen_.end()) {
                config_error("unknown field \"" + item.key() + "\"", path_ + "/" + item.key());
            }
        }
    }

private:
    const json& doc_;
    std::string path_;
    std::vector<std::string> seen_;
};

template <class F>
void as_config_error(const std::string& path, F&& check)
{
    try {
        check();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        std::string message = e.what();
        config_error(message, e.path().empty() ? path : path + e.path());
    }
}

std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

void write_file(const fs::path& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
    }
}

std::string csv_quote(const std::string& text)
{
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Matrix random_orthogonal(std::size_t dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    // Columns of q, built by Gram-Schmidt with one re-orthogonalisation pass.
    std::vector<Vector> columns;
    columns.reserve(dim);
    while (columns.size() < dim) {
        Vector v(dim);
        for (double& value : v) value = gauss(rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& q : columns) {
                double proj = 0.0;
                for (std::size_t i = 0; i < dim; ++i) proj += q[i] * v[i];
                for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * q[i];
            }
        }
        const double len = norm(v, NormKind::l2);
        if (len < 1e-8) continue;
        v *= 1.0 / len;
        columns.push_back(std::move(v));
    }
    Matrix q(dim);
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t r = 0; r < dim; ++r) q(r, c) = columns[c][r];
    }
    return q;
}

}  // namespace

ExperimentConfig parse_config(const json& doc)
{
    ExperimentConfig config;
    ObjectReader top(doc, "");

    if (auto max_dim = top.unsigned_integer("max_dim")) {
        if (*max_dim == 0) config_error("max_dim must be >= 1", "/max_dim");
        config.max_dim = *max_dim;
    }

    const json* mapping_doc = top.find("mapping");
    if (!mapping_doc) config_error("missing field \"mapping\"", "/mapping");
    as_config_error("/mapping", [&] { config.mapping = parse_mapping(*mapping_doc, config.max_dim); });

    if (auto text = top.string("norm")) {
        auto kind = parse_norm_kind(*text);
        if (!kind) config_error("norm must be one of l1, l2, linf", "/norm");
        config.norm = *kind;
    }
    if (auto text = top.string("scheme")) {
        auto scheme = parse_scheme(*text);
        if (!scheme) {
            config_error("scheme must be one of picard, krasnoselskij, solve_modified, verify, min_b", "/scheme");
        }
        config.scheme = *scheme;
    } else {
        config_error("missing field \"scheme\"", "/scheme");
    }
    config.b = top.number("b");
    config.lambda = top.number("lambda");
    if (auto text = top.string("kind")) {
        auto kind = parse_condition_kind(*text);
        if (!kind) config_error("kind must be enriched or modified", "/kind");
        config.kind = *kind;
    }
    config.x0 = top.vector("x0").value_or(Vector(config.mapping.dimension()));

    if (const json* stop_doc = top.find("stop")) {
        ObjectReader stop(*stop_doc, "/stop");
        if (auto v = stop.number("eps_abs")) config.stop.eps_abs = *v;
        if (auto v = stop.number("eps_rel")) config.stop.eps_rel = *v;
        if (auto v = stop.unsigned_integer("max_iter")) config.stop.max_iter = *v;
        if (auto v = stop.number("norm_cap")) config.stop.norm_cap = *v;
        stop.reject_unknown();
    }
    if (const json* sampler_doc = top.find("sampler")) {
        ObjectReader sampler(*sampler_doc, "/sampler");
        if (auto v = sampler.unsigned_integer("count")) config.sampler.count = *v;
        if (auto v = sampler.number("box_radius")) config.sampler.box_radius = *v;
        if (auto v = sampler.number("near_pair_fraction")) config.sampler.near_pair_fraction = *v;
        sampler.reject_unknown();
    }
    if (auto v = top.number("slack")) config.slack = *v;
    if (auto v = top.boolean("verify")) config.verify = *v;
    if (auto v = top.string("output_dir")) config.output_dir = *v;
    if (auto v = top.boolean("store_iterates")) config.store_iterates = *v;
    if (auto v = top.unsigned_integer("seed")) config.seed = *v;
    config.sampler.seed = config.seed;

    if (const json* domain_doc = top.find("domain")) {
        ObjectReader domain(*domain_doc, "/domain");
        DomainBox box;
        auto lo = domain.vector("lo");
        auto hi = domain.vector("hi");
        if (!lo) config_error("missing field \"lo\"", "/domain/lo");
        if (!hi) config_error("missing field \"hi\"", "/domain/hi");
        box.lo = *lo;
        box.hi = *hi;
        box.project_iterates = domain.boolean("project_iterates").value_or(false);
        domain.reject_unknown();
        config.domain = std::move(box);
    }
    top.reject_unknown();

    validate(config);
    return config;
}

ExperimentConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what(), path.string());
    }
    return parse_config(doc);
}

void validate(const ExperimentConfig& config)
{
    const std::size_t dim = config.mapping.dimension();
    if (dim > config.max_dim) {
        config_error("mapping dimension " + std::to_string(dim) + " exceeds max_dim", "/mapping");
    }
    if (config.x0.size() != dim) {
        config_error("x0 has dimension " + std::to_string(config.x0.size()) + ", mapping has " +
                         std::to_string(dim),
                     "/x0");
    }
    if (!config.x0.all_finite()) config_error("x0 must be finite", "/x0");

    as_config_error("/stop", [&] { config.stop.validate(); });
    as_config_error("/sampler", [&] { config.sampler.validate(); });
    if (!(config.slack >= 0.0)) config_error("slack must be >= 0", "/slack");

    switch (config.scheme) {
    case Scheme::solve_modified:
        if (!config.b) config_error("solve_modified requires b", "/b");
        if (!(*config.b > 0.0)) config_error("solve_modified requires b > 0", "/b");
        break;
    case Scheme::krasnoselskij:
        if (!config.lambda) config_error("krasnoselskij requires lambda", "/lambda");
        if (!(*config.lambda > 0.0 && *config.lambda < 1.0)) {
            config_error("krasnoselskij requires lambda in (0, 1)", "/lambda");
        }
        break;
    case Scheme::verify:
        if (!config.b) config_error("verify requires b", "/b");
        if (!(*config.b >= 0.0)) config_error("verify requires b >= 0", "/b");
        break;
    case Scheme::min_b:
        if (!as_affine(config.mapping)) config_error("min_b requires an affine mapping", "/mapping");
        break;
    case Scheme::picard:
        break;
    }

    if (config.domain) {
        as_config_error("/domain", [&] { Mapping::box_projection(config.domain->lo, config.domain->hi); });
        if (config.domain->lo.size() != dim) config_error("domain dimension does not match the mapping", "/domain");
    }
}

json to_json(const ExperimentConfig& config)
{
    json out = {{"mapping", to_json(config.mapping)},
                {"norm", std::string(to_string(config.norm))},
                {"scheme", std::string(to_string(config.scheme))},
                {"b", nullptr},
                {"lambda", nullptr},
                {"kind", std::string(to_string(config.kind))},
                {"x0", to_json(config.x0)},
                {"stop", to_json(config.stop)},
                {"sampler",
                 {{"count", config.sampler.count},
                  {"box_radius", config.sampler.box_radius},
                  {"near_pair_fraction", config.sampler.near_pair_fraction}}},
                {"slack", config.slack},
                {"verify", config.verify},
                {"output_dir", config.output_dir.generic_string()},
                {"store_iterates", config.store_iterates},
                {"seed", config.seed},
                {"max_dim", config.max_dim},
                {"domain", nullptr}};
    if (config.b) out["b"] = *config.b;
    if (config.lambda) out["lambda"] = *config.lambda;
    if (config.domain) {
        out["domain"] = {{"lo", to_json(config.domain->lo)},
                         {"hi", to_json(config.domain->hi)},
                         {"project_iterates", config.domain->project_iterates}};
    }
    return out;
}

std::string config_digest(const ExperimentConfig& config)
{
    return fnv1a_hex(to_json(config).dump());
}

bool RunSummary::succeeded() const noexcept
{
    return status == "converged" || status == "passed" || status == "found";
}

json to_json(const RunSummary& summary)
{
    json out = {{"digest", summary.digest},
                {"scheme", std::string(to_string(summary.scheme))},
                {"status", summary.status},
                {"iterations", summary.iterations},
                {"wall_time", summary.wall_time},
                {"empirical_ratio", nullptr},
                {"error", nullptr},
                {"result", nullptr}};
    if (summary.empirical_ratio) out["empirical_ratio"] = *summary.empirical_ratio;
    if (summary.error) out["error"] = *summary.error;

    if (summary.solve) {
        out["result"] = to_json(*summary.solve);
    } else if (summary.trace) {
        out["result"] = {{"final", to_json(summary.trace->final)},
                         {"status", std::string(to_string(summary.trace->status))},
                         {"iterations", summary.trace->iterations}};
    } else if (summary.report) {
        out["result"] = to_json(*summary.report);
    } else if (summary.scheme == Scheme::min_b && !summary.error) {
        out["result"] = {{"min_b", nullptr}};
        if (summary.min_b) out["result"]["min_b"] = *summary.min_b;
    }

    json artifacts = json::array();
    for (const auto& path : summary.artifacts) artifacts.push_back(path.filename().generic_string());
    out["artifacts"] = std::move(artifacts);
    return out;
}

RunSummary run_experiment(const ExperimentConfig& config)
{
    validate(config);

    RunSummary summary;
    summary.digest = config_digest(config);
    summary.scheme = config.scheme;

    IterationOptions iteration;
    iteration.store_iterates = config.store_iterates;
    if (config.domain && config.domain->project_iterates) {
        iteration.projection = Mapping::box_projection(config.domain->lo, config.domain->hi);
    }

    const auto started = std::chrono::steady_clock::now();
    const IterationTrace* trace = nullptr;
    try {
        switch (config.scheme) {
        case Scheme::picard:
            summary.trace = picard(config.mapping, config.x0, config.stop, config.norm, iteration);
            trace = &*summary.trace;
            break;
        case Scheme::krasnoselskij:
            summary.trace =
                krasnoselskij(config.mapping, *config.lambda, config.x0, config.stop, config.norm, iteration);
            trace = &*summary.trace;
            break;
        case Scheme::solve_modified: {
            SolveOptions options;
            options.verify = config.verify;
            options.sampler = config.sampler;
            options.slack = config.slack;
            options.iteration = iteration;
            summary.solve = solve_modified(config.mapping, *config.b, config.x0, config.stop, config.norm, options);
            trace = &summary.solve->trace;
            break;
        }
        case Scheme::verify:
            summary.report =
                verify_condition(config.mapping, *config.b, config.kind, config.sampler, config.slack, config.norm);
            summary.status = summary.report->passed ? "passed" : "refuted";
            break;
        case Scheme::min_b: {
            const auto form = as_affine(config.mapping);
            summary.min_b = min_b_affine(form->matrix, config.kind, config.norm);
            summary.status = summary.min_b ? "found" : "infeasible";
            break;
        }
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError) throw;
        summary.status = "error";
        summary.error = e.what();
    }
    summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (trace) {
        summary.status = std::string(to_string(trace->status));
        summary.iterations = trace->iterations;
        try {
            summary.empirical_ratio = empirical_ratio(*trace);
        } catch (const Error&) {
            summary.empirical_ratio.reset();
        }
    }

    if (!config.output_dir.empty()) {
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + config.output_dir.string() + ": " + ec.message());
        }
        const fs::path config_path = config.output_dir / "config.json";
        const fs::path trace_path = config.output_dir / "trace.csv";
        const fs::path summary_path = config.output_dir / "summary.json";

        write_file(config_path, to_json(config).dump(2) + "\n");

        std::ostringstream csv;
        if (trace) {
            write_trace_csv(csv, *trace);
        } else {
            write_trace_csv(csv, IterationTrace{});
        }
        write_file(trace_path, csv.str());
        summary.artifacts = {config_path, trace_path};

        if (trace && config.store_iterates) {
            const fs::path iterates_path = config.output_dir / "iterates.csv";
            std::ostringstream iterates;
            write_iterates_csv(iterates, *trace);
            write_file(iterates_path, iterates.str());
            summary.artifacts.push_back(iterates_path);
        }
        summary.artifacts.push_back(summary_path);
        write_file(summary_path, to_json(summary).dump(2) + "\n");
    }
    return summary;
}

std::vector<Mapping> generate_affine_family(std::uint64_t seed, std::size_t dim,
                                            const std::vector<double>& singular_values, std::size_t count)
{
    if (dim == 0) throw Error(ErrorCode::ParameterOutOfRange, "family dimension must be >= 1");
    if (count == 0) throw Error(ErrorCode::ParameterOutOfRange, "family count must be >= 1");
    if (singular_values.size() != 1 && singular_values.size() != dim) {
        throw Error(ErrorCode::ParameterOutOfRange,
                    "need 1 or " + std::to_string(dim) + " singular values, got " +
                        std::to_string(singular_values.size()));
    }
    for (double s : singular_values) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw Error(ErrorCode::ParameterOutOfRange, "singular values must be finite and >= 0");
        }
    }
    std::vector<double> spectrum = singular_values.size() == 1 ? std::vector<double>(dim, singular_values[0])
                                                              : singular_values;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> offset_dist(-10.0, 10.0);
    std::vector<Mapping> family;
    family.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const Matrix u = random_orthogonal(dim, rng);
        const Matrix v = random_orthogonal(dim, rng);
        const Matrix a = u * Matrix::diagonal(spectrum) * v.transposed();
        Vector offset(dim);
        for (double& value : offset) value = offset_dist(rng);
        family.push_back(Mapping::affine(a, std::move(offset)));
    }
    return family;
}

std::string BenchScheme::label() const
{
    switch (scheme) {
    case Scheme::krasnoselskij: return "krasnoselskij(lambda=" + format_double(parameter) + ")";
    case Scheme::solve_modified: return "solve_modified(b=" + format_double(parameter) + ")";
    default: return std::string(to_string(scheme));
    }
}

std::vector<BenchRow> bench_compare(const std::vector<Mapping>& family, const std::vector<BenchScheme>& schemes,
                                    const StopRule& stop, NormKind norm_kind, std::optional<Vector> x0)
{
    if (family.empty()) throw Error(ErrorCode::ParameterOutOfRange, "bench family is empty");
    if (schemes.empty()) throw Error(ErrorCode::ParameterOutOfRange, "no schemes to compare");
    stop.validate();

    const std::size_t cells = family.size() * schemes.size();
    std::vector<BenchRow> rows(cells);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t m = cell / schemes.size();
        const BenchScheme& scheme = schemes[cell % schemes.size()];
        BenchRow& row = rows[cell];
        row.mapping_index = m;
        row.scheme = scheme.label();
        try {
            const Vector start = x0 ? *x0 : Vector(family[m].dimension());
            IterationTrace trace;
            switch (scheme.scheme) {
            case Scheme::picard: trace = picard(family[m], start, stop, norm_kind); break;
            case Scheme::krasnoselskij:
                trace = krasnoselskij(family[m], scheme.parameter, start, stop, norm_kind);
                break;
            case Scheme::solve_modified:
                trace = solve_modified(family[m], scheme.parameter, start, stop, norm_kind).trace;
                break;
            default:
                throw Error(ErrorCode::ParameterOutOfRange,
                            "bench supports picard, krasnoselskij and solve_modified only");
            }
            row.status = std::string(to_string(trace.status));
            row.iterations = trace.iterations;
            try {
                row.empirical_ratio = empirical_ratio(trace);
            } catch (const Error&) {
                row.empirical_ratio.reset();
            }
        } catch (const Error& e) {
            row.status = "error";
            row.error = e.what();
        }
    };

    const std::size_t workers =
        std::min<std::size_t>(cells, std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t cell = next++; cell < cells; cell = next++) run_cell(cell);
        });
    }
    pool.clear();
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows)
{
    out << "mapping,scheme,status,iterations,empirical_ratio,error\n";
    for (const BenchRow& row : rows) {
        out << row.mapping_index << ',' << row.scheme << ',' << row.status << ',' << row.iterations << ',';
        if (row.empirical_ratio) out << format_double(*row.empirical_ratio);
        out << ',';
        if (row.error) out << csv_quote(*row.error);
        out << '\n';
    }
}

}  // namespace enrichfp
