// enrichfp command line: verify, solve, iterate, min-b, bench, gen.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "enrichfp/error.hpp"
#include "enrichfp/harness.hpp"
#include "enrichfp/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace enrichfp;

namespace {

enum ExitCode : int { kSuccess = 0, kSchemeFailure = 1, kConfigFailure = 2, kIoFailure = 3 };

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> norm;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::string> mapping;
};

struct RunFlags {
    std::optional<double> b;
    std::optional<double> lambda;
    std::optional<std::string> x0;
    std::optional<std::string> kind;
    std::optional<std::string> scheme;
    bool verify = false;
};

struct FamilyFlags {
    std::optional<std::size_t> dim;
    std::optional<std::string> spectrum;
    std::optional<std::size_t> count;
    std::vector<std::string> schemes;
};

void add_common(CLI::App* cmd, CommonFlags& f)
{
    cmd->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--norm", f.norm, "vector norm")->check(CLI::IsMember({"l1", "l2", "linf"}));
    cmd->add_option("--tol", f.tol, "stop tolerance (sampling slack for verify)");
    cmd->add_option("--max-iter", f.max_iter, "iteration budget");
    cmd->add_option("--mapping", f.mapping, "mapping as inline JSON, or @file");
}

json read_json_file(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what(), path.string());
    }
}

json parse_inline(const std::string& text, const std::string& flag)
{
    if (!text.empty() && text.front() == '@') return read_json_file(text.substr(1));
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, "invalid JSON in " + flag + ": " + e.what(), flag);
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        double v = 0.0;
        const char* first = item.data();
        const char* last = item.data() + item.size();
        while (first != last && *first == ' ') ++first;
        auto [end, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || end != last) {
            throw Error(ErrorCode::ConfigError, "cannot parse \"" + item + "\" as a number", flag);
        }
        values.push_back(v);
    }
    if (values.empty()) throw Error(ErrorCode::ConfigError, "empty list", flag);
    return values;
}

json base_document(const CommonFlags& f)
{
    json doc = f.config.empty() ? json::object() : read_json_file(f.config);
    if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object", "/");
    if (f.mapping) doc["mapping"] = parse_inline(*f.mapping, "--mapping");
    if (!f.out.empty()) doc["output_dir"] = f.out;
    if (f.seed) doc["seed"] = *f.seed;
    if (f.norm) doc["norm"] = *f.norm;
    if (f.max_iter) doc["stop"]["max_iter"] = *f.max_iter;
    return doc;
}

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::IoError: return kIoFailure;
    case ErrorCode::ConfigError:
    case ErrorCode::SchemaError:
    case ErrorCode::InvariantViolation:
    case ErrorCode::ParameterOutOfRange:
    case ErrorCode::DimensionMismatch: return kConfigFailure;
    default: return kSchemeFailure;
    }
}

int run_scheme(json doc, Scheme scheme, const CommonFlags& common, const RunFlags& run)
{
    doc["scheme"] = std::string(to_string(scheme));
    if (run.b) doc["b"] = *run.b;
    if (run.lambda) doc["lambda"] = *run.lambda;
    if (run.kind) doc["kind"] = *run.kind;
    if (run.x0) doc["x0"] = parse_list(*run.x0, "--x0");
    if (run.verify) doc["verify"] = true;
    if (common.tol) {
        if (scheme == Scheme::verify) {
            doc["slack"] = *common.tol;
        } else {
            doc["stop"]["eps_abs"] = *common.tol;
        }
    }

    const ExperimentConfig config = parse_config(doc);
    const RunSummary summary = run_experiment(config);
    std::cout << to_json(summary).dump(2) << '\n';
    if (summary.error) std::cerr << "enrichfp: " << *summary.error << '\n';
    return summary.succeeded() ? kSuccess : kSchemeFailure;
}

std::vector<BenchScheme> parse_bench_schemes(const std::vector<std::string>& items)
{
    std::vector<BenchScheme> schemes;
    for (const std::string& item : items) {
        const auto colon = item.find(':');
        const std::string name = item.substr(0, colon);
        const auto scheme = parse_scheme(name);
        if (!scheme || *scheme == Scheme::verify || *scheme == Scheme::min_b) {
            throw Error(ErrorCode::ConfigError, "bench scheme must be picard, krasnoselskij or solve_modified",
                        "--scheme");
        }
        BenchScheme entry{*scheme, 0.0};
        if (*scheme != Scheme::picard) {
            if (colon == std::string::npos) {
                throw Error(ErrorCode::ConfigError, name + " needs a parameter, e.g. " + name + ":0.5", "--scheme");
            }
            entry.parameter = parse_list(item.substr(colon + 1), "--scheme").front();
        }
        schemes.push_back(entry);
    }
    return schemes;
}

struct FamilySpec {
    std::uint64_t seed = 42;
    std::size_t dim = 2;
    std::vector<double> spectrum{0.5};
    std::size_t count = 10;
};

FamilySpec family_spec(const json& doc, const CommonFlags& common, const FamilyFlags& family)
{
    FamilySpec spec;
    try {
        if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("dim")) spec.dim = doc.at("dim").get<std::size_t>();
        if (doc.contains("singular_values")) spec.spectrum = doc.at("singular_values").get<std::vector<double>>();
        if (doc.contains("count")) spec.count = doc.at("count").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, e.what(), "/");
    }
    if (common.seed) spec.seed = *common.seed;
    if (family.dim) spec.dim = *family.dim;
    if (family.spectrum) spec.spectrum = parse_list(*family.spectrum, "--spectrum");
    if (family.count) spec.count = *family.count;
    return spec;
}

void write_output(const std::string& out, const std::string& file_name, const std::string& text)
{
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out + ": " + ec.message());
    const fs::path path = fs::path(out) / file_name;
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

int run_bench(const CommonFlags& common, const FamilyFlags& family)
{
    const json doc = common.config.empty() ? json::object() : read_json_file(common.config);
    const FamilySpec spec = family_spec(doc, common, family);

    std::vector<std::string> names = family.schemes;
    if (names.empty() && doc.contains("schemes")) names = doc.at("schemes").get<std::vector<std::string>>();
    if (names.empty()) names = {"picard", "krasnoselskij:0.5"};

    StopRule stop;
    if (common.tol) stop.eps_abs = *common.tol;
    if (common.max_iter) stop.max_iter = *common.max_iter;
    const NormKind norm = parse_norm_kind(common.norm.value_or("l2")).value_or(NormKind::l2);

    const auto mappings = generate_affine_family(spec.seed, spec.dim, spec.spectrum, spec.count);
    const auto rows = bench_compare(mappings, parse_bench_schemes(names), stop, norm);
    std::ostringstream csv;
    write_bench_csv(csv, rows);
    write_output(common.out, "bench.csv", csv.str());
    return kSuccess;
}

int run_gen(const CommonFlags& common, const FamilyFlags& family)
{
    const json doc = common.config.empty() ? json::object() : read_json_file(common.config);
    const FamilySpec spec = family_spec(doc, common, family);
    json out = json::array();
    for (const Mapping& m : generate_affine_family(spec.seed, spec.dim, spec.spectrum, spec.count)) {
        out.push_back(to_json(m));
    }
    write_output(common.out, "family.json", out.dump(2) + "\n");
    return kSuccess;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Enriched nonexpansive mappings: verification, fixed points and benchmarks"};
    app.require_subcommand(1);

    CommonFlags common;
    RunFlags run;
    FamilyFlags family;

    auto* verify = app.add_subcommand("verify", "sample the enriched or modified condition");
    add_common(verify, common);
    verify->add_option("--b", run.b, "enrichment constant");
    verify->add_option("--kind", run.kind, "condition")->check(CLI::IsMember({"enriched", "modified"}));

    auto* solve = app.add_subcommand("solve", "fixed point of a b-modified map");
    add_common(solve, common);
    solve->add_option("--b", run.b, "enrichment constant, > 0");
    solve->add_option("--x0", run.x0, "initial point, comma separated");
    solve->add_flag("--verify", run.verify, "sample the modified condition first");

    auto* iterate = app.add_subcommand("iterate", "plain Picard or Krasnoselskij run");
    add_common(iterate, common);
    iterate->add_option("--scheme", run.scheme, "iteration scheme")
        ->check(CLI::IsMember({"picard", "krasnoselskij"}));
    iterate->add_option("--lambda", run.lambda, "averaging weight in (0, 1)");
    iterate->add_option("--x0", run.x0, "initial point, comma separated");

    auto* min_b = app.add_subcommand("min-b", "least b for an affine map");
    add_common(min_b, common);
    min_b->add_option("--kind", run.kind, "condition")->check(CLI::IsMember({"enriched", "modified"}));

    auto* bench = app.add_subcommand("bench", "schemes against a generated affine family");
    add_common(bench, common);
    bench->add_option("--dim", family.dim, "dimension");
    bench->add_option("--spectrum", family.spectrum, "singular values, comma separated");
    bench->add_option("--count", family.count, "number of mappings");
    bench->add_option("--scheme", family.schemes, "picard | krasnoselskij:LAMBDA | solve_modified:B");

    auto* gen = app.add_subcommand("gen", "print a generated affine family as JSON");
    add_common(gen, common);
    gen->add_option("--dim", family.dim, "dimension");
    gen->add_option("--spectrum", family.spectrum, "singular values, comma separated");
    gen->add_option("--count", family.count, "number of mappings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kSuccess : kConfigFailure;
    }

    try {
        if (verify->parsed()) return run_scheme(base_document(common), Scheme::verify, common, run);
        if (solve->parsed()) return run_scheme(base_document(common), Scheme::solve_modified, common, run);
        if (min_b->parsed()) return run_scheme(base_document(common), Scheme::min_b, common, run);
        if (iterate->parsed()) {
            json doc = base_document(common);
            Scheme scheme = Scheme::picard;
            if (run.scheme) {
                scheme = *parse_scheme(*run.scheme);
            } else if (doc.contains("scheme") && doc["scheme"] == "krasnoselskij") {
                scheme = Scheme::krasnoselskij;
            } else if (run.lambda) {
                scheme = Scheme::krasnoselskij;
            }
            return run_scheme(std::move(doc), scheme, common, run);
        }
        if (bench->parsed()) return run_bench(common, family);
        if (gen->parsed()) return run_gen(common, family);
    } catch (const Error& e) {
        std::cerr << "enrichfp: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const json::exception& e) {
        std::cerr << "enrichfp: " << e.what() << '\n';
        return kConfigFailure;
    }
    return kConfigFailure;
}
