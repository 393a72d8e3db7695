#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "enrichfp/enrichment.hpp"
#include "enrichfp/iteration.hpp"
#include "enrichfp/mappings.hpp"

namespace enrichfp {

enum class Scheme { picard, krasnoselskij, solve_modified, verify, min_b };

std::string_view to_string(Scheme scheme) noexcept;
std::optional<Scheme> parse_scheme(std::string_view text) noexcept;

/// Optional box the iterates are projected back into after every step.
struct DomainBox {
    Vector lo;
    Vector hi;
    bool project_iterates = false;
};

/// Declarative description of one run. Build it with `parse_config`, which
/// fills defaults and validates; `to_json` gives the canonical document.
struct ExperimentConfig {
    Mapping mapping = Mapping::identity(1);
    NormKind norm = NormKind::l2;
    Scheme scheme = Scheme::solve_modified;
    std::optional<double> b;
    std::optional<double> lambda;
    ConditionKind kind = ConditionKind::modified;
    Vector x0;  ///< defaults to the origin
    StopRule stop;
    PairSampler sampler;  ///< sampler.seed mirrors `seed`
    double slack = kDefaultSlack;
    bool verify = false;
    std::filesystem::path output_dir;  ///< empty: nothing is written
    bool store_iterates = false;
    std::uint64_t seed = 42;
    std::size_t max_dim = kDefaultMaxDimension;
    std::optional<DomainBox> domain;
};

/// Throws `ConfigError` naming the offending field (as a JSON path).
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Scheme-specific checks; throws `ConfigError`.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

/// 16 hex digits of FNV-1a over the canonical JSON text.
std::string config_digest(const ExperimentConfig& config);

struct RunSummary {
    std::string digest;
    Scheme scheme = Scheme::solve_modified;
    /// converged | max_iter_reached | diverged | passed | refuted | found | infeasible | error
    std::string status;
    std::size_t iterations = 0;
    double wall_time = 0.0;  ///< seconds
    std::optional<SolveResult> solve;
    std::optional<IterationTrace> trace;  ///< picard / krasnoselskij
    std::optional<EnrichmentReport> report;
    std::optional<double> min_b;
    std::optional<double> empirical_ratio;
    std::optional<std::string> error;
    std::vector<std::filesystem::path> artifacts;

    bool succeeded() const noexcept;
};

nlohmann::json to_json(const RunSummary& summary);

/// Dispatches to the configured scheme and, when `output_dir` is set,
/// writes `config.json`, `trace.csv` and `summary.json` (plus
/// `iterates.csv` when requested). Numerical failures raised by the scheme
/// are reported in the summary with status "error"; validation failures
/// throw `ConfigError` and write failures throw `IoError`.
RunSummary run_experiment(const ExperimentConfig& config);

/// `count` affine maps whose matrices have exactly the given l2 singular
/// values (random orthogonal factors drawn from `seed`) and offsets in
/// [-10, 10]^dim. A single singular value is repeated `dim` times.
std::vector<Mapping> generate_affine_family(std::uint64_t seed, std::size_t dim,
                                            const std::vector<double>& singular_values, std::size_t count);

struct BenchScheme {
    Scheme scheme = Scheme::picard;  ///< picard, krasnoselskij or solve_modified
    double parameter = 0.0;          ///< lambda or b
    std::string label() const;
};

struct BenchRow {
    std::size_t mapping_index = 0;
    std::string scheme;
    std::string status;
    std::size_t iterations = 0;
    std::optional<double> empirical_ratio;
    std::optional<std::string> error;
};

/// Runs every scheme on every mapping from `x0` (origin by default). Cells
/// run concurrently; rows come back in mapping-major order. A failing cell
/// records its error and the rest continue.
std::vector<BenchRow> bench_compare(const std::vector<Mapping>& family, const std::vector<BenchScheme>& schemes,
                                    const StopRule& stop = {}, NormKind norm = NormKind::l2,
                                    std::optional<Vector> x0 = std::nullopt);

/// Header `mapping,scheme,status,iterations,empirical_ratio,error`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace enrichfp
