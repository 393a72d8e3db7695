// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "enrichfp/enrichment.hpp"
#include "enrichfp/error.hpp"
#include "enrichfp/harness.hpp"
#include "enrichfp/iteration.hpp"
#include "oracles.hpp"

using namespace enrichfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

char buffer[512];

template <typename... Args>
std::string fmt(const char* format, Args... args)
{
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

Mapping hundred_minus_2x()
{
    return Mapping::affine(Matrix::from_rows({{-2.0}}), Vector{100.0});
}

Mapping one_minus_b(double b)
{
    return Mapping::affine(Matrix::from_rows({{1.0 - b}}), Vector{0.0});
}

// Worst | ||b(x-y) + Tx - Ty|| - ||x-y|| | / max(1, ||x-y||) over the default sampler.
double equality_gap(const Mapping& t, double b)
{
    double worst = 0.0;
    for (const PointPair& p : PairSampler{}.draw(t.dimension())) {
        const ConditionTerms terms = condition_terms(t, b, p.x, p.y, NormKind::l2);
        worst = std::max(worst, std::abs(terms.lhs - terms.distance) / std::max(1.0, terms.distance));
    }
    return worst;
}

struct SolveRun {
    double x0 = 0.0;
    SolveResult result;
    std::size_t measured = 0;  // first n with |x_n - 100/3| <= eps
};

constexpr double kEps = 1e-9;

std::vector<SolveRun> solve_runs()
{
    std::vector<double> starts = {0.0};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    for (int i = 0; i < 20; ++i) starts.push_back(dist(rng));

    StopRule stop;
    stop.eps_abs = kEps;
    SolveOptions options;
    options.iteration.store_iterates = true;

    std::vector<SolveRun> runs;
    for (double x0 : starts) {
        SolveRun run{x0, solve_modified(hundred_minus_2x(), 3.0, Vector{x0}, stop, NormKind::l2, options), 0};
        const auto& iterates = run.result.trace.iterates;
        while (run.measured < iterates.size() && std::abs(iterates[run.measured][0] - 100.0 / 3.0) > kEps) {
            ++run.measured;
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

// 50 affine maps, dimensions 2..4, top singular value spread over [0.2, 3.0].
// The planar ones are scaled orthogonal maps, which is where the modified
// condition can hold for b > 0.
std::vector<Mapping> reduction_family()
{
    std::vector<Mapping> family;
    for (std::size_t i = 0; i < 50; ++i) {
        const double top = 0.2 + 2.8 * static_cast<double>(i) / 49.0;
        const std::size_t dim = 2 + i % 3;
        std::vector<double> spectrum = {top};
        for (std::size_t k = 1; dim > 2 && k < dim; ++k) {
            spectrum.push_back(std::max(0.2, top - 0.4 * static_cast<double>(k)));
        }
        family.push_back(generate_affine_family(1000 + i, dim, spectrum, 1).front());
    }
    return family;
}

PairSampler reduction_pairs(std::size_t index)
{
    PairSampler sampler;
    sampler.seed = 5000 + index;
    sampler.count = 1000;
    sampler.near_pair_fraction = 0.0;
    return sampler;
}

constexpr double kReductionB[] = {0.0, 0.5, 1.0, 3.0};

Outcome criterion_1()
{
    const double gap = equality_gap(hundred_minus_2x(), 3.0);
    return {gap <= 1e-10, fmt("worst scaled gap %.3g over 10000 pairs", gap)};
}

Outcome criterion_2()
{
    double worst = 0.0;
    for (double b : {0.5, 1.0, 1.5, 2.0}) worst = std::max(worst, equality_gap(one_minus_b(b), b));
    return {worst <= 1e-10, fmt("x -> (1 - b)x: worst scaled gap %.3g over 4 x 10000 pairs", worst)};
}

Outcome criterion_3(const std::vector<SolveRun>& runs)
{
    double worst_error = 0.0;
    double worst_ratio_gap = 0.0;
    std::size_t worst_iterations = 0;
    bool all_converged = true;
    for (const SolveRun& run : runs) {
        all_converged = all_converged && run.result.trace.status == IterationStatus::converged;
        worst_error = std::max(worst_error, std::abs(run.result.fixed_point[0] - 100.0 / 3.0));
        worst_iterations = std::max(worst_iterations, run.result.trace.iterations);
        double ratio = NAN;
        try {
            ratio = empirical_ratio(run.result.trace);
        } catch (const Error&) {
        }
        worst_ratio_gap = std::max(worst_ratio_gap, std::isnan(ratio) ? INFINITY : std::abs(ratio - 0.25));
    }
    const bool ok = all_converged && worst_error <= 1e-8 && worst_iterations <= 40 && worst_ratio_gap <= 1e-6;
    return {ok, fmt("%zu starts: max |x* - 100/3| = %.3g, max iterations %zu, max |ratio - 0.25| = %.3g",
                    runs.size(), worst_error, worst_iterations, worst_ratio_gap)};
}

Outcome criterion_4(const std::vector<Mapping>& family)
{
    double worst = 0.0;
    std::size_t verdict_mismatches = 0;
    std::size_t checks = 0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Mapping& t = family[i];
        const auto pairs = reduction_pairs(i).draw(t.dimension());
        for (double b : kReductionB) {
            const Mapping s = enriched_reduction(t, b);
            for (const PointPair& p : pairs) {
                const double lhs = condition_terms(t, b, p.x, p.y, NormKind::l2).lhs;
                const double reduced = distance(s(p.x), s(p.y), NormKind::l2) * (b + 1.0);
                worst = std::max(worst, std::abs(reduced - lhs) / lhs);
                ++checks;
            }
            const bool direct = verify_condition_on(t, b, ConditionKind::enriched, pairs).passed;
            const bool via_s = verify_condition_on(s, 0.0, ConditionKind::enriched, pairs).passed;
            if (direct != via_s) ++verdict_mismatches;
        }
    }
    return {worst <= 1e-12 && verdict_mismatches == 0,
            fmt("%zu pair checks: worst relative gap %.3g, verdict mismatches %zu", checks, worst,
                verdict_mismatches)};
}

Outcome criterion_5(const std::vector<SolveRun>& runs)
{
    double worst_excess = -INFINITY;
    bool all_fixed = true;
    for (const SolveRun& run : runs) {
        if (run.result.trace.status != IterationStatus::converged) continue;
        const double bound = run.result.trace.residuals.back() / run.result.lambda + 1e-12;
        worst_excess = std::max(worst_excess, run.result.residual_T - bound);
        all_fixed = all_fixed && check_fixed_point(hundred_minus_2x(), run.result.fixed_point, 1e-7).is_fixed;
    }
    return {worst_excess <= 0.0 && all_fixed,
            fmt("||T x* - x*|| - (last residual / lambda + 1e-12) <= %.3g; fixed within 1e-7: %s", worst_excess,
                all_fixed ? "all" : "not all")};
}

Outcome criterion_6()
{
    const Matrix minus_two = Matrix::from_rows({{-2.0}});
    const Matrix two_identity = 2.0 * Matrix::identity(2);
    const auto modified = min_b_affine(minus_two, ConditionKind::modified, NormKind::l2);
    const auto enriched = min_b_affine(minus_two, ConditionKind::enriched, NormKind::l2);
    const auto none = min_b_affine(two_identity, ConditionKind::modified, NormKind::l2);
    const auto grid_modified = oracle::grid_min_b(minus_two, ConditionKind::modified, NormKind::l2);
    const auto grid_enriched = oracle::grid_min_b(minus_two, ConditionKind::enriched, NormKind::l2);
    const auto grid_none = oracle::grid_min_b(two_identity, ConditionKind::modified, NormKind::l2);

    const bool ok = modified && enriched && !none && grid_modified && grid_enriched && !grid_none &&
                    std::abs(*modified - 1.0) <= 1e-6 && std::abs(*enriched - 0.5) <= 1e-6 &&
                    std::abs(*modified - *grid_modified) <= 1e-4 && std::abs(*enriched - *grid_enriched) <= 1e-4;
    return {ok, fmt("[[-2]] modified %.10g (grid %.4f), enriched %.10g (grid %.4f), 2I modified %s (grid %s)",
                    modified.value_or(NAN), grid_modified.value_or(NAN), enriched.value_or(NAN),
                    grid_enriched.value_or(NAN), none ? "found" : "empty", grid_none ? "found" : "empty")};
}

Outcome criterion_7(const std::vector<Mapping>& family)
{
    std::size_t traces = 0;
    std::size_t violations = 0;
    double worst = 0.0;
    std::mt19937_64 rng(77);
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Mapping& t = family[i];
        const auto pairs = reduction_pairs(i).draw(t.dimension());
        for (double b : kReductionB) {
            if (b == 0.0 || !verify_condition_on(t, b, ConditionKind::modified, pairs).passed) continue;
            const double lambda = 1.0 / (b + 1.0);
            const auto trace = krasnoselskij(t, lambda, oracle::random_vector(rng, t.dimension(), 100.0));
            ++traces;
            for (std::size_t n = 1; n < trace.residuals.size(); ++n) {
                const double ratio = trace.residuals[n] / (lambda * trace.residuals[n - 1]);
                worst = std::max(worst, ratio);
                if (trace.residuals[n] > lambda * trace.residuals[n - 1] * (1.0 + 1e-10)) ++violations;
            }
        }
    }
    return {traces > 0 && violations == 0,
            fmt("%zu qualifying traces: worst residual_{n+1} / (lambda residual_n) = %.6f, violations %zu", traces,
                worst, violations)};
}

Outcome criterion_8()
{
    const auto diverging = picard(hundred_minus_2x(), Vector{0.0});
    const auto turning = krasnoselskij(Mapping::rotation(std::numbers::pi / 2), 0.5, Vector{1.0, 0.0});
    const double expected = oracle::svd_spectral_norm(Matrix::from_rows({{0.5, -0.5}, {0.5, 0.5}}));
    double ratio = NAN;
    try {
        ratio = empirical_ratio(turning);
    } catch (const Error&) {
    }
    const bool ok = diverging.status == IterationStatus::diverged && diverging.iterations <= 200 &&
                    turning.status == IterationStatus::converged && norm(turning.final, NormKind::l2) <= 1e-8 &&
                    std::abs(ratio - expected) <= 1e-3;
    return {ok, fmt("picard %s after %zu steps; quarter turn %s, |x| = %.3g, ratio %.6f vs %.6f",
                    std::string(to_string(diverging.status)).c_str(), diverging.iterations,
                    std::string(to_string(turning.status)).c_str(), norm(turning.final, NormKind::l2), ratio,
                    expected)};
}

Outcome criterion_9(const std::vector<SolveRun>& runs)
{
    std::size_t violations = 0;
    std::size_t worst_slack = SIZE_MAX;
    for (const SolveRun& run : runs) {
        const double d1 = run.result.trace.residuals.front();
        const std::size_t bound = apriori_iterations(0.25, d1, kEps);
        if (run.measured > bound || run.measured >= run.result.trace.iterates.size()) ++violations;
        worst_slack = std::min(worst_slack, bound - std::min(bound, run.measured));
    }
    const std::size_t spot = apriori_iterations(0.25, 25.0, 1e-9);
    const std::size_t oracle_spot = oracle::closed_form_apriori(0.25, 25.0, 1e-9);
    return {violations == 0 && spot == oracle_spot,
            fmt("bound >= measured on %zu runs (min margin %zu, violations %zu); spot value %zu, oracle %zu",
                runs.size(), worst_slack, violations, spot, oracle_spot)};
}

Outcome criterion_10()
{
    const fs::path root = fs::path(ENRICHFP_TEST_TMPDIR);
    nlohmann::json doc = {{"mapping", {{"kind", "rotation"}, {"theta", 1.0}}},
                          {"scheme", "krasnoselskij"},
                          {"lambda", 0.3},
                          {"x0", {12.5, -7.25}},
                          {"seed", 99}};
    std::vector<std::string> traces;
    for (const char* name : {"first", "second"}) {
        fs::remove_all(root / name);
        doc["output_dir"] = (root / name).string();
        run_experiment(parse_config(doc));
        std::ifstream in(root / name / "trace.csv", std::ios::binary);
        std::stringstream text;
        text << in.rdbuf();
        traces.push_back(text.str());
    }
    const bool ok = !traces[0].empty() && traces[0] == traces[1];
    return {ok, fmt("two runs of one config: %zu bytes each, identical: %s", traces[0].size(), ok ? "yes" : "no")};
}

}  // namespace

int main()
{
    const auto started = std::chrono::steady_clock::now();
    const auto runs = solve_runs();
    const auto family = reduction_family();

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"x -> 100 - 2x equality at b = 3", criterion_1},
        {"scaled map equality for b in {0.5, 1, 1.5, 2}", criterion_2},
        {"solver reaches 100/3 from any start at rate 1/4", [&] { return criterion_3(runs); }},
        {"reduction identity on a generated family", [&] { return criterion_4(family); }},
        {"fixed point transfer from averaged map to T", [&] { return criterion_5(runs); }},
        {"min_b_affine exact values vs grid scan", criterion_6},
        {"contraction decay of residuals", [&] { return criterion_7(family); }},
        {"divergence and rotation diagnostics", criterion_8},
        {"a-priori bound dominates measured iterations", [&] { return criterion_9(runs); }},
        {"byte-identical trace across repeated runs", criterion_10},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].second();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        if (!outcome.passed) ++failures;
        std::printf("%s  %2zu  %s: %s\n", outcome.passed ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    outcome.detail.c_str());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::printf("%d of %zu criteria failed, %.2f s\n", failures, criteria.size(), seconds);
    return failures == 0 ? 0 : 1;
}
