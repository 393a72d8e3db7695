#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "enrichfp/enrichment.hpp"
#include "enrichfp/mappings.hpp"
#include "enrichfp/spaces.hpp"

namespace enrichfp {

/// Termination test ||x_{n+1} - x_n|| <= eps_abs + eps_rel ||x_{n+1}||,
/// with a divergence guard on ||x_n||.
struct StopRule {
    double eps_abs = 1e-9;
    double eps_rel = 0.0;
    std::size_t max_iter = 10'000;
    double norm_cap = 1e12;

    /// Throws `ParameterOutOfRange` for non-finite or out-of-range fields.
    void validate() const;
};

enum class IterationStatus { converged, max_iter_reached, diverged };

std::string_view to_string(IterationStatus status) noexcept;

/// Divergence is also declared when the residual grew on this many
/// consecutive steps, once past `kDivergenceWarmup` iterations.
inline constexpr std::size_t kDivergenceWindow = 20;
inline constexpr std::size_t kDivergenceWarmup = 50;

struct IterationTrace {
    /// residuals[n] = ||x_{n+1} - x_n||
    std::vector<double> residuals;
    /// ratios[n] = residuals[n] / residuals[n-1]; empty at n = 0 and when
    /// the previous residual is zero.
    std::vector<std::optional<double>> ratios;
    IterationStatus status = IterationStatus::max_iter_reached;
    Vector final;
    std::size_t iterations = 0;
    NormKind norm_kind = NormKind::l2;
    /// x_0, x_1, ..., filled only when requested.
    std::vector<Vector> iterates;
};

struct IterationOptions {
    bool store_iterates = false;
    /// Applied after every step, e.g. a box projection onto the domain.
    std::optional<Mapping> projection;
};

/// x_{n+1} = T(x_n). A non-finite evaluation ends the run as `diverged`
/// with `final` holding the last finite iterate.
IterationTrace picard(const Mapping& map, const Vector& x0, const StopRule& stop = {},
                      NormKind norm = NormKind::l2, const IterationOptions& options = {});

/// x_{n+1} = (1 - lambda) x_n + lambda T(x_n), for 0 < lambda < 1. Runs
/// `picard` on `averaged(map, lambda)`, so the two produce identical traces.
IterationTrace krasnoselskij(const Mapping& map, double lambda, const Vector& x0, const StopRule& stop = {},
                             NormKind norm = NormKind::l2, const IterationOptions& options = {});

struct SolveResult {
    Vector fixed_point;
    double lambda = 0.0;
    IterationTrace trace;
    /// ||T(x*) - x*||, recomputed from `fixed_point`.
    double residual_T = 0.0;
    std::optional<EnrichmentReport> condition_verified;
};

struct SolveOptions {
    bool verify = false;
    PairSampler sampler{};
    double slack = kDefaultSlack;
    IterationOptions iteration{};
};

/// Fixed point of a b-modified enriched nonexpansive T, b > 0.
///
/// With lambda = 1/(b+1) the averaged map is a lambda-contraction, so the
/// Krasnoselskij sequence converges from any x0 to the unique fixed point of
/// T. When `verify` is set the modified condition is sampled first; a failed
/// report is attached but the iteration still runs. Throws
/// `ParameterOutOfRange` for b <= 0.
SolveResult solve_modified(const Mapping& map, double b, const Vector& x0, const StopRule& stop = {},
                           NormKind norm = NormKind::l2, const SolveOptions& options = {});

/// Least n with lambda^n d1 / (1 - lambda) <= eps; 0 when d1 = 0.
std::size_t apriori_iterations(double lambda, double d1, double eps);

struct FixedPointCheck {
    bool is_fixed = false;
    double residual = 0.0;
};

/// residual = ||T(x) - x||; is_fixed iff residual <= tol.
FixedPointCheck check_fixed_point(const Mapping& map, const Vector& x, double tol, NormKind norm = NormKind::l2);

/// Geometric mean of the last min(10, available) residual ratios whose
/// residuals both lie above the rounding floor 100 eps_mach max(1, ||final||).
/// Throws `InsufficientData` when fewer than three residuals clear the floor.
double empirical_ratio(const IterationTrace& trace);

}  // namespace enrichfp
