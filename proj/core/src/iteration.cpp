#include "enrichfp/iteration.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "enrichfp/error.hpp"

namespace enrichfp {

void StopRule::validate() const
{
    if (!(eps_abs > 0.0) || !std::isfinite(eps_abs)) {
        throw Error(ErrorCode::ParameterOutOfRange, "stop.eps_abs must be finite and > 0");
    }
    if (!(eps_rel >= 0.0) || !std::isfinite(eps_rel)) {
        throw Error(ErrorCode::ParameterOutOfRange, "stop.eps_rel must be finite and >= 0");
    }
    if (max_iter == 0) {
        throw Error(ErrorCode::ParameterOutOfRange, "stop.max_iter must be >= 1");
    }
    if (!(norm_cap > 0.0) || !std::isfinite(norm_cap)) {
        throw Error(ErrorCode::ParameterOutOfRange, "stop.norm_cap must be finite and > 0");
    }
}

std::string_view to_string(IterationStatus status) noexcept
{
    switch (status) {
    case IterationStatus::converged: return "converged";
    case IterationStatus::max_iter_reached: return "max_iter_reached";
    case IterationStatus::diverged: return "diverged";
    }
    return "unknown";
}

IterationTrace picard(const Mapping& map, const Vector& x0, const StopRule& stop, NormKind norm_kind,
                      const IterationOptions& options)
{
    stop.validate();
    if (x0.size() != map.dimension()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "x0 has dimension " + std::to_string(x0.size()) + ", mapping expects " +
                        std::to_string(map.dimension()));
    }

    IterationTrace trace;
    trace.norm_kind = norm_kind;
    trace.residuals.reserve(std::min<std::size_t>(stop.max_iter, 1024));
    trace.ratios.reserve(trace.residuals.capacity());
    if (options.store_iterates) {
        trace.iterates.push_back(x0);
    }

    if (options.projection && options.projection->dimension() != map.dimension()) {
        throw Error(ErrorCode::DimensionMismatch, "projection dimension does not match the mapping");
    }

    Vector x = x0;
    std::size_t growth_streak = 0;
    trace.status = IterationStatus::max_iter_reached;

    for (std::size_t n = 0; n < stop.max_iter; ++n) {
        Vector next;
        try {
            next = evaluate(map, x);
            if (options.projection) {
                next = evaluate(*options.projection, next);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonFiniteResult) throw;
            trace.status = IterationStatus::diverged;
            break;
        }

        const double residual = distance(next, x, norm_kind);
        if (!std::isfinite(residual)) {
            trace.status = IterationStatus::diverged;
            break;
        }
        if (trace.residuals.empty() || trace.residuals.back() == 0.0) {
            trace.ratios.emplace_back(std::nullopt);
        } else {
            trace.ratios.emplace_back(residual / trace.residuals.back());
        }
        if (!trace.residuals.empty() && residual > trace.residuals.back()) {
            ++growth_streak;
        } else {
            growth_streak = 0;
        }
        trace.residuals.push_back(residual);
        x = std::move(next);
        ++trace.iterations;
        if (options.store_iterates) {
            trace.iterates.push_back(x);
        }

        const double x_norm = norm(x, norm_kind);
        if (residual <= stop.eps_abs + stop.eps_rel * x_norm) {
            trace.status = IterationStatus::converged;
            break;
        }
        if (x_norm > stop.norm_cap ||
            (trace.iterations > kDivergenceWarmup && growth_streak >= kDivergenceWindow)) {
            trace.status = IterationStatus::diverged;
            break;
        }
    }

    trace.final = std::move(x);
    return trace;
}

IterationTrace krasnoselskij(const Mapping& map, double lambda, const Vector& x0, const StopRule& stop,
                             NormKind norm_kind, const IterationOptions& options)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange,
                    "Krasnoselskij weight lambda must lie in (0, 1), got " + std::to_string(lambda));
    }
    return picard(averaged(map, lambda), x0, stop, norm_kind, options);
}

SolveResult solve_modified(const Mapping& map, double b, const Vector& x0, const StopRule& stop,
                           NormKind norm_kind, const SolveOptions& options)
{
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw Error(ErrorCode::ParameterOutOfRange,
                    "solve_modified needs finite b > 0 (b = 0 is the merely nonexpansive case), got " +
                        std::to_string(b));
    }

    SolveResult result;
    result.lambda = 1.0 / (b + 1.0);
    if (options.verify) {
        result.condition_verified =
            verify_condition(map, b, ConditionKind::modified, options.sampler, options.slack, norm_kind);
    }
    result.trace = krasnoselskij(map, result.lambda, x0, stop, norm_kind, options.iteration);
    result.fixed_point = result.trace.final;
    try {
        result.residual_T = check_fixed_point(map, result.fixed_point, 0.0, norm_kind).residual;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFiniteResult) throw;
        result.residual_T = std::numeric_limits<double>::infinity();
    }
    return result;
}

std::size_t apriori_iterations(double lambda, double d1, double eps)
{
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "lambda must lie in (0, 1)");
    }
    if (!(d1 >= 0.0) || !std::isfinite(d1) || !(eps > 0.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "need d1 >= 0 and eps > 0");
    }
    if (d1 == 0.0) {
        return 0;
    }

    const double target = eps * (1.0 - lambda) / d1;
    if (target >= 1.0) {
        return 0;
    }
    auto bound = [&](double n) { return std::pow(lambda, n) * d1 / (1.0 - lambda); };

    // Closed form, then step to the least n that satisfies the bound in floating point.
    double n = std::ceil(std::log(target) / std::log(lambda));
    n = std::max(n, 0.0);
    while (n > 0.0 && bound(n - 1.0) <= eps) n -= 1.0;
    while (bound(n) > eps) n += 1.0;
    return static_cast<std::size_t>(n);
}

FixedPointCheck check_fixed_point(const Mapping& map, const Vector& x, double tol, NormKind norm_kind)
{
    const double residual = distance(evaluate(map, x), x, norm_kind);
    return {residual <= tol, residual};
}

double empirical_ratio(const IterationTrace& trace)
{
    const double floor =
        100.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, norm(trace.final, trace.norm_kind));

    std::size_t usable = 0;
    for (double r : trace.residuals) {
        if (r > floor) ++usable;
    }
    if (usable < 3) {
        throw Error(ErrorCode::InsufficientData,
                    "need at least 3 residuals above the rounding floor, have " + std::to_string(usable));
    }

    double log_sum = 0.0;
    std::size_t taken = 0;
    for (std::size_t n = trace.residuals.size(); n-- > 1 && taken < 10;) {
        const double current = trace.residuals[n];
        const double previous = trace.residuals[n - 1];
        if (current > floor && previous > floor) {
            log_sum += std::log(current / previous);
            ++taken;
        }
    }
    if (taken == 0) {
        throw Error(ErrorCode::InsufficientData, "no consecutive residual pair above the rounding floor");
    }
    return std::exp(log_sum / static_cast<double>(taken));
}

}  // namespace enrichfp
