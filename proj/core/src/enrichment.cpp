#include "enrichfp/enrichment.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "enrichfp/error.hpp"

namespace enrichfp {

namespace {

void require_nonnegative_b(double b)
{
    if (!(b >= 0.0) || !std::isfinite(b)) {
        throw Error(ErrorCode::ParameterOutOfRange, "b must be finite and >= 0, got " + std::to_string(b));
    }
}

}  // namespace

std::string_view to_string(ConditionKind kind) noexcept
{
    return kind == ConditionKind::enriched ? "enriched" : "modified";
}

std::optional<ConditionKind> parse_condition_kind(std::string_view text) noexcept
{
    if (text == "enriched") return ConditionKind::enriched;
    if (text == "modified") return ConditionKind::modified;
    return std::nullopt;
}

void PairSampler::validate() const
{
    if (count == 0) {
        throw Error(ErrorCode::ParameterOutOfRange, "sampler count must be >= 1");
    }
    if (!(box_radius > 0.0) || !std::isfinite(box_radius)) {
        throw Error(ErrorCode::ParameterOutOfRange, "sampler box_radius must be finite and > 0");
    }
    if (!(near_pair_fraction >= 0.0 && near_pair_fraction <= 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "sampler near_pair_fraction must lie in [0, 1]");
    }
}

std::vector<PointPair> PairSampler::draw(std::size_t dim) const
{
    validate();
    if (dim == 0) {
        throw Error(ErrorCode::ParameterOutOfRange, "sampler dimension must be >= 1");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(-box_radius, box_radius);
    std::uniform_real_distribution<double> near_length(1e-4 * box_radius, 1e-3 * box_radius);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double min_separation = 1e-14 * box_radius;

    auto uniform_point = [&] {
        Vector p(dim);
        for (double& v : p) v = coord(rng);
        return p;
    };

    std::vector<PointPair> pairs;
    pairs.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // Spreads near pairs evenly through the sequence.
        const bool near = std::floor(static_cast<double>(i + 1) * near_pair_fraction) >
                          std::floor(static_cast<double>(i) * near_pair_fraction);
        for (;;) {
            Vector x = uniform_point();
            Vector y;
            if (near) {
                Vector direction(dim);
                for (double& v : direction) v = gauss(rng);
                const double len = norm(direction, NormKind::l2);
                if (len == 0.0) continue;
                direction *= near_length(rng) / len;
                y = x + direction;
            } else {
                y = uniform_point();
            }
            if (distance(x, y, NormKind::l2) < min_separation) continue;
            pairs.push_back({std::move(x), std::move(y)});
            break;
        }
    }
    return pairs;
}

ConditionTerms condition_terms(const Mapping& map, double b, const Vector& x, const Vector& y,
                               NormKind norm_kind)
{
    const Vector diff = x - y;
    Vector lhs = evaluate(map, x) - evaluate(map, y);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        lhs[i] += b * diff[i];
    }
    return {norm(lhs, norm_kind), norm(diff, norm_kind)};
}

Mapping averaged(const Mapping& map, double lambda)
{
    if (!(lambda > 0.0 && lambda <= 1.0)) {
        throw Error(ErrorCode::ParameterOutOfRange,
                    "averaging weight lambda must lie in (0, 1], got " + std::to_string(lambda));
    }
    return Mapping::linear_combination(1.0 - lambda, lambda, map);
}

Mapping enriched_reduction(const Mapping& map, double b)
{
    require_nonnegative_b(b);
    return averaged(map, 1.0 / (b + 1.0));
}

Mapping modified_shift(const Mapping& map, double b)
{
    require_nonnegative_b(b);
    return Mapping::linear_combination(b, 1.0, map);
}

double shift_relation_residual(const Mapping& map, double b, const Vector& x, NormKind norm_kind)
{
    require_nonnegative_b(b);
    return norm(evaluate(map, x) - (1.0 - b) * x, norm_kind);
}

EnrichmentReport verify_condition_on(const Mapping& map, double b, ConditionKind kind,
                                     std::span<const PointPair> pairs, double slack, NormKind norm_kind)
{
    require_nonnegative_b(b);
    if (!(slack >= 0.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "slack must be >= 0");
    }
    if (pairs.empty()) {
        throw Error(ErrorCode::ParameterOutOfRange, "no pairs to test");
    }

    EnrichmentReport report;
    report.kind = kind;
    report.b = b;
    report.norm = norm_kind;
    report.slack = slack;
    report.max_ratio = -1.0;

    for (const PointPair& pair : pairs) {
        const double ratio = condition_terms(map, b, pair.x, pair.y, norm_kind).ratio(kind, b);
        ++report.pairs_tested;
        if (ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.witness = pair;
        }
    }
    report.passed = report.max_ratio <= 1.0 + slack;
    return report;
}

EnrichmentReport verify_condition(const Mapping& map, double b, ConditionKind kind,
                                  const PairSampler& sampler, double slack, NormKind norm_kind)
{
    require_nonnegative_b(b);
    const auto pairs = sampler.draw(map.dimension());
    return verify_condition_on(map, b, kind, pairs, slack, norm_kind);
}

namespace {

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double symmetric_max_eigenvalue(Matrix s)
{
    const std::size_t d = s.dim();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = 0; q < d; ++q) {
                total += s(p, q) * s(p, q);
                if (p != q) off += s(p, q) * s(p, q);
            }
        }
        if (off <= 1e-30 * total) break;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                if (s(p, q) == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double skp = s(k, p);
                    const double skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double spk = s(p, k);
                    const double sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
            }
        }
    }
    double best = s(0, 0);
    for (std::size_t i = 1; i < d; ++i) best = std::max(best, s(i, i));
    return best;
}

// Evaluates g(b) = ||bI + A|| - rhs(b) without cancelling the O(b) parts,
// so the sign of g stays reliable for large b.
class FeasibilityGap {
public:
    FeasibilityGap(const Matrix& a, ConditionKind kind, NormKind norm_kind)
        : a_(a), kind_(kind), norm_(norm_kind), sym_(a + a.transposed()), gram_(a.transposed() * a)
    {
        double scale = 0.0;
        for (std::size_t r = 0; r < a.dim(); ++r)
            for (double v : a.row(r)) scale = std::max(scale, std::abs(v));
        tolerance_ = 1e-12 * std::max(1.0, scale * static_cast<double>(a.dim()));
    }

    double tolerance() const noexcept { return tolerance_; }

    double operator()(double b) const
    {
        if (norm_ == NormKind::l2) {
            // ||bI + A||^2 = b^2 + lambda_max(b (A + A^T) + A^T A)
            const double lambda = symmetric_max_eigenvalue(b * sym_ + gram_);
            const double root = std::sqrt(std::max(0.0, b * b + lambda));
            if (kind_ == ConditionKind::modified) return root - 1.0;
            return (root + b > 0.0 ? lambda / (root + b) : 0.0) - 1.0;
        }
        // Max over columns (l1) or rows (linf) of |b + a_jj| - b_shift + off-diagonal sum.
        const double shift = kind_ == ConditionKind::enriched ? b : 0.0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a_.dim(); ++j) {
            double off = 0.0;
            for (std::size_t i = 0; i < a_.dim(); ++i) {
                if (i == j) continue;
                off += std::abs(norm_ == NormKind::l1 ? a_(i, j) : a_(j, i));
            }
            const double diag = a_(j, j);
            const double lead = b + diag >= 0.0 ? (b - shift) + diag : (-b - shift) - diag;
            best = std::max(best, lead + off);
        }
        return best - 1.0;
    }

    /// lim g(b) as b -> infinity for the enriched kind: the logarithmic norm of A minus one.
    double enriched_limit() const
    {
        if (norm_ == NormKind::l2) return 0.5 * symmetric_max_eigenvalue(sym_) - 1.0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a_.dim(); ++j) {
            double off = 0.0;
            for (std::size_t i = 0; i < a_.dim(); ++i) {
                if (i != j) off += std::abs(norm_ == NormKind::l1 ? a_(i, j) : a_(j, i));
            }
            best = std::max(best, a_(j, j) + off);
        }
        return best - 1.0;
    }

private:
    const Matrix& a_;
    ConditionKind kind_;
    NormKind norm_;
    Matrix sym_;
    Matrix gram_;
    double tolerance_ = 0.0;
};

}  // namespace

std::optional<double> min_b_affine(const Matrix& a, ConditionKind kind, NormKind norm_kind,
                                   const MinBOptions& options)
{
    if (a.dim() == 0 || !a.all_finite()) {
        throw Error(ErrorCode::ParameterOutOfRange, "matrix must be non-empty and finite");
    }
    if (!(options.b_cap > 0.0) || !(options.tolerance > 0.0)) {
        throw Error(ErrorCode::ParameterOutOfRange, "min-b search needs b_cap > 0 and tolerance > 0");
    }

    const FeasibilityGap g(a, kind, norm_kind);
    auto feasible_value = [&](double value) { return value <= g.tolerance(); };
    auto feasible = [&](double b) { return feasible_value(g(b)); };

    // Left end of the feasible interval, given infeasible `lo` and feasible `hi`.
    auto bisect = [&](double lo, double hi) {
        while (hi - lo > options.tolerance) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? hi : lo) = mid;
        }
        return hi;
    };

    double prev_g = g(0.0);
    if (feasible_value(prev_g)) {
        return 0.0;
    }
    // For the enriched kind g is non-increasing and tends to this limit.
    if (kind == ConditionKind::enriched && !feasible_value(g.enriched_limit())) {
        return std::nullopt;
    }

    double prev_prev_b = 0.0;
    double prev_b = 0.0;
    double b = std::min(1.0, options.b_cap);
    for (;;) {
        const double gb = g(b);
        if (feasible_value(gb)) {
            return bisect(prev_b, b);
        }
        if (gb >= prev_g) {
            // g stopped decreasing, so its minimiser lies in [prev_prev_b, b].
            constexpr double inv_phi = 0.6180339887498949;
            double lo = prev_prev_b;
            double hi = b;
            double c = hi - inv_phi * (hi - lo);
            double d = lo + inv_phi * (hi - lo);
            double gc = g(c);
            double gd = g(d);
            while (hi - lo > 1e-12 * std::max(1.0, hi)) {
                if (feasible_value(gc)) return bisect(prev_prev_b, c);
                if (feasible_value(gd)) return bisect(prev_prev_b, d);
                if (gc <= gd) {
                    hi = d;
                    d = c;
                    gd = gc;
                    c = hi - inv_phi * (hi - lo);
                    gc = g(c);
                } else {
                    lo = c;
                    c = d;
                    gc = gd;
                    d = lo + inv_phi * (hi - lo);
                    gd = g(d);
                }
            }
            return std::nullopt;
        }
        if (b >= options.b_cap) {
            throw Error(ErrorCode::SearchBudgetExceeded,
                        "no feasible b found up to the search cap " + std::to_string(options.b_cap));
        }
        prev_prev_b = prev_b;
        prev_b = b;
        prev_g = gb;
        b = std::min(2.0 * b, options.b_cap);
    }
}

}  // namespace enrichfp
