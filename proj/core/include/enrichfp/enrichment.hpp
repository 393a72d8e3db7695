#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "enrichfp/mappings.hpp"
#include "enrichfp/spaces.hpp"

namespace enrichfp {

/// Which inequality ||b(x-y) + Tx - Ty|| <= rhs is being tested:
/// rhs = (b+1)||x-y|| for `enriched`, rhs = ||x-y|| for `modified`.
enum class ConditionKind { enriched, modified };

std::string_view to_string(ConditionKind kind) noexcept;
std::optional<ConditionKind> parse_condition_kind(std::string_view text) noexcept;

struct PointPair {
    Vector x;
    Vector y;
};

/// Deterministic generator of test pairs in the box [-R, R]^d.
///
/// A `near_pair_fraction` share of the pairs is drawn with
/// 1e-4 R <= ||x - y||_2 <= 1e-3 R; the rest are independent uniform
/// points. Pairs closer than 1e-14 R are rejected and redrawn.
struct PairSampler {
    std::uint64_t seed = 42;
    std::size_t count = 10'000;
    double box_radius = 100.0;
    double near_pair_fraction = 0.2;

    /// Throws `ParameterOutOfRange` when a field is out of range.
    void validate() const;
    std::vector<PointPair> draw(std::size_t dim) const;
};

inline constexpr double kDefaultSlack = 1e-9;

struct EnrichmentReport {
    ConditionKind kind = ConditionKind::enriched;
    double b = 0.0;
    NormKind norm = NormKind::l2;
    std::size_t pairs_tested = 0;
    double max_ratio = 0.0;
    PointPair witness;
    bool passed = false;
    double slack = kDefaultSlack;
};

/// Left side ||b(x-y) + Tx - Ty|| and the distance ||x-y|| for one pair.
struct ConditionTerms {
    double lhs = 0.0;
    double distance = 0.0;

    double ratio(ConditionKind kind, double b) const noexcept
    {
        const double rhs = kind == ConditionKind::enriched ? (b + 1.0) * distance : distance;
        return lhs / rhs;
    }
};

ConditionTerms condition_terms(const Mapping& map, double b, const Vector& x, const Vector& y,
                               NormKind norm);

/// T_lambda = (1 - lambda) I + lambda T, for 0 < lambda <= 1.
Mapping averaged(const Mapping& map, double lambda);

/// S = (b I + T) / (b + 1). Built as averaged(T, 1/(b+1)), so the two
/// constructions compare equal as values.
Mapping enriched_reduction(const Mapping& map, double b);

/// S = b I + T. Fixed points of S satisfy T x = (1 - b) x, not T x = x.
Mapping modified_shift(const Mapping& map, double b);

/// ||T x - (1 - b) x||: zero exactly when x is a fixed point of modified_shift(T, b).
double shift_relation_residual(const Mapping& map, double b, const Vector& x, NormKind norm);

/// Samples the condition on `sampler.draw(dim)` and reports the worst ratio.
///
/// A failed report is a proof that T does not satisfy the condition for this
/// b; a passing one is evidence only. Ties in the maximum keep the lowest
/// pair index.
EnrichmentReport verify_condition(const Mapping& map, double b, ConditionKind kind,
                                  const PairSampler& sampler = {}, double slack = kDefaultSlack,
                                  NormKind norm = NormKind::l2);

/// Same as `verify_condition` over an explicit pair set.
EnrichmentReport verify_condition_on(const Mapping& map, double b, ConditionKind kind,
                                     std::span<const PointPair> pairs, double slack = kDefaultSlack,
                                     NormKind norm = NormKind::l2);

struct MinBOptions {
    double b_cap = 1e6;
    double tolerance = 1e-8;
};

/// Least b >= 0 with ||b I + A|| <= rhs(b), where rhs(b) = b + 1 (enriched)
/// or 1 (modified). This is the exact condition for T x = A x + c, for any c.
///
/// g(b) = ||b I + A|| - rhs(b) is convex, so the feasible set is an interval.
/// The left end is bracketed by doubling and refined by bisection. g is
/// evaluated in a form that does not cancel the O(b) terms (for l2 through
/// the top eigenvalue of b(A + A^T) + A^T A), so the search stays accurate
/// for large b. Returns empty when the minimum of g is positive, including
/// the enriched case where the limit of g (log-norm of A minus one) is
/// positive. Throws `SearchBudgetExceeded` when g is still decreasing and
/// positive at `b_cap`.
std::optional<double> min_b_affine(const Matrix& a, ConditionKind kind, NormKind norm,
                                   const MinBOptions& options = {});

}  // namespace enrichfp
