#include "enrichfp/enrichment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "enrichfp/error.hpp"
#include "enrichfp/harness.hpp"
#include "oracles.hpp"

using namespace enrichfp;

namespace {

Mapping flip_scale()
{
    return Mapping::affine(Matrix::from_rows({{-2.0}}), Vector{100.0});
}

// T_b x = (1 - b) x
Mapping scaled_map(double b)
{
    return Mapping::affine(Matrix::from_rows({{1.0 - b}}), Vector{0.0});
}

PairSampler far_pairs(std::uint64_t seed, std::size_t count)
{
    PairSampler sampler;
    sampler.seed = seed;
    sampler.count = count;
    sampler.near_pair_fraction = 0.0;
    return sampler;
}

ErrorCode error_code_of(auto&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

// Matrices -2I + 0.5 R with ||R||_2 <= 1: modified-feasible for b near 2.
Matrix near_minus_two(std::mt19937_64& rng, std::size_t dim)
{
    Matrix r = oracle::random_matrix(rng, dim, 1.0);
    r *= 0.5 / oracle::svd_spectral_norm(r);
    return shifted(r, -2.0);
}

}  // namespace

TEST(Averaged, IdentityStaysIdentity)
{
    const Mapping id = Mapping::identity(3);
    const Vector x{1.5, -2.0, 7.0};
    for (double lambda : {0.1, 0.5, 1.0}) {
        EXPECT_EQ(evaluate(averaged(id, lambda), x), x);
    }
}

TEST(Averaged, FlipScaleAtOrigin)
{
    EXPECT_DOUBLE_EQ(evaluate(averaged(flip_scale(), 0.25), Vector{0.0})[0], 25.0);
}

TEST(Averaged, LambdaOneIsT)
{
    std::mt19937_64 rng(1);
    const Mapping t = flip_scale();
    const Mapping same = averaged(t, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vector x = oracle::random_vector(rng, 1, 1e3);
        EXPECT_EQ(same(x), t(x));
    }
}

TEST(Averaged, RejectsLambdaOutsideUnitInterval)
{
    for (double lambda : {0.0, -0.5, 1.0000001, std::nan("")}) {
        EXPECT_EQ(error_code_of([&] { averaged(flip_scale(), lambda); }), ErrorCode::ParameterOutOfRange);
    }
}

TEST(EnrichedReduction, ZeroIsT)
{
    std::mt19937_64 rng(2);
    const Mapping t = flip_scale();
    const Mapping s = enriched_reduction(t, 0.0);
    for (int i = 0; i < 100; ++i) {
        const Vector x = oracle::random_vector(rng, 1, 1e3);
        EXPECT_EQ(s(x), t(x));
    }
}

TEST(EnrichedReduction, FlipScaleAtHalf)
{
    const Mapping s = enriched_reduction(flip_scale(), 0.5);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5; ++i) {
        const double x = oracle::random_vector(rng, 1, 100.0)[0];
        // Oracle: ((x/2) + 100 - 2x) / (3/2) = 200/3 - x.
        const double by_hand = ((x / 2.0) + 100.0 - 2.0 * x) / 1.5;
        EXPECT_NEAR(by_hand, 200.0 / 3.0 - x, 1e-12);
        EXPECT_NEAR(s(Vector{x})[0], by_hand, 1e-12);
    }
}

TEST(EnrichedReduction, CoincidesWithAveragedAsValues)
{
    std::mt19937_64 rng(4);
    const Mapping t = Mapping::affine(oracle::random_matrix(rng, 3, 2.0), oracle::random_vector(rng, 3, 5.0));
    for (double b : {0.0, 0.3, 1.0, 3.0, 17.5}) {
        const Mapping reduced = enriched_reduction(t, b);
        const Mapping avg = averaged(t, 1.0 / (b + 1.0));
        EXPECT_EQ(reduced, avg);
        const auto* node = reduced.get_if<mapping::LinearCombination>();
        ASSERT_NE(node, nullptr);
        EXPECT_NEAR(node->alpha, b / (b + 1.0), 1e-15);
        EXPECT_NEAR(node->beta, 1.0 / (b + 1.0), 1e-15);
        for (int i = 0; i < 1000; ++i) {
            const Vector x = oracle::random_vector(rng, 3, 100.0);
            const Vector a = reduced(x);
            const Vector c = avg(x);
            for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(a[k], c[k], 1e-12);
        }
    }
}

TEST(EnrichedReduction, RejectsNegativeB)
{
    EXPECT_EQ(error_code_of([] { enriched_reduction(flip_scale(), -0.1); }), ErrorCode::ParameterOutOfRange);
    EXPECT_EQ(error_code_of([] { modified_shift(flip_scale(), -1.0); }), ErrorCode::ParameterOutOfRange);
}

TEST(ModifiedShift, Examples)
{
    std::mt19937_64 rng(5);
    const Mapping t = flip_scale();
    const Mapping at_zero = modified_shift(t, 0.0);
    const Mapping collapse = modified_shift(scaled_map(2.0), 2.0);
    const Mapping doubled = modified_shift(Mapping::identity(2), 1.0);
    for (int i = 0; i < 100; ++i) {
        const Vector x = oracle::random_vector(rng, 1, 1e3);
        EXPECT_EQ(at_zero(x), t(x));
        // 2x + (1 - 2)x = x: every point is fixed by S, only 0 by T.
        EXPECT_EQ(collapse(x), x);
        const Vector p = oracle::random_vector(rng, 2, 1e3);
        EXPECT_EQ(doubled(p), 2.0 * p);
    }
}

TEST(ModifiedShift, FixedPointsSatisfyShiftRelation)
{
    const Mapping t = scaled_map(2.0);
    const Mapping s = modified_shift(t, 2.0);
    const Vector x{5.0};
    EXPECT_EQ(s(x), x);
    EXPECT_EQ(shift_relation_residual(t, 2.0, x, NormKind::l2), 0.0);
    // x = 5 is fixed for S but T(5) = -5: not a fixed point of T.
    EXPECT_EQ(t(x), Vector{-5.0});
    // The origin is the exception: it is fixed for both.
    EXPECT_EQ(t(Vector{0.0}), Vector{0.0});
}

TEST(VerifyCondition, FlipScaleIsThreeModified)
{
    const EnrichmentReport report = verify_condition(flip_scale(), 3.0, ConditionKind::modified);
    EXPECT_TRUE(report.passed);
    EXPECT_NEAR(report.max_ratio, 1.0, 1e-10);
    EXPECT_EQ(report.pairs_tested, 10'000u);
}

TEST(VerifyCondition, ScaledMapIsTwoModified)
{
    const EnrichmentReport report = verify_condition(scaled_map(2.0), 2.0, ConditionKind::modified);
    EXPECT_TRUE(report.passed);
    EXPECT_NEAR(report.max_ratio, 1.0, 1e-10);
}

TEST(VerifyCondition, FlipScaleIsNotNonexpansive)
{
    const EnrichmentReport report = verify_condition(flip_scale(), 0.0, ConditionKind::modified);
    EXPECT_FALSE(report.passed);
    // Oracle: |Tx - Ty| = 2|x - y|.
    EXPECT_NEAR(report.max_ratio, 2.0, 1e-10);
    const ConditionTerms terms = condition_terms(flip_scale(), 0.0, report.witness.x, report.witness.y, NormKind::l2);
    EXPECT_NEAR(terms.ratio(ConditionKind::modified, 0.0), report.max_ratio, 1e-12);
}

TEST(VerifyCondition, WitnessReproducesMaxRatio)
{
    std::mt19937_64 rng(6);
    const Mapping t = Mapping::composition(
        {Mapping::affine(oracle::random_matrix(rng, 3, 1.0), oracle::random_vector(rng, 3, 1.0)),
         Mapping::box_projection(Vector{-20.0, -20.0, -20.0}, Vector{20.0, 20.0, 20.0})});
    for (NormKind kind : {NormKind::l1, NormKind::l2, NormKind::linf}) {
        const auto report = verify_condition(t, 0.5, ConditionKind::enriched, far_pairs(9, 2000), kDefaultSlack, kind);
        const auto terms = condition_terms(t, 0.5, report.witness.x, report.witness.y, kind);
        EXPECT_NEAR(terms.ratio(ConditionKind::enriched, 0.5), report.max_ratio, 1e-12);
        EXPECT_EQ(report.passed, report.max_ratio <= 1.0 + report.slack);
    }
}

TEST(VerifyCondition, TiesKeepLowestIndex)
{
    PairSampler sampler = far_pairs(3, 50);
    const auto pairs = sampler.draw(1);
    // Translation: every pair has ratio exactly 1 at b = 0.
    const Mapping shift = Mapping::affine(Matrix::identity(1), Vector{3.0});
    const auto report = verify_condition_on(shift, 0.0, ConditionKind::modified, pairs);
    EXPECT_EQ(report.witness.x, pairs.front().x);
    EXPECT_EQ(report.witness.y, pairs.front().y);
}

TEST(VerifyCondition, RejectsBadArguments)
{
    EXPECT_EQ(error_code_of([] { verify_condition(flip_scale(), -1.0, ConditionKind::enriched); }),
              ErrorCode::ParameterOutOfRange);
    EXPECT_EQ(error_code_of([] { verify_condition(flip_scale(), 1.0, ConditionKind::enriched, {}, -1e-3); }),
              ErrorCode::ParameterOutOfRange);
    PairSampler empty;
    empty.count = 0;
    EXPECT_EQ(error_code_of([&] { verify_condition(flip_scale(), 1.0, ConditionKind::enriched, empty); }),
              ErrorCode::ParameterOutOfRange);
}

TEST(VerifyCondition, PropagatesNonFiniteResult)
{
    const Mapping huge = Mapping::affine(Matrix::from_rows({{1e308}}), Vector{0.0});
    EXPECT_EQ(error_code_of([&] { verify_condition(huge, 0.0, ConditionKind::modified); }),
              ErrorCode::NonFiniteResult);
}

TEST(PairSampler, DeterministicAndSeparated)
{
    PairSampler sampler;
    sampler.count = 2000;
    const auto a = sampler.draw(3);
    const auto b = sampler.draw(3);
    ASSERT_EQ(a.size(), 2000u);
    std::size_t near = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].x, b[i].x);
        EXPECT_EQ(a[i].y, b[i].y);
        const double d = distance(a[i].x, a[i].y, NormKind::l2);
        EXPECT_GT(d, 1e-14 * sampler.box_radius);
        if (d <= 1e-3 * sampler.box_radius * (1.0 + 1e-12)) ++near;
    }
    EXPECT_EQ(near, 400u);
    sampler.seed = 43;
    EXPECT_NE(sampler.draw(3)[0].x, a[0].x);
}

TEST(ReductionIdentity, PerPairAndVerdicts)
{
    const auto family = generate_affine_family(21, 3, {0.4, 1.3, 2.6}, 8);
    const auto pairs = far_pairs(22, 1000).draw(3);
    for (const Mapping& t : family) {
        for (double b : {0.0, 0.5, 1.0, 3.0}) {
            const Mapping s = enriched_reduction(t, b);
            for (const PointPair& p : pairs) {
                const double lhs = condition_terms(t, b, p.x, p.y, NormKind::l2).lhs;
                const double reduced = distance(s(p.x), s(p.y), NormKind::l2) * (b + 1.0);
                EXPECT_NEAR(reduced, lhs, 1e-12 * lhs);
            }
            const auto direct = verify_condition_on(t, b, ConditionKind::enriched, pairs);
            const auto via_s = verify_condition_on(s, 0.0, ConditionKind::enriched, pairs);
            EXPECT_EQ(direct.passed, via_s.passed);
        }
    }
}

TEST(ModifiedShiftIdentity, PerPairAndVerdicts)
{
    std::mt19937_64 rng(23);
    std::vector<Mapping> maps;
    for (int i = 0; i < 4; ++i) {
        maps.push_back(Mapping::affine(near_minus_two(rng, 3), oracle::random_vector(rng, 3, 10.0)));
    }
    maps.push_back(Mapping::affine(oracle::random_matrix(rng, 3, 2.0), oracle::random_vector(rng, 3, 10.0)));
    const auto pairs = far_pairs(24, 1000).draw(3);
    for (const Mapping& t : maps) {
        for (double b : {0.5, 2.0, 3.0}) {
            const Mapping s = modified_shift(t, b);
            for (const PointPair& p : pairs) {
                const double lhs = condition_terms(t, b, p.x, p.y, NormKind::l2).lhs;
                EXPECT_NEAR(distance(s(p.x), s(p.y), NormKind::l2), lhs, 1e-12 * lhs);
            }
            EXPECT_EQ(verify_condition_on(t, b, ConditionKind::modified, pairs).passed,
                      verify_condition_on(s, 0.0, ConditionKind::modified, pairs).passed);
        }
    }
}

TEST(MinBAffine, ScalarExamples)
{
    const Matrix a = Matrix::from_rows({{-2.0}});
    const auto modified = min_b_affine(a, ConditionKind::modified, NormKind::l2);
    const auto enriched = min_b_affine(a, ConditionKind::enriched, NormKind::l2);
    ASSERT_TRUE(modified);
    ASSERT_TRUE(enriched);
    EXPECT_NEAR(*modified, 1.0, 1e-6);
    EXPECT_NEAR(*enriched, 0.5, 1e-6);
    EXPECT_FALSE(min_b_affine(2.0 * Matrix::identity(2), ConditionKind::modified, NormKind::l2));

    // Oracle: dense grid scan of ||bI + A|| via SVD.
    EXPECT_NEAR(*oracle::grid_min_b(a, ConditionKind::modified, NormKind::l2), 1.0, 1e-4);
    EXPECT_NEAR(*oracle::grid_min_b(a, ConditionKind::enriched, NormKind::l2), 0.5, 1e-4);
    EXPECT_FALSE(oracle::grid_min_b(2.0 * Matrix::identity(2), ConditionKind::modified, NormKind::l2));
}

TEST(MinBAffine, NonexpansiveMatricesNeedNoShift)
{
    const Matrix rotation = Matrix::from_rows({{0.0, -1.0}, {1.0, 0.0}});
    EXPECT_EQ(min_b_affine(rotation, ConditionKind::modified, NormKind::l2), 0.0);
    EXPECT_EQ(min_b_affine(rotation, ConditionKind::enriched, NormKind::l2), 0.0);
    EXPECT_EQ(min_b_affine(Matrix::identity(3), ConditionKind::enriched, NormKind::l1), 0.0);
}

TEST(MinBAffine, MatchesGridOracle)
{
    std::mt19937_64 rng(31);
    for (NormKind norm_kind : {NormKind::l1, NormKind::l2, NormKind::linf}) {
        for (int i = 0; i < 6; ++i) {
            const std::size_t dim = 1 + static_cast<std::size_t>(i % 3);
            const Matrix modified_case = near_minus_two(rng, dim);
            Matrix enriched_case = oracle::random_matrix(rng, dim, 1.5);
            enriched_case = shifted(enriched_case, -2.5);  // keeps the log-norm below one
            for (auto [a, kind] : {std::pair{modified_case, ConditionKind::modified},
                                   std::pair{enriched_case, ConditionKind::enriched}}) {
                const auto expected = oracle::grid_min_b(a, kind, norm_kind, 1e-3);
                const auto got = min_b_affine(a, kind, norm_kind);
                ASSERT_EQ(expected.has_value(), got.has_value())
                    << to_string(norm_kind) << " " << to_string(kind) << " case " << i;
                if (got) {
                    EXPECT_LE(*got, *expected + 1e-8);
                    EXPECT_GT(*got, *expected - 1e-3 - 1e-8);
                }
            }
        }
    }
}

TEST(MinBAffine, IndependentOfOffset)
{
    const Matrix a = Matrix::from_rows({{-2.0, 0.3}, {0.1, -1.7}});
    const Mapping t1 = Mapping::affine(a, Vector{0.0, 0.0});
    const Mapping t2 = Mapping::affine(a, Vector{55.0, -3.0});
    EXPECT_EQ(min_b_affine(as_affine(t1)->matrix, ConditionKind::modified, NormKind::l2),
              min_b_affine(as_affine(t2)->matrix, ConditionKind::modified, NormKind::l2));
}

TEST(MinBAffine, AffineReductionSoundness)
{
    std::mt19937_64 rng(32);
    PairSampler sampler;
    sampler.seed = 33;
    for (int i = 0; i < 6; ++i) {
        const std::size_t dim = 2 + static_cast<std::size_t>(i % 2);
        const ConditionKind kind = i % 2 == 0 ? ConditionKind::modified : ConditionKind::enriched;
        const Matrix a = kind == ConditionKind::modified ? near_minus_two(rng, dim)
                                                         : shifted(oracle::random_matrix(rng, dim, 1.5), -2.5);
        const Mapping t = Mapping::affine(a, oracle::random_vector(rng, dim, 10.0));
        const auto b = min_b_affine(a, kind, NormKind::l2);
        ASSERT_TRUE(b);
        EXPECT_TRUE(verify_condition(t, *b + 1e-6, kind, sampler).passed) << "case " << i;

        if (*b > 1e-3) {
            const double below = *b - 1e-3;
            const Vector v = oracle::top_right_singular_vector(shifted(a, below));
            const Vector x = oracle::random_vector(rng, dim, 50.0);
            const Vector y = x + 10.0 * v;
            const std::vector<PointPair> aligned = {{x, y}};
            EXPECT_FALSE(verify_condition_on(t, below, kind, aligned).passed) << "case " << i;
        }
    }
}

TEST(MinBAffine, EnrichedFeasibilityIsAnInterval)
{
    std::mt19937_64 rng(34);
    for (int i = 0; i < 10; ++i) {
        const Matrix a = shifted(oracle::random_matrix(rng, 3, 2.0), -1.0 - 0.3 * i);
        bool seen_feasible = false;
        for (int k = 0; k < 100; ++k) {
            const double b = 0.1 * k;
            const bool feasible = operator_norm(shifted(a, b), NormKind::l2) <= (b + 1.0) * (1.0 + 1e-12);
            if (seen_feasible) EXPECT_TRUE(feasible) << "case " << i << " b=" << b;
            seen_feasible = seen_feasible || feasible;
        }
    }
}

TEST(MinBAffine, InfeasibleAndBudget)
{
    // Log-norm of [[1,1],[0,1]] is 1.5: g decreases towards 0.5 and never reaches 0.
    const Matrix jordan = Matrix::from_rows({{1.0, 1.0}, {0.0, 1.0}});
    EXPECT_FALSE(min_b_affine(jordan, ConditionKind::enriched, NormKind::l2));
    EXPECT_FALSE(min_b_affine(2.0 * Matrix::identity(2), ConditionKind::enriched, NormKind::linf));

    // Feasible only beyond the cap: ||bI - 50 I|| <= 1 needs b >= 49.
    MinBOptions small_cap;
    small_cap.b_cap = 10.0;
    EXPECT_EQ(error_code_of([&] {
                  min_b_affine(-50.0 * Matrix::identity(1), ConditionKind::modified, NormKind::l2, small_cap);
              }),
              ErrorCode::SearchBudgetExceeded);
    EXPECT_NEAR(*min_b_affine(-50.0 * Matrix::identity(1), ConditionKind::modified, NormKind::l2), 49.0, 1e-8);
}

TEST(MinBAffine, LargeShiftStaysAccurate)
{
    // Needs b = 2e5 - 1; ||bI + A|| carries its O(1) part next to O(b) terms.
    const Matrix a = Matrix::from_rows({{-2e5, 0.5}, {0.0, -2e5}});
    const auto b = min_b_affine(a, ConditionKind::modified, NormKind::l2);
    ASSERT_TRUE(b);
    const double expected = *oracle::grid_min_b(shifted(a, 2e5 - 2.0), ConditionKind::modified, NormKind::l2, 1e-5, 4.0) +
                            2e5 - 2.0;
    EXPECT_NEAR(*b, expected, 2e-5);
}
