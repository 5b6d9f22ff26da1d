#include <doctest.h>

#include <cmath>
#include <random>

#include "dimed/errors.hpp"
#include "dimed/quantile.hpp"
#include "helpers.hpp"

using namespace dimed;
using dimed::test::plain_median;
using dimed::test::unit_weights;

TEST_CASE("sort_with_weights orders values and carries weights along") {
    const WeightedSample sorted = sort_with_weights({{3.0, 1.0, 2.0}, {0.25, 0.5, 0.75}});
    CHECK(sorted.values == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(sorted.weights == std::vector<double>{0.5, 0.75, 0.25});

    const WeightedSample single = sort_with_weights({{5.0}, {2.0}});
    CHECK(single.values == std::vector<double>{5.0});
    CHECK(single.weights == std::vector<double>{2.0});
}

TEST_CASE("sort_with_weights is stable across tied values") {
    // Oracle: a stable sort keeps the relative order of the two 2s, so their
    // weights x=0.1 then y=0.2 must follow z.
    const WeightedSample sorted = sort_with_weights({{2.0, 2.0, 1.0}, {0.1, 0.2, 0.3}});
    CHECK(sorted.values == std::vector<double>{1.0, 2.0, 2.0});
    CHECK(sorted.weights == std::vector<double>{0.3, 0.1, 0.2});
}

TEST_CASE("lower and upper indices on the even unit-weight median") {
    const WeightedSample s = unit_weights({10.0, 20.0, 30.0, 40.0});
    CHECK(lower_index(s, {0.5, 0.5}) == 2);
    CHECK(upper_index(s, {0.5, 0.5}) == 3);
}

TEST_CASE("lower and upper indices with a dominant first weight") {
    // Cumulative fractions 0.6, 0.8, 1.0: the first observation already
    // crosses 0.5 both weakly and strictly.
    const WeightedSample s{{1.0, 2.0, 3.0}, {3.0, 1.0, 1.0}};
    CHECK(lower_index(s, {0.5, 0.5}) == 1);
    CHECK(upper_index(s, {0.5, 0.5}) == 1);
}

TEST_CASE("a tiny p lands on the first positively weighted observation") {
    const WeightedSample s{{1.0, 2.0, 3.0}, {0.7, 1.1, 0.2}};
    CHECK(lower_index(s, {1e-12, 0.5}) == 1);
}

TEST_CASE("upper index for the odd unit-weight median") {
    const WeightedSample s = unit_weights({5.0, 7.0, 9.0});
    CHECK(upper_index(s, {0.5, 0.5}) == 2);
}

TEST_CASE("upper index returns n when the strict threshold is reached only at the end") {
    const WeightedSample s = unit_weights({1.0, 2.0, 3.0});
    CHECK(upper_index(s, {2.0 / 3.0, 0.5}) == 3);
}

TEST_CASE("weighted quantile reproduces both median parities") {
    CHECK(weighted_quantile(unit_weights({5.0, 7.0, 9.0}), {0.5, 0.5}).value == 7.0);
    CHECK(weighted_quantile(unit_weights({10.0, 20.0, 30.0, 40.0}), {0.5, 0.5}).value == 25.0);
}

TEST_CASE("weighted quantile with a dominant weight, cross-checked by the argmax oracle") {
    const WeightedSample s{{1.0, 2.0, 3.0}, {3.0, 1.0, 1.0}};
    const QuantileEstimate est = weighted_quantile(s, {0.5, 0.5});
    CHECK(est.value == 1.0);
    CHECK(est.indices.l == 1);
    CHECK(est.indices.u == 1);
    CHECK(argmax_objective(s, 0.5) == 1.0);
}

TEST_CASE("weighted CDF evaluates the weight fraction at or below t") {
    const WeightedSample s{{1.0, 2.0, 3.0}, {1.0, 1.0, 2.0}};
    CHECK(weighted_cdf(s, 2.0) == 0.5);
    CHECK(weighted_cdf(s, 0.999) == 0.0);
    CHECK(weighted_cdf(s, 3.0) == 1.0);
    CHECK(weighted_cdf(s, 100.0) == 1.0);
}

TEST_CASE("check loss matches hand evaluations and is never positive") {
    CHECK(check_loss(3.7, 2.1, 3.7, 0.3) == 0.0);
    CHECK(check_loss(2.0, 1.0, 0.0, 0.5) == -1.0);
    CHECK(check_loss(0.0, 2.0, 1.0, 0.25) == -1.5);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> real(-4.0, 4.0);
    std::uniform_real_distribution<double> weight(0.0, 3.0);
    std::uniform_real_distribution<double> prob(0.01, 0.99);
    for (int i = 0; i < 2000; ++i) {
        CHECK(check_loss(real(rng), weight(rng), real(rng), prob(rng)) <= 0.0);
    }
    CHECK_THROWS_AS(check_loss(1.0, -0.5, 0.0, 0.5), InvalidInput);
}

TEST_CASE("objective averages the check loss") {
    const WeightedSample s = unit_weights({1.0, 2.0, 3.0});
    CHECK(objective(s, 2.0, 0.5) == -1.0 / 3.0);
    CHECK(objective(s, 1.0, 0.5) == -0.5);
    CHECK(objective({{4.2}, {1.3}}, 4.2, 0.31) == 0.0);
}

TEST_CASE("brute-force argmax agrees with hand calculations") {
    const WeightedSample s = unit_weights({1.0, 2.0, 3.0});
    CHECK(argmax_objective(s, 0.5) == 2.0);
    CHECK(objective(s, 2.0, 0.5) == -1.0 / 3.0);
    CHECK(objective(s, 1.0, 0.5) == -0.5);
    CHECK(objective(s, 3.0, 0.5) == -0.5);

    CHECK(argmax_objective({{4.0}, {2.0}}, 0.73) == 4.0);
}

TEST_CASE("the lower order statistic maximises the objective on random instances") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> prob(0.001, 0.999);
    for (int i = 0; i < 1000; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const QuantileSpec spec{prob(rng), 0.5};
        const QuantileEstimate est = weighted_quantile(s, spec);
        const double at_lower = objective(s, est.lower_value, spec.p);
        const double brute = objective(s, argmax_objective(s, spec.p), spec.p);
        CHECK(std::abs(at_lower - brute) <= 1e-12);
    }
}

TEST_CASE("suboptimality gap vanishes in the three collapse cases") {
    SUBCASE("gamma 0 pins the estimate at the maximiser") {
        const WeightedSample s{{1.0, 5.0, 2.0, 4.0}, {0.4, 1.0, 2.0, 0.3}};
        CHECK(suboptimality_gap(s, {0.37, 0.0}) == 0.0);
    }
    SUBCASE("an exact cumulative tie makes the objective flat between l and u") {
        CHECK(suboptimality_gap(unit_weights({10.0, 20.0, 30.0, 40.0}), {0.5, 0.5}) == 0.0);
    }
    SUBCASE("l equals u, so the interpolation collapses") {
        CHECK(suboptimality_gap({{1.0, 2.0, 3.0}, {3.0, 1.0, 1.0}}, {0.5, 0.5}) == 0.0);
    }
}

TEST_CASE("suboptimality gap is nonnegative on random instances") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> gam(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        CHECK(suboptimality_gap(s, {prob(rng), gam(rng)}) >= -1e-12);
    }
}

TEST_CASE("unit weights with p = gamma = 0.5 reproduce the plain median exactly") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<std::size_t> size_dist(1, 50);
    std::normal_distribution<double> value(0.0, 10.0);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> values(size_dist(rng));
        for (double& v : values) v = value(rng);
        const double expected = plain_median(values);
        CHECK(weighted_quantile(unit_weights(values), {0.5, 0.5}).value == expected);
    }
}

TEST_CASE("scaling all weights leaves indices and the estimate unchanged") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    const double scales[] = {1e-8, 0.3, 7.0, 1e8};
    for (int i = 0; i < 300; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const QuantileSpec spec{prob(rng), 0.5};
        const QuantileEstimate base = weighted_quantile(s, spec);
        for (double c : scales) {
            WeightedSample scaled = s;
            for (double& w : scaled.weights) w *= c;
            const QuantileEstimate got = weighted_quantile(scaled, spec);
            CHECK(got.indices.l == base.indices.l);
            CHECK(got.indices.u == base.indices.u);
            CHECK(got.value == base.value);
        }
    }
}

TEST_CASE("affine maps commute with the weighted quantile") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> slope(0.1, 5.0);
    std::uniform_real_distribution<double> intercept(-10.0, 10.0);
    for (int i = 0; i < 300; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const QuantileSpec spec{prob(rng), 0.5};
        const double a = slope(rng);
        const double b = intercept(rng);
        WeightedSample mapped = s;
        for (double& v : mapped.values) v = a * v + b;
        const QuantileEstimate base = weighted_quantile(s, spec);
        const QuantileEstimate got = weighted_quantile(mapped, spec);
        CHECK(got.indices.l == base.indices.l);
        CHECK(got.indices.u == base.indices.u);
        CHECK(got.value == doctest::Approx(a * base.value + b).epsilon(1e-12));
    }
}

TEST_CASE("estimates are bracketed by their order statistics") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> prob(0.02, 0.98);
    std::uniform_real_distribution<double> gam(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const QuantileEstimate est = weighted_quantile(s, {prob(rng), gam(rng)});
        CHECK(est.lower_value <= est.value);
        CHECK(est.value <= est.upper_value);
        CHECK(est.indices.l <= est.indices.u);
        CHECK(est.indices.u <= est.indices.L);
        CHECK(est.indices.L <= s.size());
    }
}

TEST_CASE("the weighted CDF brackets p around the lower order statistic") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    for (int i = 0; i < 300; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const double p = prob(rng);
        const QuantileEstimate est = weighted_quantile(s, {p, 0.5});
        // Values are integers, sostepping half a unit below X_(l) stays
        // clear of every other observation.
        CHECK(weighted_cdf(s, est.lower_value - 0.5) < p);
        CHECK(weighted_cdf(s, est.lower_value) >= p);
    }
}

TEST_CASE("zero-weight observations are transparent") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> extra(-8.0, 8.0);
    for (int i = 0; i < 300; ++i) {
        const WeightedSample s = dimed::test::random_sample(rng);
        const double p = prob(rng);
        const QuantileEstimate base = weighted_quantile(s, {p, 0.5});
        WeightedSample padded = s;
        padded.values.push_back(extra(rng));
        padded.weights.push_back(0.0);
        const QuantileEstimate got = weighted_quantile(padded, {p, 0.5});
        CHECK(got.lower_value == base.lower_value);
        CHECK(got.upper_value == base.upper_value);
        CHECK(got.value == base.value);
    }
}

TEST_CASE("raw indices step over zero-weight runs; estimator indices do not") {
    // With an exact tie at p, the strict crossing sits past the zero-weight
    // observation, so the raw upper index skips it. The estimator works on
    // the positively weighted subsample, where u = l + 1 again, and the
    // value agrees with the sample with the zero-weight point removed.
    const WeightedSample s{{1.0, 5.0, 9.0}, {1.0, 0.0, 1.0}};
    CHECK(lower_index(s, {0.5, 0.5}) == 1);
    CHECK(upper_index(s, {0.5, 0.5}) == 3);

    const QuantileEstimate est = weighted_quantile(s, {0.5, 0.5});
    CHECK(est.indices.l == 1);
    CHECK(est.indices.u == 2);
    CHECK(est.lower_value == 1.0);
    CHECK(est.upper_value == 9.0);
    CHECK(est.value == weighted_quantile({{1.0, 9.0}, {1.0, 1.0}}, {0.5, 0.5}).value);
}

TEST_CASE("invalid samples and specs are rejected") {
    CHECK_THROWS_AS(weighted_quantile({{}, {}}, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0, 2.0}, {1.0}}, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {-1.0}}, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0, 2.0}, {0.0, 0.0}}, {0.5, 0.5}), InvalidInput);
    const double nan = std::nan("");
    CHECK_THROWS_AS(weighted_quantile({{nan}, {1.0}}, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {nan}}, {0.5, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {1.0}}, {0.0, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {1.0}}, {1.0, 0.5}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {1.0}}, {0.5, -0.1}), InvalidInput);
    CHECK_THROWS_AS(weighted_quantile({{1.0}, {1.0}}, {0.5, 1.1}), InvalidInput);
    CHECK_THROWS_AS(lower_index({{2.0, 1.0}, {1.0, 1.0}}, {0.5, 0.5}), InvalidInput);
}
