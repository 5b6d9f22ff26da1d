#include <doctest.h>

#include <cmath>

#include "dimed/distributions.hpp"
#include "dimed/errors.hpp"
#include "dimed/normal.hpp"

using namespace dimed;

TEST_CASE("analytic quantile functions") {
    CHECK(true_quantile(ExponentialDist{1.0}, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(true_quantile(NormalDist{0.0, 1.0}, 0.5) == 0.0);
    CHECK(true_quantile(UniformDist{0.0, 1.0}, 0.25) == 0.25);
    CHECK(true_quantile(NormalDist{2.0, 3.0}, 0.975) ==
          doctest::Approx(2.0 + 3.0 * 1.959963984540054).epsilon(1e-14));
    CHECK(true_quantile(LogNormalDist{0.0, 1.0}, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("the Bernoulli quantile is rejected exactly where it is not unique") {
    CHECK_THROWS_AS(true_quantile(BernoulliDist{0.5}, 0.5), Unavailable);
    CHECK_THROWS_AS(true_quantile(BernoulliDist{0.3}, 0.7), Unavailable);
    CHECK(true_quantile(BernoulliDist{0.3}, 0.5) == 0.0);
    CHECK(true_quantile(BernoulliDist{0.3}, 0.75) == 1.0);
}

TEST_CASE("densities match closed forms") {
    CHECK(density(NormalDist{0.0, 1.0}, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(density(NormalDist{1.0, 2.0}, 1.0) ==
          doctest::Approx(0.3989422804014327 / 2.0).epsilon(1e-14));
    CHECK(density(LogNormalDist{0.0, 1.0}, 1.0) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(density(ExponentialDist{2.0}, 0.0) == 2.0);
    CHECK(density(ExponentialDist{2.0}, -0.1) == 0.0);
    CHECK(density(UniformDist{0.0, 4.0}, 2.0) == 0.25);
    CHECK(density(UniformDist{0.0, 4.0}, 5.0) == 0.0);
    CHECK(has_density(NormalDist{}));
    CHECK(!has_density(BernoulliDist{}));
    CHECK_THROWS_AS(density(BernoulliDist{0.5}, 0.5), Unavailable);
}

TEST_CASE("draws are inverse-CDF transforms") {
    CHECK(draw(NormalDist{0.0, 1.0}, 0.5) == 0.0);
    CHECK(draw(ExponentialDist{2.0}, 0.25) == doctest::Approx(-std::log1p(-0.25) / 2.0));
    CHECK(draw(UniformDist{1.0, 3.0}, 0.5) == 2.0);
    CHECK(draw(BernoulliDist{0.3}, 0.69) == 0.0);
    CHECK(draw(BernoulliDist{0.3}, 0.71) == 1.0);
    // The draw at u equals the u-quantile, so the two agree everywhere.
    for (double u : {0.01, 0.2, 0.5, 0.8, 0.99}) {
        CHECK(draw(LogNormalDist{0.3, 0.7}, u) ==
              doctest::Approx(true_quantile(LogNormalDist{0.3, 0.7}, u)).epsilon(1e-14));
    }
}

TEST_CASE("family parameter validation") {
    CHECK_THROWS_AS(validate(Superpopulation{NormalDist{0.0, 0.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(Superpopulation{LogNormalDist{0.0, -1.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(Superpopulation{ExponentialDist{0.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(Superpopulation{UniformDist{1.0, 1.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(Superpopulation{BernoulliDist{0.0}}), InvalidInput);
    CHECK_THROWS_AS(validate(Superpopulation{BernoulliDist{1.0}}), InvalidInput);
    CHECK_THROWS_AS(true_quantile(NormalDist{}, 0.0), InvalidInput);
    CHECK_THROWS_AS(true_quantile(NormalDist{}, 1.0), InvalidInput);
}

TEST_CASE("normal quantile pins down the reference values") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
    CHECK(normal_quantile(0.75) == doctest::Approx(0.6744897501960817).epsilon(1e-15));
    CHECK(normal_quantile(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-15));
    CHECK(normal_quantile(1e-9) == doctest::Approx(-5.997807015007686).epsilon(1e-14));
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_cdf(0.0) == 0.5);
    // Quantile and CDF invert each other. The range stops where cdf(x)
    // saturates towards 1 and the inversion amplifies the last-ulp error of
    // p itself; the lower tail has no such limit because p stays small and
    // exact there.
    for (double x = -6.0; x <= 4.0; x += 0.25) {
        CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-12));
    }
    CHECK_THROWS_AS(normal_quantile(0.0), InvalidInput);
    CHECK_THROWS_AS(normal_quantile(1.0), InvalidInput);
}
