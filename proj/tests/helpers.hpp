#ifndef DIMED_TESTS_HELPERS_HPP
#define DIMED_TESTS_HELPERS_HPP

#include <algorithm>
#include <random>
#include <vector>

#include "dimed/frame.hpp"
#include "dimed/quantile.hpp"

namespace dimed::test {

// Textbook median: the middle order statistic for odd n, the average of the
// two central ones for even n. Independent oracle for the unit-weight case.
inline double plain_median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

inline WeightedSample unit_weights(std::vector<double> values) {
    WeightedSample s;
    s.weights.assign(values.size(), 1.0);
    s.values = std::move(values);
    return s;
}

inline WeightedSample random_sample(std::mt19937_64& rng, std::size_t max_n = 15) {
    std::uniform_int_distribution<std::size_t> size_dist(1, max_n);
    std::uniform_int_distribution<int> value_dist(-5, 5);
    std::uniform_real_distribution<double> weight_dist(0.0, 3.0);
    const std::size_t n = size_dist(rng);
    WeightedSample s;
    for (std::size_t i = 0; i < n; ++i) {
        s.values.push_back(static_cast<double>(value_dist(rng)));
        s.weights.push_back(weight_dist(rng));
    }
    if (!(s.total_weight() > 0.0)) s.weights[0] = 1.0;
    return s;
}

inline UnitRecord unit(double x, std::optional<double> pi, bool alpha, bool delta) {
    UnitRecord u;
    u.x = x;
    u.pi = pi;
    u.alpha = alpha;
    u.delta = delta;
    return u;
}

// A fully stored frame with x ~ N(0,1), pi in [0.2, 1], alpha ~ Bernoulli(pi)
// and delta ~ Bernoulli(0.4).
inline PopulationFrame random_frame(std::mt19937_64& rng, std::int64_t n) {
    std::normal_distribution<double> x_dist;
    std::uniform_real_distribution<double> pi_dist(0.2, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    PopulationFrame frame;
    frame.n = n;
    bool any_alpha = false;
    for (std::int64_t i = 0; i < n; ++i) {
        const double pi = pi_dist(rng);
        UnitRecord u = unit(x_dist(rng), pi, u01(rng) < pi, u01(rng) < 0.4);
        any_alpha = any_alpha || u.alpha;
        frame.units.push_back(u);
    }
    if (!any_alpha) frame.units.front().alpha = true;
    return frame;
}

}  // namespace dimed::test

#endif  // DIMED_TESTS_HELPERS_HPP
