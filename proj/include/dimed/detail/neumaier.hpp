#ifndef DIMED_DETAIL_NEUMAIER_HPP
#define DIMED_DETAIL_NEUMAIER_HPP

#include <cmath>

namespace dimed::detail {

// Compensated (Neumaier) summation. Cumulative weight fractions decide
// order-statistic indices, so the running totals must not depend on
// accumulation noise.
struct NeumaierSum {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + compensation; }
};

}  // namespace dimed::detail

#endif  // DIMED_DETAIL_NEUMAIER_HPP
