#ifndef DIMED_QUANTILE_HPP
#define DIMED_QUANTILE_HPP

#include <cstddef>
#include <vector>

namespace dimed {

// Paired observations and nonnegative weights. The substrate of every
// quantile computation in this library.
struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;

    std::size_t size() const { return values.size(); }
    double total_weight() const;

    // Throws InvalidInput if the arrays differ in length, are empty,
    // contain non-finite entries, hold a negative weight, or the total
    // weight is not strictly positive.
    void validate() const;
};

// Target quantile level p and interpolation weight gamma. The estimate is
// the convex combination (1-gamma)*lower + gamma*upper of the two bracketing
// order statistics; gamma = 0.5 together with p = 0.5 gives the ordinary
// median convention.
struct QuantileSpec {
    double p = 0.5;
    double gamma = 0.5;

    void validate() const;  // requires 0 < p < 1 and 0 <= gamma <= 1
};

// 1-based order-statistic indices into the positively weighted, value-sorted
// sample: l is the lowest index whose cumulative weight fraction reaches p,
// u the lowest index strictly exceeding p, and L = min(l+1, n).
struct OrderedIndices {
    std::size_t l = 0;
    std::size_t u = 0;
    std::size_t L = 0;
};

struct QuantileEstimate {
    QuantileSpec spec;
    OrderedIndices indices;
    double value = 0.0;
    double lower_value = 0.0;  // order statistic at index l
    double upper_value = 0.0;  // order statistic at index u
    double total_weight = 0.0;
};

// Stable sort by value; each weight travels with its observation. Tied
// values keep their input order.
WeightedSample sort_with_weights(const WeightedSample& sample);

// Lowest 1-based index j such that the cumulative weight fraction
// sum_{i<=j} w_(i) / sum_i w_i is at least p. Requires `sorted` to be
// nondecreasing in value. Comparisons are done against p * total with
// compensated running sums, so the selected index does not depend on
// accumulation order.
std::size_t lower_index(const WeightedSample& sorted, const QuantileSpec& spec);

// As lower_index but with a strict inequality (fraction > p). When the
// strict threshold is only reached at the final observation, returns n.
std::size_t upper_index(const WeightedSample& sorted, const QuantileSpec& spec);

// The weighted p-quantile (1-gamma)*X_(l) + gamma*X_(u). Zero-weight
// observations are transparent: indices refer to the positively weighted
// subsample, which leaves every reported value unchanged and keeps
// l <= u <= L. With unit weights and p = gamma = 0.5 this reproduces the
// textbook median for both odd and even sample sizes.
QuantileEstimate weighted_quantile(const WeightedSample& sample, const QuantileSpec& spec);

// Weight-normalised empirical CDF: sum_i w_i I(x_i <= t) / sum_i w_i.
// Right-continuous and nondecreasing in t.
double weighted_cdf(const WeightedSample& sample, double t);

// One term of the weighted check loss:
//   w * ((1-p) I(y <= theta) - p I(y > theta)) * (y - theta).
// Always <= 0 for w >= 0.
double check_loss(double y, double w, double theta, double p);

// Sample average of the check loss, (1/n) sum_i check_loss(x_i, w_i, theta, p).
// Maximising this over theta yields the weighted p-quantile.
double objective(const WeightedSample& sample, double theta, double p);

// Brute-force maximiser of the objective: evaluates it at every observed
// value and returns a value attaining the maximum. The objective is
// piecewise linear with kinks only at observations, so the scan covers the
// global maximum. O(n^2); intended as a small-n oracle.
double argmax_objective(const WeightedSample& sample, double p);

// n * (sup_theta objective(theta) - objective(estimate)) where the estimate
// is the weighted quantile for `spec`. The 1/n normalisation of the
// objective cancels against the leading n, so the gap is computed from raw
// weighted sums. Nonnegative up to rounding.
double suboptimality_gap(const WeightedSample& sample, const QuantileSpec& spec);

}  // namespace dimed

#endif  // DIMED_QUANTILE_HPP
