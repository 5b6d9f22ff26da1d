#include "dimed/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dimed/detail/neumaier.hpp"
#include "dimed/errors.hpp"

namespace dimed {

namespace {

bool finite(double x) { return std::isfinite(x); }

// Observations with strictly positive weight, order preserved.
WeightedSample positive_part(const WeightedSample& sorted) {
    WeightedSample out;
    out.values.reserve(sorted.size());
    out.weights.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted.weights[i] > 0.0) {
            out.values.push_back(sorted.values[i]);
            out.weights.push_back(sorted.weights[i]);
        }
    }
    return out;
}

void require_sorted(const WeightedSample& sample, const char* where) {
    if (!std::is_sorted(sample.values.begin(), sample.values.end())) {
        throw InvalidInput(std::string(where) + ": sample values must be nondecreasing");
    }
}

}  // namespace

double WeightedSample::total_weight() const {
    detail::NeumaierSum s;
    for (double w : weights) s.add(w);
    return s.value();
}

void WeightedSample::validate() const {
    if (values.empty()) throw InvalidInput("WeightedSample: sample is empty");
    if (values.size() != weights.size()) {
        throw InvalidInput("WeightedSample: values and weights differ in length");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!finite(values[i])) {
            throw InvalidInput("WeightedSample: non-finite value at position " +
                               std::to_string(i + 1));
        }
        if (!finite(weights[i]) || weights[i] < 0.0) {
            throw InvalidInput("WeightedSample: weight at position " + std::to_string(i + 1) +
                               " must be finite and nonnegative");
        }
    }
    if (!(total_weight() > 0.0)) {
        throw InvalidInput("WeightedSample: total weight must be strictly positive");
    }
}

void QuantileSpec::validate() const {
    if (!finite(p) || !(p > 0.0) || !(p < 1.0)) {
        throw InvalidInput("QuantileSpec: p must lie strictly in (0,1)");
    }
    if (!finite(gamma) || gamma < 0.0 || gamma > 1.0) {
        throw InvalidInput("QuantileSpec: gamma must lie in [0,1]");
    }
}

WeightedSample sort_with_weights(const WeightedSample& sample) {
    sample.validate();
    std::vector<std::size_t> order(sample.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return sample.values[a] < sample.values[b];
    });
    WeightedSample out;
    out.values.reserve(sample.size());
    out.weights.reserve(sample.size());
    for (std::size_t i : order) {
        out.values.push_back(sample.values[i]);
        out.weights.push_back(sample.weights[i]);
    }
    return out;
}

std::size_t lower_index(const WeightedSample& sorted, const QuantileSpec& spec) {
    sorted.validate();
    spec.validate();
    require_sorted(sorted, "lower_index");
    const double threshold = spec.p * sorted.total_weight();
    detail::NeumaierSum cum;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cum.add(sorted.weights[j]);
        if (cum.value() >= threshold) return j + 1;
    }
    return sorted.size();  // rounding fallback; the total itself satisfies >= p * total
}

std::size_t upper_index(const WeightedSample& sorted, const QuantileSpec& spec) {
    sorted.validate();
    spec.validate();
    require_sorted(sorted, "upper_index");
    const double threshold = spec.p * sorted.total_weight();
    detail::NeumaierSum cum;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        cum.add(sorted.weights[j]);
        if (cum.value() > threshold) return j + 1;
    }
    // The strict threshold was never crossed before n (the cumulative
    // fraction reaches exactly 1 there and cannot exceed it): return n.
    return sorted.size();
}

QuantileEstimate weighted_quantile(const WeightedSample& sample, const QuantileSpec& spec) {
    sample.validate();
    spec.validate();
    const WeightedSample pos = positive_part(sort_with_weights(sample));
    const std::size_t m = pos.size();

    QuantileEstimate est;
    est.spec = spec;
    est.indices.l = lower_index(pos, spec);
    est.indices.u = upper_index(pos, spec);
    est.indices.L = std::min(est.indices.l + 1, m);
    est.lower_value = pos.values[est.indices.l - 1];
    est.upper_value = pos.values[est.indices.u - 1];
    // The convex combination lies in [lower, upper]; clamp away the one-ulp
    // overshoot the two roundings can introduce.
    est.value = std::clamp((1.0 - spec.gamma) * est.lower_value + spec.gamma * est.upper_value,
                           est.lower_value, est.upper_value);
    est.total_weight = pos.total_weight();
    return est;
}

double weighted_cdf(const WeightedSample& sample, double t) {
    sample.validate();
    if (!finite(t)) throw InvalidInput("weighted_cdf: t must be finite");
    detail::NeumaierSum hit;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        if (sample.values[i] <= t) hit.add(sample.weights[i]);
    }
    return hit.value() / sample.total_weight();
}

double check_loss(double y, double w, double theta, double p) {
    if (!finite(w) || w < 0.0) {
        throw InvalidInput("check_loss: weight must be finite and nonnegative");
    }
    const double sign = (y <= theta) ? (1.0 - p) : -p;
    return w * sign * (y - theta);
}

double objective(const WeightedSample& sample, double theta, double p) {
    sample.validate();
    detail::NeumaierSum s;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        s.add(check_loss(sample.values[i], sample.weights[i], theta, p));
    }
    return s.value() / static_cast<double>(sample.size());
}

double argmax_objective(const WeightedSample& sample, double p) {
    sample.validate();
    double best_theta = sample.values[0];
    double best_value = objective(sample, best_theta, p);
    for (std::size_t i = 1; i < sample.size(); ++i) {
        const double v = objective(sample, sample.values[i], p);
        if (v > best_value) {
            best_value = v;
            best_theta = sample.values[i];
        }
    }
    return best_theta;
}

double suboptimality_gap(const WeightedSample& sample, const QuantileSpec& spec) {
    const QuantileEstimate est = weighted_quantile(sample, spec);

    // The objective is piecewise linear in theta with its maximum attained at
    // the lower bracketing order statistic (argmax_objective is the brute-force
    // check of that fact). n * objective is the raw weighted sum, so the
    // normalisation cancels and the gap is a difference of two sums. The
    // difference is nonnegative by construction; the clamp removes summation
    // noise of the opposite sign.
    detail::NeumaierSum at_max;
    detail::NeumaierSum at_estimate;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        at_max.add(check_loss(sample.values[i], sample.weights[i], est.lower_value, spec.p));
        at_estimate.add(check_loss(sample.values[i], sample.weights[i], est.value, spec.p));
    }
    return std::max(0.0, at_max.value() - at_estimate.value());
}

}  // namespace dimed
