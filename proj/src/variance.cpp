#include "dimed/variance.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dimed/detail/neumaier.hpp"
#include "dimed/errors.hpp"
#include "dimed/normal.hpp"

namespace dimed {

namespace {

void warn(std::vector<std::string>* sink, std::string message) {
    if (sink != nullptr) sink->push_back(std::move(message));
}

EstimatorKind to_kind(DensityWeighting weighting) {
    switch (weighting) {
        case DensityWeighting::Population: return EstimatorKind::Population;
        case DensityWeighting::Survey: return EstimatorKind::Survey;
        case DensityWeighting::Integrated: return EstimatorKind::Integrated;
    }
    return EstimatorKind::Integrated;
}

}  // namespace

void VarianceInputs::validate() const {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw InvalidInput("VarianceInputs: p must lie strictly in (0,1)");
    }
    if (!std::isfinite(density_at_quantile) || !(density_at_quantile > 0.0)) {
        throw InvalidInput("VarianceInputs: density at the quantile must be positive");
    }
    const double moments[] = {m_le_A, m_gt_A, m_le_DI, m_gt_DI};
    for (double m : moments) {
        if (!std::isfinite(m) || m < 0.0) {
            throw InvalidInput("VarianceInputs: moment terms must be finite and nonnegative");
        }
    }
    if (m_le_DI > m_le_A || m_gt_DI > m_gt_A) {
        throw InvalidInput(
            "VarianceInputs: big-data moments cannot exceed their survey counterparts");
    }
}

AsymptoticVariance theoretical_variances(const VarianceInputs& inputs) {
    inputs.validate();
    const double p = inputs.p;
    const double f2 = inputs.density_at_quantile * inputs.density_at_quantile;
    const double le = (1.0 - p) * (1.0 - p);
    const double gt = p * p;

    AsymptoticVariance out;
    out.p = p;
    out.density = inputs.density_at_quantile;
    out.V = p * (1.0 - p) / f2;
    out.delta_A = (le * inputs.m_le_A + gt * inputs.m_gt_A) / f2;
    out.V_A = out.V + out.delta_A;
    out.delta_DI = (le * inputs.m_le_DI + gt * inputs.m_gt_DI) / f2;
    out.V_DI = out.V_A - *out.delta_DI;
    out.source = VarianceSource::Analytic;
    return out;
}

double kde_bandwidth(const WeightedSample& sample) {
    sample.validate();
    const double total = sample.total_weight();

    detail::NeumaierSum wx;
    detail::NeumaierSum ww;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        wx.add(sample.weights[i] * sample.values[i]);
        ww.add(sample.weights[i] * sample.weights[i]);
    }
    const double mean = wx.value() / total;

    detail::NeumaierSum wdev;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double d = sample.values[i] - mean;
        wdev.add(sample.weights[i] * d * d);
    }
    const double sd = std::sqrt(std::max(0.0, wdev.value() / total));
    if (!(sd > 0.0)) {
        throw Unavailable("kde_bandwidth: sample is degenerate (all weighted values equal)");
    }

    const double q1 = weighted_quantile(sample, {0.25, 0.5}).value;
    const double q3 = weighted_quantile(sample, {0.75, 0.5}).value;
    const double iqr = q3 - q1;

    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);

    const double m_eff = total * total / ww.value();
    return 0.9 * spread * std::pow(m_eff, -0.2);
}

double kde_density_at(const WeightedSample& sample, double point, const KdeOptions& options) {
    sample.validate();
    if (!std::isfinite(point)) throw InvalidInput("kde_density_at: point must be finite");

    const auto [min_it, max_it] = std::minmax_element(sample.values.begin(), sample.values.end());
    if (!(*min_it < *max_it)) {
        throw Unavailable("kde_density_at: need at least two distinct values");
    }

    double h = options.bandwidth.value_or(0.0);
    if (options.bandwidth.has_value()) {
        if (!std::isfinite(h) || !(h > 0.0)) {
            throw InvalidInput("kde_density_at: bandwidth override must be positive");
        }
    } else {
        h = kde_bandwidth(sample);
    }

    detail::NeumaierSum acc;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        acc.add(sample.weights[i] * normal_pdf((point - sample.values[i]) / h));
    }
    return acc.value() / (sample.total_weight() * h);
}

AsymptoticVariance plug_in_variances(const PopulationFrame& frame, double theta_hat, double p,
                                     const PlugInOptions& options,
                                     std::vector<std::string>* warnings) {
    frame.validate();
    if (!std::isfinite(theta_hat)) throw InvalidInput("plug_in_variances: theta_hat must be finite");
    const double n = static_cast<double>(frame.n);

    // Survey-side moments: Horvitz-Thompson averages over sampled units.
    detail::NeumaierSum le_A;
    detail::NeumaierSum gt_A;
    // Big-data moments: direct averages over delta=1 units, which need pi.
    detail::NeumaierSum le_DI;
    detail::NeumaierSum gt_DI;
    std::string di_gap;

    std::vector<double> design_weights;
    for (const UnitRecord& unit : frame.units) {
        if (unit.pi.has_value()) design_weights.push_back(1.0 / *unit.pi);
        const bool le = unit.x <= theta_hat;
        if (unit.alpha) {
            const double d = 1.0 / *unit.pi;
            (le ? le_A : gt_A).add(d * (d - 1.0));
        }
        if (unit.delta) {
            if (!unit.pi.has_value()) {
                if (di_gap.empty()) {
                    di_gap =
                        "a big-data unit (delta=1) has no pi, so the moments "
                        "E[delta (d-1) I(Y <= theta)] and E[delta (d-1) I(Y > theta)] "
                        "cannot be estimated";
                }
                continue;
            }
            const double d = 1.0 / *unit.pi;
            (le ? le_DI : gt_DI).add(d - 1.0);
        }
    }

    if (design_weights.size() >= 2) {
        auto mid = design_weights.begin() + design_weights.size() / 2;
        std::nth_element(design_weights.begin(), mid, design_weights.end());
        const double median_d = *mid;
        const double max_d = *std::max_element(design_weights.begin(), design_weights.end());
        if (max_d > 100.0 * median_d) {
            warn(warnings,
                 "design weights are very uneven (max d exceeds 100x the median d); "
                 "plug-in moments may be unstable");
        }
    }

    VarianceInputs inputs;
    inputs.p = p;
    inputs.m_le_A = le_A.value() / n;
    inputs.m_gt_A = gt_A.value() / n;
    if (di_gap.empty()) {
        // The two moment routes are estimated from different unit sets, so
        // sampling noise can push a DI moment above its survey counterpart
        // even though the population quantities are ordered. Clamp to keep
        // the variance ordering V <= V_DI <= V_A.
        inputs.m_le_DI = std::min(le_DI.value() / n, inputs.m_le_A);
        inputs.m_gt_DI = std::min(gt_DI.value() / n, inputs.m_gt_A);
    }

    const WeightedSample density_sample =
        build_weighted_sample(frame, to_kind(options.density_weighting));
    const double bandwidth = options.bandwidth.value_or(kde_bandwidth(density_sample));
    KdeOptions kde_options;
    kde_options.bandwidth = bandwidth;
    const double f_hat = kde_density_at(density_sample, theta_hat, kde_options);
    if (!(f_hat > 0.0)) {
        throw Unavailable("plug_in_variances: density estimate at theta_hat is not positive");
    }
    inputs.density_at_quantile = f_hat;

    AsymptoticVariance out = theoretical_variances(inputs);
    out.source = VarianceSource::PlugIn;
    out.bandwidth = bandwidth;
    if (!di_gap.empty()) {
        out.delta_DI.reset();
        out.V_DI.reset();
        out.di_gap = di_gap;
    }
    return out;
}

std::pair<double, double> confidence_interval(double theta_hat, double variance,
                                              std::int64_t n, double level) {
    if (!std::isfinite(theta_hat)) throw InvalidInput("confidence_interval: theta_hat must be finite");
    if (!std::isfinite(variance) || variance < 0.0) {
        throw InvalidInput("confidence_interval: variance must be finite and nonnegative");
    }
    if (n < 1) throw InvalidInput("confidence_interval: n must be at least 1");
    if (!(level > 0.0) || !(level < 1.0)) {
        throw InvalidInput("confidence_interval: level must lie strictly in (0,1)");
    }
    const double z = normal_quantile(0.5 * (1.0 + level));
    const double half = z * std::sqrt(variance / static_cast<double>(n));
    return {theta_hat - half, theta_hat + half};
}

MomentTriple weighted_moment_triple(const PopulationFrame& frame, double y) {
    frame.validate();
    if (!frame.fully_stored()) {
        throw InvalidInput("weighted_moment_triple: requires all population units to be stored");
    }
    if (!std::isfinite(y)) throw InvalidInput("weighted_moment_triple: y must be finite");

    detail::NeumaierSum plain;
    detail::NeumaierSum survey;
    detail::NeumaierSum integrated;
    for (const UnitRecord& unit : frame.units) {
        if (unit.x > y) continue;
        plain.add(1.0);
        survey.add(survey_weight(unit));
        integrated.add(integrated_weight(unit));
    }
    const double n = static_cast<double>(frame.n);
    return {plain.value() / n, survey.value() / n, integrated.value() / n};
}

}  // namespace dimed
