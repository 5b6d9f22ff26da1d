#ifndef DIMED_VARIANCE_HPP
#define DIMED_VARIANCE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimed/frame.hpp"
#include "dimed/quantile.hpp"

namespace dimed {

// Ingredients of the asymptotic variance formulas: the density of the
// observations at the target quantile and the four design-weight moments
//   m_le_A  = E[(d-1) I(Y <= theta0)]      m_gt_A  = E[(d-1) I(Y > theta0)]
//   m_le_DI = E[delta (d-1) I(Y <= theta0)] m_gt_DI = E[delta (d-1) I(Y > theta0)]
// with d = 1/pi. All moments are nonnegative (d >= 1), and the DI moments
// never exceed their survey counterparts (delta is an indicator).
struct VarianceInputs {
    double p = 0.5;
    double density_at_quantile = 0.0;
    double m_le_A = 0.0;
    double m_gt_A = 0.0;
    double m_le_DI = 0.0;
    double m_gt_DI = 0.0;

    void validate() const;
};

enum class VarianceSource { Analytic, PlugIn };

// Scaled asymptotic variances of the three estimators: sqrt(n) times the
// estimation error of the population, survey, and integrated quantile is
// asymptotically N(0, V), N(0, V_A), N(0, V_DI) respectively, with
//   V    = p (1-p) / f^2
//   V_A  = V + delta_A
//   V_DI = V_A - delta_DI
// which satisfy V <= V_DI <= V_A. The DI fields are absent when the data
// cannot support the delta moments (di_gap carries the reason).
struct AsymptoticVariance {
    double p = 0.5;
    double density = 0.0;
    double V = 0.0;
    double delta_A = 0.0;
    double V_A = 0.0;
    std::optional<double> delta_DI;
    std::optional<double> V_DI;
    std::string di_gap;                // why the DI side is missing, if it is
    std::optional<double> bandwidth;   // KDE bandwidth (plug-in only)
    VarianceSource source = VarianceSource::Analytic;
};

// Evaluate the variance formulas at exact inputs. At p = 0.5 these reduce
// to V = 1/(4 f^2), delta_A = E[d-1]/(4 f^2), delta_DI = E[delta(d-1)]/(4 f^2).
AsymptoticVariance theoretical_variances(const VarianceInputs& inputs);

// Gaussian-kernel density estimate at a single point, weight-normalised.
// The default bandwidth is Silverman's rule on the weighted sample,
// h = 0.9 * min(sd, IQR/1.34) * m^(-1/5), with m the effective sample size
// (sum w)^2 / sum w^2.
struct KdeOptions {
    std::optional<double> bandwidth;  // overrides Silverman's rule
};
double kde_bandwidth(const WeightedSample& sample);
double kde_density_at(const WeightedSample& sample, double point, const KdeOptions& options = {});

// Which weighting supplies the sample for the density estimate.
enum class DensityWeighting { Population, Survey, Integrated };

struct PlugInOptions {
    DensityWeighting density_weighting = DensityWeighting::Integrated;
    std::optional<double> bandwidth;
};

// Plug-in evaluation of the variance formulas from an observed frame: the
// survey moments are Horvitz-Thompson averages over sampled units, the DI
// moments direct averages over big-data units, and the density comes from
// kde_density_at on the weighted sample at theta_hat. When a big-data unit
// lacks pi the DI side is reported as unavailable rather than guessed.
// Appends diagnostics (e.g. very uneven design weights) to *warnings.
AsymptoticVariance plug_in_variances(const PopulationFrame& frame, double theta_hat, double p,
                                     const PlugInOptions& options = {},
                                     std::vector<std::string>* warnings = nullptr);

// Normal-approximation interval theta_hat +/- z_{(1+level)/2} sqrt(variance/n).
std::pair<double, double> confidence_interval(double theta_hat, double variance,
                                              std::int64_t n, double level);

// The three weightings of the indicator I(X <= y), averaged over the
// population size: plain, survey (Horvitz-Thompson), and integrated. All
// three share the same expectation; the triple exists to verify that on
// simulated frames. Requires full unit storage.
struct MomentTriple {
    double population = 0.0;
    double survey = 0.0;
    double integrated = 0.0;
};
MomentTriple weighted_moment_triple(const PopulationFrame& frame, double y);

}  // namespace dimed

#endif  // DIMED_VARIANCE_HPP
