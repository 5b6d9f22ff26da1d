#ifndef DIMED_SIMULATION_HPP
#define DIMED_SIMULATION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dimed/distributions.hpp"
#include "dimed/frame.hpp"
#include "dimed/variance.hpp"

namespace dimed {

// Survey inclusion probability as a function of the observed value.
// A logistic slope b != 0 makes the design informative: the sampling rate
// depends on the value being estimated, so the unweighted survey sample is
// biased.
struct ConstantPi {
    double value = 0.5;
};
struct LogisticPi {
    double a = 0.0;
    double b = 0.0;  // pi(x) = clamp(logistic(a + b x), pi_min, 1)
};
using PiModel = std::variant<ConstantPi, LogisticPi>;

// Probability of big-data membership given the observed value. A logistic
// slope makes membership depend on x, i.e. the big data are not
// missing-at-random.
struct ConstantDelta {
    double value = 0.5;
};
struct LogisticDelta {
    double a = 0.0;
    double b = 0.0;
};
using DeltaModel = std::variant<ConstantDelta, LogisticDelta>;

struct DesignSpec {
    PiModel pi_model = ConstantPi{};
    DeltaModel delta_model = ConstantDelta{};
    // Lower clamp for logistic inclusion probabilities. Keeping pi away from
    // zero bounds the design weights, which the variance theory requires.
    double pi_min = 0.01;
    // Linkage between the strata. At 1 (default) big-data membership is kept
    // for every unit and delta is conditionally independent of the survey
    // indicator given (x, pi). Below 1, a big-data unit outside the survey
    // keeps delta = 1 only with this probability (its survey linkage is
    // "known"); surveyed units are always linkable. This couples delta to
    // alpha, so the variance formulas no longer apply -- the estimators
    // merely stay well-defined.
    double known_linkage_rate = 1.0;

    void validate() const;
    bool informative() const;
    bool independent_linkage() const { return known_linkage_rate >= 1.0; }

    double pi_at(double x) const;
    double delta_probability_at(double x) const;
};

struct SimConfig {
    Superpopulation superpopulation = NormalDist{};
    DesignSpec design;
    std::int64_t n = 1000;
    int replications = 100;
    double p = 0.5;
    double gamma = 0.5;
    std::uint64_t seed = 0;
    double confidence_level = 0.95;
    // Compute plug-in confidence intervals per replication (the coverage
    // summary needs them; convergence sweeps skip them for speed).
    bool compute_ci = true;
    // Also compute the scaled check-loss suboptimality gap of the integrated
    // estimate in every replication.
    bool compute_gap = false;

    void validate() const;
};

struct ReplicationResult {
    std::array<double, 3> estimate{};  // indexed by kind_index(EstimatorKind)
    std::array<bool, 3> ci_hit{};      // theta0 inside the plug-in CI
    double di_gap = 0.0;               // only when compute_gap is set
    int resamples = 0;                 // degenerate frames redrawn for this index
};

struct EstimatorSummary {
    double mean_estimate = 0.0;
    double mean_scaled_error = 0.0;          // mean of sqrt(n) (estimate - theta0)
    std::optional<double> var_scaled_error;  // absent when replications < 2
    std::optional<double> coverage;          // absent when CIs were not computed
};

struct SimResult {
    double theta0 = 0.0;
    std::int64_t n = 0;
    int replications = 0;
    std::uint64_t seed = 0;
    double p = 0.5;
    double gamma = 0.5;
    double confidence_level = 0.95;
    std::array<EstimatorSummary, 3> by_kind{};
    // Exact variance formulas evaluated for this design, when the design
    // admits them (a density exists and linkage is independent).
    std::optional<AsymptoticVariance> theoretical;
    std::string theoretical_gap;
    int resampled = 0;
    std::optional<double> di_gap_median;
};

// Thread count for Monte Carlo runs: the DIMED_THREADS environment
// variable when set, otherwise the hardware concurrency.
int default_thread_count();

// Draw one population frame: n i.i.d. units (X_i, pi_i, delta_i) from the
// design with alpha_i ~ Bernoulli(pi_i). Deterministic given
// (seed, replication_index); `attempt` selects a disjoint stream when a
// degenerate frame must be redrawn.
PopulationFrame generate_frame(const SimConfig& config, int replication_index, int attempt = 0);

// All three estimates on one generated frame, plus plug-in CI hits.
// Degenerate frames (no surveyed unit) are resampled from a perturbed
// stream; the attempt count is recorded.
ReplicationResult run_replication(const SimConfig& config, int replication_index);

// Run the full study. Replications execute on `threads` workers; results
// are merged in replication order, so the outcome is identical for any
// thread count. `keep`, when given, receives the per-replication results.
SimResult run_monte_carlo(const SimConfig& config, int threads,
                          std::vector<ReplicationResult>* keep = nullptr);
SimResult run_monte_carlo(const SimConfig& config);

// Exact moment inputs for theoretical_variances under this design,
// evaluated by quadrature over the superpopulation (absolute accuracy
// around 1e-8). Requires a density and independent linkage.
VarianceInputs design_variance_inputs(const Superpopulation& superpopulation,
                                      const DesignSpec& design, double p);

struct SweepRow {
    std::int64_t n = 0;
    std::array<double, 3> median_abs_error{};  // median |estimate - theta0|
    double median_survey_gap = 0.0;      // median |survey - population estimate|
    double median_integrated_gap = 0.0;  // median |integrated - population estimate|
    int resampled = 0;
};

// Convergence study: repeat the configured study at each population size in
// n_grid (strictly increasing) and summarise the estimation errors.
std::vector<SweepRow> consistency_sweep(const SimConfig& config,
                                        const std::vector<std::int64_t>& n_grid,
                                        int threads = 0);

// Median of a sample (average of the two central order statistics for even
// sizes). Used by the sweep summaries and exposed for tests.
double sample_median(std::vector<double> values);

}  // namespace dimed

#endif  // DIMED_SIMULATION_HPP
