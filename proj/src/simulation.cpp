#include "dimed/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <string>
#include <thread>

#include "dimed/detail/neumaier.hpp"
#include "dimed/errors.hpp"

namespace dimed {

namespace {

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Independent substream per (master seed, replication, attempt), so workers
// can pick up replications in any order and resampled frames never overlap
// an existing stream.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication, std::uint64_t attempt) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ (replication + 0x9E3779B97F4A7C15ULL));
    s = splitmix64(s ^ (attempt + 0xBF58476D1CE4E5B9ULL));
    return s;
}

// Uniform in the open interval (0,1); the offset keeps the endpoints out so
// inverse-CDF transforms stay finite.
double uniform01(std::mt19937_64& engine) {
    return (static_cast<double>(engine() >> 11) + 0.5) * 0x1.0p-53;
}

struct PiValidator {
    void operator()(const ConstantPi& m) const {
        if (!std::isfinite(m.value) || !(m.value > 0.0) || m.value > 1.0) {
            throw InvalidInput("DesignSpec: constant pi must lie in (0,1]");
        }
    }
    void operator()(const LogisticPi& m) const {
        if (!std::isfinite(m.a) || !std::isfinite(m.b)) {
            throw InvalidInput("DesignSpec: logistic pi parameters must be finite");
        }
    }
};

struct DeltaValidator {
    void operator()(const ConstantDelta& m) const {
        if (!std::isfinite(m.value) || m.value < 0.0 || m.value > 1.0) {
            throw InvalidInput("DesignSpec: constant delta probability must lie in [0,1]");
        }
    }
    void operator()(const LogisticDelta& m) const {
        if (!std::isfinite(m.a) || !std::isfinite(m.b)) {
            throw InvalidInput("DesignSpec: logistic delta parameters must be finite");
        }
    }
};

}  // namespace

void DesignSpec::validate() const {
    std::visit(PiValidator{}, pi_model);
    std::visit(DeltaValidator{}, delta_model);
    if (!std::isfinite(pi_min) || !(pi_min > 0.0) || pi_min > 1.0) {
        throw InvalidInput("DesignSpec: pi_min must lie in (0,1]");
    }
    if (!std::isfinite(known_linkage_rate) || known_linkage_rate < 0.0 ||
        known_linkage_rate > 1.0) {
        throw InvalidInput("DesignSpec: known_linkage_rate must lie in [0,1]");
    }
}

bool DesignSpec::informative() const {
    const auto* logit = std::get_if<LogisticPi>(&pi_model);
    return logit != nullptr && logit->b != 0.0;
}

double DesignSpec::pi_at(double x) const {
    if (const auto* constant = std::get_if<ConstantPi>(&pi_model)) return constant->value;
    const auto& logit = std::get<LogisticPi>(pi_model);
    return std::clamp(logistic(logit.a + logit.b * x), pi_min, 1.0);
}

double DesignSpec::delta_probability_at(double x) const {
    if (const auto* constant = std::get_if<ConstantDelta>(&delta_model)) return constant->value;
    const auto& logit = std::get<LogisticDelta>(delta_model);
    return logistic(logit.a + logit.b * x);
}

void SimConfig::validate() const {
    dimed::validate(superpopulation);
    design.validate();
    if (n < 2) throw InvalidInput("SimConfig: n must be at least 2");
    if (replications < 1) throw InvalidInput("SimConfig: replications must be at least 1");
    QuantileSpec{p, gamma}.validate();
    if (!(confidence_level > 0.0) || !(confidence_level < 1.0)) {
        throw InvalidInput("SimConfig: confidence_level must lie strictly in (0,1)");
    }
}

int default_thread_count() {
    if (const char* env = std::getenv("DIMED_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed >= 1 && parsed <= 4096) {
            return static_cast<int>(parsed);
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

PopulationFrame generate_frame(const SimConfig& config, int replication_index, int attempt) {
    config.validate();
    std::mt19937_64 engine(stream_seed(config.seed, static_cast<std::uint64_t>(replication_index),
                                       static_cast<std::uint64_t>(attempt)));
    const bool restricted_linkage = !config.design.independent_linkage();

    PopulationFrame frame;
    frame.n = config.n;
    frame.units.reserve(static_cast<std::size_t>(config.n));
    for (std::int64_t i = 0; i < config.n; ++i) {
        UnitRecord unit;
        unit.x = draw(config.superpopulation, uniform01(engine));
        const double pi = config.design.pi_at(unit.x);
        unit.pi = pi;
        bool delta = uniform01(engine) < config.design.delta_probability_at(unit.x);
        unit.alpha = uniform01(engine) < pi;
        if (restricted_linkage) {
            const double u_link = uniform01(engine);
            if (delta && !unit.alpha) {
                delta = u_link < config.design.known_linkage_rate;
            }
        }
        unit.delta = delta;
        frame.units.push_back(unit);
    }
    return frame;
}

ReplicationResult run_replication(const SimConfig& config, int replication_index) {
    config.validate();
    const double theta0 = true_quantile(config.superpopulation, config.p);
    const QuantileSpec spec{config.p, config.gamma};

    ReplicationResult result;
    PopulationFrame frame;
    // A frame with no surveyed unit leaves the survey (and possibly the
    // integrated) weight vector empty; redraw from a disjoint stream.
    for (int attempt = 0;; ++attempt) {
        if (attempt > 100) {
            throw Unavailable("run_replication: 100 consecutive degenerate frames; "
                              "the design almost never samples anything");
        }
        frame = generate_frame(config, replication_index, attempt);
        const bool any_sampled =
            std::any_of(frame.units.begin(), frame.units.end(),
                        [](const UnitRecord& u) { return u.alpha; });
        if (any_sampled) {
            result.resamples = attempt;
            break;
        }
    }

    // One bandwidth per frame: it depends only on the integrated sample, not
    // on the evaluation point, and it is the expensive part of the plug-in.
    std::optional<double> bandwidth;
    if (config.compute_ci) {
        bandwidth = kde_bandwidth(build_weighted_sample(frame, EstimatorKind::Integrated));
    }

    for (EstimatorKind kind : kAllKinds) {
        const std::size_t k = kind_index(kind);
        const QuantileEstimate est = estimate(frame, kind, spec);
        result.estimate[k] = est.value;

        if (config.compute_ci) {
            PlugInOptions options;
            options.bandwidth = bandwidth;
            const AsymptoticVariance pv = plug_in_variances(frame, est.value, config.p, options);
            double variance = pv.V;
            if (kind == EstimatorKind::Survey) variance = pv.V_A;
            if (kind == EstimatorKind::Integrated) {
                if (!pv.V_DI.has_value()) {
                    throw Unavailable("run_replication: integrated variance unavailable: " +
                                      pv.di_gap);
                }
                variance = *pv.V_DI;
            }
            const auto [lo, hi] =
                confidence_interval(est.value, variance, config.n, config.confidence_level);
            result.ci_hit[k] = (theta0 >= lo && theta0 <= hi);
        }
    }

    if (config.compute_gap) {
        const WeightedSample integrated =
            build_weighted_sample(frame, EstimatorKind::Integrated);
        result.di_gap = suboptimality_gap(integrated, spec);
    }
    return result;
}

double sample_median(std::vector<double> values) {
    if (values.empty()) throw InvalidInput("sample_median: empty sample");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

SimResult run_monte_carlo(const SimConfig& config) {
    return run_monte_carlo(config, default_thread_count());
}

SimResult run_monte_carlo(const SimConfig& config, int threads,
                          std::vector<ReplicationResult>* keep) {
    config.validate();
    const double theta0 = true_quantile(config.superpopulation, config.p);
    const int total = config.replications;

    std::vector<ReplicationResult> results(static_cast<std::size_t>(total));
    if (threads <= 0) threads = default_thread_count();
    threads = std::min(threads, total);

    if (threads <= 1) {
        for (int r = 0; r < total; ++r) results[static_cast<std::size_t>(r)] = run_replication(config, r);
    } else {
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]() {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= total) return;
                try {
                    results[static_cast<std::size_t>(r)] = run_replication(config, r);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Aggregation runs in replication order: the result is a pure function
    // of the config, whatever the worker scheduling was.
    SimResult out;
    out.theta0 = theta0;
    out.n = config.n;
    out.replications = total;
    out.seed = config.seed;
    out.p = config.p;
    out.gamma = config.gamma;
    out.confidence_level = config.confidence_level;

    const double root_n = std::sqrt(static_cast<double>(config.n));
    for (EstimatorKind kind : kAllKinds) {
        const std::size_t k = kind_index(kind);
        detail::NeumaierSum sum_est;
        detail::NeumaierSum sum_err;
        int hits = 0;
        for (const ReplicationResult& r : results) {
            sum_est.add(r.estimate[k]);
            sum_err.add(root_n * (r.estimate[k] - theta0));
            if (r.ci_hit[k]) ++hits;
        }
        EstimatorSummary& summary = out.by_kind[k];
        const double denom = static_cast<double>(total);
        summary.mean_estimate = sum_est.value() / denom;
        summary.mean_scaled_error = sum_err.value() / denom;
        if (total >= 2) {
            detail::NeumaierSum sq;
            for (const ReplicationResult& r : results) {
                const double dev = root_n * (r.estimate[k] - theta0) - summary.mean_scaled_error;
                sq.add(dev * dev);
            }
            summary.var_scaled_error = sq.value() / (denom - 1.0);
        }
        if (config.compute_ci) summary.coverage = static_cast<double>(hits) / denom;
    }

    for (const ReplicationResult& r : results) out.resampled += r.resamples;

    if (config.compute_gap) {
        std::vector<double> gaps;
        gaps.reserve(results.size());
        for (const ReplicationResult& r : results) gaps.push_back(r.di_gap);
        out.di_gap_median = sample_median(std::move(gaps));
    }

    if (!has_density(config.superpopulation)) {
        out.theoretical_gap = "the superpopulation has no density, so the variance theory "
                              "does not apply";
    } else if (!config.design.independent_linkage()) {
        out.theoretical_gap = "restricted linkage couples delta to alpha; the variance "
                              "formulas assume conditionally independent sampling";
    } else {
        out.theoretical =
            theoretical_variances(design_variance_inputs(config.superpopulation, config.design,
                                                         config.p));
    }

    if (keep != nullptr) *keep = std::move(results);
    return out;
}

VarianceInputs design_variance_inputs(const Superpopulation& superpopulation,
                                      const DesignSpec& design, double p) {
    dimed::validate(superpopulation);
    design.validate();
    if (!(p > 0.0) || !(p < 1.0)) {
        throw InvalidInput("design_variance_inputs: p must lie strictly in (0,1)");
    }
    if (!has_density(superpopulation)) {
        throw Unavailable("design_variance_inputs: the superpopulation has no density");
    }
    if (!design.independent_linkage()) {
        throw Unavailable("design_variance_inputs: restricted linkage has no closed-form "
                          "design moments");
    }

    // Moments of the form E[g(X) I(X <= theta_p)] become integrals of
    // g(Q(u)) over u in (0,p) under the quantile substitution; the indicator
    // splits the domain exactly at p. Composite midpoint keeps the
    // evaluation away from the endpoints, where Q diverges.
    const auto integrate = [&](double lo, double hi, auto&& integrand) {
        constexpr int kCells = 50000;
        const double width = (hi - lo) / kCells;
        detail::NeumaierSum acc;
        for (int i = 0; i < kCells; ++i) {
            const double u = lo + (static_cast<double>(i) + 0.5) * width;
            acc.add(integrand(u));
        }
        return acc.value() * width;
    };
    const auto excess_weight = [&](double u) {
        const double x = draw(superpopulation, u);
        return 1.0 / design.pi_at(x) - 1.0;
    };
    const auto excess_weight_in_b = [&](double u) {
        const double x = draw(superpopulation, u);
        return design.delta_probability_at(x) * (1.0 / design.pi_at(x) - 1.0);
    };

    VarianceInputs inputs;
    inputs.p = p;
    inputs.density_at_quantile = density(superpopulation, true_quantile(superpopulation, p));
    inputs.m_le_A = integrate(0.0, p, excess_weight);
    inputs.m_gt_A = integrate(p, 1.0, excess_weight);
    inputs.m_le_DI = std::min(integrate(0.0, p, excess_weight_in_b), inputs.m_le_A);
    inputs.m_gt_DI = std::min(integrate(p, 1.0, excess_weight_in_b), inputs.m_gt_A);
    return inputs;
}

std::vector<SweepRow> consistency_sweep(const SimConfig& config,
                                        const std::vector<std::int64_t>& n_grid,
                                        int threads) {
    config.validate();
    if (n_grid.empty()) throw InvalidInput("consistency_sweep: n_grid is empty");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
        throw InvalidInput("consistency_sweep: n_grid must be strictly increasing");
    }

    const double theta0 = true_quantile(config.superpopulation, config.p);
    std::vector<SweepRow> rows;
    rows.reserve(n_grid.size());
    for (std::int64_t n : n_grid) {
        SimConfig stage = config;
        stage.n = n;
        stage.compute_ci = false;  // sweeps summarise point errors only

        std::vector<ReplicationResult> reps;
        SimResult result = run_monte_carlo(stage, threads, &reps);

        SweepRow row;
        row.n = n;
        row.resampled = result.resampled;
        for (EstimatorKind kind : kAllKinds) {
            const std::size_t k = kind_index(kind);
            std::vector<double> abs_err;
            abs_err.reserve(reps.size());
            for (const ReplicationResult& r : reps) {
                abs_err.push_back(std::abs(r.estimate[k] - theta0));
            }
            row.median_abs_error[k] = sample_median(std::move(abs_err));
        }
        std::vector<double> survey_gap;
        std::vector<double> integrated_gap;
        survey_gap.reserve(reps.size());
        integrated_gap.reserve(reps.size());
        const std::size_t pop = kind_index(EstimatorKind::Population);
        for (const ReplicationResult& r : reps) {
            survey_gap.push_back(
                std::abs(r.estimate[kind_index(EstimatorKind::Survey)] - r.estimate[pop]));
            integrated_gap.push_back(
                std::abs(r.estimate[kind_index(EstimatorKind::Integrated)] - r.estimate[pop]));
        }
        row.median_survey_gap = sample_median(std::move(survey_gap));
        row.median_integrated_gap = sample_median(std::move(integrated_gap));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dimed
