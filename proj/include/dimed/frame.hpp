#ifndef DIMED_FRAME_HPP
#define DIMED_FRAME_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dimed/quantile.hpp"

namespace dimed {

// One population unit: its observed value, the survey inclusion
// probability (when known), and membership indicators for the survey
// stratum (alpha) and the big-data stratum (delta).
struct UnitRecord {
    double x = 0.0;
    std::optional<double> pi;  // inclusion probability, in (0,1]
    bool alpha = false;        // selected into the survey stratum
    bool delta = false;        // present in the big-data stratum

    void validate() const;
};

// The units available for estimation plus the population size n. Only the
// observed units need to be stored; n may exceed units.size() when units
// outside both strata were never collected.
struct PopulationFrame {
    std::vector<UnitRecord> units;
    std::int64_t n = 0;

    bool fully_stored() const {
        return n == static_cast<std::int64_t>(units.size());
    }
    void validate() const;
};

enum class EstimatorKind { Population, Survey, Integrated };

inline constexpr EstimatorKind kAllKinds[] = {
    EstimatorKind::Population, EstimatorKind::Survey, EstimatorKind::Integrated};

constexpr std::size_t kind_index(EstimatorKind kind) {
    return static_cast<std::size_t>(kind);
}

const char* to_string(EstimatorKind kind);
std::optional<EstimatorKind> estimator_kind_from_string(std::string_view name);

// Horvitz-Thompson design weight alpha_i / pi_i: the reciprocal inclusion
// probability for sampled units, zero for unsampled ones. Throws when a
// sampled unit has no usable pi.
double survey_weight(const UnitRecord& unit);

// Integrated weight delta_i + (1 - delta_i) * survey_weight: big-data units
// count once regardless of pi; everything else falls through to the survey
// weight.
double integrated_weight(const UnitRecord& unit);

// Weight vector for the requested estimator. Population weighting requires
// every unit to be stored (all weights are one); Survey and Integrated
// weighting keep only units with positive weight, which cannot change any
// estimate. Throws when no positive weight remains.
WeightedSample build_weighted_sample(const PopulationFrame& frame, EstimatorKind kind);

// The weighted quantile of the frame under the requested weighting.
QuantileEstimate estimate(const PopulationFrame& frame, EstimatorKind kind,
                          const QuantileSpec& spec);

}  // namespace dimed

#endif  // DIMED_FRAME_HPP
