#include "dimed/frame.hpp"

#include <cmath>
#include <string>

#include "dimed/errors.hpp"

namespace dimed {

void UnitRecord::validate() const {
    if (!std::isfinite(x)) throw InvalidInput("UnitRecord: x must be finite");
    if (pi.has_value()) {
        if (!std::isfinite(*pi) || !(*pi > 0.0) || *pi > 1.0) {
            throw InvalidInput("UnitRecord: pi must lie in (0,1]");
        }
    }
    if (alpha && !pi.has_value()) {
        throw InvalidInput("UnitRecord: a unit with alpha=1 requires an inclusion probability pi");
    }
}

void PopulationFrame::validate() const {
    if (units.empty()) throw InvalidInput("PopulationFrame: no units stored");
    if (n < static_cast<std::int64_t>(units.size())) {
        throw InvalidInput("PopulationFrame: population size n (" + std::to_string(n) +
                           ") is smaller than the number of stored units (" +
                           std::to_string(units.size()) + ")");
    }
    for (const UnitRecord& unit : units) unit.validate();
}

const char* to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Population: return "population";
        case EstimatorKind::Survey: return "survey";
        case EstimatorKind::Integrated: return "integrated";
    }
    return "unknown";
}

std::optional<EstimatorKind> estimator_kind_from_string(std::string_view name) {
    if (name == "population") return EstimatorKind::Population;
    if (name == "survey") return EstimatorKind::Survey;
    if (name == "integrated") return EstimatorKind::Integrated;
    return std::nullopt;
}

double survey_weight(const UnitRecord& unit) {
    if (!unit.alpha) return 0.0;
    if (!unit.pi.has_value() || !(*unit.pi > 0.0)) {
        throw InvalidInput("survey_weight: sampled unit (alpha=1) has no positive pi");
    }
    return 1.0 / *unit.pi;
}

double integrated_weight(const UnitRecord& unit) {
    if (unit.delta) return 1.0;
    return survey_weight(unit);
}

WeightedSample build_weighted_sample(const PopulationFrame& frame, EstimatorKind kind) {
    frame.validate();
    WeightedSample sample;
    sample.values.reserve(frame.units.size());
    sample.weights.reserve(frame.units.size());

    switch (kind) {
        case EstimatorKind::Population:
            if (!frame.fully_stored()) {
                throw InvalidInput(
                    "build_weighted_sample: the population estimator requires all " +
                    std::to_string(frame.n) + " units to be stored, got " +
                    std::to_string(frame.units.size()));
            }
            for (const UnitRecord& unit : frame.units) {
                sample.values.push_back(unit.x);
                sample.weights.push_back(1.0);
            }
            break;
        case EstimatorKind::Survey:
        case EstimatorKind::Integrated:
            for (const UnitRecord& unit : frame.units) {
                const double w = (kind == EstimatorKind::Survey) ? survey_weight(unit)
                                                                 : integrated_weight(unit);
                if (w > 0.0) {
                    sample.values.push_back(unit.x);
                    sample.weights.push_back(w);
                }
            }
            break;
    }

    if (sample.values.empty() || !(sample.total_weight() > 0.0)) {
        throw InvalidInput(std::string("build_weighted_sample: no unit carries positive ") +
                           to_string(kind) + " weight");
    }
    return sample;
}

QuantileEstimate estimate(const PopulationFrame& frame, EstimatorKind kind,
                          const QuantileSpec& spec) {
    return weighted_quantile(build_weighted_sample(frame, kind), spec);
}

}  // namespace dimed
