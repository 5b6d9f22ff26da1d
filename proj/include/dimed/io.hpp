#ifndef DIMED_IO_HPP
#define DIMED_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimed/frame.hpp"
#include "dimed/simulation.hpp"
#include "dimed/variance.hpp"

namespace dimed::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kConfigFormat = "dimed-config/1";
inline constexpr const char* kResultFormat = "dimed-result/1";

// A value serialised with enough digits to round-trip exactly (%.17g).
std::string format_double(double v);

struct ParsedFrame {
    PopulationFrame frame;
    std::vector<std::string> warnings;
};

// Read a dataset in the CSV schema
//   value (required real), pi (optional real in (0,1]), alpha (required 0/1),
//   delta (optional 0/1, defaults to 0 with a warning).
// Accepts LF or CRLF line endings and a UTF-8 BOM; errors name the offending
// line. `n` is the population size; it defaults to the number of rows and
// must not be smaller.
ParsedFrame parse_dataset(std::istream& in, const std::string& name,
                          std::optional<std::int64_t> n = std::nullopt);
ParsedFrame parse_dataset_file(const std::string& path,
                               std::optional<std::int64_t> n = std::nullopt);

// Inverse of parse_dataset on valid frames (up to the population size, which
// the CSV schema does not carry).
void write_dataset(std::ostream& out, const PopulationFrame& frame);

json superpopulation_to_json(const Superpopulation& dist);
Superpopulation superpopulation_from_json(const json& j);

json design_to_json(const DesignSpec& design);
DesignSpec design_from_json(const json& j);

json sim_config_to_json(const SimConfig& config);
// Absent fields take the documented defaults; unknown or ill-typed fields
// are rejected by name.
SimConfig sim_config_from_json(const json& j);

// The optional top-level "n_grid" array used by sweep configs.
std::optional<std::vector<std::int64_t>> n_grid_from_json(const json& j);

json quantile_estimate_to_json(const QuantileEstimate& estimate);
json variance_to_json(const AsymptoticVariance& variance);
json sim_result_to_json(const SimResult& result);

// FNV-1a 64 over the serialised document; stable fingerprint for
// reproducibility metadata.
std::string config_hash(const json& config);

// Shared result-document scaffolding: format, tool version and config hash.
json result_document(const std::string& kind, const json& config);

}  // namespace dimed::io

#endif  // DIMED_IO_HPP
