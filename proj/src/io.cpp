#include "dimed/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "dimed/errors.hpp"
#include "dimed/version.hpp"

namespace dimed::io {

namespace {

std::string trimmed(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(trimmed(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(trimmed(current));
    return fields;
}

double parse_real(const std::string& field, const std::string& where) {
    const std::string t = trimmed(field);
    if (t.empty()) throw InvalidInput(where + ": empty numeric field");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw InvalidInput(where + ": '" + t + "' is not a number");
    }
    return v;
}

bool parse_binary(const std::string& field, const std::string& where, const char* column) {
    const std::string t = trimmed(field);
    if (t == "0") return false;
    if (t == "1") return true;
    throw InvalidInput(where + ": column '" + column + "' must be 0 or 1, got '" + t + "'");
}

std::string line_ref(const std::string& name, std::size_t line) {
    return name + ":" + std::to_string(line);
}

const json* find_field(const json& j, const char* field) {
    const auto it = j.find(field);
    return it == j.end() ? nullptr : &*it;
}

double require_number(const json& j, const std::string& context, const char* field,
                      std::optional<double> fallback = std::nullopt) {
    const json* f = find_field(j, field);
    if (f == nullptr) {
        if (fallback.has_value()) return *fallback;
        throw InvalidInput("config: missing field '" + context + field + "'");
    }
    if (!f->is_number()) {
        throw InvalidInput("config: field '" + context + field + "' must be a number");
    }
    return f->get<double>();
}

void reject_unknown_fields(const json& j, const std::string& context,
                           std::initializer_list<const char*> known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw InvalidInput("config: unknown field '" + context + it.key() + "'");
    }
}

}  // namespace

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

ParsedFrame parse_dataset(std::istream& in, const std::string& name,
                          std::optional<std::int64_t> n) {
    ParsedFrame out;
    std::string line;
    std::size_t line_number = 0;

    // Header.
    if (!std::getline(in, line)) throw InvalidInput(name + ": empty dataset");
    ++line_number;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::unordered_map<std::string, std::size_t> columns;
    const std::vector<std::string> header = split_fields(line);
    std::vector<std::string> unknown;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string& label = header[i];
        if (label == "value" || label == "pi" || label == "alpha" || label == "delta") {
            if (!columns.emplace(label, i).second) {
                throw InvalidInput(name + ": duplicate column '" + label + "'");
            }
        } else {
            unknown.push_back(label);
        }
    }
    if (columns.count("value") == 0) throw InvalidInput(name + ": missing required column 'value'");
    if (columns.count("alpha") == 0) throw InvalidInput(name + ": missing required column 'alpha'");
    if (!unknown.empty()) {
        std::string msg = name + ": ignoring unknown column(s):";
        for (const std::string& u : unknown) msg += " '" + u + "'";
        out.warnings.push_back(msg);
    }
    const bool has_pi = columns.count("pi") != 0;
    const bool has_delta = columns.count("delta") != 0;
    if (!has_delta) {
        out.warnings.push_back(name + ": no 'delta' column; treating every unit as outside "
                                      "the big-data stratum (delta=0)");
    }

    std::size_t defaulted_delta = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trimmed(line).empty()) continue;
        const std::string where = line_ref(name, line_number);

        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw InvalidInput(where + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
        }

        UnitRecord unit;
        unit.x = parse_real(fields[columns["value"]], where + " (column 'value')");
        if (has_pi && !trimmed(fields[columns["pi"]]).empty()) {
            const double pi = parse_real(fields[columns["pi"]], where + " (column 'pi')");
            if (!(pi > 0.0) || pi > 1.0) {
                throw InvalidInput(where + ": pi must lie in (0,1], got " + format_double(pi));
            }
            unit.pi = pi;
        }
        unit.alpha = parse_binary(fields[columns["alpha"]], where, "alpha");
        if (has_delta) {
            const std::string d = trimmed(fields[columns["delta"]]);
            if (d.empty()) {
                ++defaulted_delta;
                unit.delta = false;
            } else {
                unit.delta = parse_binary(d, where, "delta");
            }
        }
        if (unit.alpha && !unit.pi.has_value()) {
            throw InvalidInput(where + ": a sampled unit (alpha=1) requires an inclusion "
                                       "probability pi");
        }
        try {
            unit.validate();
        } catch (const InvalidInput& e) {
            throw InvalidInput(where + ": " + e.what());
        }
        out.frame.units.push_back(unit);
    }
    if (defaulted_delta > 0) {
        out.warnings.push_back(name + ": " + std::to_string(defaulted_delta) +
                               " row(s) left 'delta' empty; defaulted to 0");
    }

    if (out.frame.units.empty()) throw InvalidInput(name + ": dataset has no data rows");
    const auto rows = static_cast<std::int64_t>(out.frame.units.size());
    out.frame.n = n.value_or(rows);
    if (out.frame.n < rows) {
        throw InvalidInput(name + ": population size n (" + std::to_string(out.frame.n) +
                           ") is smaller than the row count (" + std::to_string(rows) + ")");
    }
    out.frame.validate();
    return out;
}

ParsedFrame parse_dataset_file(const std::string& path, std::optional<std::int64_t> n) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open dataset '" + path + "'");
    return parse_dataset(in, path, n);
}

void write_dataset(std::ostream& out, const PopulationFrame& frame) {
    frame.validate();
    out << "value,pi,alpha,delta\n";
    for (const UnitRecord& unit : frame.units) {
        out << format_double(unit.x) << ',';
        if (unit.pi.has_value()) out << format_double(*unit.pi);
        out << ',' << (unit.alpha ? '1' : '0') << ',' << (unit.delta ? '1' : '0') << '\n';
    }
}

json superpopulation_to_json(const Superpopulation& dist) {
    json j;
    j["family"] = family_name(dist);
    if (const auto* d = std::get_if<NormalDist>(&dist)) {
        j["mu"] = d->mu;
        j["sigma"] = d->sigma;
    } else if (const auto* d = std::get_if<LogNormalDist>(&dist)) {
        j["mu"] = d->mu;
        j["sigma"] = d->sigma;
    } else if (const auto* d = std::get_if<ExponentialDist>(&dist)) {
        j["rate"] = d->rate;
    } else if (const auto* d = std::get_if<UniformDist>(&dist)) {
        j["a"] = d->a;
        j["b"] = d->b;
    } else if (const auto* d = std::get_if<BernoulliDist>(&dist)) {
        j["q"] = d->q;
    }
    return j;
}

Superpopulation superpopulation_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("config: 'superpopulation' must be an object");
    const json* family = find_field(j, "family");
    if (family == nullptr || !family->is_string()) {
        throw InvalidInput("config: 'superpopulation.family' must be a string");
    }
    const std::string name = family->get<std::string>();
    const std::string ctx = "superpopulation.";
    Superpopulation dist;
    if (name == "normal") {
        reject_unknown_fields(j, ctx, {"family", "mu", "sigma"});
        dist = NormalDist{require_number(j, ctx, "mu", 0.0), require_number(j, ctx, "sigma", 1.0)};
    } else if (name == "lognormal") {
        reject_unknown_fields(j, ctx, {"family", "mu", "sigma"});
        dist = LogNormalDist{require_number(j, ctx, "mu", 0.0),
                             require_number(j, ctx, "sigma", 1.0)};
    } else if (name == "exponential") {
        reject_unknown_fields(j, ctx, {"family", "rate"});
        dist = ExponentialDist{require_number(j, ctx, "rate", 1.0)};
    } else if (name == "uniform") {
        reject_unknown_fields(j, ctx, {"family", "a", "b"});
        dist = UniformDist{require_number(j, ctx, "a", 0.0), require_number(j, ctx, "b", 1.0)};
    } else if (name == "bernoulli") {
        reject_unknown_fields(j, ctx, {"family", "q"});
        dist = BernoulliDist{require_number(j, ctx, "q", 0.5)};
    } else {
        throw InvalidInput("config: unknown superpopulation family '" + name + "'");
    }
    validate(dist);
    return dist;
}

namespace {

json pi_model_to_json(const PiModel& model) {
    json j;
    if (const auto* c = std::get_if<ConstantPi>(&model)) {
        j["model"] = "constant";
        j["value"] = c->value;
    } else {
        const auto& l = std::get<LogisticPi>(model);
        j["model"] = "logistic";
        j["a"] = l.a;
        j["b"] = l.b;
    }
    return j;
}

json delta_model_to_json(const DeltaModel& model) {
    json j;
    if (const auto* c = std::get_if<ConstantDelta>(&model)) {
        j["model"] = "constant";
        j["value"] = c->value;
    } else {
        const auto& l = std::get<LogisticDelta>(model);
        j["model"] = "logistic";
        j["a"] = l.a;
        j["b"] = l.b;
    }
    return j;
}

std::string model_name(const json& j, const std::string& context) {
    if (!j.is_object()) throw InvalidInput("config: '" + context + "' must be an object");
    const json* model = find_field(j, "model");
    if (model == nullptr || !model->is_string()) {
        throw InvalidInput("config: '" + context + ".model' must be a string");
    }
    return model->get<std::string>();
}

}  // namespace

json design_to_json(const DesignSpec& design) {
    json j;
    j["pi"] = pi_model_to_json(design.pi_model);
    j["delta"] = delta_model_to_json(design.delta_model);
    j["pi_min"] = design.pi_min;
    j["known_linkage_rate"] = design.known_linkage_rate;
    return j;
}

DesignSpec design_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("config: 'design' must be an object");
    reject_unknown_fields(j, "design.", {"pi", "delta", "pi_min", "known_linkage_rate"});

    DesignSpec design;
    if (const json* pi = find_field(j, "pi")) {
        const std::string model = model_name(*pi, "design.pi");
        if (model == "constant") {
            reject_unknown_fields(*pi, "design.pi.", {"model", "value"});
            design.pi_model = ConstantPi{require_number(*pi, "design.pi.", "value")};
        } else if (model == "logistic") {
            reject_unknown_fields(*pi, "design.pi.", {"model", "a", "b"});
            design.pi_model = LogisticPi{require_number(*pi, "design.pi.", "a", 0.0),
                                         require_number(*pi, "design.pi.", "b", 0.0)};
        } else {
            throw InvalidInput("config: unknown design.pi.model '" + model + "'");
        }
    }
    if (const json* delta = find_field(j, "delta")) {
        const std::string model = model_name(*delta, "design.delta");
        if (model == "constant") {
            reject_unknown_fields(*delta, "design.delta.", {"model", "value"});
            design.delta_model = ConstantDelta{require_number(*delta, "design.delta.", "value")};
        } else if (model == "logistic") {
            reject_unknown_fields(*delta, "design.delta.", {"model", "a", "b"});
            design.delta_model = LogisticDelta{require_number(*delta, "design.delta.", "a", 0.0),
                                               require_number(*delta, "design.delta.", "b", 0.0)};
        } else {
            throw InvalidInput("config: unknown design.delta.model '" + model + "'");
        }
    }
    design.pi_min = require_number(j, "design.", "pi_min", design.pi_min);
    design.known_linkage_rate =
        require_number(j, "design.", "known_linkage_rate", design.known_linkage_rate);
    design.validate();
    return design;
}

json sim_config_to_json(const SimConfig& config) {
    json j;
    j["format"] = kConfigFormat;
    j["superpopulation"] = superpopulation_to_json(config.superpopulation);
    j["design"] = design_to_json(config.design);
    j["n"] = config.n;
    j["replications"] = config.replications;
    j["p"] = config.p;
    j["gamma"] = config.gamma;
    j["seed"] = config.seed;
    j["confidence_level"] = config.confidence_level;
    j["compute_ci"] = config.compute_ci;
    j["compute_gap"] = config.compute_gap;
    return j;
}

SimConfig sim_config_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("config: document must be a JSON object");
    reject_unknown_fields(j, "",
                          {"format", "superpopulation", "design", "n", "replications", "p",
                           "gamma", "seed", "confidence_level", "compute_ci", "compute_gap",
                           "n_grid"});
    if (const json* format = find_field(j, "format")) {
        if (!format->is_string() || format->get<std::string>() != kConfigFormat) {
            throw InvalidInput(std::string("config: field 'format' must be '") + kConfigFormat +
                               "'");
        }
    }

    SimConfig config;
    if (const json* sp = find_field(j, "superpopulation")) {
        config.superpopulation = superpopulation_from_json(*sp);
    }
    if (const json* design = find_field(j, "design")) {
        config.design = design_from_json(*design);
    }
    if (const json* n = find_field(j, "n")) {
        if (!n->is_number_integer()) throw InvalidInput("config: field 'n' must be an integer");
        config.n = n->get<std::int64_t>();
    }
    if (const json* reps = find_field(j, "replications")) {
        if (!reps->is_number_integer()) {
            throw InvalidInput("config: field 'replications' must be an integer");
        }
        config.replications = reps->get<int>();
    }
    config.p = require_number(j, "", "p", config.p);
    config.gamma = require_number(j, "", "gamma", config.gamma);
    if (const json* seed = find_field(j, "seed")) {
        if (!seed->is_number_integer()) {
            throw InvalidInput("config: field 'seed' must be an integer");
        }
        config.seed = seed->get<std::uint64_t>();
    }
    config.confidence_level = require_number(j, "", "confidence_level", config.confidence_level);
    for (const char* flag : {"compute_ci", "compute_gap"}) {
        if (const json* b = find_field(j, flag)) {
            if (!b->is_boolean()) {
                throw InvalidInput(std::string("config: field '") + flag + "' must be a boolean");
            }
            (std::string(flag) == "compute_ci" ? config.compute_ci : config.compute_gap) =
                b->get<bool>();
        }
    }
    config.validate();
    return config;
}

std::optional<std::vector<std::int64_t>> n_grid_from_json(const json& j) {
    const json* grid = find_field(j, "n_grid");
    if (grid == nullptr) return std::nullopt;
    if (!grid->is_array() || grid->empty()) {
        throw InvalidInput("config: field 'n_grid' must be a non-empty array of integers");
    }
    std::vector<std::int64_t> out;
    out.reserve(grid->size());
    for (const json& item : *grid) {
        if (!item.is_number_integer()) {
            throw InvalidInput("config: field 'n_grid' must contain only integers");
        }
        out.push_back(item.get<std::int64_t>());
    }
    return out;
}

json quantile_estimate_to_json(const QuantileEstimate& estimate) {
    json j;
    j["p"] = estimate.spec.p;
    j["gamma"] = estimate.spec.gamma;
    j["value"] = estimate.value;
    j["lower_value"] = estimate.lower_value;
    j["upper_value"] = estimate.upper_value;
    j["l"] = estimate.indices.l;
    j["u"] = estimate.indices.u;
    j["L"] = estimate.indices.L;
    j["total_weight"] = estimate.total_weight;
    return j;
}

json variance_to_json(const AsymptoticVariance& variance) {
    json j;
    j["source"] = variance.source == VarianceSource::Analytic ? "analytic" : "plug-in";
    j["p"] = variance.p;
    j["density"] = variance.density;
    j["bandwidth"] = variance.bandwidth.has_value() ? json(*variance.bandwidth) : json(nullptr);
    j["V"] = variance.V;
    j["delta_A"] = variance.delta_A;
    j["V_A"] = variance.V_A;
    j["delta_DI"] = variance.delta_DI.has_value() ? json(*variance.delta_DI) : json(nullptr);
    j["V_DI"] = variance.V_DI.has_value() ? json(*variance.V_DI) : json(nullptr);
    if (!variance.di_gap.empty()) j["di_unavailable"] = variance.di_gap;
    return j;
}

json sim_result_to_json(const SimResult& result) {
    json j;
    j["theta0"] = result.theta0;
    j["n"] = result.n;
    j["replications"] = result.replications;
    j["seed"] = result.seed;
    j["p"] = result.p;
    j["gamma"] = result.gamma;
    j["confidence_level"] = result.confidence_level;
    json estimators;
    for (EstimatorKind kind : kAllKinds) {
        const EstimatorSummary& s = result.by_kind[kind_index(kind)];
        json e;
        e["mean_estimate"] = s.mean_estimate;
        e["mean_scaled_error"] = s.mean_scaled_error;
        e["var_scaled_error"] =
            s.var_scaled_error.has_value() ? json(*s.var_scaled_error) : json(nullptr);
        e["coverage"] = s.coverage.has_value() ? json(*s.coverage) : json(nullptr);
        estimators[to_string(kind)] = e;
    }
    j["estimators"] = estimators;
    j["theoretical"] =
        result.theoretical.has_value() ? variance_to_json(*result.theoretical) : json(nullptr);
    if (!result.theoretical_gap.empty()) j["theoretical_unavailable"] = result.theoretical_gap;
    j["resampled"] = result.resampled;
    j["di_gap_median"] =
        result.di_gap_median.has_value() ? json(*result.di_gap_median) : json(nullptr);
    return j;
}

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
    return buffer;
}

json result_document(const std::string& kind, const json& config) {
    json doc;
    doc["format"] = kResultFormat;
    doc["kind"] = kind;
    doc["tool_version"] = kVersion;
    doc["config"] = config;
    doc["config_hash"] = config_hash(config);
    return doc;
}

}  // namespace dimed::io
