// Command-line interface: point estimates, plug-in variances, Monte Carlo
// studies and convergence sweeps over the integrated/survey/population
// weighted quantile estimators.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dimed/errors.hpp"
#include "dimed/io.hpp"
#include "dimed/simulation.hpp"
#include "dimed/variance.hpp"
#include "dimed/version.hpp"

namespace {

using dimed::io::json;

constexpr int kExitInput = 2;
constexpr int kExitUnavailable = 3;
constexpr int kExitInternal = 4;

struct CommonOptions {
    std::string input;
    std::string config_path;
    std::string out;
    std::string kinds = "all";
    std::string dump_replications;
    std::optional<std::int64_t> n;
    std::optional<double> p;
    std::optional<double> gamma;
    std::optional<double> level;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
};

std::vector<dimed::EstimatorKind> parse_kinds(const std::string& spec) {
    if (spec == "all") {
        return {dimed::EstimatorKind::Population, dimed::EstimatorKind::Survey,
                dimed::EstimatorKind::Integrated};
    }
    std::vector<dimed::EstimatorKind> kinds;
    std::size_t begin = 0;
    while (begin <= spec.size()) {
        const std::size_t comma = spec.find(',', begin);
        const std::string token =
            spec.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
        const auto kind = dimed::estimator_kind_from_string(token);
        if (!kind.has_value()) {
            throw dimed::InvalidInput("--kinds: unknown estimator '" + token +
                                      "' (expected population, survey, integrated or all)");
        }
        kinds.push_back(*kind);
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    if (kinds.empty()) throw dimed::InvalidInput("--kinds: no estimator named");
    return kinds;
}

void emit(const json& doc, const std::string& out) {
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw dimed::InvalidInput("cannot open output file '" + out + "'");
    file << text;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

json kinds_to_json(const std::vector<dimed::EstimatorKind>& kinds) {
    json arr = json::array();
    for (dimed::EstimatorKind kind : kinds) arr.push_back(dimed::to_string(kind));
    return arr;
}

dimed::QuantileEstimate estimate_or_unavailable(const dimed::PopulationFrame& frame,
                                                dimed::EstimatorKind kind,
                                                const dimed::QuantileSpec& spec) {
    // The dataset parsed fine; a weighting the data cannot support is a
    // missing computation, not an input error.
    try {
        return dimed::estimate(frame, kind, spec);
    } catch (const dimed::InvalidInput& e) {
        throw dimed::Unavailable(std::string(dimed::to_string(kind)) +
                                 " estimate unavailable: " + e.what());
    }
}

int run_estimate(const CommonOptions& options) {
    const std::vector<dimed::EstimatorKind> kinds = parse_kinds(options.kinds);
    const dimed::QuantileSpec spec{options.p.value_or(0.5), options.gamma.value_or(0.5)};
    spec.validate();
    const double level = options.level.value_or(0.95);
    if (!(level > 0.0) || !(level < 1.0)) {
        throw dimed::InvalidInput("--level must lie strictly in (0,1)");
    }

    dimed::io::ParsedFrame parsed = dimed::io::parse_dataset_file(options.input, options.n);
    print_warnings(parsed.warnings);
    const dimed::PopulationFrame& frame = parsed.frame;

    json config;
    config["input"] = options.input;
    config["n"] = frame.n;
    config["p"] = spec.p;
    config["gamma"] = spec.gamma;
    config["kinds"] = kinds_to_json(kinds);
    config["level"] = level;

    json doc = dimed::io::result_document("estimate", config);
    json estimates;
    for (dimed::EstimatorKind kind : kinds) {
        const dimed::QuantileEstimate est = estimate_or_unavailable(frame, kind, spec);
        json entry;
        entry["estimate"] = dimed::io::quantile_estimate_to_json(est);
        try {
            std::vector<std::string> warnings;
            const dimed::AsymptoticVariance pv =
                dimed::plug_in_variances(frame, est.value, spec.p, {}, &warnings);
            print_warnings(warnings);
            entry["variance"] = dimed::io::variance_to_json(pv);
            std::optional<double> scaled;
            if (kind == dimed::EstimatorKind::Population) scaled = pv.V;
            if (kind == dimed::EstimatorKind::Survey) scaled = pv.V_A;
            if (kind == dimed::EstimatorKind::Integrated) scaled = pv.V_DI;
            if (scaled.has_value()) {
                const auto [lo, hi] = dimed::confidence_interval(est.value, *scaled, frame.n, level);
                entry["ci"] = json::array({lo, hi});
            } else {
                entry["ci"] = nullptr;
                entry["ci_unavailable"] = "unavailable: " + pv.di_gap;
            }
        } catch (const dimed::Unavailable& e) {
            entry["variance"] = nullptr;
            entry["ci"] = nullptr;
            entry["variance_unavailable"] = std::string("unavailable: ") + e.what();
        }
        estimates[dimed::to_string(kind)] = entry;
    }
    doc["estimates"] = estimates;
    doc["warnings"] = parsed.warnings;
    emit(doc, options.out);
    return 0;
}

int run_variance(const CommonOptions& options) {
    const std::vector<dimed::EstimatorKind> kinds = parse_kinds(options.kinds);
    const dimed::EstimatorKind at_kind =
        options.kinds == "all" ? dimed::EstimatorKind::Integrated : kinds.front();
    const dimed::QuantileSpec spec{options.p.value_or(0.5), options.gamma.value_or(0.5)};
    spec.validate();

    dimed::io::ParsedFrame parsed = dimed::io::parse_dataset_file(options.input, options.n);
    print_warnings(parsed.warnings);

    const dimed::QuantileEstimate est = estimate_or_unavailable(parsed.frame, at_kind, spec);
    std::vector<std::string> warnings;
    const dimed::AsymptoticVariance pv =
        dimed::plug_in_variances(parsed.frame, est.value, spec.p, {}, &warnings);
    print_warnings(warnings);

    json config;
    config["input"] = options.input;
    config["n"] = parsed.frame.n;
    config["p"] = spec.p;
    config["gamma"] = spec.gamma;
    config["evaluated_at"] = dimed::to_string(at_kind);

    json doc = dimed::io::result_document("variance", config);
    doc["theta_hat"] = est.value;
    doc["variance"] = dimed::io::variance_to_json(pv);
    doc["warnings"] = parsed.warnings;
    emit(doc, options.out);
    return 0;
}

dimed::SimConfig load_sim_config(const CommonOptions& options, json* config_json,
                                 std::optional<std::vector<std::int64_t>>* n_grid) {
    json raw = json::object();
    if (!options.config_path.empty()) {
        std::ifstream in(options.config_path);
        if (!in) throw dimed::InvalidInput("cannot open config '" + options.config_path + "'");
        try {
            raw = json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw dimed::InvalidInput("config '" + options.config_path +
                                      "' is not valid JSON: " + e.what());
        }
    }
    dimed::SimConfig config = dimed::io::sim_config_from_json(raw);
    if (n_grid != nullptr) *n_grid = dimed::io::n_grid_from_json(raw);

    if (options.n.has_value()) config.n = *options.n;
    if (options.p.has_value()) config.p = *options.p;
    if (options.gamma.has_value()) config.gamma = *options.gamma;
    if (options.seed.has_value()) config.seed = *options.seed;
    if (options.reps.has_value()) config.replications = *options.reps;
    if (options.level.has_value()) config.confidence_level = *options.level;
    config.validate();
    if (config_json != nullptr) *config_json = dimed::io::sim_config_to_json(config);
    return config;
}

void dump_replications(const std::string& path, const dimed::SimConfig& config,
                       const std::vector<dimed::ReplicationResult>& reps,
                       const dimed::SimResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dimed::InvalidInput("cannot open dump file '" + path + "'");
    out << "replication,kind,estimate\n";
    for (std::size_t r = 0; r < reps.size(); ++r) {
        for (dimed::EstimatorKind kind : dimed::kAllKinds) {
            out << r << ',' << dimed::to_string(kind) << ','
                << dimed::io::format_double(reps[r].estimate[dimed::kind_index(kind)]) << '\n';
        }
    }

    // Companion overlay: the limiting normal density of each estimator,
    // tabulated for plotting against the replication draws.
    if (!result.theoretical.has_value()) return;
    std::ofstream overlay(path + ".overlay.csv", std::ios::binary);
    if (!overlay) throw dimed::InvalidInput("cannot open dump file '" + path + ".overlay.csv'");
    overlay << "kind,x,density\n";
    const dimed::AsymptoticVariance& v = *result.theoretical;
    for (dimed::EstimatorKind kind : dimed::kAllKinds) {
        double scaled = v.V;
        if (kind == dimed::EstimatorKind::Survey) scaled = v.V_A;
        if (kind == dimed::EstimatorKind::Integrated) scaled = v.V_DI.value_or(v.V_A);
        const double sd = std::sqrt(scaled / static_cast<double>(config.n));
        for (int i = 0; i <= 200; ++i) {
            const double x = result.theta0 + sd * (-4.0 + 8.0 * i / 200.0);
            const double z = (x - result.theta0) / sd;
            const double density = std::exp(-0.5 * z * z) / (sd * 2.5066282746310002);
            overlay << dimed::to_string(kind) << ',' << dimed::io::format_double(x) << ','
                    << dimed::io::format_double(density) << '\n';
        }
    }
}

int run_simulate(const CommonOptions& options) {
    json config_json;
    dimed::SimConfig config = load_sim_config(options, &config_json, nullptr);
    std::vector<dimed::ReplicationResult> reps;
    const dimed::SimResult result =
        dimed::run_monte_carlo(config, dimed::default_thread_count(), &reps);

    json doc = dimed::io::result_document("simulation", config_json);
    doc["result"] = dimed::io::sim_result_to_json(result);
    if (!options.dump_replications.empty()) {
        dump_replications(options.dump_replications, config, reps, result);
        doc["replication_dump"] = options.dump_replications;
    }
    emit(doc, options.out);
    return 0;
}

int run_sweep(const CommonOptions& options) {
    json config_json;
    std::optional<std::vector<std::int64_t>> n_grid;
    dimed::SimConfig config = load_sim_config(options, &config_json, &n_grid);
    if (!n_grid.has_value()) {
        throw dimed::InvalidInput("sweep requires an 'n_grid' array in the config document");
    }
    const std::vector<dimed::SweepRow> rows =
        dimed::consistency_sweep(config, *n_grid, dimed::default_thread_count());

    json grid_json = json::array();
    for (std::int64_t n : *n_grid) grid_json.push_back(n);
    config_json["n_grid"] = grid_json;

    json doc = dimed::io::result_document("sweep", config_json);
    doc["theta0"] = dimed::true_quantile(config.superpopulation, config.p);
    json rows_json = json::array();
    for (const dimed::SweepRow& row : rows) {
        json r;
        r["n"] = row.n;
        for (dimed::EstimatorKind kind : dimed::kAllKinds) {
            r[std::string("median_abs_error_") + dimed::to_string(kind)] =
                row.median_abs_error[dimed::kind_index(kind)];
        }
        r["median_survey_gap"] = row.median_survey_gap;
        r["median_integrated_gap"] = row.median_integrated_gap;
        r["resampled"] = row.resampled;
        rows_json.push_back(r);
    }
    doc["rows"] = rows_json;
    emit(doc, options.out);
    return 0;
}

int fail(int code, const char* category, const std::string& message) {
    json err;
    err["error"] = {{"code", code}, {"category", category}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integrated big-data/survey weighted quantile estimation\n"
                 "Monte Carlo worker threads come from DIMED_THREADS "
                 "(default: hardware concurrency)."};
    app.set_version_flag("--version", dimed::kVersion);
    app.require_subcommand(1);

    CommonOptions options;
    const auto add_common = [&](CLI::App* cmd, bool dataset) {
        if (dataset) {
            cmd->add_option("--input", options.input, "dataset CSV path")->required();
            cmd->add_option("--n", options.n, "population size (default: number of rows)");
        } else {
            cmd->add_option("--config", options.config_path, "JSON config path");
            cmd->add_option("--n", options.n, "population size per replication");
            cmd->add_option("--seed", options.seed, "master RNG seed");
            cmd->add_option("--reps", options.reps, "number of replications");
        }
        cmd->add_option("--p", options.p, "quantile level (default 0.5)");
        cmd->add_option("--gamma", options.gamma, "interpolation weight (default 0.5)");
        cmd->add_option("--level", options.level, "confidence level (default 0.95)");
        cmd->add_option("--out", options.out, "write the result document here (default stdout)");
    };

    CLI::App* estimate = app.add_subcommand("estimate", "Point estimates with plug-in CIs");
    add_common(estimate, true);
    estimate->add_option("--kinds", options.kinds,
                         "comma-separated estimators or 'all' (default all)");

    CLI::App* variance = app.add_subcommand("variance", "Plug-in asymptotic variances");
    add_common(variance, true);
    variance->add_option("--kinds", options.kinds,
                         "estimator that supplies theta_hat (default integrated)");

    CLI::App* simulate = app.add_subcommand("simulate", "Seeded Monte Carlo study");
    add_common(simulate, false);
    simulate->add_option("--dump-replications", options.dump_replications,
                         "also write a per-replication estimate CSV here");

    CLI::App* sweep = app.add_subcommand("sweep", "Convergence sweep over population sizes");
    add_common(sweep, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitInput;
    }

    try {
        if (estimate->parsed()) return run_estimate(options);
        if (variance->parsed()) return run_variance(options);
        if (simulate->parsed()) return run_simulate(options);
        return run_sweep(options);
    } catch (const dimed::InvalidInput& e) {
        return fail(kExitInput, "input", e.what());
    } catch (const dimed::Unavailable& e) {
        return fail(kExitUnavailable, "unavailable", e.what());
    } catch (const std::exception& e) {
        return fail(kExitInternal, "internal", e.what());
    }
}
