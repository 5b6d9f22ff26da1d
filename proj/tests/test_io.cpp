#include <doctest.h>

#include <random>
#include <sstream>

#include "dimed/errors.hpp"
#include "dimed/io.hpp"
#include "helpers.hpp"

using namespace dimed;
namespace io = dimed::io;

namespace {

io::ParsedFrame parse_text(const std::string& text,
                           std::optional<std::int64_t> n = std::nullopt) {
    std::istringstream in(text);
    return io::parse_dataset(in, "test.csv", n);
}

}  // namespace

TEST_CASE("a full row yields the expected design weight") {
    const io::ParsedFrame parsed = parse_text("value,pi,alpha,delta\n3.2,0.25,1,0\n");
    REQUIRE(parsed.frame.units.size() == 1);
    CHECK(survey_weight(parsed.frame.units[0]) == 4.0);
    CHECK(parsed.frame.n == 1);
}

TEST_CASE("a pure big-data row needs no pi") {
    const io::ParsedFrame parsed = parse_text("value,pi,alpha,delta\n1.0,,0,1\n");
    REQUIRE(parsed.frame.units.size() == 1);
    CHECK(!parsed.frame.units[0].pi.has_value());
    CHECK(integrated_weight(parsed.frame.units[0]) == 1.0);
}

TEST_CASE("a sampled row without pi is rejected with its line number") {
    try {
        parse_text("value,pi,alpha,delta\n1.0,,1,0\n");
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        const std::string message = e.what();
        CHECK(message.find("test.csv:2") != std::string::npos);
        CHECK(message.find("pi") != std::string::npos);
    }
}

TEST_CASE("structural dataset errors are reported by name") {
    CHECK_THROWS_AS(parse_text(""), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("pi,alpha,delta\n0.5,1,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,delta\n1.0,0.5,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,value,alpha\n1.0,2.0,1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1.0,0.5,1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\nabc,0.5,1,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1.0,0.5,2,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1.0,0.5,1,yes\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1.0,1.5,1,0\n"), InvalidInput);
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1.0,0,1,0\n"), InvalidInput);
    // Population size smaller than the row count.
    CHECK_THROWS_AS(parse_text("value,pi,alpha,delta\n1,0.5,1,0\n2,0.5,1,0\n", 1), InvalidInput);
}

TEST_CASE("a missing delta column defaults to zero with a warning") {
    const io::ParsedFrame parsed = parse_text("value,pi,alpha\n1.0,0.5,1\n2.0,0.5,0\n");
    CHECK(parsed.frame.units[0].delta == false);
    REQUIRE(!parsed.warnings.empty());
    CHECK(parsed.warnings[0].find("delta") != std::string::npos);
}

TEST_CASE("empty delta fields are defaulted and counted") {
    const io::ParsedFrame parsed =
        parse_text("value,pi,alpha,delta\n1.0,0.5,1,\n2.0,0.5,1,1\n");
    CHECK(parsed.frame.units[0].delta == false);
    CHECK(parsed.frame.units[1].delta == true);
    REQUIRE(!parsed.warnings.empty());
    CHECK(parsed.warnings[0].find("defaulted") != std::string::npos);
}

TEST_CASE("CRLF endings, BOMs, blank lines and unknown columns are tolerated") {
    const std::string text =
        "\xEF\xBB\xBFvalue,pi,alpha,delta,comment\r\n"
        "1.0,0.5,1,0,first\r\n"
        "\r\n"
        "2.0,,0,1,second\r\n";
    const io::ParsedFrame parsed = parse_text(text, 10);
    CHECK(parsed.frame.units.size() == 2);
    CHECK(parsed.frame.n == 10);
    REQUIRE(!parsed.warnings.empty());
    CHECK(parsed.warnings[0].find("comment") != std::string::npos);
}

TEST_CASE("datasets round-trip through write and parse") {
    std::mt19937_64 rng(2718);
    for (int rep = 0; rep < 50; ++rep) {
        PopulationFrame frame = dimed::test::random_frame(rng, 25);
        // Blank out pi where it is not required, exercising the optional path.
        for (UnitRecord& u : frame.units) {
            if (!u.alpha && u.delta) u.pi.reset();
        }
        std::ostringstream out;
        io::write_dataset(out, frame);
        const io::ParsedFrame parsed = parse_text(out.str(), frame.n);
        REQUIRE(parsed.frame.units.size() == frame.units.size());
        CHECK(parsed.frame.n == frame.n);
        for (std::size_t i = 0; i < frame.units.size(); ++i) {
            CHECK(parsed.frame.units[i].x == frame.units[i].x);
            CHECK(parsed.frame.units[i].pi == frame.units[i].pi);
            CHECK(parsed.frame.units[i].alpha == frame.units[i].alpha);
            CHECK(parsed.frame.units[i].delta == frame.units[i].delta);
        }
    }
}

TEST_CASE("doubles are serialised with enough digits to round-trip") {
    const double values[] = {1.0 / 3.0, 0.1, 3.141592653589793, 1e-300, 12345.6789012345678};
    for (double v : values) {
        CHECK(std::stod(io::format_double(v)) == v);
    }
}

TEST_CASE("an empty config document takes the documented defaults") {
    const SimConfig config = io::sim_config_from_json(io::json::object());
    CHECK(family_name(config.superpopulation) == "normal");
    CHECK(std::get<ConstantPi>(config.design.pi_model).value == 0.5);
    CHECK(config.n == 1000);
    CHECK(config.replications == 100);
    CHECK(config.p == 0.5);
    CHECK(config.gamma == 0.5);
    CHECK(config.seed == 0);
    CHECK(config.confidence_level == 0.95);
    CHECK(config.compute_ci);
    CHECK(!config.compute_gap);
}

TEST_CASE("config documents round-trip") {
    SimConfig config;
    config.superpopulation = LogNormalDist{0.25, 1.5};
    config.design.pi_model = LogisticPi{-0.5, 1.25};
    config.design.delta_model = ConstantDelta{0.3};
    config.design.pi_min = 0.02;
    config.design.known_linkage_rate = 0.8;
    config.n = 12345;
    config.replications = 321;
    config.p = 0.25;
    config.gamma = 0.75;
    config.seed = 987654321098765ULL;
    config.confidence_level = 0.9;
    config.compute_gap = true;

    const io::json j = io::sim_config_to_json(config);
    const SimConfig back = io::sim_config_from_json(j);
    CHECK(io::sim_config_to_json(back) == j);
}

TEST_CASE("bad config fields are rejected by name") {
    const auto message_of = [](const io::json& j) -> std::string {
        try {
            io::sim_config_from_json(j);
        } catch (const InvalidInput& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message_of({{"replicatoins", 10}}).find("replicatoins") != std::string::npos);
    CHECK(message_of({{"p", "половина"}}).find("'p'") != std::string::npos);
    CHECK(message_of({{"n", 2.5}}).find("'n'") != std::string::npos);
    CHECK(message_of({{"superpopulation", {{"family", "cauchy"}}}}).find("cauchy") !=
          std::string::npos);
    CHECK(message_of({{"superpopulation", {{"family", "normal"}, {"scale", 2.0}}}})
              .find("scale") != std::string::npos);
    CHECK(message_of({{"design", {{"pi", {{"model", "spline"}}}}}}).find("spline") !=
          std::string::npos);
    CHECK(message_of({{"format", "dimed-config/9"}}).find("format") != std::string::npos);
    CHECK(message_of({{"n", 1}}).find("n must be at least 2") != std::string::npos);
}

TEST_CASE("n_grid parsing") {
    io::json j = io::json::object();
    CHECK(!io::n_grid_from_json(j).has_value());
    j["n_grid"] = {1000, 10000};
    const auto grid = io::n_grid_from_json(j);
    REQUIRE(grid.has_value());
    CHECK(*grid == std::vector<std::int64_t>{1000, 10000});
    j["n_grid"] = {1000.5};
    CHECK_THROWS_AS(io::n_grid_from_json(j), InvalidInput);
    j["n_grid"] = io::json::array();
    CHECK_THROWS_AS(io::n_grid_from_json(j), InvalidInput);
}

TEST_CASE("result documents round-trip losslessly through serialisation") {
    SimConfig config;
    config.n = 500;
    config.replications = 20;
    config.seed = 2024;
    config.compute_gap = true;
    const SimResult result = run_monte_carlo(config, 2);

    io::json doc = io::result_document("simulation", io::sim_config_to_json(config));
    doc["result"] = io::sim_result_to_json(result);

    const std::string text = doc.dump(2);
    const io::json reparsed = io::json::parse(text);
    CHECK(reparsed == doc);
    CHECK(reparsed["result"]["theta0"].get<double>() == result.theta0);
    CHECK(reparsed["format"] == io::kResultFormat);
    CHECK(reparsed["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("estimate and variance serialisation carry every field") {
    const QuantileEstimate est =
        weighted_quantile({{1.0, 2.0, 3.0}, {3.0, 1.0, 1.0}}, {0.5, 0.5});
    const io::json je = io::quantile_estimate_to_json(est);
    CHECK(je["value"] == 1.0);
    CHECK(je["l"] == 1);
    CHECK(je["u"] == 1);
    CHECK(je["total_weight"] == 5.0);

    VarianceInputs in;
    in.p = 0.5;
    in.density_at_quantile = 0.5;
    const io::json jv = io::variance_to_json(theoretical_variances(in));
    CHECK(jv["source"] == "analytic");
    CHECK(jv["V"] == 1.0);
    CHECK(jv["V_DI"] == 1.0);
    CHECK(jv["bandwidth"].is_null());
}

TEST_CASE("config hashes are stable fingerprints") {
    const io::json a = {{"n", 100}};
    const io::json b = {{"n", 101}};
    CHECK(io::config_hash(a) == io::config_hash(a));
    CHECK(io::config_hash(a) != io::config_hash(b));
}
