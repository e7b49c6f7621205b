#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mmwave/config_json.hpp"
#include "mmwave/io.hpp"
#include "mmwave/run.hpp"

using namespace mmwave;

namespace {

Json full_config_json() {
    return Json::parse(R"({
      "schema_version": 1,
      "seed": 1234,
      "iterations": 2,
      "target_total_users": 10000,
      "torus": {"width_m": 400, "height_m": 346.4},
      "inter_site_distance_m": 200,
      "height_offset_m": 22.5,
      "lambda_u": 250,
      "radio": {
        "f_c_ghz": 28, "w_hz": 1e8, "p_tx_dbm": 20, "n0_dbm": -84, "nf_db": 7.8,
        "gamma_min_db": 5, "r_min_bps": 5e8, "xi": 0.25,
        "theta_b_deg": 10, "theta_u_deg": 5, "s": 2
      },
      "user_generator": "ppp",
      "solver": {"penalty_m": 1e9, "gap_tolerance": 1e-9, "time_limit_s": 10},
      "beam_align_sigma_deg": {"10": 2.5},
      "schemes": ["beam-align", "snr-1"],
      "workers": 1
    })");
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string write_config(const TempDir& dir, const Json& j, const std::string& name = "cfg.json") {
    const auto p = dir.path / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("full config parses into the expected values") {
    const RunConfig cfg = parse_run_config(full_config_json());
    CHECK(cfg.scenario.seed == 1234);
    CHECK(cfg.scenario.iterations == 2);
    CHECK(cfg.scenario.torus.width == 400.0);
    CHECK(cfg.scenario.lambda_u_per_km2 == 250.0);
    CHECK(cfg.scenario.radio.bandwidth_hz == 1e8);
    CHECK(cfg.scenario.radio.shares_per_beam.count() == 2);
    CHECK_FALSE(cfg.scenario.matern.has_value());
    CHECK(cfg.experiment.solver.gap_tolerance == 1e-9);
    REQUIRE(cfg.experiment.sigma_overrides.size() == 1);
    CHECK(cfg.experiment.sigma_overrides[0].first == 10.0);
    REQUIRE(cfg.experiment.schemes.size() == 2);
    CHECK(cfg.experiment.schemes[0] == Scheme::BeamAlign);
    CHECK(cfg.experiment.schemes[1] == Scheme::Snr1);
}

TEST_CASE("unbounded shares parse from the string form") {
    Json j = full_config_json();
    j["radio"]["s"] = "inf";
    const RunConfig cfg = parse_run_config(j);
    CHECK(cfg.scenario.radio.shares_per_beam.is_unbounded());
}

TEST_CASE("unknown fields are rejected with their path") {
    Json j = full_config_json();
    j["radio"]["bogus_knob"] = 3;
    j["surprise"] = true;
    try {
        parse_run_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool radio_path = false, top_path = false;
        for (const auto& msg : e.errors) {
            radio_path = radio_path || msg.find("radio.bogus_knob") != std::string::npos;
            top_path = top_path || msg.find("surprise") != std::string::npos;
        }
        CHECK(radio_path);
        CHECK(top_path);
    }
}

TEST_CASE("a missing radio field is named in the diagnostics") {
    Json j = full_config_json();
    j["radio"].erase("w_hz");
    try {
        parse_run_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool found = false;
        for (const auto& msg : e.errors) found = found || msg.find("radio.w_hz") != std::string::npos;
        CHECK(found);
    }
}

TEST_CASE("invalid values carry field paths") {
    Json j = full_config_json();
    j["radio"]["theta_b_deg"] = 7;     // does not divide 360
    j["lambda_u"] = -1;
    try {
        parse_run_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool theta = false, lambda = false;
        for (const auto& msg : e.errors) {
            theta = theta || msg.find("radio.theta_b_deg") != std::string::npos;
            lambda = lambda || msg.find("lambda_u") != std::string::npos;
        }
        CHECK(theta);
        CHECK(lambda);
    }
}

TEST_CASE("matern generator config") {
    Json j = full_config_json();
    j["user_generator"] = {{"type", "matern"}, {"n_parents", 30}, {"radius_m", 50.0}};
    const RunConfig cfg = parse_run_config(j);
    REQUIRE(cfg.scenario.matern.has_value());
    CHECK(cfg.scenario.matern->n_parents == 30);
    CHECK(cfg.scenario.matern->radius_m == 50.0);
}

TEST_CASE("config echo round-trips") {
    const RunConfig cfg = parse_run_config(full_config_json());
    const Json echoed = config_to_json(cfg);
    const RunConfig again = parse_run_config(echoed);
    CHECK(config_to_json(again) == echoed);
    CHECK(again.scenario.seed == cfg.scenario.seed);
    CHECK(again.scenario.radio.bandwidth_hz == cfg.scenario.radio.bandwidth_hz);
    CHECK(again.experiment.schemes == cfg.experiment.schemes);
}

TEST_CASE("cmd_run writes outputs and is byte-deterministic") {
    TempDir dir("mmwave_cmd_run_test");
    Json j = full_config_json();
    j["lambda_u"] = 120;
    const std::string cfg_path = write_config(dir, j);

    const auto out_a = dir.path / "a";
    const auto out_b = dir.path / "b";
    REQUIRE(cmd_run(cfg_path, out_a.string()) == kExitOk);
    REQUIRE(cmd_run(cfg_path, out_b.string()) == kExitOk);

    for (const char* name : {"metrics_long.csv", "summary.csv", "report.json"}) {
        CAPTURE(name);
        REQUIRE(std::filesystem::exists(out_a / name));
        CHECK(slurp(out_a / name) == slurp(out_b / name));
    }
    CHECK(std::filesystem::exists(out_a / "manifest.json"));
    const Json manifest = Json::parse(slurp(out_a / "manifest.json"));
    CHECK(manifest.contains("config"));
    CHECK(manifest["seed"] == 1234);
}

TEST_CASE("cmd_run rejects a bad config with exit code 2") {
    TempDir dir("mmwave_cmd_run_bad");
    Json j = full_config_json();
    j["radio"].erase("w_hz");
    const std::string cfg_path = write_config(dir, j);
    CHECK(cmd_run(cfg_path, (dir.path / "out").string()) == kExitBadConfig);
    CHECK(cmd_run((dir.path / "missing.json").string(), (dir.path / "out").string()) ==
          kExitBadConfig);
}

TEST_CASE("cmd_sweep expands the grid and maps inf to unbounded shares") {
    TempDir dir("mmwave_cmd_sweep_test");
    Json j = full_config_json();
    j["lambda_u"] = 60;
    j["iterations"] = 1;
    j["schemes"] = {"snr-dynamic"};
    const std::string cfg_path = write_config(dir, j);

    const auto out = dir.path / "sweep";
    REQUIRE(cmd_sweep(cfg_path, {"s=1,inf"}, out.string()) == kExitOk);
    CHECK(std::filesystem::exists(out / "cell_s-1" / "summary.csv"));
    CHECK(std::filesystem::exists(out / "cell_s-inf" / "summary.csv"));
    const std::string combined = slurp(out / "sweep_summary.csv");
    CHECK(combined.find("snr-dynamic") != std::string::npos);

    CHECK(cmd_sweep(cfg_path, {"s=1,"}, out.string()) == kExitOk);  // trailing comma tolerated
    CHECK(cmd_sweep(cfg_path, {"bogus=1"}, out.string()) == kExitBadConfig);
    CHECK(cmd_sweep(cfg_path, {"lambda_u"}, out.string()) == kExitBadConfig);
}

TEST_CASE("cmd_export_lp writes a parseable MILP") {
    TempDir dir("mmwave_cmd_lp_test");
    Json j = full_config_json();
    j["lambda_u"] = 80;
    const std::string cfg_path = write_config(dir, j);
    const auto lp_path = dir.path / "instance.lp";
    REQUIRE(cmd_export_lp(cfg_path, 0, lp_path.string()) == kExitOk);
    const milp::Model parsed = read_lp_file(lp_path.string());
    CHECK(parsed.maximize);
    CHECK_FALSE(parsed.vars.empty());
}

TEST_CASE("schema version is pinned") {
    Json j = full_config_json();
    j["schema_version"] = 2;
    try {
        parse_run_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        bool found = false;
        for (const auto& msg : e.errors)
            found = found || msg.find("schema_version") != std::string::npos;
        CHECK(found);
    }
}

TEST_CASE("a scheme that cannot run exits with code 3") {
    TempDir dir("mmwave_cmd_scheme_fail");
    Json j = full_config_json();
    j["lambda_u"] = 80;
    j["iterations"] = 1;
    j["radio"]["theta_b_deg"] = 30;  // no calibrated threshold for this beamwidth
    j["schemes"] = {"beam-align"};
    j.erase("beam_align_sigma_deg");
    const std::string cfg_path = write_config(dir, j);
    CHECK(cmd_run(cfg_path, (dir.path / "out").string()) == kExitSchemeFailure);

    // an unknown scheme name is a config error, not a scheme failure
    RunOverrides overrides;
    overrides.schemes = {"who-knows"};
    CHECK(cmd_run(cfg_path, (dir.path / "out").string(), overrides) == kExitBadConfig);
}

TEST_CASE("cmd_calibrate writes a reproducible threshold table") {
    TempDir dir("mmwave_cmd_calibrate");
    Json j = full_config_json();
    j["lambda_u"] = 80;  // about 11 users on the 4-BS torus
    j["iterations"] = 1;
    j["radio"]["s"] = 1;
    const std::string cfg_path = write_config(dir, j);

    const auto out_a = dir.path / "sigma_a.json";
    const auto out_b = dir.path / "sigma_b.json";
    const std::vector<double> beamwidths{10.0, 15.0};
    REQUIRE(cmd_calibrate(cfg_path, out_a.string(), beamwidths) == kExitOk);
    REQUIRE(cmd_calibrate(cfg_path, out_b.string(), beamwidths) == kExitOk);
    CHECK(slurp(out_a) == slurp(out_b));

    const Json table = Json::parse(slurp(out_a));
    REQUIRE(table.contains("sigma_deg"));
    REQUIRE(table["sigma_deg"].size() == 2);
    for (const auto& [key, value] : table["sigma_deg"].items()) {
        const double theta = std::stod(key);
        CHECK(value.get<double>() > 0.0);
        CHECK(value.get<double>() <= theta / 2.0 + 1e-12);
    }
}

TEST_CASE("empty grid runs the base configuration once") {
    TempDir dir("mmwave_cmd_sweep_empty");
    Json j = full_config_json();
    j["lambda_u"] = 60;
    j["iterations"] = 1;
    j["schemes"] = {"snr-1"};
    const std::string cfg_path = write_config(dir, j);
    const auto out = dir.path / "sweep";
    REQUIRE(cmd_sweep(cfg_path, {}, out.string()) == kExitOk);
    CHECK(std::filesystem::exists(out / "cell" / "summary.csv"));
}
