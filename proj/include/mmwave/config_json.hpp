#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmwave/experiment.hpp"
#include "mmwave/scenario.hpp"

namespace mmwave {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

/// Config rejection with one entry per offending field path.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> errors_in)
        : std::runtime_error(join(errors_in)), errors(std::move(errors_in)) {}
    std::vector<std::string> errors;

    static std::string join(const std::vector<std::string>& errors) {
        std::string s = "invalid config:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
    }
};

struct RunConfig {
    ScenarioConfig scenario;
    ExperimentConfig experiment;
};

namespace cfg_detail {

class Parser {
public:
    explicit Parser(const Json& root) : root_(root) {}

    RunConfig parse() {
        RunConfig cfg;
        expect_object(root_, "");
        check_keys(root_, "",
                   {"schema_version", "seed", "iterations", "target_total_users", "torus",
                    "inter_site_distance_m", "height_offset_m", "lambda_u", "radio",
                    "user_generator", "blockage", "rain", "reassociate_under_degradation",
                    "solver", "beam_align_sigma_deg", "connect_grid", "schemes", "workers"});

        const long version = get_int(root_, "schema_version", kConfigSchemaVersion);
        if (version != kConfigSchemaVersion)
            errors_.push_back("schema_version: expected " + std::to_string(kConfigSchemaVersion));

        ScenarioConfig& sc = cfg.scenario;
        if (root_.contains("seed")) sc.seed = get_uint64(root_, "seed");
        sc.iterations = get_int(root_, "iterations", sc.iterations);
        sc.target_total_users = get_int(root_, "target_total_users", sc.target_total_users);
        sc.inter_site_distance_m = get_num(root_, "inter_site_distance_m", sc.inter_site_distance_m);
        sc.height_offset_m = get_num(root_, "height_offset_m", sc.height_offset_m);
        sc.lambda_u_per_km2 = get_num(root_, "lambda_u", sc.lambda_u_per_km2);
        sc.reassociate_under_degradation =
            get_bool(root_, "reassociate_under_degradation", sc.reassociate_under_degradation);

        if (root_.contains("torus")) {
            const Json& t = root_["torus"];
            if (expect_object(t, "torus")) {
                check_keys(t, "torus.", {"width_m", "height_m"});
                sc.torus.width = get_num(t, "width_m", sc.torus.width, "torus.");
                sc.torus.height = get_num(t, "height_m", sc.torus.height, "torus.");
            }
        }
        if (root_.contains("radio")) parse_radio(root_["radio"], sc.radio);
        if (root_.contains("user_generator")) parse_user_generator(root_["user_generator"], sc);
        if (root_.contains("blockage") && !root_["blockage"].is_null())
            parse_blockage(root_["blockage"], sc);
        if (root_.contains("rain") && !root_["rain"].is_null()) parse_rain(root_["rain"], sc);

        ExperimentConfig& ex = cfg.experiment;
        if (root_.contains("solver")) parse_solver(root_["solver"], ex.solver);
        if (root_.contains("beam_align_sigma_deg")) parse_sigma(root_["beam_align_sigma_deg"], ex);
        if (root_.contains("connect_grid") && !root_["connect_grid"].is_null())
            parse_connect_grid(root_["connect_grid"], ex);
        if (root_.contains("schemes")) parse_schemes(root_["schemes"], ex);
        ex.workers = static_cast<int>(get_int(root_, "workers", ex.workers));

        if (errors_.empty())
            for (const auto& e : validate_config(cfg.scenario)) errors_.push_back(e);
        if (!errors_.empty()) throw ConfigError(errors_);
        return cfg;
    }

private:
    void parse_radio(const Json& r, RadioConfig& radio) {
        if (!expect_object(r, "radio")) return;
        check_keys(r, "radio.",
                   {"f_c_ghz", "w_hz", "p_tx_dbm", "n0_dbm", "nf_db", "gamma_min_db", "r_min_bps",
                    "xi", "theta_b_deg", "theta_u_deg", "s", "sf_los_stddev_db",
                    "sf_nlos_stddev_db", "rate_constraint_includes_overhead"});
        // a partial radio section is almost certainly a mistake; omit the whole
        // section to take the defaults
        for (const char* key : {"f_c_ghz", "w_hz", "p_tx_dbm", "n0_dbm", "nf_db", "gamma_min_db",
                                "r_min_bps", "xi", "theta_b_deg", "theta_u_deg", "s"})
            if (!r.contains(key)) errors_.push_back(std::string("radio.") + key + ": missing field");
        radio.carrier_frequency_ghz = get_num(r, "f_c_ghz", radio.carrier_frequency_ghz, "radio.");
        radio.bandwidth_hz = get_num(r, "w_hz", radio.bandwidth_hz, "radio.");
        radio.tx_power_dbm = get_num(r, "p_tx_dbm", radio.tx_power_dbm, "radio.");
        radio.thermal_noise_dbm = get_num(r, "n0_dbm", radio.thermal_noise_dbm, "radio.");
        radio.noise_factor_db = get_num(r, "nf_db", radio.noise_factor_db, "radio.");
        radio.min_snr_db = get_num(r, "gamma_min_db", radio.min_snr_db, "radio.");
        radio.min_rate_bps = get_num(r, "r_min_bps", radio.min_rate_bps, "radio.");
        radio.overhead = get_num(r, "xi", radio.overhead, "radio.");
        radio.bs_beamwidth_deg = get_num(r, "theta_b_deg", radio.bs_beamwidth_deg, "radio.");
        radio.user_beamwidth_deg = get_num(r, "theta_u_deg", radio.user_beamwidth_deg, "radio.");
        radio.sf_los_stddev_db = get_num(r, "sf_los_stddev_db", radio.sf_los_stddev_db, "radio.");
        radio.sf_nlos_stddev_db = get_num(r, "sf_nlos_stddev_db", radio.sf_nlos_stddev_db, "radio.");
        radio.rate_constraint_includes_overhead = get_bool(
            r, "rate_constraint_includes_overhead", radio.rate_constraint_includes_overhead, "radio.");
        if (r.contains("s")) {
            const Json& s = r["s"];
            if (s.is_string()) {
                const std::string v = s.get<std::string>();
                if (v == "inf" || v == "unbounded")
                    radio.shares_per_beam = ShareLimit::unbounded();
                else
                    errors_.push_back("radio.s: expected a positive integer or \"inf\"");
            } else if (s.is_number_integer() && s.get<long>() >= 1) {
                radio.shares_per_beam = ShareLimit::of(static_cast<int>(s.get<long>()));
            } else {
                errors_.push_back("radio.s: expected a positive integer or \"inf\"");
            }
        }
    }

    void parse_user_generator(const Json& g, ScenarioConfig& sc) {
        if (g.is_string()) {
            const std::string v = g.get<std::string>();
            if (v == "ppp")
                sc.matern.reset();
            else
                errors_.push_back("user_generator: unknown generator \"" + v + "\"");
            return;
        }
        if (!expect_object(g, "user_generator")) return;
        check_keys(g, "user_generator.", {"type", "n_parents", "radius_m"});
        const std::string type =
            g.contains("type") && g["type"].is_string() ? g["type"].get<std::string>() : "";
        if (type == "matern") {
            MaternConfig m;
            m.n_parents = static_cast<int>(get_int(g, "n_parents", m.n_parents, "user_generator."));
            m.radius_m = get_num(g, "radius_m", m.radius_m, "user_generator.");
            sc.matern = m;
        } else if (type == "ppp") {
            sc.matern.reset();
        } else {
            errors_.push_back("user_generator.type: expected \"ppp\" or \"matern\"");
        }
    }

    void parse_blockage(const Json& b, ScenarioConfig& sc) {
        if (!expect_object(b, "blockage")) return;
        check_keys(b, "blockage.", {"target_fraction", "length_range_m", "width_range_m"});
        BlockageConfig cfg;
        cfg.target_fraction = get_num(b, "target_fraction", cfg.target_fraction, "blockage.");
        parse_range(b, "length_range_m", cfg.sizes.length_min, cfg.sizes.length_max);
        parse_range(b, "width_range_m", cfg.sizes.width_min, cfg.sizes.width_max);
        sc.blockage = cfg;
    }

    void parse_range(const Json& obj, const std::string& key, double& lo, double& hi) {
        if (!obj.contains(key)) return;
        const Json& r = obj[key];
        if (r.is_array() && r.size() == 2 && r[0].is_number() && r[1].is_number()) {
            lo = r[0].get<double>();
            hi = r[1].get<double>();
        } else {
            errors_.push_back("blockage." + key + ": expected [min, max]");
        }
    }

    void parse_rain(const Json& r, ScenarioConfig& sc) {
        if (!expect_object(r, "rain")) return;
        check_keys(r, "rain.", {"rate_mm_h", "k", "alpha"});
        RainModel m;
        m.rate_mm_h = get_num(r, "rate_mm_h", m.rate_mm_h, "rain.");
        m.k = get_num(r, "k", m.k, "rain.");
        m.alpha = get_num(r, "alpha", m.alpha, "rain.");
        sc.rain = m;
    }

    void parse_solver(const Json& s, SolverConfig& solver) {
        if (!expect_object(s, "solver")) return;
        check_keys(s, "solver.",
                   {"penalty_m", "gap_tolerance", "time_limit_s", "node_limit",
                    "seed_with_heuristics"});
        solver.penalty_m = get_num(s, "penalty_m", solver.penalty_m, "solver.");
        solver.gap_tolerance = get_num(s, "gap_tolerance", solver.gap_tolerance, "solver.");
        solver.time_limit_s = get_num(s, "time_limit_s", solver.time_limit_s, "solver.");
        solver.node_limit = get_int(s, "node_limit", solver.node_limit, "solver.");
        solver.seed_with_heuristics =
            get_bool(s, "seed_with_heuristics", solver.seed_with_heuristics, "solver.");
        if (solver.penalty_m < 0.0) errors_.push_back("solver.penalty_m: must be non-negative");
    }

    void parse_sigma(const Json& s, ExperimentConfig& ex) {
        if (!expect_object(s, "beam_align_sigma_deg")) return;
        for (const auto& [key, value] : s.items()) {
            double theta = 0.0;
            try {
                theta = std::stod(key);
            } catch (...) {
                errors_.push_back("beam_align_sigma_deg." + key + ": key must be a beamwidth");
                continue;
            }
            if (!value.is_number() || value.get<double>() <= 0.0 ||
                value.get<double>() > theta / 2.0 + 1e-12) {
                errors_.push_back("beam_align_sigma_deg." + key +
                                  ": sigma must be in (0, theta_b/2]");
                continue;
            }
            ex.sigma_overrides.push_back({theta, value.get<double>()});
        }
    }

    void parse_connect_grid(const Json& g, ExperimentConfig& ex) {
        if (!expect_object(g, "connect_grid")) return;
        check_keys(g, "connect_grid.", {"focal_bs", "resolution_m"});
        ConnectGridConfig cg;
        cg.focal_bs = static_cast<int>(get_int(g, "focal_bs", cg.focal_bs, "connect_grid."));
        cg.resolution_m = get_num(g, "resolution_m", cg.resolution_m, "connect_grid.");
        if (cg.resolution_m <= 0.0) errors_.push_back("connect_grid.resolution_m: must be positive");
        ex.connect_grid = cg;
    }

    void parse_schemes(const Json& s, ExperimentConfig& ex) {
        if (!s.is_array()) {
            errors_.push_back("schemes: expected an array of scheme names");
            return;
        }
        std::vector<Scheme> schemes;
        for (const auto& item : s) {
            if (!item.is_string()) {
                errors_.push_back("schemes: entries must be strings");
                return;
            }
            const auto parsed = parse_scheme(item.get<std::string>());
            if (!parsed) {
                errors_.push_back("schemes: unknown scheme \"" + item.get<std::string>() + "\"");
                return;
            }
            schemes.push_back(*parsed);
        }
        if (!schemes.empty()) ex.schemes = schemes;
    }

    bool expect_object(const Json& j, const std::string& path) {
        if (j.is_object()) return true;
        errors_.push_back((path.empty() ? std::string("config") : path) + ": expected an object");
        return false;
    }

    void check_keys(const Json& obj, const std::string& prefix,
                    std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) errors_.push_back(prefix + key + ": unknown field");
        }
    }

    double get_num(const Json& obj, const std::string& key, double fallback,
                   const std::string& prefix = "") {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number()) {
            errors_.push_back(prefix + key + ": expected a number");
            return fallback;
        }
        return obj[key].get<double>();
    }

    long get_int(const Json& obj, const std::string& key, long fallback,
                 const std::string& prefix = "") {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_number_integer()) {
            errors_.push_back(prefix + key + ": expected an integer");
            return fallback;
        }
        return obj[key].get<long>();
    }

    std::uint64_t get_uint64(const Json& obj, const std::string& key) {
        if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer()) {
            errors_.push_back(key + ": expected an integer seed");
            return 0;
        }
        return obj[key].get<std::uint64_t>();
    }

    bool get_bool(const Json& obj, const std::string& key, bool fallback,
                  const std::string& prefix = "") {
        if (!obj.contains(key)) return fallback;
        if (!obj[key].is_boolean()) {
            errors_.push_back(prefix + key + ": expected a boolean");
            return fallback;
        }
        return obj[key].get<bool>();
    }

    const Json& root_;
    std::vector<std::string> errors_;
};

} // namespace cfg_detail

inline RunConfig parse_run_config(const Json& j) { return cfg_detail::Parser(j).parse(); }

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError({std::string("cannot open config file: ") + path});
    Json j;
    try {
        j = Json::parse(is);
    } catch (const std::exception& e) {
        throw ConfigError({std::string("json parse error: ") + e.what()});
    }
    return parse_run_config(j);
}

/// Canonical echo of a parsed config with every default materialized; the
/// manifest embeds this so a run is reproducible from the manifest alone.
inline Json config_to_json(const RunConfig& cfg) {
    const ScenarioConfig& sc = cfg.scenario;
    const ExperimentConfig& ex = cfg.experiment;
    Json j;
    j["schema_version"] = kConfigSchemaVersion;
    j["seed"] = sc.seed;
    j["iterations"] = sc.iterations;
    j["target_total_users"] = sc.target_total_users;
    j["torus"] = {{"width_m", sc.torus.width}, {"height_m", sc.torus.height}};
    j["inter_site_distance_m"] = sc.inter_site_distance_m;
    j["height_offset_m"] = sc.height_offset_m;
    j["lambda_u"] = sc.lambda_u_per_km2;
    Json radio;
    radio["f_c_ghz"] = sc.radio.carrier_frequency_ghz;
    radio["w_hz"] = sc.radio.bandwidth_hz;
    radio["p_tx_dbm"] = sc.radio.tx_power_dbm;
    radio["n0_dbm"] = sc.radio.thermal_noise_dbm;
    radio["nf_db"] = sc.radio.noise_factor_db;
    radio["gamma_min_db"] = sc.radio.min_snr_db;
    radio["r_min_bps"] = sc.radio.min_rate_bps;
    radio["xi"] = sc.radio.overhead;
    radio["theta_b_deg"] = sc.radio.bs_beamwidth_deg;
    radio["theta_u_deg"] = sc.radio.user_beamwidth_deg;
    if (sc.radio.shares_per_beam.is_unbounded())
        radio["s"] = "inf";
    else
        radio["s"] = sc.radio.shares_per_beam.count();
    radio["sf_los_stddev_db"] = sc.radio.sf_los_stddev_db;
    radio["sf_nlos_stddev_db"] = sc.radio.sf_nlos_stddev_db;
    radio["rate_constraint_includes_overhead"] = sc.radio.rate_constraint_includes_overhead;
    j["radio"] = radio;
    if (sc.matern)
        j["user_generator"] = {{"type", "matern"},
                               {"n_parents", sc.matern->n_parents},
                               {"radius_m", sc.matern->radius_m}};
    else
        j["user_generator"] = "ppp";
    if (sc.blockage)
        j["blockage"] = {
            {"target_fraction", sc.blockage->target_fraction},
            {"length_range_m", {sc.blockage->sizes.length_min, sc.blockage->sizes.length_max}},
            {"width_range_m", {sc.blockage->sizes.width_min, sc.blockage->sizes.width_max}}};
    if (sc.rain)
        j["rain"] = {{"rate_mm_h", sc.rain->rate_mm_h}, {"k", sc.rain->k}, {"alpha", sc.rain->alpha}};
    j["reassociate_under_degradation"] = sc.reassociate_under_degradation;
    j["solver"] = {{"penalty_m", ex.solver.penalty_m},
                   {"gap_tolerance", ex.solver.gap_tolerance},
                   {"time_limit_s", ex.solver.time_limit_s},
                   {"node_limit", ex.solver.node_limit},
                   {"seed_with_heuristics", ex.solver.seed_with_heuristics}};
    if (!ex.sigma_overrides.empty()) {
        Json sigma;
        for (const auto& [theta, value] : ex.sigma_overrides) sigma[format_double(theta)] = value;
        j["beam_align_sigma_deg"] = sigma;
    }
    if (ex.connect_grid)
        j["connect_grid"] = {{"focal_bs", ex.connect_grid->focal_bs},
                             {"resolution_m", ex.connect_grid->resolution_m}};
    Json schemes = Json::array();
    for (const Scheme s : ex.schemes) schemes.push_back(scheme_name(s));
    j["schemes"] = schemes;
    j["workers"] = ex.workers;
    return j;
}

} // namespace mmwave
