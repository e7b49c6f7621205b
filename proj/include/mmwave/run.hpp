#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmwave/io.hpp"
#include "mmwave/lp_format.hpp"
#include "mmwave/run_overrides.hpp"

namespace mmwave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitSchemeFailure = 3;

namespace cmd_detail {

inline int report_config_error(const ConfigError& e) {
    std::cerr << "error: invalid config\n";
    for (const auto& msg : e.errors) std::cerr << "  " << msg << "\n";
    return kExitBadConfig;
}

inline void apply(const RunOverrides& o, RunConfig& cfg) {
    if (o.seed) cfg.scenario.seed = *o.seed;
    if (o.iterations) cfg.scenario.iterations = *o.iterations;
    if (o.workers) cfg.experiment.workers = *o.workers;
    if (!o.schemes.empty()) {
        std::vector<Scheme> parsed;
        for (const auto& name : o.schemes) {
            const auto s = parse_scheme(name);
            if (!s) throw ConfigError({"schemes: unknown scheme \"" + name + "\""});
            parsed.push_back(*s);
        }
        cfg.experiment.schemes = parsed;
    }
}

inline void write_run_outputs(const RunConfig& cfg, const MetricsReport& report,
                              const ExperimentTimings& timings,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    ManifestInfo manifest{cfg, {}, timings};

    const auto long_csv = out_dir / "metrics_long.csv";
    write_metrics_long_csv(report, long_csv);
    manifest.outputs.push_back({"metrics_long_csv", long_csv.string()});

    const auto summary_csv = out_dir / "summary.csv";
    write_summary_csv(report, summary_csv);
    manifest.outputs.push_back({"summary_csv", summary_csv.string()});

    const auto report_json = out_dir / "report.json";
    open_output(report_json) << report_to_json(report).dump(2) << "\n";
    manifest.outputs.push_back({"report_json", report_json.string()});

    for (const auto& scheme : report.schemes) {
        if (scheme.grids.empty()) continue;
        const auto grid_csv = out_dir / ("connect_grid_" + scheme.scheme + ".csv");
        write_connect_grid_csv(scheme.grids[0], grid_csv);
        manifest.outputs.push_back({"connect_grid_" + scheme.scheme, grid_csv.string()});
    }

    open_output(out_dir / "manifest.json") << manifest_to_json(manifest).dump(2) << "\n";
}

} // namespace cmd_detail

/// `run`: execute the configured experiment and write metrics + manifest.
inline int cmd_run(const std::string& config_path, const std::string& out_dir,
                   const RunOverrides& overrides = {}) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
        cmd_detail::apply(overrides, cfg);
    } catch (const ConfigError& e) {
        return cmd_detail::report_config_error(e);
    }
    try {
        ExperimentTimings timings;
        const MetricsReport report = run_experiment(cfg.scenario, cfg.experiment, &timings);
        cmd_detail::write_run_outputs(cfg, report, timings, out_dir);
        for (const auto& s : report.schemes) {
            std::cout << s.scheme << ": users=" << s.pooled.n_users
                      << " mean_capacity_bps=" << format_double(s.pooled.mean_capacity_bps())
                      << " mean_satisfaction=" << format_double(s.pooled.mean_satisfaction())
                      << " disconnected=" << format_double(s.pooled.disconnected_fraction()) << "\n";
        }
        return kExitOk;
    } catch (const SchemeFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchemeFailure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
}

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

/// Parse "key=v1,v2,...", with several axes separated by ';'.
inline std::vector<SweepAxis> parse_grid_specs(const std::vector<std::string>& specs) {
    std::vector<SweepAxis> axes;
    for (const auto& spec : specs) {
        std::stringstream parts(spec);
        std::string part;
        while (std::getline(parts, part, ';')) {
            if (part.empty()) continue;
            const auto eq = part.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 >= part.size())
                throw ConfigError({"grid: malformed axis \"" + part + "\" (expected key=v1,v2,...)"});
            SweepAxis axis;
            axis.key = part.substr(0, eq);
            std::stringstream values(part.substr(eq + 1));
            std::string value;
            while (std::getline(values, value, ',')) {
                if (!value.empty()) axis.values.push_back(value);
            }
            if (axis.values.empty())
                throw ConfigError({"grid: axis \"" + axis.key + "\" has no values"});
            axes.push_back(std::move(axis));
        }
    }
    return axes;
}

namespace cmd_detail {

inline void apply_axis_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto as_number = [&]() {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (...) {
            throw ConfigError({"grid: axis " + key + ": bad value \"" + value + "\""});
        }
    };
    if (key == "lambda_u") {
        cfg.scenario.lambda_u_per_km2 = as_number();
    } else if (key == "theta_b_deg") {
        cfg.scenario.radio.bs_beamwidth_deg = as_number();
    } else if (key == "theta_u_deg") {
        cfg.scenario.radio.user_beamwidth_deg = as_number();
    } else if (key == "s") {
        if (value == "inf" || value == "unbounded") {
            cfg.scenario.radio.shares_per_beam = ShareLimit::unbounded();
        } else {
            const double v = as_number();
            if (v < 1.0 || v != std::floor(v))
                throw ConfigError({"grid: axis s: expected a positive integer or inf"});
            cfg.scenario.radio.shares_per_beam = ShareLimit::of(static_cast<int>(v));
        }
    } else if (key == "rain_r" || key == "rain_rate_mm_h") {
        RainModel rain = cfg.scenario.rain.value_or(RainModel{});
        rain.rate_mm_h = as_number();
        cfg.scenario.rain = rain;
    } else {
        throw ConfigError({"grid: unknown axis \"" + key +
                           "\" (supported: lambda_u, theta_b_deg, theta_u_deg, s, rain_r)"});
    }
}

} // namespace cmd_detail

/// `sweep`: cartesian grid over config axes; one output directory per cell
/// plus a combined long-format summary for plotting.
inline int cmd_sweep(const std::string& config_path, const std::vector<std::string>& grid_specs,
                     const std::string& out_dir, const RunOverrides& overrides = {}) {
    RunConfig base;
    std::vector<SweepAxis> axes;
    try {
        base = load_run_config(config_path);
        cmd_detail::apply(overrides, base);
        axes = parse_grid_specs(grid_specs);
    } catch (const ConfigError& e) {
        return cmd_detail::report_config_error(e);
    }

    std::vector<std::size_t> index(axes.size(), 0);
    const auto cell_count = [&]() {
        std::size_t n = 1;
        for (const auto& a : axes) n *= a.values.size();
        return n;
    }();

    std::filesystem::create_directories(out_dir);
    auto combined = open_output(std::filesystem::path(out_dir) / "sweep_summary.csv");
    combined << "cell";
    for (const auto& a : axes) combined << ',' << a.key;
    combined << ",scheme,users,mean_capacity_bps,mean_satisfaction,disconnected_fraction\n";

    for (std::size_t cell = 0; cell < cell_count; ++cell) {
        RunConfig cfg = base;
        std::string cell_name = "cell";
        std::string cell_values;
        try {
            for (std::size_t a = 0; a < axes.size(); ++a) {
                const std::string& value = axes[a].values[index[a]];
                cmd_detail::apply_axis_value(cfg, axes[a].key, value);
                cell_name += "_" + axes[a].key + "-" + value;
                cell_values += "," + value;
            }
            const auto errors = validate_config(cfg.scenario);
            if (!errors.empty()) throw ConfigError(errors);
        } catch (const ConfigError& e) {
            return cmd_detail::report_config_error(e);
        }

        try {
            ExperimentTimings timings;
            const MetricsReport report = run_experiment(cfg.scenario, cfg.experiment, &timings);
            cmd_detail::write_run_outputs(cfg, report, timings,
                                          std::filesystem::path(out_dir) / cell_name);
            for (const auto& s : report.schemes) {
                combined << cell << cell_values << ',' << s.scheme << ',' << s.pooled.n_users << ','
                         << format_double(s.pooled.mean_capacity_bps()) << ','
                         << format_double(s.pooled.mean_satisfaction()) << ','
                         << format_double(s.pooled.disconnected_fraction()) << '\n';
            }
        } catch (const SchemeFailure& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitSchemeFailure;
        } catch (const std::invalid_argument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitBadConfig;
        }

        for (std::size_t a = axes.size(); a-- > 0;) {
            if (++index[a] < axes[a].values.size()) break;
            index[a] = 0;
        }
        std::cout << "finished " << cell_name << "\n";
    }
    return kExitOk;
}

/// `export-lp`: realize one iteration and write its association MILP.
inline int cmd_export_lp(const std::string& config_path, long iteration,
                         const std::string& out_path) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        return cmd_detail::report_config_error(e);
    }
    try {
        const ScenarioRealization real = realize(cfg.scenario, iteration);
        const AssociationMilp p1 =
            build_association_milp(real.instance, cfg.experiment.solver.penalty_m);
        write_lp_file(p1.model, out_path);
        std::cout << out_path << ": " << p1.model.vars.size() << " variables, "
                  << p1.model.rows.size() << " constraints (" << real.instance.n_users()
                  << " users x " << real.instance.n_bs() << " BSs)\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchemeFailure;
    }
}

/// `calibrate`: solve the optimizer over the configured scenario for each
/// BS beamwidth (pooling a user-density grid when given) and derive the
/// beam-align threshold table.
inline int cmd_calibrate(const std::string& config_path, const std::string& out_path,
                         std::vector<double> beamwidths = {5.0, 10.0, 15.0},
                         std::vector<double> lambda_grid = {}) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
    } catch (const ConfigError& e) {
        return cmd_detail::report_config_error(e);
    }
    if (lambda_grid.empty()) lambda_grid.push_back(cfg.scenario.lambda_u_per_km2);
    try {
        Json table;
        table["schema_version"] = 1;
        table["seed"] = cfg.scenario.seed;
        Json sigma;
        for (const double theta : beamwidths) {
            std::vector<ScenarioRealization> reals;
            std::vector<Association> assocs;
            for (const double lambda : lambda_grid) {
                ScenarioConfig scenario = cfg.scenario;
                scenario.radio.bs_beamwidth_deg = theta;
                scenario.lambda_u_per_km2 = lambda;
                for (const long k : plan_iterations(scenario)) {
                    reals.push_back(realize(scenario, k));
                    assocs.push_back(solve_optimal(reals.back().instance, cfg.experiment.solver));
                }
            }
            std::vector<std::pair<const Instance*, const Association*>> runs;
            for (std::size_t i = 0; i < reals.size(); ++i)
                runs.push_back({&reals[i].instance, &assocs[i]});
            const double value = calibrate_sigma(runs, theta);
            sigma[format_double(theta)] = value;
            std::cout << "theta_b=" << format_double(theta)
                      << " deg: sigma=" << format_double(value) << " deg\n";
        }
        table["sigma_deg"] = sigma;
        open_output(out_path) << table.dump(2) << "\n";
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSchemeFailure;
    }
}

} // namespace mmwave
