#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmwave/config_json.hpp"
#include "mmwave/metrics.hpp"
#include "mmwave/numfmt.hpp"

namespace mmwave {

#ifndef MMWAVE_BUILD_ID
#define MMWAVE_BUILD_ID "unknown"
#endif

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    return os;
}

/// Long-format per-iteration metrics: one row per scheme, iteration, metric.
inline void write_metrics_long_csv(const MetricsReport& report, const std::filesystem::path& path) {
    auto os = open_output(path);
    os << "scheme,iteration,metric,value\n";
    for (const auto& scheme : report.schemes) {
        for (const auto& row : scheme.per_iteration) {
            const auto emit = [&](const char* metric, double value) {
                os << scheme.scheme << ',' << row.iteration << ',' << metric << ','
                   << format_double(value) << '\n';
            };
            emit("n_users", static_cast<double>(row.n_users));
            emit("mean_capacity_bps", row.mean_capacity_bps);
            emit("mean_satisfaction", row.mean_satisfaction);
            emit("disconnected_fraction", row.disconnected_fraction);
            emit("objective", row.objective);
        }
    }
}

/// Wide pooled summary, one row per scheme.
inline void write_summary_csv(const MetricsReport& report, const std::filesystem::path& path) {
    auto os = open_output(path);
    os << "scheme,iterations,users,mean_capacity_bps,mean_satisfaction,disconnected_fraction,"
          "served_mean_capacity_bps,mean_degree\n";
    for (const auto& scheme : report.schemes) {
        os << scheme.scheme << ',' << report.iterations << ',' << scheme.pooled.n_users << ','
           << format_double(scheme.pooled.mean_capacity_bps()) << ','
           << format_double(scheme.pooled.mean_satisfaction()) << ','
           << format_double(scheme.pooled.disconnected_fraction()) << ','
           << format_double(scheme.pooled.served_mean_capacity_bps()) << ','
           << format_double(scheme.pooled.mean_degree()) << '\n';
    }
}

inline void write_connect_grid_csv(const ConnectProbabilityGrid& grid,
                                   const std::filesystem::path& path) {
    auto os = open_output(path);
    os << "x_m,y_m,occupied_runs,connected_runs,probability\n";
    for (const auto& [key, cell] : grid.cells) {
        os << format_double(key.first * grid.resolution_m) << ','
           << format_double(key.second * grid.resolution_m) << ',' << cell.occupied << ','
           << cell.connected << ','
           << format_double(static_cast<double>(cell.connected) / cell.occupied) << '\n';
    }
}

inline Json report_to_json(const MetricsReport& report) {
    Json j;
    j["schema_version"] = 1;
    j["iterations"] = report.iterations;
    j["total_users"] = report.total_users;
    Json schemes = Json::array();
    for (const auto& s : report.schemes) {
        Json js;
        js["scheme"] = s.scheme;
        js["users"] = s.pooled.n_users;
        js["mean_capacity_bps"] = s.pooled.mean_capacity_bps();
        js["mean_satisfaction"] = s.pooled.mean_satisfaction();
        js["disconnected_fraction"] = s.pooled.disconnected_fraction();
        js["served_mean_capacity_bps"] = s.pooled.served_mean_capacity_bps();
        js["mean_degree"] = s.pooled.mean_degree();
        Json degree;
        for (const auto& [deg, count] : s.pooled.degree_counts) {
            degree[std::to_string(deg)] =
                s.pooled.n_users ? static_cast<double>(count) / s.pooled.n_users : 0.0;
        }
        js["degree_histogram"] = degree;
        Json hist = Json::array();
        for (const auto& [lo, freq] : s.misalignment.frequencies())
            hist.push_back({{"bin_lo_deg", lo}, {"frequency", freq}});
        js["misalignment_histogram"] = hist;
        js["misalignment_samples"] = s.misalignment.n;
        js["misalignment_stddev_deg"] = s.misalignment.population_stddev();
        Json rows = Json::array();
        for (const auto& r : s.per_iteration) {
            rows.push_back({{"iteration", r.iteration},
                            {"n_users", r.n_users},
                            {"mean_capacity_bps", r.mean_capacity_bps},
                            {"mean_satisfaction", r.mean_satisfaction},
                            {"disconnected_fraction", r.disconnected_fraction},
                            {"objective", r.objective},
                            {"proven_optimal", r.proven_optimal}});
        }
        js["per_iteration"] = rows;
        schemes.push_back(js);
    }
    j["schemes"] = schemes;
    return j;
}

struct ManifestInfo {
    RunConfig config;
    std::vector<std::pair<std::string, std::string>> outputs;  // (label, path)
    ExperimentTimings timings;
};

inline Json manifest_to_json(const ManifestInfo& info) {
    Json j;
    j["schema_version"] = 1;
    j["build_id"] = MMWAVE_BUILD_ID;
    j["seed"] = info.config.scenario.seed;
    j["config"] = config_to_json(info.config);
    Json outputs;
    for (const auto& [label, path] : info.outputs) outputs[label] = path;
    j["outputs"] = outputs;
    Json timings;
    timings["realize_s"] = info.timings.realize_s;
    for (const auto& [scheme, secs] : info.timings.per_scheme_s) timings["scheme_" + scheme] = secs;
    timings["total_s"] = info.timings.total_s;
    j["timings_s"] = timings;
    return j;
}

} // namespace mmwave
