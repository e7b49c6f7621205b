#pragma once

#include <cmath>
#include <optional>

namespace mmwave {

/// Default misalignment acceptance thresholds for beam-align, produced by
///
///   mmwave_cli calibrate tests/data/calibrate.json
///       --out sigma_table.json --lambda-grid 100 250 500
///
/// (optimal associations pooled over the density grid on the 4-BS desk
/// deployment; threshold = twice the population standard deviation of the
/// active links' BS-side misalignment, clamped to half the beamwidth). At
/// desk-scale contention the optimizer accepts nearly any misalignment, so
/// the statistic saturates and every entry sits at its clamp.
inline std::optional<double> default_sigma_deg(double theta_b_deg) {
    struct Entry {
        double theta_b;
        double sigma;
    };
    static constexpr Entry table[] = {
        {5.0, 2.5},
        {10.0, 5.0},
        {15.0, 7.5},
    };
    for (const auto& e : table)
        if (std::abs(e.theta_b - theta_b_deg) < 1e-9) return e.sigma;
    return std::nullopt;
}

} // namespace mmwave
