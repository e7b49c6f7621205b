#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmwave/association.hpp"
#include "mmwave/channel.hpp"
#include "mmwave/geometry.hpp"
#include "mmwave/rng.hpp"

namespace mmwave {

struct MaternConfig {
    int n_parents = 30;
    double radius_m = 50.0;
};

struct BlockageConfig {
    double target_fraction = 0.10;
    BlockerSizeRanges sizes;
};

/// Everything needed to draw one or more network realizations.
struct ScenarioConfig {
    RadioConfig radio;
    Torus torus{800.0, 1040.0};
    double inter_site_distance_m = 200.0;
    double height_offset_m = 22.5;
    double lambda_u_per_km2 = 750.0;
    std::optional<MaternConfig> matern;      // empty: uniform PPP users
    std::optional<BlockageConfig> blockage;  // Scenario I
    std::optional<RainModel> rain;           // Scenario II
    /// Blockage and rain normally degrade an association decided under clear
    /// conditions. When set, schemes instead see the degraded channel.
    bool reassociate_under_degradation = false;
    std::uint64_t seed = 1;
    long iterations = 0;  // 0: iterate until target_total_users users were drawn
    long target_total_users = 10000;
};

/// Structured validation; one entry per offending field.
inline std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& field, const std::string& message) {
        if (!ok) errors.push_back(field + ": " + message);
    };
    check(cfg.torus.width > 0.0, "torus.width_m", "must be positive");
    check(cfg.torus.height > 0.0, "torus.height_m", "must be positive");
    check(cfg.inter_site_distance_m > 0.0, "inter_site_distance_m", "must be positive");
    check(cfg.height_offset_m >= 0.0, "height_offset_m", "must be non-negative");
    check(cfg.lambda_u_per_km2 >= 0.0, "lambda_u", "must be non-negative");
    check(detail::divides_360(cfg.radio.bs_beamwidth_deg), "radio.theta_b_deg",
          "must divide 360 degrees");
    check(detail::divides_360(cfg.radio.user_beamwidth_deg), "radio.theta_u_deg",
          "must divide 360 degrees");
    check(cfg.radio.bandwidth_hz > 0.0, "radio.w_hz", "must be positive");
    check(cfg.radio.overhead >= 0.0 && cfg.radio.overhead < 1.0, "radio.xi", "must be in [0, 1)");
    check(cfg.radio.min_rate_bps > 0.0, "radio.r_min_bps", "must be positive");
    check(cfg.radio.shares_per_beam.is_unbounded() || cfg.radio.shares_per_beam.count() >= 1,
          "radio.s", "must be a positive integer or \"inf\"");
    check(cfg.radio.sf_los_stddev_db >= 0.0, "radio.sf_los_stddev_db", "must be non-negative");
    check(cfg.radio.sf_nlos_stddev_db >= 0.0, "radio.sf_nlos_stddev_db", "must be non-negative");
    if (cfg.matern) {
        check(cfg.matern->n_parents >= 1, "user_generator.n_parents", "must be at least 1");
        check(cfg.matern->radius_m > 0.0, "user_generator.radius_m", "must be positive");
    }
    if (cfg.blockage) {
        check(cfg.blockage->target_fraction > 0.0 && cfg.blockage->target_fraction < 1.0,
              "blockage.target_fraction", "must be in (0, 1)");
        check(cfg.blockage->sizes.length_min > 0.0 &&
                  cfg.blockage->sizes.length_max >= cfg.blockage->sizes.length_min,
              "blockage.length_range_m", "must be a positive range");
        check(cfg.blockage->sizes.width_min > 0.0 &&
                  cfg.blockage->sizes.width_max >= cfg.blockage->sizes.width_min,
              "blockage.width_range_m", "must be a positive range");
    }
    if (cfg.rain) check(cfg.rain->rate_mm_h >= 0.0, "rain.rate_mm_h", "must be non-negative");
    check(cfg.iterations >= 0, "iterations", "must be non-negative");
    check(cfg.target_total_users > 0, "target_total_users", "must be positive");
    if (cfg.iterations == 0)
        check(cfg.lambda_u_per_km2 > 0.0, "lambda_u",
              "must be positive when iterating to a user target");
    // hex layout preconditions
    if (cfg.torus.width > 0.0 && cfg.torus.height > 0.0 && cfg.inter_site_distance_m > 0.0) {
        try {
            make_hex_layout(cfg.torus, cfg.inter_site_distance_m, cfg.height_offset_m);
        } catch (const std::exception& e) {
            errors.push_back(std::string("torus/inter_site_distance_m: ") + e.what());
        }
    }
    return errors;
}

/// One drawn iteration: the instance association schemes run on, and the
/// budgets metrics are evaluated with (these differ when blockage or rain
/// degrade a clear-sky association).
struct ScenarioRealization {
    Instance instance;
    std::vector<LinkBudget> eval_budgets;
    std::optional<BlockerField> blockers;
    long iteration = 0;
    bool degraded = false;
};

namespace detail {

inline UserSet draw_users(const ScenarioConfig& cfg, long iteration) {
    Rng rng = substream(cfg.seed, Stream::Users, static_cast<std::uint64_t>(iteration));
    const long count = rng.poisson(cfg.lambda_u_per_km2 * cfg.torus.area_km2());
    if (!cfg.matern) {
        UserSet users;
        users.generator = UserGenerator::PPP;
        users.positions.reserve(static_cast<std::size_t>(count));
        for (long i = 0; i < count; ++i)
            users.positions.push_back(
                {rng.uniform(0.0, cfg.torus.width), rng.uniform(0.0, cfg.torus.height)});
        return users;
    }
    return sample_matern(cfg.torus, count, cfg.matern->n_parents, cfg.matern->radius_m, rng);
}

} // namespace detail

/// Number of users iteration `k` will contain; deterministic in (seed, k).
inline long users_in_iteration(const ScenarioConfig& cfg, long iteration) {
    Rng rng = substream(cfg.seed, Stream::Users, static_cast<std::uint64_t>(iteration));
    return rng.poisson(cfg.lambda_u_per_km2 * cfg.torus.area_km2());
}

inline ScenarioRealization realize(const ScenarioConfig& cfg, long iteration) {
    {
        const auto errors = validate_config(cfg);
        if (!errors.empty()) {
            std::string msg = "invalid scenario config:";
            for (const auto& e : errors) msg += "\n  " + e;
            throw std::invalid_argument(msg);
        }
    }
    const NetworkLayout layout =
        make_hex_layout(cfg.torus, cfg.inter_site_distance_m, cfg.height_offset_m);
    const UserSet users = detail::draw_users(cfg, iteration);
    const std::size_t n_links =
        static_cast<std::size_t>(users.count()) * static_cast<std::size_t>(layout.n_bs());

    // Shadow fading is drawn once per link, both LOS and NLOS values, so the
    // channel does not change when a link flips state under blockage.
    std::vector<double> sf_los(n_links), sf_nlos(n_links);
    {
        Rng rng = substream(cfg.seed, Stream::ShadowFading, static_cast<std::uint64_t>(iteration));
        for (std::size_t k = 0; k < n_links; ++k) {
            sf_los[k] = rng.normal(0.0, cfg.radio.sf_los_stddev_db);
            sf_nlos[k] = rng.normal(0.0, cfg.radio.sf_nlos_stddev_db);
        }
    }

    std::optional<BlockerField> blockers;
    std::vector<char> los(n_links, 1);
    if (cfg.blockage) {
        Rng rng = substream(cfg.seed, Stream::Blockers, static_cast<std::uint64_t>(iteration));
        blockers = sample_blockers(cfg.torus, cfg.blockage->target_fraction, cfg.blockage->sizes, rng);
        std::size_t k = 0;
        for (int i = 0; i < users.count(); ++i)
            for (int j = 0; j < layout.n_bs(); ++j, ++k)
                los[k] = is_blocked(users.positions[i], layout.bs_positions[j], *blockers, cfg.torus)
                             ? 0
                             : 1;
    }
    const RainModel rain = cfg.rain.value_or(RainModel{});
    const bool degraded = cfg.blockage.has_value() || (cfg.rain && cfg.rain->rate_mm_h > 0.0);

    ScenarioRealization out{
        cfg.reassociate_under_degradation && degraded
            ? build_instance(layout, users, cfg.radio, sf_los, sf_nlos, los, rain)
            : build_instance(layout, users, cfg.radio, sf_los, sf_nlos,
                             std::vector<char>(n_links, 1), RainModel{}),
        {},
        std::move(blockers),
        iteration,
        degraded};

    if (!degraded || cfg.reassociate_under_degradation) {
        out.eval_budgets.reserve(n_links);
        for (int i = 0; i < users.count(); ++i)
            for (int j = 0; j < layout.n_bs(); ++j)
                out.eval_budgets.push_back(out.instance.budget(i, j));
    } else {
        out.eval_budgets.resize(n_links);
        std::size_t k = 0;
        for (int i = 0; i < users.count(); ++i)
            for (int j = 0; j < layout.n_bs(); ++j, ++k)
                out.eval_budgets[k] = link_snr(cfg.radio, out.instance.geometry(i, j), sf_los[k],
                                               sf_nlos[k], los[k] != 0, rain);
    }
    return out;
}

} // namespace mmwave
