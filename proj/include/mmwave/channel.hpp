#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mmwave/geometry.hpp"

namespace mmwave {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }

/// Maximum users time-sharing one BS beam; "unbounded" models no cap, in
/// which case a beam's time is split equally among its occupants.
struct ShareLimit {
    static constexpr int kUnbounded = -1;
    int value = 1;

    static ShareLimit unbounded() { return ShareLimit{kUnbounded}; }
    static ShareLimit of(int s) {
        if (s < 1) throw std::invalid_argument("shares per beam must be >= 1");
        return ShareLimit{s};
    }
    bool is_unbounded() const { return value == kUnbounded; }
    int count() const {
        if (is_unbounded()) throw std::logic_error("unbounded share limit has no count");
        return value;
    }
    bool operator==(const ShareLimit&) const = default;
};

/// Radio parameters for the link budget and capacity model.
struct RadioConfig {
    double carrier_frequency_ghz = 28.0;
    double bandwidth_hz = 1e8;
    double tx_power_dbm = 20.0;
    double thermal_noise_dbm = -84.0;
    double noise_factor_db = 7.8;
    double min_snr_db = 5.0;
    double min_rate_bps = 5e8;
    double overhead = 0.25;           // fraction of airtime lost to beam management
    double bs_beamwidth_deg = 10.0;
    double user_beamwidth_deg = 5.0;
    ShareLimit shares_per_beam = ShareLimit::of(2);
    double sf_los_stddev_db = 4.0;
    double sf_nlos_stddev_db = 7.82;
    /// When false, the satisfaction/rate constraint in the optimizer uses the
    /// raw link rate without the (1 - overhead) factor.
    bool rate_constraint_includes_overhead = true;

    double noise_dbm() const { return thermal_noise_dbm + noise_factor_db; }
    double min_snr_linear() const { return db_to_linear(min_snr_db); }
    int bs_beam_count() const;
    int user_beam_count() const;
};

namespace detail {

inline bool divides_360(double theta_deg) {
    if (!(theta_deg > 0.0) || theta_deg > 360.0) return false;
    const double m = 360.0 / theta_deg;
    return std::abs(m - std::round(m)) < 1e-9;
}

} // namespace detail

/// Uniform sectorization of the full circle into beams of width theta.
struct BeamIndexing {
    double beamwidth_deg;
    int beam_count;

    explicit BeamIndexing(double theta_deg) : beamwidth_deg(theta_deg) {
        if (!detail::divides_360(theta_deg))
            throw std::invalid_argument("beamwidth must divide 360 degrees");
        beam_count = static_cast<int>(std::round(360.0 / theta_deg));
    }

    double boresight_deg(int index) const { return index * beamwidth_deg; }
};

struct BeamAssignment {
    int beam_index;
    double misalign_deg;  // signed, in [-theta/2, theta/2)
};

/// Nearest-boresight beam for a geographical angle. An angle exactly halfway
/// between boresights belongs to the upper beam, so the misalignment of that
/// boundary case is -theta/2.
inline BeamAssignment assign_beams(double geo_angle_deg, const BeamIndexing& indexing) {
    if (geo_angle_deg < 0.0 || geo_angle_deg >= 360.0)
        throw std::invalid_argument("assign_beams: angle must be in [0, 360)");
    const double theta = indexing.beamwidth_deg;
    int k = static_cast<int>(std::floor(geo_angle_deg / theta + 0.5));
    double misalign = geo_angle_deg - k * theta;
    k %= indexing.beam_count;
    return {k, misalign};
}

/// Sectorized antenna gain in dB (IEEE 802.15.3c pattern): a quadratic
/// mainlobe around boresight and a flat sidelobe floor beyond theta/2.
/// theta_3dB = theta / 2.58.
inline double antenna_gain_db(double misalign_deg, double beamwidth_deg) {
    if (!(beamwidth_deg > 0.0)) throw std::invalid_argument("antenna_gain_db: beamwidth must be positive");
    const double theta_3db = beamwidth_deg / 2.58;
    if (std::abs(misalign_deg) > beamwidth_deg / 2.0)
        return -0.4111 * std::log(theta_3db) - 10.579;
    const double mainlobe_peak = 20.0 * std::log10(1.6162 / std::sin(deg_to_rad(theta_3db / 2.0)));
    const double roll = 2.0 * misalign_deg / theta_3db;
    return mainlobe_peak - 3.01 * roll * roll;
}

/// 3GPP urban path loss at mmWave frequencies, in dB. Shadow-fading draws are
/// passed in so channels can be fixed per link across scheme evaluations.
inline double path_loss_db(double distance_3d_m, double carrier_ghz, bool los, double sf_los_db,
                           double sf_nlos_db) {
    if (!(distance_3d_m > 0.0)) throw std::invalid_argument("path_loss_db: distance must be positive");
    const double los_loss =
        32.4 + 21.0 * std::log10(distance_3d_m) + 20.0 * std::log10(carrier_ghz) + sf_los_db;
    if (los) return los_loss;
    const double nlos_loss =
        35.3 * std::log10(distance_3d_m) + 22.4 + 21.3 * std::log10(carrier_ghz) + sf_nlos_db;
    return std::max(los_loss, nlos_loss);
}

/// Rain attenuation model: specific attenuation k * R^alpha in dB/km.
struct RainModel {
    double rate_mm_h = 0.0;
    double k = 0.124;
    double alpha = 1.061;

    double specific_attenuation_db_per_km() const {
        if (rate_mm_h < 0.0) throw std::invalid_argument("rain rate must be non-negative");
        if (rate_mm_h == 0.0) return 0.0;
        return k * std::pow(rate_mm_h, alpha);
    }
};

inline double rain_attenuation_db(const RainModel& model, double distance_m) {
    if (distance_m < 0.0) throw std::invalid_argument("rain_attenuation_db: negative distance");
    return model.specific_attenuation_db_per_km() * (distance_m / 1000.0);
}

/// Geometry of one candidate user-BS link. Angles in degrees.
struct LinkGeometry {
    double distance_2d = 0.0;
    double distance_3d = 0.0;
    double geo_angle_bs_to_user = 0.0;  // zeta at the BS side
    double geo_angle_user_to_bs = 0.0;  // zeta at the user side
    int bs_beam = 0;
    int user_beam = 0;
    double misalign_bs = 0.0;    // alpha at the BS side
    double misalign_user = 0.0;  // alpha at the user side
};

inline LinkGeometry make_link_geometry(Vec2 user, Vec2 bs, const Torus& torus,
                                       double height_offset, const BeamIndexing& bs_beams,
                                       const BeamIndexing& user_beams) {
    LinkGeometry g;
    g.distance_2d = toroidal_distance(user, bs, torus);
    g.distance_3d = std::hypot(g.distance_2d, height_offset);
    if (g.distance_2d > 0.0) {
        g.geo_angle_bs_to_user = toroidal_angle_deg(bs, user, torus);
        g.geo_angle_user_to_bs = toroidal_angle_deg(user, bs, torus);
    }
    const auto at_bs = assign_beams(g.geo_angle_bs_to_user, bs_beams);
    const auto at_user = assign_beams(g.geo_angle_user_to_bs, user_beams);
    g.bs_beam = at_bs.beam_index;
    g.misalign_bs = at_bs.misalign_deg;
    g.user_beam = at_user.beam_index;
    g.misalign_user = at_user.misalign_deg;
    return g;
}

/// Full link budget: all dB terms plus the resulting SNR.
struct LinkBudget {
    bool los = true;
    double path_loss_db = 0.0;         // includes shadow fading
    double rain_db = 0.0;
    double gain_bs_db = 0.0;
    double gain_user_db = 0.0;
    double snr_db = -std::numeric_limits<double>::infinity();
    double snr = 0.0;                  // linear
    double spectral_efficiency = 0.0;  // log2(1 + snr)
};

/// Compose the link SNR in the dB domain. Transmit power is split equally
/// over the BS's beams.
inline LinkBudget link_snr(const RadioConfig& radio, const LinkGeometry& geo, double sf_los_db,
                           double sf_nlos_db, bool los, const RainModel& rain = {}) {
    LinkBudget b;
    b.los = los;
    b.path_loss_db =
        path_loss_db(geo.distance_3d, radio.carrier_frequency_ghz, los, sf_los_db, sf_nlos_db);
    b.rain_db = rain_attenuation_db(rain, geo.distance_3d);
    b.gain_bs_db = antenna_gain_db(geo.misalign_bs, radio.bs_beamwidth_deg);
    b.gain_user_db = antenna_gain_db(geo.misalign_user, radio.user_beamwidth_deg);
    const double per_beam_power_dbm =
        radio.tx_power_dbm - 10.0 * std::log10(static_cast<double>(radio.bs_beam_count()));
    b.snr_db = per_beam_power_dbm + b.gain_bs_db + b.gain_user_db - b.path_loss_db - b.rain_db -
               radio.noise_dbm();
    b.snr = db_to_linear(b.snr_db);
    b.spectral_efficiency = std::log2(1.0 + b.snr);
    return b;
}

inline int RadioConfig::bs_beam_count() const { return BeamIndexing(bs_beamwidth_deg).beam_count; }
inline int RadioConfig::user_beam_count() const {
    return BeamIndexing(user_beamwidth_deg).beam_count;
}

/// One served link as seen by the capacity formula: the fraction of beam time
/// granted to the user and the link SNR.
struct ServedLink {
    double time_share = 0.0;  // in [0, 1]
    double snr = 0.0;         // linear
};

/// Per-user downlink capacity: (1 - overhead) * W * sum(share * log2(1+snr)).
inline double user_capacity_bps(const RadioConfig& radio, const std::vector<ServedLink>& links) {
    double rate = 0.0;
    for (const auto& l : links) rate += l.time_share * std::log2(1.0 + l.snr);
    return (1.0 - radio.overhead) * radio.bandwidth_hz * rate;
}

inline double satisfaction(double capacity_bps, double min_rate_bps) {
    if (!(min_rate_bps > 0.0)) throw std::invalid_argument("satisfaction: min rate must be positive");
    if (capacity_bps < 0.0) throw std::invalid_argument("satisfaction: negative capacity");
    return std::min(1.0, capacity_bps / min_rate_bps);
}

} // namespace mmwave
