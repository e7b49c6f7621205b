#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmwave/rng.hpp"

namespace mmwave {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }

/// Rectangular simulation area with wraparound distances.
struct Torus {
    double width = 0.0;   // meters
    double height = 0.0;  // meters

    double area_m2() const { return width * height; }
    double area_km2() const { return area_m2() * 1e-6; }

    bool contains(Vec2 p) const {
        return p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height;
    }

    /// Map an arbitrary point back into [0,W) x [0,H).
    Vec2 wrap(Vec2 p) const {
        double x = std::fmod(p.x, width);
        double y = std::fmod(p.y, height);
        if (x < 0.0) x += width;
        if (y < 0.0) y += height;
        // fmod can return the span itself after the negative fixup
        if (x >= width) x = 0.0;
        if (y >= height) y = 0.0;
        return {x, y};
    }
};

inline void validate(const Torus& t) {
    if (!(t.width > 0.0) || !(t.height > 0.0))
        throw std::invalid_argument("torus dimensions must be positive");
}

namespace detail {

/// Wrap a coordinate difference into [-span/2, span/2).
inline double min_image(double delta, double span) {
    return delta - span * std::floor(delta / span + 0.5);
}

} // namespace detail

/// Minimum-image displacement from `a` to `b`.
inline Vec2 toroidal_delta(Vec2 a, Vec2 b, const Torus& torus) {
    return {detail::min_image(b.x - a.x, torus.width),
            detail::min_image(b.y - a.y, torus.height)};
}

inline double toroidal_distance(Vec2 a, Vec2 b, const Torus& torus) {
    const Vec2 d = toroidal_delta(a, b, torus);
    return std::hypot(d.x, d.y);
}

/// Direction from `from` to `to` under the minimum image, in [0, 2*pi).
inline double toroidal_angle(Vec2 from, Vec2 to, const Torus& torus) {
    const Vec2 d = toroidal_delta(from, to, torus);
    if (d.x == 0.0 && d.y == 0.0)
        throw std::invalid_argument("toroidal_angle: degenerate direction");
    double a = std::atan2(d.y, d.x);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a = 0.0;
    return a;
}

inline double toroidal_angle_deg(Vec2 from, Vec2 to, const Torus& torus) {
    double deg = toroidal_angle(from, to, torus) * (180.0 / kPi);
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

/// Base-station deployment on the torus.
struct NetworkLayout {
    Torus torus;
    std::vector<Vec2> bs_positions;
    double inter_site_distance = 0.0;  // meters
    double height_offset = 22.5;       // vertical user-BS gap, meters

    int n_bs() const { return static_cast<int>(bs_positions.size()); }
};

/// Hexagonal grid: rows isd*sqrt(3)/2 apart, odd rows shifted by isd/2.
/// Row/column pitch is snapped to an exact division of the torus so the
/// pattern is periodic under wraparound; the torus dimensions must be
/// within 1% of an integer number of ideal pitches.
inline NetworkLayout make_hex_layout(const Torus& torus, double inter_site_distance,
                                     double height_offset = 22.5) {
    validate(torus);
    if (!(inter_site_distance > 0.0))
        throw std::invalid_argument("make_hex_layout: inter_site_distance must be positive");

    const double row_pitch_ideal = inter_site_distance * std::sqrt(3.0) / 2.0;
    const int cols = std::max(1, static_cast<int>(std::lround(torus.width / inter_site_distance)));
    const int rows = std::max(1, static_cast<int>(std::lround(torus.height / row_pitch_ideal)));

    const double col_pitch = torus.width / cols;
    const double row_pitch = torus.height / rows;
    if (std::abs(col_pitch - inter_site_distance) > 0.01 * inter_site_distance ||
        std::abs(row_pitch - row_pitch_ideal) > 0.01 * row_pitch_ideal)
        throw std::invalid_argument(
            "make_hex_layout: torus dimensions must be integer multiples of the hex pitch within 1%");

    NetworkLayout layout;
    layout.torus = torus;
    layout.inter_site_distance = inter_site_distance;
    layout.height_offset = height_offset;
    layout.bs_positions.reserve(static_cast<std::size_t>(cols) * rows);
    for (int r = 0; r < rows; ++r) {
        const double x0 = col_pitch / 2.0 + (r % 2 == 1 ? col_pitch / 2.0 : 0.0);
        const double y = row_pitch / 2.0 + r * row_pitch;
        for (int c = 0; c < cols; ++c) {
            layout.bs_positions.push_back(torus.wrap({x0 + c * col_pitch, y}));
        }
    }
    return layout;
}

enum class UserGenerator { PPP, MaternCluster };

struct UserSet {
    std::vector<Vec2> positions;
    UserGenerator generator = UserGenerator::PPP;
    std::vector<Vec2> parents;     // Matern only
    std::vector<int> parent_of;    // Matern only, parallel to positions

    int count() const { return static_cast<int>(positions.size()); }
};

/// Homogeneous Poisson point process with `density` users per km^2.
inline UserSet sample_ppp(const Torus& torus, double density_per_km2, Rng& rng) {
    validate(torus);
    if (density_per_km2 < 0.0)
        throw std::invalid_argument("sample_ppp: density must be non-negative");
    UserSet users;
    users.generator = UserGenerator::PPP;
    const long n = rng.poisson(density_per_km2 * torus.area_km2());
    users.positions.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        users.positions.push_back({rng.uniform(0.0, torus.width), rng.uniform(0.0, torus.height)});
    return users;
}

/// Matern cluster process: `n_parents` uniform parents, offspring uniform in a
/// disk of `radius` around each (wrapped). total_users is split evenly across
/// parents; the remainder goes one-per-parent to the first parents.
inline UserSet sample_matern(const Torus& torus, long total_users, int n_parents, double radius,
                             Rng& rng) {
    validate(torus);
    if (n_parents < 1) throw std::invalid_argument("sample_matern: need at least one parent");
    if (!(radius > 0.0)) throw std::invalid_argument("sample_matern: radius must be positive");
    if (total_users < 0) throw std::invalid_argument("sample_matern: negative user count");

    UserSet users;
    users.generator = UserGenerator::MaternCluster;
    users.positions.reserve(static_cast<std::size_t>(total_users));
    users.parent_of.reserve(static_cast<std::size_t>(total_users));

    users.parents.resize(static_cast<std::size_t>(n_parents));
    for (auto& p : users.parents)
        p = {rng.uniform(0.0, torus.width), rng.uniform(0.0, torus.height)};

    const long base = total_users / n_parents;
    const long remainder = total_users % n_parents;
    for (int k = 0; k < n_parents; ++k) {
        const long offspring = base + (k < remainder ? 1 : 0);
        for (long i = 0; i < offspring; ++i) {
            const double r = radius * std::sqrt(rng.uniform());
            const double phi = rng.uniform(0.0, 2.0 * kPi);
            users.positions.push_back(torus.wrap(
                {users.parents[k].x + r * std::cos(phi), users.parents[k].y + r * std::sin(phi)}));
            users.parent_of.push_back(k);
        }
    }
    return users;
}

/// Oriented rectangular obstacle.
struct BlockRect {
    Vec2 center;
    double length = 0.0;  // extent along the rotated x-axis, meters
    double width = 0.0;   // extent along the rotated y-axis, meters
    double angle = 0.0;   // rotation, radians

    double area() const { return length * width; }
};

struct BlockerSizeRanges {
    double length_min = 5.0, length_max = 20.0;
    double width_min = 5.0, width_max = 20.0;
};

struct BlockerField {
    std::vector<BlockRect> rectangles;
    double target_fraction = 0.10;

    double total_area() const {
        double a = 0.0;
        for (const auto& r : rectangles) a += r.area();
        return a;
    }
};

/// Draw rectangles (uniform center, size, angle) until their summed area first
/// reaches target_fraction of the torus. Overlaps are not deducted.
inline BlockerField sample_blockers(const Torus& torus, double target_fraction,
                                    const BlockerSizeRanges& sizes, Rng& rng) {
    validate(torus);
    if (!(target_fraction > 0.0) || !(target_fraction < 1.0))
        throw std::invalid_argument("sample_blockers: target_fraction must be in (0,1)");
    if (!(sizes.length_min > 0.0) || !(sizes.width_min > 0.0) ||
        sizes.length_max < sizes.length_min || sizes.width_max < sizes.width_min)
        throw std::invalid_argument("sample_blockers: invalid size ranges");

    BlockerField field;
    field.target_fraction = target_fraction;
    const double target_area = target_fraction * torus.area_m2();
    double area = 0.0;
    while (area < target_area) {
        BlockRect r;
        r.center = {rng.uniform(0.0, torus.width), rng.uniform(0.0, torus.height)};
        r.length = rng.uniform(sizes.length_min, sizes.length_max);
        r.width = rng.uniform(sizes.width_min, sizes.width_max);
        r.angle = rng.uniform(0.0, kPi);
        area += r.area();
        field.rectangles.push_back(r);
    }
    return field;
}

namespace detail {

/// Liang-Barsky clip of segment [a,b] against an axis-aligned box of
/// half-extents (hx, hy) centered at the origin.
inline bool segment_hits_aabb(Vec2 a, Vec2 b, double hx, double hy) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {a.x + hx, hx - a.x, a.y + hy, hy - a.y};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;  // parallel and outside
        } else {
            const double t = q[i] / p[i];
            if (p[i] < 0.0) {
                if (t > t1) return false;
                if (t > t0) t0 = t;
            } else {
                if (t < t0) return false;
                if (t < t1) t1 = t;
            }
        }
    }
    return true;
}

inline bool segment_hits_rect(Vec2 a, Vec2 b, const BlockRect& rect) {
    const double c = std::cos(rect.angle);
    const double s = std::sin(rect.angle);
    const auto to_frame = [&](Vec2 p) -> Vec2 {
        const Vec2 d = {p.x - rect.center.x, p.y - rect.center.y};
        return {c * d.x + s * d.y, -s * d.x + c * d.y};
    };
    return segment_hits_aabb(to_frame(a), to_frame(b), rect.length / 2.0, rect.width / 2.0);
}

} // namespace detail

/// True iff the minimum-image segment between the endpoints crosses any
/// blocker rectangle. Rectangles wrap across the torus seam, so each one is
/// tested in the nine periodic images around the segment.
inline bool is_blocked(Vec2 user, Vec2 bs, const BlockerField& field, const Torus& torus) {
    if (field.rectangles.empty()) return false;
    const Vec2 d = toroidal_delta(user, bs, torus);
    const Vec2 b = user + d;

    const double lox = std::min(user.x, b.x), hix = std::max(user.x, b.x);
    const double loy = std::min(user.y, b.y), hiy = std::max(user.y, b.y);

    for (const auto& rect : field.rectangles) {
        const double reach = 0.5 * std::hypot(rect.length, rect.width);
        for (int ix = -1; ix <= 1; ++ix) {
            for (int iy = -1; iy <= 1; ++iy) {
                BlockRect img = rect;
                img.center.x += ix * torus.width;
                img.center.y += iy * torus.height;
                if (img.center.x + reach < lox || img.center.x - reach > hix ||
                    img.center.y + reach < loy || img.center.y - reach > hiy)
                    continue;
                if (detail::segment_hits_rect(user, b, img)) return true;
            }
        }
    }
    return false;
}

} // namespace mmwave
