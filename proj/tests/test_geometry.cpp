#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mmwave/geometry.hpp"

using namespace mmwave;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

} // namespace

TEST_CASE("hex layout reproduces the reference deployments") {
    const NetworkLayout big = make_hex_layout({800.0, 1040.0}, 200.0);
    CHECK(big.n_bs() == 24);

    const NetworkLayout one = make_hex_layout({200.0, 173.2}, 200.0);
    CHECK(one.n_bs() == 1);

    // 2x2 grid; minimum pairwise distance derived by enumerating all pairs
    const NetworkLayout four = make_hex_layout({400.0, 346.4}, 200.0);
    CHECK(four.n_bs() == 4);
    double min_dist = 1e9;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            min_dist = std::min(min_dist, toroidal_distance(four.bs_positions[a],
                                                            four.bs_positions[b], four.torus));
    CHECK(min_dist == doctest::Approx(200.0).epsilon(1e-4));
}

TEST_CASE("hex layout validates its inputs") {
    CHECK_THROWS(make_hex_layout({800.0, 1040.0}, 0.0));
    CHECK_THROWS(make_hex_layout({800.0, 1040.0}, -5.0));
    // 10% off an integer number of pitches
    CHECK_THROWS(make_hex_layout({820.0, 1040.0}, 200.0));
}

TEST_CASE("hex layout positions stay inside the torus and respect spacing") {
    const NetworkLayout layout = make_hex_layout({800.0, 1040.0}, 200.0);
    for (const Vec2& p : layout.bs_positions) CHECK(layout.torus.contains(p));
    for (int a = 0; a < layout.n_bs(); ++a)
        for (int b = a + 1; b < layout.n_bs(); ++b)
            CHECK(toroidal_distance(layout.bs_positions[a], layout.bs_positions[b], layout.torus) >=
                  layout.inter_site_distance - 0.5);
}

TEST_CASE("exactly tiling hex layout has six neighbors per BS") {
    const double isd = 200.0;
    const double row = isd * std::sqrt(3.0) / 2.0;
    const NetworkLayout layout = make_hex_layout({4 * isd, 4 * row}, isd);
    REQUIRE(layout.n_bs() == 16);
    for (int a = 0; a < layout.n_bs(); ++a) {
        int neighbors = 0;
        for (int b = 0; b < layout.n_bs(); ++b) {
            if (a == b) continue;
            const double d =
                toroidal_distance(layout.bs_positions[a], layout.bs_positions[b], layout.torus);
            if (std::abs(d - isd) < 1e-6) ++neighbors;
        }
        CHECK(neighbors == 6);
    }
}

TEST_CASE("toroidal distance matches hand-computed wraparound values") {
    const Torus t{800.0, 1040.0};
    CHECK(toroidal_distance({0, 0}, {790, 0}, t) == doctest::Approx(10.0));
    CHECK(toroidal_distance({0, 0}, {0, 0}, t) == 0.0);
    CHECK(rel_err(toroidal_distance({10, 10}, {790, 1030}, t), 28.284271247461902) < 1e-12);
}

TEST_CASE("toroidal distance is a metric") {
    const Torus t{500.0, 300.0};
    Rng rng(42);
    const double diameter = std::hypot(t.width / 2.0, t.height / 2.0);
    for (int i = 0; i < 500; ++i) {
        const Vec2 a{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const Vec2 b{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const Vec2 c{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const double ab = toroidal_distance(a, b, t);
        const double ba = toroidal_distance(b, a, t);
        const double ac = toroidal_distance(a, c, t);
        const double cb = toroidal_distance(c, b, t);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(ab <= ac + cb + 1e-9);
        CHECK(ab <= diameter + 1e-9);
        CHECK(toroidal_distance(a, a, t) == 0.0);
    }
}

TEST_CASE("toroidal angle follows the minimum image") {
    const Torus t{800.0, 1040.0};
    CHECK(toroidal_angle({0, 0}, {10, 0}, t) == doctest::Approx(0.0));
    CHECK(toroidal_angle({0, 0}, {0, 10}, t) == doctest::Approx(kPi / 2.0));
    // wraps east across the seam, not the long way west
    CHECK(toroidal_angle({790, 0}, {10, 0}, t) == doctest::Approx(0.0));
    CHECK_THROWS_AS(toroidal_angle({5, 5}, {5, 5}, t), std::invalid_argument);
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Vec2 a{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const Vec2 b{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const double deg = toroidal_angle_deg(a, b, t);
        CHECK(deg >= 0.0);
        CHECK(deg < 360.0);
    }
}

TEST_CASE("ppp sampling: zero density, mean count, determinism") {
    const Torus t{800.0, 1040.0};
    {
        Rng rng(1);
        CHECK(sample_ppp(t, 0.0, rng).count() == 0);
    }
    {
        // area 0.832 km^2 at density 750 -> mean 624
        double total = 0.0;
        const int draws = 1000;
        Rng rng(2024);
        for (int i = 0; i < draws; ++i) total += sample_ppp(t, 750.0, rng).count();
        const double mean = total / draws;
        const double sigma_of_mean = std::sqrt(624.0 / draws);
        CHECK(std::abs(mean - 624.0) < 3.0 * sigma_of_mean);
    }
    {
        Rng a(99), b(99);
        const UserSet ua = sample_ppp(t, 100.0, a);
        const UserSet ub = sample_ppp(t, 100.0, b);
        REQUIRE(ua.count() == ub.count());
        for (int i = 0; i < ua.count(); ++i) {
            CHECK(ua.positions[i].x == ub.positions[i].x);
            CHECK(ua.positions[i].y == ub.positions[i].y);
        }
        for (const Vec2& p : ua.positions) CHECK(t.contains(p));
    }
    Rng rng(3);
    CHECK_THROWS(sample_ppp(t, -1.0, rng));
}

TEST_CASE("ppp thinning invariance in moments") {
    const Torus t{800.0, 1040.0};  // 0.832 km^2
    const int seeds = 400;
    double sum_thinned = 0, sumsq_thinned = 0, sum_direct = 0, sumsq_direct = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng(1000 + s);
        const UserSet full = sample_ppp(t, 1000.0, rng);
        long kept = 0;
        for (int i = 0; i < full.count(); ++i)
            if (rng.uniform() < 0.3) ++kept;
        sum_thinned += kept;
        sumsq_thinned += static_cast<double>(kept) * kept;
        Rng rng2(5000 + s);
        const long direct = sample_ppp(t, 300.0, rng2).count();
        sum_direct += direct;
        sumsq_direct += static_cast<double>(direct) * direct;
    }
    const double mean = 300.0 * 0.832;
    const double mean_thinned = sum_thinned / seeds;
    const double mean_direct = sum_direct / seeds;
    const double sigma_of_mean = std::sqrt(mean / seeds);
    CHECK(std::abs(mean_thinned - mean) < 4.0 * sigma_of_mean);
    CHECK(std::abs(mean_direct - mean) < 4.0 * sigma_of_mean);
    const double var_thinned = sumsq_thinned / seeds - mean_thinned * mean_thinned;
    const double var_direct = sumsq_direct / seeds - mean_direct * mean_direct;
    // Poisson: variance equals mean, within sampling noise
    CHECK(var_thinned / mean > 0.75);
    CHECK(var_thinned / mean < 1.3);
    CHECK(var_direct / mean > 0.75);
    CHECK(var_direct / mean < 1.3);
}

TEST_CASE("matern clustering: balanced offspring, disk membership, determinism") {
    const Torus t{800.0, 1040.0};
    {
        Rng rng(5);
        const UserSet u = sample_matern(t, 600, 30, 50.0, rng);
        REQUIRE(u.count() == 600);
        REQUIRE(u.parents.size() == 30);
        std::vector<int> per_parent(30, 0);
        for (int k : u.parent_of) ++per_parent[k];
        for (int k = 0; k < 30; ++k) CHECK(per_parent[k] == 20);
    }
    {
        // remainder spread one-per-parent over the first parents
        Rng rng(6);
        const UserSet u = sample_matern(t, 604, 30, 50.0, rng);
        std::vector<int> per_parent(30, 0);
        for (int k : u.parent_of) ++per_parent[k];
        for (int k = 0; k < 30; ++k) CHECK(per_parent[k] == (k < 4 ? 21 : 20));
    }
    {
        Rng rng(7);
        const UserSet u = sample_matern(t, 10, 1, 50.0, rng);
        REQUIRE(u.count() == 10);
        for (const Vec2& p : u.positions) {
            CHECK(t.contains(p));
            CHECK(toroidal_distance(p, u.parents[0], t) <= 50.0 + 1e-9);
        }
    }
    {
        Rng rng(400);
        const UserSet u = sample_matern(t, 900, 30, 50.0, rng);
        for (int i = 0; i < u.count(); ++i)
            CHECK(toroidal_distance(u.positions[i], u.parents[u.parent_of[i]], t) <= 50.0 + 1e-9);
    }
    {
        Rng a(8), b(8);
        const UserSet ua = sample_matern(t, 90, 30, 50.0, a);
        const UserSet ub = sample_matern(t, 90, 30, 50.0, b);
        for (int i = 0; i < ua.count(); ++i) CHECK(ua.positions[i].x == ub.positions[i].x);
    }
    Rng rng(9);
    CHECK_THROWS(sample_matern(t, 10, 1, 0.0, rng));
    CHECK_THROWS(sample_matern(t, 10, 0, 50.0, rng));
}

TEST_CASE("blocker field hits the target area and stops there") {
    const Torus t{800.0, 1040.0};
    const double target_area = 0.10 * t.area_m2();
    Rng rng(11);
    const BlockerField field = sample_blockers(t, 0.10, {}, rng);
    const double total = field.total_area();
    CHECK(total >= target_area);
    CHECK(total < target_area + 400.0);  // one 20x20 rectangle at most
    CHECK(total - field.rectangles.back().area() < target_area);
    for (const auto& r : field.rectangles) {
        CHECK(r.length >= 5.0);
        CHECK(r.length <= 20.0);
        CHECK(r.width >= 5.0);
        CHECK(r.width <= 20.0);
    }
    Rng a(12), b(12);
    const BlockerField fa = sample_blockers(t, 0.10, {}, a);
    const BlockerField fb = sample_blockers(t, 0.10, {}, b);
    REQUIRE(fa.rectangles.size() == fb.rectangles.size());
    for (std::size_t i = 0; i < fa.rectangles.size(); ++i)
        CHECK(fa.rectangles[i].center.x == fb.rectangles[i].center.x);
    Rng rng2(13);
    CHECK_THROWS(sample_blockers(t, 0.0, {}, rng2));
    CHECK_THROWS(sample_blockers(t, 1.0, {}, rng2));
}

namespace {

// independent oracle: point inside an oriented rectangle
bool point_in_rect(Vec2 p, const BlockRect& r) {
    const double c = std::cos(r.angle), s = std::sin(r.angle);
    const double dx = p.x - r.center.x, dy = p.y - r.center.y;
    const double u = c * dx + s * dy;
    const double v = -s * dx + c * dy;
    return std::abs(u) <= r.length / 2.0 && std::abs(v) <= r.width / 2.0;
}

} // namespace

TEST_CASE("line-of-sight blockage test") {
    const Torus t{100.0, 100.0};
    BlockerField empty;
    CHECK_FALSE(is_blocked({10, 10}, {90, 90}, empty, t));

    BlockerField field;
    field.rectangles.push_back({{50, 50}, 10.0, 4.0, 0.3});
    CHECK(is_blocked({50, 30}, {50, 70}, field, t));  // straight through the center

    // endpoint inside the rectangle; verified by the point-in-rectangle oracle
    const Vec2 inside{51, 50};
    REQUIRE(point_in_rect(inside, field.rectangles[0]));
    CHECK(is_blocked(inside, {90, 90}, field, t));
    CHECK(is_blocked({90, 90}, inside, field, t));

    // far away from the segment
    CHECK_FALSE(is_blocked({10, 10}, {20, 10}, field, t));

    // wrapped segment crosses a seam rectangle
    BlockerField seam;
    seam.rectangles.push_back({{1, 50}, 4.0, 4.0, 0.0});
    CHECK(is_blocked({95, 50}, {5, 50}, seam, t));
    CHECK(is_blocked({5, 50}, {95, 50}, seam, t));
    CHECK_FALSE(is_blocked({95, 40}, {5, 40}, seam, t));
}

TEST_CASE("blockage is symmetric in its endpoints") {
    const Torus t{300.0, 200.0};
    Rng rng(21);
    BlockerField field = sample_blockers(t, 0.08, {}, rng);
    for (int i = 0; i < 300; ++i) {
        const Vec2 a{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        const Vec2 b{rng.uniform(0, t.width), rng.uniform(0, t.height)};
        CHECK(is_blocked(a, b, field, t) == is_blocked(b, a, field, t));
    }
}

TEST_CASE("torus wrap maps points into the fundamental rectangle") {
    const Torus t{100.0, 50.0};
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
        const Vec2 p{rng.uniform(-300, 300), rng.uniform(-200, 200)};
        const Vec2 w = t.wrap(p);
        CHECK(t.contains(w));
        CHECK(std::abs(detail::min_image(w.x - p.x, t.width)) < 1e-9);
        CHECK(std::abs(detail::min_image(w.y - p.y, t.height)) < 1e-9);
    }
}
