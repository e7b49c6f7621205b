#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mmwave/lp_format.hpp"
#include "mmwave/optimal.hpp"
#include "test_fixtures.hpp"

using namespace mmwave;
using namespace fixtures;

namespace {

void check_models_equal(const milp::Model& a, const milp::Model& b) {
    CHECK(a.maximize == b.maximize);
    CHECK(a.obj_constant == b.obj_constant);
    REQUIRE(a.vars.size() == b.vars.size());
    for (std::size_t j = 0; j < a.vars.size(); ++j) {
        const int bj = b.find_var(a.vars[j].name);
        REQUIRE_MESSAGE(bj >= 0, "missing variable ", a.vars[j].name);
        CHECK(a.vars[j].obj == b.vars[bj].obj);
        CHECK(a.vars[j].lb == b.vars[bj].lb);
        CHECK(a.vars[j].ub == b.vars[bj].ub);
        CHECK(a.vars[j].integer == b.vars[bj].integer);
    }
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        CHECK(a.rows[r].name == b.rows[r].name);
        CHECK(a.rows[r].sense == b.rows[r].sense);
        CHECK(a.rows[r].rhs == b.rows[r].rhs);
        REQUIRE(a.rows[r].coeffs.size() == b.rows[r].coeffs.size());
        for (std::size_t k = 0; k < a.rows[r].coeffs.size(); ++k) {
            CHECK(a.vars[a.rows[r].coeffs[k].first].name ==
                  b.vars[b.rows[r].coeffs[k].first].name);
            CHECK(a.rows[r].coeffs[k].second == b.rows[r].coeffs[k].second);
        }
    }
}

} // namespace

TEST_CASE("association MILP round-trips through the LP text format exactly") {
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        const Instance inst = random_small_instance(seed, 4, 3, 2);
        const AssociationMilp p1 = build_association_milp(inst, 1e9);
        std::ostringstream os;
        write_lp(p1.model, os);
        const milp::Model parsed = read_lp(os.str());
        check_models_equal(p1.model, parsed);
    }
}

TEST_CASE("solving the parsed LP file reproduces the internal optimum") {
    for (std::uint64_t seed : {5ull, 17ull, 29ull, 41ull}) {
        const Instance inst = random_small_instance(seed, 4, 3, 2);
        const AssociationMilp p1 = build_association_milp(inst, 1e9);
        std::ostringstream os;
        write_lp(p1.model, os);
        const milp::Model parsed = read_lp(os.str());

        const auto direct = milp::solve_milp(p1.model, {1e-12, 0.0, 0});
        const auto via_file = milp::solve_milp(parsed, {1e-12, 0.0, 0});
        REQUIRE(direct.status == milp::MilpStatus::Optimal);
        REQUIRE(via_file.status == milp::MilpStatus::Optimal);
        CHECK(std::abs(direct.objective - via_file.objective) <=
              1e-6 * std::max(1.0, std::abs(direct.objective)));
    }
}

TEST_CASE("LP export of a 2x2 instance has 4 share and 2 satisfaction variables") {
    const Torus torus{2000.0, 2000.0};
    const NetworkLayout layout = layout_with(torus, {{800.0, 1000.0}, {1000.0, 1300.0}});
    const Instance inst = build_instance_plain(
        layout, users_at({{900.0, 1000.0}, {1000.0, 1150.0}}), RadioConfig{});
    REQUIRE(inst.candidate_links().size() == 4);

    const AssociationMilp p1 = build_association_milp(inst, 1e9);
    int x_vars = 0, p_vars = 0, y_vars = 0;
    for (const auto& v : p1.model.vars) {
        if (v.name.rfind("x_", 0) == 0) ++x_vars;
        if (v.name.rfind("p_", 0) == 0) ++p_vars;
        if (v.name.rfind("y_", 0) == 0) ++y_vars;
    }
    CHECK(x_vars == 4);
    CHECK(p_vars == 2);
    CHECK(y_vars == 0);  // no contested user beams in this placement

    std::ostringstream os;
    write_lp(p1.model, os);
    const std::string text = os.str();
    CHECK(text.find("Generals") != std::string::npos);
    CHECK(text.find("rate_0") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("empty candidate set exports a pure-penalty objective") {
    RadioConfig radio;
    radio.min_snr_db = 500.0;
    const Torus torus{1000.0, 1000.0};
    const Instance inst = build_instance_plain(layout_with(torus, {{500.0, 500.0}}),
                                               users_at({{1.0, 1.0}, {2.0, 2.0}}), radio);
    const AssociationMilp p1 = build_association_milp(inst, 1e9);
    int x_vars = 0;
    for (const auto& v : p1.model.vars)
        if (v.name.rfind("x_", 0) == 0) ++x_vars;
    CHECK(x_vars == 0);
    CHECK(p1.model.obj_constant == -2e9);

    std::ostringstream os;
    write_lp(p1.model, os);
    const milp::Model parsed = read_lp(os.str());
    check_models_equal(p1.model, parsed);

    const auto sol = milp::solve_milp(parsed, {1e-12, 0.0, 0});
    REQUIRE(sol.status == milp::MilpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-2e9));
}

TEST_CASE("reader accepts common hand-written variations") {
    const std::string text = R"(\ comment line
Minimize
 cost: 2 x + 3.5 y - z + 4
Subject To
 c1: x + y >= 1
 c2: - x + 2 z <= 10
 c3: y - z = 0
Bounds
 0 <= x <= 4
 y <= 9
 -2 <= z <= 2
Binaries
 x
Generals
 y
End
)";
    const milp::Model m = read_lp(text);
    CHECK_FALSE(m.maximize);
    CHECK(m.obj_constant == 4.0);
    REQUIRE(m.vars.size() == 3);
    const int x = m.find_var("x");
    const int y = m.find_var("y");
    const int z = m.find_var("z");
    CHECK(m.vars[x].obj == 2.0);
    CHECK(m.vars[y].obj == 3.5);
    CHECK(m.vars[z].obj == -1.0);
    CHECK(m.vars[x].integer);
    CHECK(m.vars[x].ub == 1.0);  // binary tightens the bound
    CHECK(m.vars[y].integer);
    CHECK(m.vars[y].ub == 9.0);
    CHECK(m.vars[z].lb == -2.0);
    REQUIRE(m.rows.size() == 3);
    CHECK(m.rows[0].sense == milp::Sense::GE);
    CHECK(m.rows[1].sense == milp::Sense::LE);
    CHECK(m.rows[2].sense == milp::Sense::EQ);
}

TEST_CASE("reader accepts an unlabeled objective") {
    const milp::Model m = read_lp("Maximize\n x + 2 y\nSubject To\n r: x + y <= 3\nEnd\n");
    REQUIRE(m.vars.size() == 2);
    CHECK(m.vars[m.find_var("x")].obj == 1.0);
    CHECK(m.vars[m.find_var("y")].obj == 2.0);
    REQUIRE(m.rows.size() == 1);
    CHECK(m.rows[0].rhs == 3.0);
}

TEST_CASE("number formatting survives the round trip") {
    for (const double v : {0.1, 1.0 / 3.0, 1e8, 5e8, 1e9, 33.58700501387776, -76.2, 1e-12}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}
