#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mmwave/association.hpp"
#include "mmwave/milp.hpp"

namespace mmwave {

struct SolverConfig {
    double penalty_m = 1e9;      // objective penalty per fully unsatisfied user
    double gap_tolerance = 1e-6;
    double time_limit_s = 0.0;   // 0 = unlimited
    long node_limit = 0;         // 0 = unlimited
    bool seed_with_heuristics = true;
};

/// The association MILP plus the bookkeeping to map variables back to links.
struct AssociationMilp {
    milp::Model model;
    std::vector<int> x_var;  // dense user*bs -> var index, -1 when not a candidate
    std::vector<int> p_var;  // per user
    bool unbounded_shares = false;
};

/// Build the throughput-maximization MILP.
///
/// Finite share limit s: integer share variables x in [0, s]; a beam's shares
/// sum to at most s; each active user beam serves one BS (binary indicators
/// are introduced only where two candidate BSs fall into the same user beam);
/// per-user rate must cover p_i * R_min with p_i in [0, 1]; the objective is
/// total throughput minus penalty_m per unit of unsatisfaction.
///
/// Unbounded s: shares become continuous beam-time fractions in [0, 1] whose
/// per-beam sum is at most 1, the limit of ever-finer share granularity.
inline AssociationMilp build_association_milp(const Instance& inst, double penalty_m) {
    AssociationMilp out;
    milp::Model& m = out.model;
    const RadioConfig& radio = inst.radio();
    const bool unbounded = radio.shares_per_beam.is_unbounded();
    out.unbounded_shares = unbounded;
    const double s = unbounded ? 1.0 : static_cast<double>(radio.shares_per_beam.count());
    const double w_over_s = radio.bandwidth_hz / s;
    const double overhead_factor = 1.0 - radio.overhead;
    const double rate_factor = radio.rate_constraint_includes_overhead ? overhead_factor : 1.0;

    out.x_var.assign(static_cast<std::size_t>(inst.n_users()) * inst.n_bs(), -1);
    out.p_var.assign(inst.n_users(), -1);

    for (int i = 0; i < inst.n_users(); ++i) {
        for (int j = 0; j < inst.n_bs(); ++j) {
            if (!inst.is_candidate(i, j)) continue;
            const double se = inst.budget(i, j).spectral_efficiency;
            out.x_var[inst.link_index(i, j)] =
                m.add_var("x_" + std::to_string(i) + "_" + std::to_string(j), 0.0, unbounded ? 1.0 : s,
                          overhead_factor * w_over_s * se, !unbounded);
        }
    }
    for (int i = 0; i < inst.n_users(); ++i)
        out.p_var[i] = m.add_var("p_" + std::to_string(i), 0.0, 1.0, penalty_m, false);
    m.obj_constant = -penalty_m * inst.n_users();

    // beam share caps
    for (int j = 0; j < inst.n_bs(); ++j) {
        for (int d = 0; d < inst.n_bs_beams(); ++d) {
            const auto& users = inst.users_in_bs_beam(j, d);
            if (users.empty()) continue;
            std::vector<std::pair<int, double>> coeffs;
            for (int i : users) coeffs.push_back({out.x_var[inst.link_index(i, j)], 1.0});
            m.add_row("beam_" + std::to_string(j) + "_" + std::to_string(d), std::move(coeffs),
                      milp::Sense::LE, unbounded ? 1.0 : s);
        }
    }

    // one serving BS per user beam; indicators only where the beam is contested
    for (int i = 0; i < inst.n_users(); ++i) {
        for (int d = 0; d < inst.n_user_beams(); ++d) {
            const auto& bss = inst.bss_in_user_beam(i, d);
            if (bss.size() < 2) continue;
            const std::string tag = std::to_string(i) + "_" + std::to_string(d);
            if (!unbounded && radio.shares_per_beam.count() == 1) {
                std::vector<std::pair<int, double>> coeffs;
                for (int j : bss) coeffs.push_back({out.x_var[inst.link_index(i, j)], 1.0});
                m.add_row("ubeam_" + tag, std::move(coeffs), milp::Sense::LE, 1.0);
                continue;
            }
            std::vector<std::pair<int, double>> group;
            for (int j : bss) {
                const int xv = out.x_var[inst.link_index(i, j)];
                const int yv = m.add_var("y_" + std::to_string(i) + "_" + std::to_string(j), 0.0,
                                         1.0, 0.0, true);
                m.add_row("lnk_" + std::to_string(i) + "_" + std::to_string(j),
                          {{xv, 1.0}, {yv, unbounded ? -1.0 : -s}}, milp::Sense::LE, 0.0);
                group.push_back({yv, 1.0});
            }
            m.add_row("ubeam_" + tag, std::move(group), milp::Sense::LE, 1.0);
        }
    }

    // minimum-rate coverage of p_i
    for (int i = 0; i < inst.n_users(); ++i) {
        std::vector<std::pair<int, double>> coeffs;
        for (int j = 0; j < inst.n_bs(); ++j) {
            const int xv = out.x_var[inst.link_index(i, j)];
            if (xv < 0) continue;
            coeffs.push_back({xv, rate_factor * w_over_s * inst.budget(i, j).spectral_efficiency});
        }
        coeffs.push_back({out.p_var[i], -radio.min_rate_bps});
        m.add_row("rate_" + std::to_string(i), std::move(coeffs), milp::Sense::GE, 0.0);
    }
    return out;
}

namespace detail {

/// Express a heuristic association as a feasible point of the MILP, when its
/// equal beam-time splits are representable; used to warm-start the search.
inline std::optional<std::vector<double>> milp_point_from(const AssociationMilp& p1,
                                                          const Instance& inst,
                                                          const Association& a) {
    std::vector<double> v(p1.model.vars.size(), 0.0);
    const auto& limit = inst.radio().shares_per_beam;
    for (int i = 0; i < inst.n_users(); ++i) {
        for (int j = 0; j < inst.n_bs(); ++j) {
            if (a.x[a.idx(i, j)] < 1) continue;
            const int xv = p1.x_var[inst.link_index(i, j)];
            if (xv < 0) return std::nullopt;
            const double share = a.time_share[a.idx(i, j)];
            if (p1.unbounded_shares) {
                v[xv] = share;
            } else {
                const double shares = share * limit.count();
                if (std::abs(shares - std::round(shares)) > 1e-9) return std::nullopt;
                v[xv] = std::round(shares);
            }
            const int yv = p1.model.find_var("y_" + std::to_string(i) + "_" + std::to_string(j));
            if (yv >= 0) v[yv] = 1.0;
        }
    }
    const double rate_factor =
        inst.radio().rate_constraint_includes_overhead ? 1.0 - inst.radio().overhead : 1.0;
    for (int i = 0; i < inst.n_users(); ++i) {
        double rate = 0.0;
        for (int j = 0; j < inst.n_bs(); ++j) {
            const int xv = p1.x_var[inst.link_index(i, j)];
            if (xv < 0 || v[xv] <= 0.0) continue;
            const double share = p1.unbounded_shares ? v[xv] : v[xv] / limit.count();
            rate += rate_factor * inst.radio().bandwidth_hz * share *
                    inst.budget(i, j).spectral_efficiency;
        }
        v[p1.p_var[i]] = std::min(1.0, rate / inst.radio().min_rate_bps);
    }
    return v;
}

inline double model_objective_at(const milp::Model& m, const std::vector<double>& v) {
    double obj = m.obj_constant;
    for (std::size_t j = 0; j < m.vars.size(); ++j) obj += m.vars[j].obj * v[j];
    return obj;
}

} // namespace detail

/// Exact solution of the association problem by branch and bound. Always
/// returns a feasible association (the empty one is feasible); when the time
/// or node limit interrupts the search the result carries the residual gap.
inline Association solve_optimal(const Instance& inst, const SolverConfig& cfg = {}) {
    const AssociationMilp p1 = build_association_milp(inst, cfg.penalty_m);

    std::vector<double> warm;
    double warm_obj = -milp::kInf;
    auto consider = [&](const Association& a) {
        const auto point = detail::milp_point_from(p1, inst, a);
        if (!point) return;
        const double obj = detail::model_objective_at(p1.model, *point);
        if (obj > warm_obj) {
            warm_obj = obj;
            warm = *point;
        }
    };
    if (cfg.seed_with_heuristics) {
        consider(snr_dynamic(inst));
        consider(snr_one(inst));
    }
    {
        // the empty association is always feasible
        Association zero("zero", inst.n_users(), inst.n_bs());
        consider(zero);
    }

    milp::BnbConfig bnb;
    bnb.gap_tolerance = cfg.gap_tolerance;
    bnb.time_limit_s = cfg.time_limit_s;
    bnb.node_limit = cfg.node_limit;
    // guard the incumbent against float noise in the warm objective
    const double warm_guard = warm_obj - 1e-9 * std::max(1.0, std::abs(warm_obj));
    const milp::MilpSolution sol =
        milp::solve_milp(p1.model, bnb, warm.empty() ? nullptr : &warm, warm_guard);

    Association a("optimal", inst.n_users(), inst.n_bs());
    const std::vector<double>& v = sol.x.empty() ? warm : sol.x;
    const auto& limit = inst.radio().shares_per_beam;
    if (!v.empty()) {
        for (int i = 0; i < inst.n_users(); ++i) {
            for (int j = 0; j < inst.n_bs(); ++j) {
                const int xv = p1.x_var[inst.link_index(i, j)];
                if (xv < 0) continue;
                if (p1.unbounded_shares) {
                    const double share = std::clamp(v[xv], 0.0, 1.0);
                    if (share > 1e-9) {
                        a.x[a.idx(i, j)] = 1;
                        a.time_share[a.idx(i, j)] = share;
                    }
                } else {
                    const int shares = static_cast<int>(std::lround(v[xv]));
                    if (shares >= 1) {
                        a.x[a.idx(i, j)] = shares;
                        a.time_share[a.idx(i, j)] = static_cast<double>(shares) / limit.count();
                    }
                }
            }
        }
    }
    recompute_satisfaction(inst, a);
    a.proven_optimal = sol.status == milp::MilpStatus::Optimal;
    a.bound_gap = sol.gap;
    a.objective = association_objective(inst, a, cfg.penalty_m);
    return a;
}

} // namespace mmwave
