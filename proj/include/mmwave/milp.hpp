#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmwave::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Var {
    std::string name;
    double lb = 0.0;
    double ub = kInf;
    double obj = 0.0;
    bool integer = false;
};

enum class Sense { LE, GE, EQ };

struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (var index, coefficient)
    Sense sense = Sense::LE;
    double rhs = 0.0;
};

/// A mixed-integer linear program; the in-memory twin of the LP text format.
struct Model {
    bool maximize = true;
    double obj_constant = 0.0;
    std::vector<Var> vars;
    std::vector<Row> rows;

    int add_var(std::string name, double lb, double ub, double obj, bool integer) {
        vars.push_back({std::move(name), lb, ub, obj, integer});
        return static_cast<int>(vars.size()) - 1;
    }
    void add_row(std::string name, std::vector<std::pair<int, double>> coeffs, Sense sense,
                 double rhs) {
        rows.push_back({std::move(name), std::move(coeffs), sense, rhs});
    }
    int find_var(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterLimit;
    double objective = 0.0;  // includes the model constant
    std::vector<double> x;   // structural variables only
};

namespace detail {

/// Primal simplex with individual variable bounds, two phases (artificials
/// for rows violated by the bounded start), dense basis inverse with
/// periodic refactorization, and a Bland fallback against cycling.
class BoundedSimplex {
public:
    BoundedSimplex(const Model& model, const std::vector<double>& lb, const std::vector<double>& ub)
        : n_struct_(static_cast<int>(model.vars.size())) {
        build(model, lb, ub);
    }

    LpSolution solve() {
        LpSolution result;
        if (!artificials_.empty()) {
            std::vector<double> phase1_cost(cols_.size(), 0.0);
            for (int a : artificials_) phase1_cost[a] = -1.0;
            const LpStatus st = optimize(phase1_cost);
            if (st == LpStatus::IterLimit) {
                result.status = st;
                return result;
            }
            if (objective_of(phase1_cost) < -feas_tol_ * 10.0) {
                result.status = LpStatus::Infeasible;
                return result;
            }
            // Pin artificials so phase 2 cannot reuse them.
            for (int a : artificials_) ub_[a] = 0.0;
        }
        const LpStatus st = optimize(cost_);
        result.status = st;
        if (st == LpStatus::Optimal) {
            result.objective = objective_of(cost_) * obj_scale_ * (orig_maximize_ ? 1.0 : -1.0) +
                               obj_constant_;
            result.x.resize(n_struct_);
            for (int j = 0; j < n_struct_; ++j) result.x[j] = value_of(j);
        }
        return result;
    }

private:
    enum class VarState : std::uint8_t { AtLower, AtUpper, Basic };

    void build(const Model& model, const std::vector<double>& lb, const std::vector<double>& ub) {
        orig_maximize_ = model.maximize;
        obj_constant_ = model.obj_constant;
        const int m = static_cast<int>(model.rows.size());

        double max_obj = 0.0;
        for (const auto& v : model.vars) max_obj = std::max(max_obj, std::abs(v.obj));
        obj_scale_ = max_obj > 0.0 ? max_obj : 1.0;

        cols_.resize(n_struct_);
        cost_.assign(n_struct_, 0.0);
        lb_ = lb;
        ub_ = ub;
        for (int j = 0; j < n_struct_; ++j) {
            cost_[j] = model.vars[j].obj / obj_scale_ * (orig_maximize_ ? 1.0 : -1.0);
            if (lb_[j] > ub_[j] + 1e-12) infeasible_bounds_ = true;
        }

        rhs_.resize(m);
        row_fixed_slack_.assign(m, false);
        for (int r = 0; r < m; ++r) {
            const Row& row = model.rows[r];
            double flip = row.sense == Sense::GE ? -1.0 : 1.0;
            double scale = 0.0;
            for (const auto& [j, v] : row.coeffs) scale = std::max(scale, std::abs(v));
            if (scale == 0.0) scale = 1.0;
            for (const auto& [j, v] : row.coeffs) cols_[j].push_back({r, flip * v / scale});
            rhs_[r] = flip * row.rhs / scale;
            row_fixed_slack_[r] = row.sense == Sense::EQ;
        }

        // slack columns
        for (int r = 0; r < m; ++r) {
            cols_.push_back({{r, 1.0}});
            cost_.push_back(0.0);
            lb_.push_back(0.0);
            ub_.push_back(row_fixed_slack_[r] ? 0.0 : kInf);
        }

        state_.assign(cols_.size(), VarState::AtLower);
        for (std::size_t j = 0; j < cols_.size(); ++j)
            if (!std::isfinite(lb_[j])) state_[j] = VarState::AtUpper;

        basis_.resize(m);
        binv_.assign(static_cast<std::size_t>(m) * m, 0.0);
        xb_.assign(m, 0.0);
        std::vector<double> residual = rhs_;
        for (std::size_t j = 0; j < cols_.size() - static_cast<std::size_t>(m); ++j) {
            const double v = nonbasic_value(static_cast<int>(j));
            if (v != 0.0)
                for (const auto& [r, coef] : cols_[j]) residual[r] -= coef * v;
        }
        for (int r = 0; r < m; ++r) {
            const int slack = n_struct_ + r;
            if (residual[r] >= -feas_tol_ && (!row_fixed_slack_[r] || residual[r] <= feas_tol_)) {
                basis_[r] = slack;
                state_[slack] = VarState::Basic;
                xb_[r] = residual[r];
                binv_[static_cast<std::size_t>(r) * m + r] = 1.0;
            } else {
                // slack stays nonbasic at 0; an artificial absorbs the violation
                const double sign = residual[r] >= 0.0 ? 1.0 : -1.0;
                const int art = static_cast<int>(cols_.size());
                cols_.push_back({{r, sign}});
                cost_.push_back(0.0);
                lb_.push_back(0.0);
                ub_.push_back(kInf);
                state_.push_back(VarState::Basic);
                artificials_.push_back(art);
                basis_[r] = art;
                xb_[r] = std::abs(residual[r]);
                binv_[static_cast<std::size_t>(r) * m + r] = sign;
            }
        }
    }

    double nonbasic_value(int j) const {
        return state_[j] == VarState::AtUpper ? ub_[j] : lb_[j];
    }

    double value_of(int j) const {
        if (state_[j] == VarState::Basic) {
            for (std::size_t r = 0; r < basis_.size(); ++r)
                if (basis_[r] == j) return xb_[r];
        }
        return nonbasic_value(j);
    }

    double objective_of(const std::vector<double>& costs) const {
        double obj = 0.0;
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (costs[j] == 0.0) continue;
            obj += costs[j] * value_of(static_cast<int>(j));
        }
        return obj;
    }

    void multiply_binv_col(int j, std::vector<double>& out) const {
        const int m = static_cast<int>(basis_.size());
        out.assign(m, 0.0);
        for (const auto& [r, coef] : cols_[j])
            for (int i = 0; i < m; ++i) out[i] += binv_[static_cast<std::size_t>(i) * m + r] * coef;
    }

    void refactor() {
        const int m = static_cast<int>(basis_.size());
        if (m == 0) return;
        std::vector<double> mat(static_cast<std::size_t>(m) * 2 * m, 0.0);
        for (int c = 0; c < m; ++c)
            for (const auto& [r, coef] : cols_[basis_[c]]) mat[static_cast<std::size_t>(r) * 2 * m + c] = coef;
        for (int r = 0; r < m; ++r) mat[static_cast<std::size_t>(r) * 2 * m + m + r] = 1.0;
        for (int c = 0; c < m; ++c) {
            int piv = c;
            for (int r = c + 1; r < m; ++r)
                if (std::abs(mat[static_cast<std::size_t>(r) * 2 * m + c]) >
                    std::abs(mat[static_cast<std::size_t>(piv) * 2 * m + c]))
                    piv = r;
            if (std::abs(mat[static_cast<std::size_t>(piv) * 2 * m + c]) < 1e-12) continue;
            if (piv != c)
                for (int k = 0; k < 2 * m; ++k)
                    std::swap(mat[static_cast<std::size_t>(piv) * 2 * m + k],
                              mat[static_cast<std::size_t>(c) * 2 * m + k]);
            const double d = mat[static_cast<std::size_t>(c) * 2 * m + c];
            for (int k = 0; k < 2 * m; ++k) mat[static_cast<std::size_t>(c) * 2 * m + k] /= d;
            for (int r = 0; r < m; ++r) {
                if (r == c) continue;
                const double f = mat[static_cast<std::size_t>(r) * 2 * m + c];
                if (f == 0.0) continue;
                for (int k = 0; k < 2 * m; ++k)
                    mat[static_cast<std::size_t>(r) * 2 * m + k] -=
                        f * mat[static_cast<std::size_t>(c) * 2 * m + k];
            }
        }
        for (int r = 0; r < m; ++r)
            for (int k = 0; k < m; ++k)
                binv_[static_cast<std::size_t>(r) * m + k] = mat[static_cast<std::size_t>(r) * 2 * m + m + k];

        std::vector<double> residual = rhs_;
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (state_[j] == VarState::Basic) continue;
            const double v = nonbasic_value(static_cast<int>(j));
            if (v != 0.0)
                for (const auto& [r, coef] : cols_[j]) residual[r] -= coef * v;
        }
        for (int r = 0; r < m; ++r) {
            double acc = 0.0;
            for (int k = 0; k < m; ++k) acc += binv_[static_cast<std::size_t>(r) * m + k] * residual[k];
            xb_[r] = acc;
        }
    }

    LpStatus optimize(const std::vector<double>& costs) {
        if (infeasible_bounds_) return LpStatus::Infeasible;
        const int m = static_cast<int>(basis_.size());
        const long iter_cap = 400L * (static_cast<long>(cols_.size()) + m) + 20000;
        long since_improve = 0;
        bool bland = false;
        double best_obj = -kInf;
        std::vector<double> y(m), w;

        for (long iter = 0; iter < iter_cap; ++iter) {
            if (iter > 0 && iter % 128 == 0) refactor();

            // dual prices y = c_B * B^{-1}
            for (int i = 0; i < m; ++i) y[i] = 0.0;
            for (int r = 0; r < m; ++r) {
                const double cb = costs[basis_[r]];
                if (cb == 0.0) continue;
                for (int k = 0; k < m; ++k) y[k] += cb * binv_[static_cast<std::size_t>(r) * m + k];
            }

            int entering = -1;
            double best_violation = opt_tol_;
            bool entering_from_lower = true;
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                if (state_[j] == VarState::Basic) continue;
                if (ub_[j] - lb_[j] <= 1e-12 && std::isfinite(lb_[j])) continue;  // fixed
                double d = costs[j];
                for (const auto& [r, coef] : cols_[j]) d -= y[r] * coef;
                const bool at_lower = state_[j] == VarState::AtLower;
                const double violation = at_lower ? d : -d;
                if (violation > best_violation) {
                    entering = static_cast<int>(j);
                    best_violation = violation;
                    entering_from_lower = at_lower;
                    if (bland) break;
                }
            }
            if (entering < 0) return LpStatus::Optimal;

            multiply_binv_col(entering, w);
            const double dir = entering_from_lower ? 1.0 : -1.0;

            double t = ub_[entering] - lb_[entering];  // bound flip
            int leave_row = -1;
            double leave_to_upper = false;
            double best_pivot_mag = 0.0;
            for (int i = 0; i < m; ++i) {
                const double delta = -dir * w[i];  // xb_i moves by delta * t
                double ti = kInf;
                bool to_upper = false;
                if (delta < -pivot_tol_) {
                    ti = (lb_[basis_[i]] - xb_[i]) / delta;
                } else if (delta > pivot_tol_) {
                    if (!std::isfinite(ub_[basis_[i]])) continue;
                    ti = (ub_[basis_[i]] - xb_[i]) / delta;
                    to_upper = true;
                } else {
                    continue;
                }
                if (ti < 0.0) ti = 0.0;
                const bool better =
                    ti < t - 1e-12 ||
                    (ti < t + 1e-12 && leave_row >= 0 &&
                     (bland ? basis_[i] < basis_[leave_row] : std::abs(w[i]) > best_pivot_mag));
                if (leave_row < 0 ? ti < t + 1e-12 : better) {
                    if (ti < t) t = ti;
                    leave_row = i;
                    leave_to_upper = to_upper;
                    best_pivot_mag = std::abs(w[i]);
                }
            }

            if (!std::isfinite(t)) return LpStatus::Unbounded;
            if (t < 0.0) t = 0.0;

            if (leave_row < 0 || ub_[entering] - lb_[entering] <= t + 1e-12) {
                // bound flip, basis unchanged
                t = ub_[entering] - lb_[entering];
                for (int i = 0; i < m; ++i) xb_[i] -= dir * t * w[i];
                state_[entering] =
                    entering_from_lower ? VarState::AtUpper : VarState::AtLower;
            } else {
                const int leaving = basis_[leave_row];
                for (int i = 0; i < m; ++i) xb_[i] -= dir * t * w[i];
                xb_[leave_row] = nonbasic_value(entering) + dir * t;
                state_[leaving] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
                state_[entering] = VarState::Basic;
                basis_[leave_row] = entering;
                const double piv = w[leave_row];
                double* binv = binv_.data();
                double* prow = binv + static_cast<std::size_t>(leave_row) * m;
                for (int k = 0; k < m; ++k) prow[k] /= piv;
                for (int i = 0; i < m; ++i) {
                    if (i == leave_row || w[i] == 0.0) continue;
                    double* irow = binv + static_cast<std::size_t>(i) * m;
                    const double f = w[i];
                    for (int k = 0; k < m; ++k) irow[k] -= f * prow[k];
                }
            }

            const double obj = objective_of(costs);
            if (obj > best_obj + 1e-12) {
                best_obj = obj;
                since_improve = 0;
            } else if (++since_improve > 4L * (static_cast<long>(cols_.size()) + m) + 200) {
                bland = true;
            }
        }
        return LpStatus::IterLimit;
    }

    int n_struct_;
    bool orig_maximize_ = true;
    bool infeasible_bounds_ = false;
    double obj_constant_ = 0.0;
    double obj_scale_ = 1.0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> cost_, lb_, ub_, rhs_, xb_, binv_;
    std::vector<bool> row_fixed_slack_;
    std::vector<int> basis_;
    std::vector<int> artificials_;
    std::vector<VarState> state_;
    static constexpr double feas_tol_ = 1e-9;
    static constexpr double opt_tol_ = 1e-9;
    static constexpr double pivot_tol_ = 1e-10;
};

} // namespace detail

inline LpSolution solve_lp(const Model& model, const std::vector<double>& lb,
                           const std::vector<double>& ub) {
    return detail::BoundedSimplex(model, lb, ub).solve();
}

inline LpSolution solve_lp_relaxation(const Model& model) {
    std::vector<double> lb, ub;
    lb.reserve(model.vars.size());
    ub.reserve(model.vars.size());
    for (const auto& v : model.vars) {
        lb.push_back(v.lb);
        ub.push_back(v.ub);
    }
    return solve_lp(model, lb, ub);
}

struct BnbConfig {
    double gap_tolerance = 1e-6;
    double time_limit_s = 0.0;  // 0 = unlimited
    long node_limit = 0;        // 0 = unlimited
};

enum class MilpStatus { Optimal, Feasible, Infeasible, Unbounded };

struct MilpSolution {
    MilpStatus status = MilpStatus::Infeasible;
    double objective = 0.0;
    double best_bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    std::vector<double> x;
};

/// Best-first branch and bound over the model's integer variables. Branching
/// picks the fractional integer variable closest to one half; ties go to the
/// lowest index so results are reproducible.
inline MilpSolution solve_milp(const Model& model, const BnbConfig& cfg = {},
                               const std::vector<double>* warm_solution = nullptr,
                               double warm_objective = -kInf) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();
    const double sign = model.maximize ? 1.0 : -1.0;

    struct Node {
        int parent = -1;
        int var = -1;
        double lb = 0.0, ub = 0.0;
        double bound = 0.0;
    };
    std::deque<Node> nodes;
    auto bounds_for = [&](int node_id, std::vector<double>& lb, std::vector<double>& ub) {
        lb.clear();
        ub.clear();
        for (const auto& v : model.vars) {
            lb.push_back(v.lb);
            ub.push_back(v.ub);
        }
        std::vector<int> path;
        for (int id = node_id; id >= 0; id = nodes[id].parent)
            if (nodes[id].var >= 0) path.push_back(id);
        // apply root-to-leaf so deeper (tighter) bounds win
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            lb[nodes[*it].var] = std::max(lb[nodes[*it].var], nodes[*it].lb);
            ub[nodes[*it].var] = std::min(ub[nodes[*it].var], nodes[*it].ub);
        }
    };

    MilpSolution result;
    result.objective = -sign * kInf;
    bool have_incumbent = false;
    std::vector<double> incumbent;
    double incumbent_obj = -kInf;  // in maximize terms
    if (warm_solution != nullptr && std::isfinite(warm_objective)) {
        incumbent = *warm_solution;
        incumbent_obj = sign * warm_objective;
        have_incumbent = true;
    }

    auto pq_less = [&nodes](int a, int b) {
        if (nodes[a].bound != nodes[b].bound) return nodes[a].bound < nodes[b].bound;
        return a < b;  // older first on ties
    };
    std::priority_queue<int, std::vector<int>, decltype(pq_less)> open(pq_less);

    std::vector<double> lb, ub;
    nodes.push_back({});
    {
        bounds_for(0, lb, ub);
        const LpSolution root = solve_lp(model, lb, ub);
        if (root.status == LpStatus::Unbounded) {
            result.status = MilpStatus::Unbounded;
            return result;
        }
        if (root.status == LpStatus::Infeasible) {
            if (have_incumbent) {
                result.status = MilpStatus::Optimal;
                result.objective = sign * incumbent_obj;
                result.best_bound = result.objective;
                result.x = incumbent;
            }
            return result;
        }
        nodes[0].bound = sign * root.objective;
        open.push(0);
    }

    const auto prune_cut = [&](double bound) {
        return have_incumbent &&
               bound <= incumbent_obj + cfg.gap_tolerance * std::max(1.0, std::abs(incumbent_obj));
    };

    double best_open_bound = nodes[0].bound;
    bool exhausted = true;
    while (!open.empty()) {
        const int id = open.top();
        open.pop();
        ++result.nodes;
        if (prune_cut(nodes[id].bound)) continue;
        best_open_bound = nodes[id].bound;

        if (cfg.node_limit > 0 && result.nodes > cfg.node_limit) {
            exhausted = false;
            break;
        }
        if (cfg.time_limit_s > 0.0 &&
            std::chrono::duration<double>(clock::now() - t_start).count() > cfg.time_limit_s) {
            exhausted = false;
            break;
        }

        bounds_for(id, lb, ub);
        const LpSolution sol = solve_lp(model, lb, ub);
        if (sol.status != LpStatus::Optimal) continue;
        const double node_bound = sign * sol.objective;
        if (prune_cut(node_bound)) continue;

        // pick the fractional integer variable nearest 0.5
        int branch_var = -1;
        double branch_score = 0.5;
        for (std::size_t j = 0; j < model.vars.size(); ++j) {
            if (!model.vars[j].integer) continue;
            const double v = sol.x[j];
            const double frac = v - std::floor(v);
            const double dist = std::abs(frac - 0.5);
            if (frac > 1e-7 && frac < 1.0 - 1e-7 && dist < branch_score - 1e-15) {
                branch_score = dist;
                branch_var = static_cast<int>(j);
            }
        }

        if (branch_var < 0) {
            // integral: fix the integer vars and re-solve for the exact continuous part
            std::vector<double> flb = lb, fub = ub;
            for (std::size_t j = 0; j < model.vars.size(); ++j) {
                if (!model.vars[j].integer) continue;
                const double r = std::round(sol.x[j]);
                flb[j] = r;
                fub[j] = r;
            }
            const LpSolution fixed = solve_lp(model, flb, fub);
            if (fixed.status != LpStatus::Optimal) continue;
            const double cand = sign * fixed.objective;
            if (!have_incumbent || cand > incumbent_obj) {
                have_incumbent = true;
                incumbent_obj = cand;
                incumbent = fixed.x;
                for (std::size_t j = 0; j < model.vars.size(); ++j)
                    if (model.vars[j].integer) incumbent[j] = std::round(incumbent[j]);
            }
            continue;
        }

        const double v = sol.x[branch_var];
        Node down;
        down.parent = id;
        down.var = branch_var;
        down.lb = -kInf;
        down.ub = std::floor(v);
        down.bound = node_bound;
        Node up;
        up.parent = id;
        up.var = branch_var;
        up.lb = std::ceil(v);
        up.ub = kInf;
        up.bound = node_bound;
        nodes.push_back(down);
        open.push(static_cast<int>(nodes.size()) - 1);
        nodes.push_back(up);
        open.push(static_cast<int>(nodes.size()) - 1);
    }

    if (!have_incumbent) {
        result.status = MilpStatus::Infeasible;
        return result;
    }
    result.objective = sign * incumbent_obj;
    result.x = incumbent;
    if (exhausted && open.empty()) {
        result.status = MilpStatus::Optimal;
        result.best_bound = result.objective;
        result.gap = 0.0;
    } else {
        double open_bound = best_open_bound;
        if (!open.empty()) open_bound = std::max(open_bound, nodes[open.top()].bound);
        result.status = exhausted ? MilpStatus::Optimal : MilpStatus::Feasible;
        result.best_bound = sign * open_bound;
        result.gap = std::abs(open_bound - incumbent_obj) / std::max(1.0, std::abs(incumbent_obj));
        if (exhausted) {
            result.best_bound = result.objective;
            result.gap = 0.0;
        }
    }
    return result;
}

} // namespace mmwave::milp
