#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmwave/channel.hpp"
#include "mmwave/geometry.hpp"

namespace mmwave {

/// One realized network snapshot: geometry and link budgets for every
/// user-BS pair, plus the candidate set (links meeting the SNR floor).
/// Immutable once built; association schemes are pure functions of it.
class Instance {
public:
    Instance(NetworkLayout layout, UserSet users, RadioConfig radio,
             std::vector<LinkGeometry> geometry, std::vector<LinkBudget> budgets)
        : layout_(std::move(layout)),
          users_(std::move(users)),
          radio_(std::move(radio)),
          geometry_(std::move(geometry)),
          budgets_(std::move(budgets)) {
        const std::size_t expected =
            static_cast<std::size_t>(users_.count()) * static_cast<std::size_t>(layout_.n_bs());
        if (geometry_.size() != expected || budgets_.size() != expected)
            throw std::invalid_argument("Instance: link table size mismatch");
        index_beams();
    }

    int n_users() const { return users_.count(); }
    int n_bs() const { return layout_.n_bs(); }
    int n_bs_beams() const { return bs_beams_; }
    int n_user_beams() const { return user_beams_; }

    const NetworkLayout& layout() const { return layout_; }
    const UserSet& users() const { return users_; }
    const RadioConfig& radio() const { return radio_; }

    std::size_t link_index(int user, int bs) const {
        return static_cast<std::size_t>(user) * n_bs() + bs;
    }
    const LinkGeometry& geometry(int user, int bs) const { return geometry_[link_index(user, bs)]; }
    const LinkBudget& budget(int user, int bs) const { return budgets_[link_index(user, bs)]; }
    bool is_candidate(int user, int bs) const { return candidate_[link_index(user, bs)] != 0; }

    /// Candidate users whose link to BS `bs` lands in BS beam `beam`.
    const std::vector<int>& users_in_bs_beam(int bs, int beam) const {
        return users_in_bs_beam_[static_cast<std::size_t>(bs) * bs_beams_ + beam];
    }
    /// Candidate BSs whose link from user `user` lands in user beam `beam`.
    const std::vector<int>& bss_in_user_beam(int user, int beam) const {
        return bss_in_user_beam_[static_cast<std::size_t>(user) * user_beams_ + beam];
    }

    std::vector<std::pair<int, int>> candidate_links() const {
        std::vector<std::pair<int, int>> out;
        for (int i = 0; i < n_users(); ++i)
            for (int j = 0; j < n_bs(); ++j)
                if (is_candidate(i, j)) out.emplace_back(i, j);
        return out;
    }

private:
    void index_beams() {
        bs_beams_ = radio_.bs_beam_count();
        user_beams_ = radio_.user_beam_count();
        candidate_.assign(geometry_.size(), 0);
        users_in_bs_beam_.assign(static_cast<std::size_t>(n_bs()) * bs_beams_, {});
        bss_in_user_beam_.assign(static_cast<std::size_t>(n_users()) * user_beams_, {});
        const double gamma_min = radio_.min_snr_linear();
        for (int i = 0; i < n_users(); ++i) {
            for (int j = 0; j < n_bs(); ++j) {
                const std::size_t k = link_index(i, j);
                if (budgets_[k].snr >= gamma_min) {
                    candidate_[k] = 1;
                    const auto& g = geometry_[k];
                    users_in_bs_beam_[static_cast<std::size_t>(j) * bs_beams_ + g.bs_beam].push_back(i);
                    bss_in_user_beam_[static_cast<std::size_t>(i) * user_beams_ + g.user_beam].push_back(j);
                }
            }
        }
    }

    NetworkLayout layout_;
    UserSet users_;
    RadioConfig radio_;
    std::vector<LinkGeometry> geometry_;
    std::vector<LinkBudget> budgets_;
    std::vector<std::uint8_t> candidate_;
    int bs_beams_ = 0;
    int user_beams_ = 0;
    std::vector<std::vector<int>> users_in_bs_beam_;
    std::vector<std::vector<int>> bss_in_user_beam_;
};

/// Build an instance whose budgets come straight from the given per-link
/// channel state (shadow fading, LOS flags, rain).
inline Instance build_instance(const NetworkLayout& layout, const UserSet& users,
                               const RadioConfig& radio, const std::vector<double>& sf_los,
                               const std::vector<double>& sf_nlos, const std::vector<char>& los,
                               const RainModel& rain = {}) {
    const std::size_t n =
        static_cast<std::size_t>(users.count()) * static_cast<std::size_t>(layout.n_bs());
    if (sf_los.size() != n || sf_nlos.size() != n || los.size() != n)
        throw std::invalid_argument("build_instance: channel state size mismatch");
    const BeamIndexing bs_beams(radio.bs_beamwidth_deg);
    const BeamIndexing user_beams(radio.user_beamwidth_deg);
    std::vector<LinkGeometry> geo(n);
    std::vector<LinkBudget> bud(n);
    std::size_t k = 0;
    for (int i = 0; i < users.count(); ++i) {
        for (int j = 0; j < layout.n_bs(); ++j, ++k) {
            geo[k] = make_link_geometry(users.positions[i], layout.bs_positions[j], layout.torus,
                                        layout.height_offset, bs_beams, user_beams);
            bud[k] = link_snr(radio, geo[k], sf_los[k], sf_nlos[k], los[k] != 0, rain);
        }
    }
    return Instance(layout, users, radio, std::move(geo), std::move(bud));
}

/// All-LOS instance without shadow fading or rain; the common test fixture.
inline Instance build_instance_plain(const NetworkLayout& layout, const UserSet& users,
                                     const RadioConfig& radio) {
    const std::size_t n =
        static_cast<std::size_t>(users.count()) * static_cast<std::size_t>(layout.n_bs());
    return build_instance(layout, users, radio, std::vector<double>(n, 0.0),
                          std::vector<double>(n, 0.0), std::vector<char>(n, 1));
}

/// Result of an association scheme. `x` holds the integer shares (the
/// optimizer may grant several to one user); `time_share` holds the fraction
/// of beam time each link actually receives, which is what capacity uses.
struct Association {
    std::string scheme;
    int n_users = 0;
    int n_bs = 0;
    std::vector<int> x;             // dense n_users * n_bs
    std::vector<double> time_share; // dense, in [0, 1]
    std::vector<double> p;          // per-user satisfaction

    bool proven_optimal = false;
    double objective = 0.0;
    double bound_gap = 0.0;

    Association() = default;
    Association(std::string name, int users, int bs)
        : scheme(std::move(name)),
          n_users(users),
          n_bs(bs),
          x(static_cast<std::size_t>(users) * bs, 0),
          time_share(static_cast<std::size_t>(users) * bs, 0.0),
          p(users, 0.0) {}

    std::size_t idx(int user, int bs) const { return static_cast<std::size_t>(user) * n_bs + bs; }
    int degree(int user) const {
        int d = 0;
        for (int j = 0; j < n_bs; ++j)
            if (x[idx(user, j)] >= 1) ++d;
        return d;
    }
};

inline double association_user_capacity(const Instance& inst, const Association& a, int user) {
    std::vector<ServedLink> links;
    for (int j = 0; j < inst.n_bs(); ++j) {
        const double share = a.time_share[a.idx(user, j)];
        if (share > 0.0) links.push_back({share, inst.budget(user, j).snr});
    }
    return user_capacity_bps(inst.radio(), links);
}

inline void recompute_satisfaction(const Instance& inst, Association& a) {
    for (int i = 0; i < inst.n_users(); ++i)
        a.p[i] = satisfaction(association_user_capacity(inst, a, i), inst.radio().min_rate_bps);
}

/// Objective of the problem the optimizer solves: network throughput minus
/// the penalty for unsatisfied users. The penalty follows the configured
/// rate-constraint mode: when the rate constraint omits the overhead factor,
/// the satisfaction it can cover is correspondingly larger.
inline double association_objective(const Instance& inst, const Association& a, double penalty_m) {
    const RadioConfig& radio = inst.radio();
    double obj = 0.0;
    for (int i = 0; i < inst.n_users(); ++i) {
        const double capacity = association_user_capacity(inst, a, i);
        double coverable = capacity;
        if (!radio.rate_constraint_includes_overhead) coverable /= 1.0 - radio.overhead;
        obj += capacity;
        obj -= penalty_m * (1.0 - satisfaction(coverable, radio.min_rate_bps));
    }
    return obj;
}

namespace detail {

/// Equal split of beam time among the occupants of every BS beam.
inline void assign_equal_time_shares(const Instance& inst, Association& a) {
    for (int j = 0; j < inst.n_bs(); ++j) {
        std::vector<std::vector<int>> occupants(inst.n_bs_beams());
        for (int i = 0; i < inst.n_users(); ++i)
            if (a.x[a.idx(i, j)] >= 1) occupants[inst.geometry(i, j).bs_beam].push_back(i);
        for (const auto& users : occupants) {
            if (users.empty()) continue;
            const double share = 1.0 / static_cast<double>(users.size());
            for (int i : users) a.time_share[a.idx(i, j)] = share;
        }
    }
}

struct Request {
    double snr;
    int user;
    int bs;
};

inline bool request_before(const Request& lhs, const Request& rhs) {
    if (lhs.snr != rhs.snr) return lhs.snr > rhs.snr;
    if (lhs.user != rhs.user) return lhs.user < rhs.user;
    return lhs.bs < rhs.bs;
}

} // namespace detail

/// Occupancy bookkeeping shared by the greedy schemes.
class BeamOccupancy {
public:
    explicit BeamOccupancy(const Instance& inst)
        : inst_(inst),
          bs_beam_count_(inst.n_bs() * inst.n_bs_beams(), 0),
          user_beam_taken_(static_cast<std::size_t>(inst.n_users()) * inst.n_user_beams(), 0) {}

    bool bs_beam_free(int user, int bs) const {
        const auto& limit = inst_.radio().shares_per_beam;
        if (limit.is_unbounded()) return true;
        return bs_beam_count_[bs_slot(user, bs)] < limit.count();
    }
    bool user_beam_free(int user, int bs) const { return user_beam_taken_[user_slot(user, bs)] == 0; }

    void take(int user, int bs) {
        ++bs_beam_count_[bs_slot(user, bs)];
        user_beam_taken_[user_slot(user, bs)] = 1;
    }

private:
    std::size_t bs_slot(int user, int bs) const {
        return static_cast<std::size_t>(bs) * inst_.n_bs_beams() + inst_.geometry(user, bs).bs_beam;
    }
    std::size_t user_slot(int user, int bs) const {
        return static_cast<std::size_t>(user) * inst_.n_user_beams() +
               inst_.geometry(user, bs).user_beam;
    }

    const Instance& inst_;
    std::vector<int> bs_beam_count_;
    std::vector<std::uint8_t> user_beam_taken_;
};

/// Distributed misalignment-threshold association. Each BS sorts incoming
/// candidate requests by SNR and accepts a user while the beam has room and
/// the BS-side misalignment is strictly below sigma. Beam time is then split
/// equally among the accepted occupants. The user-side beam constraint is
/// enforced as well so the output is always feasible for the optimizer's
/// constraint set.
inline Association beam_align(const Instance& inst, double sigma_deg) {
    if (!(sigma_deg > 0.0) || sigma_deg > inst.radio().bs_beamwidth_deg / 2.0)
        throw std::invalid_argument("beam_align: sigma must be in (0, theta_b/2]");
    Association a("beam-align", inst.n_users(), inst.n_bs());
    BeamOccupancy occupancy(inst);
    std::vector<detail::Request> requests;
    for (int j = 0; j < inst.n_bs(); ++j) {
        requests.clear();
        for (int i = 0; i < inst.n_users(); ++i)
            if (inst.is_candidate(i, j)) requests.push_back({inst.budget(i, j).snr, i, j});
        std::sort(requests.begin(), requests.end(), detail::request_before);
        for (const auto& r : requests) {
            if (std::abs(inst.geometry(r.user, j).misalign_bs) >= sigma_deg) continue;
            if (!occupancy.bs_beam_free(r.user, j)) continue;
            if (!occupancy.user_beam_free(r.user, j)) continue;
            occupancy.take(r.user, j);
            a.x[a.idx(r.user, j)] = 1;
        }
    }
    detail::assign_equal_time_shares(inst, a);
    recompute_satisfaction(inst, a);
    return a;
}

/// Single-connectivity baseline: each user, in descending order of its best
/// link SNR, takes its strongest candidate BS whose beam still has room.
inline Association snr_one(const Instance& inst) {
    Association a("snr-1", inst.n_users(), inst.n_bs());
    BeamOccupancy occupancy(inst);

    std::vector<detail::Request> order;
    for (int i = 0; i < inst.n_users(); ++i) {
        double best = -1.0;
        for (int j = 0; j < inst.n_bs(); ++j)
            if (inst.is_candidate(i, j)) best = std::max(best, inst.budget(i, j).snr);
        if (best >= 0.0) order.push_back({best, i, 0});
    }
    std::sort(order.begin(), order.end(), detail::request_before);

    for (const auto& u : order) {
        std::vector<detail::Request> choices;
        for (int j = 0; j < inst.n_bs(); ++j)
            if (inst.is_candidate(u.user, j)) choices.push_back({inst.budget(u.user, j).snr, u.user, j});
        std::sort(choices.begin(), choices.end(), detail::request_before);
        for (const auto& c : choices) {
            if (!occupancy.bs_beam_free(c.user, c.bs)) continue;
            occupancy.take(c.user, c.bs);
            a.x[a.idx(c.user, c.bs)] = 1;
            break;
        }
    }
    detail::assign_equal_time_shares(inst, a);
    recompute_satisfaction(inst, a);
    return a;
}

/// Greedy multi-connectivity baseline: all candidate links pooled and
/// accepted in descending SNR while the BS beam has room and the user's
/// receive beam is not already serving another BS.
inline Association snr_dynamic(const Instance& inst) {
    Association a("snr-dynamic", inst.n_users(), inst.n_bs());
    BeamOccupancy occupancy(inst);
    std::vector<detail::Request> pool;
    for (int i = 0; i < inst.n_users(); ++i)
        for (int j = 0; j < inst.n_bs(); ++j)
            if (inst.is_candidate(i, j)) pool.push_back({inst.budget(i, j).snr, i, j});
    std::sort(pool.begin(), pool.end(), detail::request_before);
    for (const auto& r : pool) {
        if (!occupancy.bs_beam_free(r.user, r.bs)) continue;
        if (!occupancy.user_beam_free(r.user, r.bs)) continue;
        occupancy.take(r.user, r.bs);
        a.x[a.idx(r.user, r.bs)] = 1;
    }
    detail::assign_equal_time_shares(inst, a);
    recompute_satisfaction(inst, a);
    return a;
}

/// Misalignment acceptance threshold: twice the population standard deviation
/// of the BS-side misalignment over all active links, clamped to theta_b/2.
inline double calibrate_sigma(
    const std::vector<std::pair<const Instance*, const Association*>>& optimal_runs,
    double theta_b_deg) {
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    for (const auto& [inst, assoc] : optimal_runs) {
        for (int i = 0; i < inst->n_users(); ++i) {
            for (int j = 0; j < inst->n_bs(); ++j) {
                if (assoc->x[assoc->idx(i, j)] >= 1) {
                    const double alpha = inst->geometry(i, j).misalign_bs;
                    sum += alpha;
                    sum_sq += alpha * alpha;
                    ++n;
                }
            }
        }
    }
    if (n == 0) throw std::runtime_error("calibrate_sigma: empty calibration set");
    const double mean = sum / n;
    const double variance = std::max(0.0, sum_sq / n - mean * mean);
    return std::min(2.0 * std::sqrt(variance), theta_b_deg / 2.0);
}

/// Check an association against the hard constraints: per-beam share caps,
/// one BS per user beam, the SNR floor on active links, share/occupancy
/// consistency, and satisfaction recomputation. Returns human-readable
/// violations; empty means feasible.
inline std::vector<std::string> feasibility_violations(const Instance& inst, const Association& a) {
    std::vector<std::string> out;
    if (a.n_users != inst.n_users() || a.n_bs != inst.n_bs()) {
        out.push_back("dimension mismatch");
        return out;
    }
    const auto& limit = inst.radio().shares_per_beam;

    for (int i = 0; i < inst.n_users(); ++i) {
        for (int j = 0; j < inst.n_bs(); ++j) {
            const int x = a.x[a.idx(i, j)];
            const double share = a.time_share[a.idx(i, j)];
            if (x < 0 || (!limit.is_unbounded() && x > limit.count()))
                out.push_back("x out of range at user " + std::to_string(i) + " bs " + std::to_string(j));
            if (x >= 1 && !inst.is_candidate(i, j))
                out.push_back("active link below snr floor at user " + std::to_string(i) + " bs " +
                              std::to_string(j));
            if ((x >= 1) != (share > 0.0))
                out.push_back("share/occupancy mismatch at user " + std::to_string(i) + " bs " +
                              std::to_string(j));
            if (share < 0.0 || share > 1.0 + 1e-9)
                out.push_back("share out of range at user " + std::to_string(i) + " bs " +
                              std::to_string(j));
        }
    }

    // C1: share cap per BS beam, plus total beam time at most 1.
    for (int j = 0; j < inst.n_bs(); ++j) {
        std::vector<int> shares(inst.n_bs_beams(), 0);
        std::vector<double> time(inst.n_bs_beams(), 0.0);
        for (int i = 0; i < inst.n_users(); ++i) {
            const int x = a.x[a.idx(i, j)];
            if (x >= 1) {
                shares[inst.geometry(i, j).bs_beam] += x;
                time[inst.geometry(i, j).bs_beam] += a.time_share[a.idx(i, j)];
            }
        }
        for (int d = 0; d < inst.n_bs_beams(); ++d) {
            if (!limit.is_unbounded() && shares[d] > limit.count())
                out.push_back("beam share cap exceeded at bs " + std::to_string(j) + " beam " +
                              std::to_string(d));
            if (time[d] > 1.0 + 1e-9)
                out.push_back("beam time oversubscribed at bs " + std::to_string(j) + " beam " +
                              std::to_string(d));
        }
    }

    // C2: at most one serving BS per user beam.
    for (int i = 0; i < inst.n_users(); ++i) {
        std::vector<int> used(inst.n_user_beams(), 0);
        for (int j = 0; j < inst.n_bs(); ++j)
            if (a.x[a.idx(i, j)] >= 1) ++used[inst.geometry(i, j).user_beam];
        for (int d = 0; d < inst.n_user_beams(); ++d)
            if (used[d] > 1)
                out.push_back("user beam reused at user " + std::to_string(i) + " beam " +
                              std::to_string(d));
    }

    for (int i = 0; i < inst.n_users(); ++i) {
        const double want =
            satisfaction(association_user_capacity(inst, a, i), inst.radio().min_rate_bps);
        if (std::abs(want - a.p[i]) > 1e-9)
            out.push_back("satisfaction mismatch at user " + std::to_string(i));
    }
    return out;
}

} // namespace mmwave
