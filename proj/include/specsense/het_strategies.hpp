#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/detection.hpp"
#include "specsense/model.hpp"

namespace specsense {

enum class HetSeqVariant { Opt, Avg };
enum class HetParVariant { DpOpt, DpSim, AvgGreedy };
enum class HetSeqParVariant { DpOpt, Heuristic };

/// Per-sensor subset chosen for one channel: the participating sensor mask
/// expanded to indices, and the cooperative time it achieves.
struct ChannelSubsetChoice {
    std::uint32_t mask = 0;
    std::vector<int> sensors;  // ascending indices
    double tau_s = std::numeric_limits<double>::infinity();

    bool feasible() const { return std::isfinite(tau_s); }
};

/**
 * Lazily memoized cooperative-time table for (channel, sensor subset) pairs,
 * plus prefix-based optimal-subset searches restricted to any pool of
 * available sensors. Solver calls dominate the cost of every heterogeneous
 * strategy, so each subset is solved at most once per plan.
 */
class ChannelSensorPlan {
  public:
    explicit ChannelSensorPlan(const Scenario& s) : scenario_(s) {
        s.validate();
        if (s.fusion != Fusion::AND)
            throw std::invalid_argument(
                "heterogeneous subset optimization applies to the AND rule only");
        opts_.tau_cap_s = 10.0 * s.slot_s;
        weights_.resize(s.n_channels());
        for (std::size_t m = 0; m < s.n_channels(); ++m) weights_[m] = channel_weight(s.channels[m]);
    }

    const Scenario& scenario() const { return scenario_; }
    double weight(std::size_t m) const { return weights_[m]; }
    std::uint32_t full_mask() const { return (1u << scenario_.n_sensors) - 1u; }

    /// Cooperative sensing time of channel m by exactly the sensors in mask;
    /// +infinity when the targets cannot be met below the cap.
    double coop_time(std::size_t m, std::uint32_t mask) {
        if (mask == 0) return std::numeric_limits<double>::infinity();
        std::uint64_t key = (static_cast<std::uint64_t>(m) << 32) | mask;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;

        std::vector<double> snrs;
        for (int i = 0; i < scenario_.n_sensors; ++i)
            if (mask & (1u << i)) snrs.push_back(scenario_.pu_snr_at(m, static_cast<std::size_t>(i)));
        double tau;
        try {
            tau = het_coop_sensing_time(snrs, scenario_.requirements(m), scenario_.noise_power, opts_)
                      .tau_s;
        } catch (const InfeasibleError&) {
            tau = std::numeric_limits<double>::infinity();
        }
        cache_.emplace(key, tau);
        return tau;
    }

    /// Clamped expected throughput of channel m sensed by the mask group.
    double payoff(std::size_t m, std::uint32_t mask) {
        if (mask == 0) return 0.0;
        double tau = coop_time(m, mask);
        if (!std::isfinite(tau)) return 0.0;
        return std::max(scenario_.slot_s - tau, 0.0) * weights_[m] / scenario_.slot_s;
    }

    /**
     * Best subset of the available sensors for channel m. Only descending-SNR
     * prefixes of the pool need solving: at any subset size the strongest
     * sensors maximize the detection product. Every prefix is evaluated and
     * the fastest wins, ties to fewer sensors.
     */
    ChannelSubsetChoice optimal_within(std::size_t m, std::uint32_t avail) {
        std::vector<int> pool;
        for (int i = 0; i < scenario_.n_sensors; ++i)
            if (avail & (1u << i)) pool.push_back(i);
        std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
            return scenario_.pu_snr_at(m, static_cast<std::size_t>(a)) >
                   scenario_.pu_snr_at(m, static_cast<std::size_t>(b));
        });
        ChannelSubsetChoice best;
        std::uint32_t mask = 0;
        for (int i : pool) {
            mask |= (1u << i);
            double tau = coop_time(m, mask);
            if (tau < best.tau_s) {
                best.tau_s = tau;
                best.mask = mask;
            }
        }
        for (int i = 0; i < scenario_.n_sensors; ++i)
            if (best.mask & (1u << i)) best.sensors.push_back(i);
        return best;
    }

  private:
    Scenario scenario_;
    HetSolverOptions opts_;
    std::vector<double> weights_;
    std::unordered_map<std::uint64_t, double> cache_;
};

namespace detail {

/// Average-SNR shortcut used by the Avg heuristics: sensors at or above the
/// channel's mean SNR, all pretending to sit exactly at the mean.
struct AvgChoice {
    std::vector<int> sensors;
    double tau_s;
};

inline AvgChoice avg_choice(const Scenario& s, std::size_t m) {
    const int N = s.n_sensors;
    double mean = 0.0;
    for (int i = 0; i < N; ++i) mean += s.pu_snr_at(m, static_cast<std::size_t>(i));
    mean /= N;
    AvgChoice c;
    for (int i = 0; i < N; ++i)
        if (s.pu_snr_at(m, static_cast<std::size_t>(i)) >= mean) c.sensors.push_back(i);
    c.tau_s = coop_sensing_time_hom(s.requirements(m), mean, static_cast<double>(c.sensors.size()));
    return c;
}

}  // namespace detail

/**
 * Sequential strategy with per-sensor SNRs.
 *
 * Opt: every channel is sensed by its own optimal subset for the minimum
 * time tau*, channels ordered by weight/tau*. The timeline is strictly
 * sequential: a channel starts only when the previous one finishes, even
 * when the sensor sets differ.
 *
 * Avg: the sensing set is every sensor at or above the channel's mean SNR,
 * all treated as sitting at the mean; the cooperative time comes from the
 * homogeneous formula and ordering uses it the same way.
 */
inline Schedule het_sequential(const Scenario& s, HetSeqVariant variant) {
    s.validate();
    Schedule sch = Schedule::unsensed(s);
    const double T = s.slot_s;

    if (variant == HetSeqVariant::Avg) {
        std::vector<detail::AvgChoice> choices;
        for (std::size_t m = 0; m < s.n_channels(); ++m) choices.push_back(detail::avg_choice(s, m));
        std::vector<int> order(s.n_channels());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return channel_weight(s.channels[static_cast<std::size_t>(a)]) / choices[static_cast<std::size_t>(a)].tau_s >
                   channel_weight(s.channels[static_cast<std::size_t>(b)]) / choices[static_cast<std::size_t>(b)].tau_s;
        });
        double cursor = 0.0;
        for (int m : order) {
            const auto& c = choices[static_cast<std::size_t>(m)];
            if (cursor + c.tau_s <= T) sch.add_job(m, c.sensors, cursor, c.tau_s);
            cursor += c.tau_s;
        }
        return sch;
    }

    ChannelSensorPlan plan(s);
    std::vector<ChannelSubsetChoice> choices;
    for (std::size_t m = 0; m < s.n_channels(); ++m)
        choices.push_back(plan.optimal_within(m, plan.full_mask()));
    std::vector<int> order;
    for (std::size_t m = 0; m < s.n_channels(); ++m)
        if (choices[m].feasible()) order.push_back(static_cast<int>(m));
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return plan.weight(static_cast<std::size_t>(a)) / choices[static_cast<std::size_t>(a)].tau_s >
               plan.weight(static_cast<std::size_t>(b)) / choices[static_cast<std::size_t>(b)].tau_s;
    });
    double cursor = 0.0;
    for (int m : order) {
        const auto& c = choices[static_cast<std::size_t>(m)];
        if (cursor + c.tau_s <= T) sch.add_job(m, c.sensors, cursor, c.tau_s);
        cursor += c.tau_s;
    }
    return sch;
}

/**
 * Parallel strategy with per-sensor SNRs: disjoint sensor groups, one per
 * sensed channel, all starting at t=0.
 *
 * DpOpt: exact assignment over all subset splits (sensors may idle, since
 * a poor sensor can only lengthen an AND-rule cooperation). Limited to 12
 * sensors by the subset state space.
 *
 * DpSim: marginal single-sensor assignment re-evaluated after every
 * placement; order-dependent and sub-optimal for heterogeneous sensors.
 *
 * AvgGreedy: channels ranked once by the average-SNR time; each pass
 * assigns every channel its best remaining sensor until none are left.
 * Realized durations come from the exact cooperative time of whatever
 * group ended up together, so mismatched forced pairings genuinely hurt.
 */
inline Schedule het_parallel(const Scenario& s, HetParVariant variant) {
    ChannelSensorPlan plan(s);
    const int M = static_cast<int>(s.n_channels());
    const int N = s.n_sensors;
    const double T = s.slot_s;
    Schedule sch = Schedule::unsensed(s);

    auto emit = [&](int m, std::uint32_t mask) {
        if (mask == 0) return;
        double tau = plan.coop_time(static_cast<std::size_t>(m), mask);
        if (!std::isfinite(tau) || tau > T) return;
        std::vector<int> sensors;
        for (int i = 0; i < N; ++i)
            if (mask & (1u << i)) sensors.push_back(i);
        sch.add_job(m, std::move(sensors), 0.0, tau);
    };

    if (variant == HetParVariant::DpOpt) {
        if (N > 12) throw SizeGuardError("het_parallel(DpOpt) is limited to 12 sensors");
        const std::uint32_t full = plan.full_mask();
        const std::size_t states = std::size_t{1} << N;
        std::vector<std::vector<double>> v(static_cast<std::size_t>(M) + 1,
                                           std::vector<double>(states, 0.0));
        std::vector<std::vector<std::uint32_t>> choice(static_cast<std::size_t>(M),
                                                       std::vector<std::uint32_t>(states, 0));
        for (int m = M - 1; m >= 0; --m)
            for (std::uint32_t avail = 0; avail <= full; ++avail) {
                double best = v[static_cast<std::size_t>(m) + 1][avail];  // leave channel unsensed
                std::uint32_t best_set = 0;
                for (std::uint32_t sub = avail; sub; sub = (sub - 1) & avail) {
                    double cand = plan.payoff(static_cast<std::size_t>(m), sub) +
                                  v[static_cast<std::size_t>(m) + 1][avail ^ sub];
                    if (cand > best ||
                        (cand == best && best_set != 0 &&
                         std::tuple(std::popcount(sub), sub) < std::tuple(std::popcount(best_set), best_set))) {
                        best = cand;
                        best_set = sub;
                    }
                }
                v[static_cast<std::size_t>(m)][avail] = best;
                choice[static_cast<std::size_t>(m)][avail] = best_set;
            }
        std::uint32_t avail = full;
        for (int m = 0; m < M; ++m) {
            std::uint32_t set = choice[static_cast<std::size_t>(m)][avail];
            emit(m, set);
            avail ^= set;
        }
        return sch;
    }

    if (variant == HetParVariant::DpSim) {
        std::vector<std::uint32_t> sets(static_cast<std::size_t>(M), 0);
        std::uint32_t avail = plan.full_mask();
        while (avail) {
            double best_gain = 0.0;
            int best_m = -1, best_u = -1;
            for (int m = 0; m < M; ++m)
                for (int u = 0; u < N; ++u) {
                    if (!(avail & (1u << u))) continue;
                    double gain = plan.payoff(static_cast<std::size_t>(m), sets[static_cast<std::size_t>(m)] | (1u << u)) -
                                  plan.payoff(static_cast<std::size_t>(m), sets[static_cast<std::size_t>(m)]);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_m = m;
                        best_u = u;
                    }
                }
            if (best_m < 0) break;  // nothing left that helps
            sets[static_cast<std::size_t>(best_m)] |= (1u << best_u);
            avail &= ~(1u << best_u);
        }
        for (int m = 0; m < M; ++m) emit(m, sets[static_cast<std::size_t>(m)]);
        return sch;
    }

    // AvgGreedy
    std::vector<detail::AvgChoice> avg;
    for (std::size_t m = 0; m < s.n_channels(); ++m) avg.push_back(detail::avg_choice(s, m));
    std::vector<int> order(s.n_channels());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return plan.weight(static_cast<std::size_t>(a)) / avg[static_cast<std::size_t>(a)].tau_s >
               plan.weight(static_cast<std::size_t>(b)) / avg[static_cast<std::size_t>(b)].tau_s;
    });
    std::vector<std::uint32_t> sets(s.n_channels(), 0);
    std::uint32_t avail = plan.full_mask();
    while (avail) {
        for (int m : order) {
            if (!avail) break;
            int best_u = -1;
            double best_snr = -1.0;
            for (int u = 0; u < N; ++u)
                if ((avail & (1u << u)) &&
                    s.pu_snr_at(static_cast<std::size_t>(m), static_cast<std::size_t>(u)) > best_snr) {
                    best_snr = s.pu_snr_at(static_cast<std::size_t>(m), static_cast<std::size_t>(u));
                    best_u = u;
                }
            if (best_u < 0 || (sets[static_cast<std::size_t>(m)] & (1u << best_u))) continue;
            sets[static_cast<std::size_t>(m)] |= (1u << best_u);
            avail &= ~(1u << best_u);
        }
    }
    for (int m = 0; m < M; ++m) emit(m, sets[static_cast<std::size_t>(m)]);
    return sch;
}

namespace detail {

struct HetLane {
    std::uint32_t channels = 0;
    std::uint32_t users = 0;
};

/// Value of one sequential lane: the given channels sensed back-to-back by
/// their optimal subsets drawn from the lane's users, best ratio first.
inline double het_lane_value(ChannelSensorPlan& plan, std::uint32_t channels, std::uint32_t users,
                             std::vector<std::pair<int, ChannelSubsetChoice>>* jobs_out = nullptr) {
    const Scenario& s = plan.scenario();
    std::vector<std::pair<int, ChannelSubsetChoice>> picks;
    for (int m = 0; m < static_cast<int>(s.n_channels()); ++m) {
        if (!(channels & (1u << m))) continue;
        ChannelSubsetChoice c = plan.optimal_within(static_cast<std::size_t>(m), users);
        if (c.feasible()) picks.emplace_back(m, std::move(c));
    }
    std::stable_sort(picks.begin(), picks.end(), [&](const auto& a, const auto& b) {
        return plan.weight(static_cast<std::size_t>(a.first)) / a.second.tau_s >
               plan.weight(static_cast<std::size_t>(b.first)) / b.second.tau_s;
    });
    double cum = 0.0, value = 0.0;
    for (const auto& [m, c] : picks) {
        cum += c.tau_s;
        if (cum <= s.slot_s) value += (s.slot_s - cum) * plan.weight(static_cast<std::size_t>(m)) / s.slot_s;
    }
    if (jobs_out) *jobs_out = std::move(picks);
    return value;
}

inline void emit_het_lane(ChannelSensorPlan& plan, Schedule& sch, std::uint32_t channels,
                          std::uint32_t users) {
    std::vector<std::pair<int, ChannelSubsetChoice>> picks;
    het_lane_value(plan, channels, users, &picks);
    double cursor = 0.0;
    for (const auto& [m, c] : picks) {
        if (cursor + c.tau_s <= plan.scenario().slot_s) sch.add_job(m, c.sensors, cursor, c.tau_s);
        cursor += c.tau_s;
    }
}

}  // namespace detail

/**
 * Sequential-parallel strategy with per-sensor SNRs: disjoint user groups
 * each run a sequential lane over a disjoint channel subset.
 *
 * DpOpt: exact search over (channel subset, user subset) splits, memoized
 * over both masks. Limited to 10 channels and 10 sensors.
 *
 * Heuristic: repeatedly pick the channel with the best throughput per
 * optimal-subset sensor, absorb every channel whose optimal set nests
 * inside the pick's, run them as one lane, and recompute optimal sets for
 * what remains.
 */
inline Schedule het_seqpar(const Scenario& s, HetSeqParVariant variant) {
    ChannelSensorPlan plan(s);
    const int M = static_cast<int>(s.n_channels());
    const int N = s.n_sensors;
    Schedule sch = Schedule::unsensed(s);

    if (variant == HetSeqParVariant::DpOpt) {
        if (M > 10 || N > 10)
            throw SizeGuardError("het_seqpar(DpOpt) is limited to 10 channels and 10 sensors");
        const std::uint32_t cfull = (1u << M) - 1u;
        const std::uint32_t ufull = plan.full_mask();
        std::unordered_map<std::uint64_t, double> memo;
        std::unordered_map<std::uint64_t, std::uint64_t> pick;
        auto key = [](std::uint32_t c, std::uint32_t u) {
            return (static_cast<std::uint64_t>(c) << 32) | u;
        };
        std::function<double(std::uint32_t, std::uint32_t)> solve = [&](std::uint32_t cmask,
                                                                        std::uint32_t umask) -> double {
            if (cmask == 0 || umask == 0) return 0.0;
            auto it = memo.find(key(cmask, umask));
            if (it != memo.end()) return it->second;
            double best = 0.0;
            std::uint64_t best_pick = 0;
            for (std::uint32_t x = cmask; x; x = (x - 1) & cmask)
                for (std::uint32_t u = umask; u; u = (u - 1) & umask) {
                    double cand = detail::het_lane_value(plan, x, u) + solve(cmask ^ x, umask ^ u);
                    if (cand > best) {
                        best = cand;
                        best_pick = key(x, u);
                    }
                }
            memo[key(cmask, umask)] = best;
            pick[key(cmask, umask)] = best_pick;
            return best;
        };
        solve(cfull, ufull);
        std::uint32_t cmask = cfull, umask = ufull;
        while (cmask && umask) {
            auto it = pick.find((static_cast<std::uint64_t>(cmask) << 32) | umask);
            if (it == pick.end() || it->second == 0) break;
            std::uint32_t x = static_cast<std::uint32_t>(it->second >> 32);
            std::uint32_t u = static_cast<std::uint32_t>(it->second & 0xFFFFFFFFu);
            detail::emit_het_lane(plan, sch, x, u);
            cmask ^= x;
            umask ^= u;
        }
        return sch;
    }

    // Heuristic
    std::uint32_t remaining = (1u << M) - 1u;
    std::uint32_t avail = plan.full_mask();
    while (remaining && avail) {
        std::vector<ChannelSubsetChoice> choices(s.n_channels());
        int best_m = -1;
        double best_ratio = 0.0;
        for (int m = 0; m < M; ++m) {
            if (!(remaining & (1u << m))) continue;
            choices[static_cast<std::size_t>(m)] = plan.optimal_within(static_cast<std::size_t>(m), avail);
            const auto& c = choices[static_cast<std::size_t>(m)];
            if (!c.feasible()) continue;
            double value = std::max(s.slot_s - c.tau_s, 0.0) * plan.weight(static_cast<std::size_t>(m)) / s.slot_s;
            double ratio = value / static_cast<double>(c.sensors.size());
            if (ratio > best_ratio) {
                best_ratio = ratio;
                best_m = m;
            }
        }
        if (best_m < 0) break;
        std::uint32_t lane_users = choices[static_cast<std::size_t>(best_m)].mask;
        std::uint32_t lane_channels = 1u << best_m;
        for (int m = 0; m < M; ++m) {
            if (!(remaining & (1u << m)) || m == best_m) continue;
            const auto& c = choices[static_cast<std::size_t>(m)];
            if (c.feasible() && (c.mask & ~lane_users) == 0) lane_channels |= (1u << m);
        }
        detail::emit_het_lane(plan, sch, lane_channels, lane_users);
        remaining &= ~lane_channels;
        avail &= ~lane_users;
    }
    return sch;
}

}  // namespace specsense
