#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/detection.hpp"
#include "specsense/model.hpp"

namespace specsense {

/// Number of sensors assigned to each channel; entries sum to n_sensors.
using Allocation = std::vector<int>;

/// Precomputed cooperative sensing times tau[m][n] for every channel and
/// sensor count, plus the availability-weighted capacities. Entry [m][0] is
/// +infinity: a channel with no sensors is never sensed.
struct TauTable {
    double slot_s = 0.0;
    int n_sensors = 0;
    std::vector<double> weight;
    std::vector<std::vector<double>> tau;

    /// Clamped expected throughput of channel m sensed by n sensors.
    double payoff(std::size_t m, int n) const {
        if (n <= 0) return 0.0;
        return std::max(slot_s - tau[m][static_cast<std::size_t>(n)], 0.0) * weight[m] / slot_s;
    }
};

inline TauTable build_tau_table(const Scenario& s) {
    s.validate();
    if (s.het())
        throw std::invalid_argument("homogeneous strategies need a single detection SNR per channel");
    TauTable t;
    t.slot_s = s.slot_s;
    t.n_sensors = s.n_sensors;
    t.weight.resize(s.n_channels());
    t.tau.assign(s.n_channels(), std::vector<double>(static_cast<std::size_t>(s.n_sensors) + 1));
    for (std::size_t m = 0; m < s.n_channels(); ++m) {
        t.weight[m] = channel_weight(s.channels[m]);
        t.tau[m][0] = std::numeric_limits<double>::infinity();
        SensingRequirements reqs = s.requirements(m);
        for (int n = 1; n <= s.n_sensors; ++n)
            t.tau[m][static_cast<std::size_t>(n)] = coop_sensing_time_hom(reqs, s.channels[m].pu_snr[0], n);
    }
    return t;
}

struct ParallelResult {
    Allocation allocation;
    Schedule schedule;
};

namespace detail {

/// Realizes a parallel allocation: consecutive sensor blocks, all jobs start
/// at t=0. Channels whose sensing time exceeds the slot stay unsensed.
inline Schedule schedule_from_allocation(const Scenario& s, const TauTable& t, const Allocation& k) {
    Schedule sch = Schedule::unsensed(s);
    int cursor = 0;
    for (std::size_t m = 0; m < s.n_channels(); ++m) {
        if (k[m] <= 0) continue;
        double tau = t.tau[m][static_cast<std::size_t>(k[m])];
        if (tau <= s.slot_s) {
            std::vector<int> sensors(static_cast<std::size_t>(k[m]));
            std::iota(sensors.begin(), sensors.end(), cursor);
            sch.add_job(static_cast<int>(m), std::move(sensors), 0.0, tau);
        }
        cursor += k[m];
    }
    return sch;
}

/// Exact integer assignment of n_total users over m_count channels by
/// backward induction on the Bellman recursion for the parallel objective.
/// Every user must be placed (payoffs are nondecreasing in the user count,
/// so dumping surplus users is never harmful). Ties prefer more users on
/// lower-indexed channels.
inline Allocation bellman_allocate(const std::function<double(int, int)>& payoff, int m_count,
                                   int n_total) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> v(static_cast<std::size_t>(m_count) + 1,
                                       std::vector<double>(static_cast<std::size_t>(n_total) + 1, 0.0));
    std::vector<std::vector<int>> choice(static_cast<std::size_t>(m_count),
                                         std::vector<int>(static_cast<std::size_t>(n_total) + 1, 0));
    for (int n = 1; n <= n_total; ++n) v[static_cast<std::size_t>(m_count)][static_cast<std::size_t>(n)] = neg_inf;
    for (int i = m_count - 1; i >= 0; --i)
        for (int n = 0; n <= n_total; ++n) {
            double best = neg_inf;
            int best_j = n;
            for (int j = n; j >= 0; --j) {
                double cand = payoff(i, j) + v[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(n - j)];
                if (cand > best) {
                    best = cand;
                    best_j = j;
                }
            }
            v[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = best;
            choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = best_j;
        }
    Allocation k(static_cast<std::size_t>(m_count));
    int n = n_total;
    for (int i = 0; i < m_count; ++i) {
        k[static_cast<std::size_t>(i)] = choice[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
        n -= k[static_cast<std::size_t>(i)];
    }
    return k;
}

}  // namespace detail

/**
 * Sequential strategy: all sensors cooperate on one channel at a time, in
 * decreasing order of weight / cooperative-time ratio (ties to the lower
 * channel index). Channels whose cumulative completion would exceed the slot
 * stay in the order but contribute nothing and are left unsensed.
 */
inline Schedule sequential_schedule(const Scenario& s) {
    TauTable t = build_tau_table(s);
    const int N = s.n_sensors;
    std::vector<int> order(s.n_channels());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return t.weight[static_cast<std::size_t>(a)] / t.tau[static_cast<std::size_t>(a)][static_cast<std::size_t>(N)] >
               t.weight[static_cast<std::size_t>(b)] / t.tau[static_cast<std::size_t>(b)][static_cast<std::size_t>(N)];
    });

    Schedule sch = Schedule::unsensed(s);
    std::vector<int> all(static_cast<std::size_t>(N));
    std::iota(all.begin(), all.end(), 0);
    double cursor = 0.0;
    for (int m : order) {
        double tau = t.tau[static_cast<std::size_t>(m)][static_cast<std::size_t>(N)];
        if (cursor + tau <= s.slot_s) sch.add_job(m, all, cursor, tau);
        cursor += tau;
    }
    return sch;
}

/**
 * Optimal parallel assignment: maximizes the summed clamped channel payoffs
 * over all integer allocations with sum N, by backward induction. All jobs
 * start at t=0 with the cooperative time of their assigned group.
 */
inline ParallelResult parallel_dp(const Scenario& s) {
    TauTable t = build_tau_table(s);
    Allocation k = detail::bellman_allocate(
        [&](int m, int j) { return t.payoff(static_cast<std::size_t>(m), j); },
        static_cast<int>(s.n_channels()), s.n_sensors);
    return {k, detail::schedule_from_allocation(s, t, k)};
}

/**
 * Incremental marginal-gain assignment: each user in turn joins the channel
 * with the largest payoff increase, ties to the lower channel index. For
 * unclamped concave payoffs this reproduces the exact optimum; with slot
 * clamping it can stall on channels that need several users before paying
 * off, which is why parallel_dp uses the full recursion instead.
 */
inline ParallelResult parallel_marginal(const Scenario& s) {
    TauTable t = build_tau_table(s);
    Allocation k(s.n_channels(), 0);
    for (int placed = 0; placed < s.n_sensors; ++placed) {
        std::size_t best_m = 0;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < s.n_channels(); ++m) {
            double gain = t.payoff(m, k[m] + 1) - t.payoff(m, k[m]);
            if (gain > best_gain) {
                best_gain = gain;
                best_m = m;
            }
        }
        ++k[best_m];
    }
    return {k, detail::schedule_from_allocation(s, t, k)};
}

/**
 * Rounding heuristic: k_i = [N * w_i / sum w_j]. A shortfall goes entirely
 * to the channel with the largest weight; an excess is removed channel by
 * channel starting from the largest weight, draining each before moving on.
 */
inline ParallelResult parallel_greedy(const Scenario& s) {
    TauTable t = build_tau_table(s);
    const std::size_t M = s.n_channels();
    const int N = s.n_sensors;
    double wsum = std::accumulate(t.weight.begin(), t.weight.end(), 0.0);

    Allocation k(M, 0);
    long assigned = 0;
    for (std::size_t m = 0; m < M; ++m) {
        double share = wsum > 0.0 ? t.weight[m] / wsum : 1.0 / static_cast<double>(M);
        k[m] = static_cast<int>(std::llround(N * share));
        assigned += k[m];
    }

    std::vector<std::size_t> by_weight(M);
    std::iota(by_weight.begin(), by_weight.end(), 0);
    std::stable_sort(by_weight.begin(), by_weight.end(),
                     [&](std::size_t a, std::size_t b) { return t.weight[a] > t.weight[b]; });

    if (assigned < N) {
        k[by_weight.front()] += static_cast<int>(N - assigned);
    } else if (assigned > N) {
        long surplus = assigned - N;
        for (std::size_t idx = 0; surplus > 0 && idx < M; ++idx) {
            std::size_t m = by_weight[idx];
            long take = std::min<long>(surplus, k[m]);
            k[m] -= static_cast<int>(take);
            surplus -= take;
        }
    }
    return {k, detail::schedule_from_allocation(s, t, k)};
}

/// Continuous-allocation upper bound for the parallel strategy.
struct RelaxedSolution {
    std::vector<double> allocation;
    double bound_bps = 0.0;
    double fit_a = 0.0;  // exponential model tau(k) ~ a * exp(-b k)
    double fit_b = 0.0;
};

/**
 * Least-squares fit of tau_k ~ a * exp(-b k) over k = 1..N in log space.
 * Throws FitError when the fitted decay rate is not positive.
 */
inline std::pair<double, double> fit_exponential_decay(const std::vector<double>& tau) {
    if (tau.size() < 2) throw FitError("exponential fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        double x = static_cast<double>(i + 1);
        double y = std::log(tau[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double a = std::exp((sy - slope * sx) / n);
    double b = -slope;
    if (!(b > 0.0)) throw FitError("sensing times do not decay; no positive exponential rate");
    return {a, b};
}

/**
 * Relaxed parallel optimization: drops the integrality of the allocation to
 * bound the integer optimum. Two backends are combined:
 *
 *  - a brute-force scan of the continuous simplex at resolution 0.01*N
 *    (skipped above six channels, where the grid is no longer tractable);
 *  - a closed-form water-filling allocation from the exponential fit of
 *    tau_k, with negative components clipped and their mass redistributed.
 *
 * The integer optimum itself is a feasible point of the relaxation and is
 * always included as a candidate, so the returned bound dominates
 * parallel_dp; grid ties resolve toward the integer point.
 */
inline RelaxedSolution parallel_relaxed(const Scenario& s) {
    TauTable t = build_tau_table(s);
    const std::size_t M = s.n_channels();
    const int N = s.n_sensors;
    const double T = s.slot_s;

    std::vector<double> taus;
    for (int n = 1; n <= N; ++n) taus.push_back(t.tau[0][static_cast<std::size_t>(n)]);
    RelaxedSolution sol;
    if (N >= 2) {
        auto [a, b] = fit_exponential_decay(taus);
        sol.fit_a = a;
        sol.fit_b = b;
    }

    // Continuous payoff of channel m sensed by a fractional group of size x.
    // Tiny x drives the per-sensor targets into degeneracy (tau -> infinity);
    // such points simply pay nothing.
    auto payoff_real = [&](std::size_t m, double x) {
        if (x <= 0.0) return 0.0;
        try {
            double tau = coop_sensing_time_hom(s.requirements(m), s.channels[m].pu_snr[0], x);
            return std::max(T - tau, 0.0) * t.weight[m] / T;
        } catch (const std::domain_error&) {
            return 0.0;
        }
    };
    auto value_of = [&](const std::vector<double>& k) {
        double v = 0.0;
        for (std::size_t m = 0; m < M; ++m) v += payoff_real(m, k[m]);
        return v;
    };

    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> best_k(M, 0.0);

    if (M <= 6) {
        // Simplex grid in steps of h = 0.01*N: 100 indivisible units.
        const int units = 100;
        const double h = 0.01 * N;
        std::vector<std::vector<double>> cell(M, std::vector<double>(units + 1));
        for (std::size_t m = 0; m < M; ++m)
            for (int u = 0; u <= units; ++u) cell[m][static_cast<std::size_t>(u)] = payoff_real(m, u * h);

        std::vector<int> ku(M, 0);
        std::function<void(std::size_t, int, double)> scan = [&](std::size_t m, int left, double acc) {
            if (m + 1 == M) {
                double v = acc + cell[m][static_cast<std::size_t>(left)];
                if (v > best) {
                    best = v;
                    ku[m] = left;
                    for (std::size_t i = 0; i < M; ++i) best_k[i] = ku[i] * h;
                }
                return;
            }
            for (int u = left; u >= 0; --u) {
                ku[m] = u;
                scan(m + 1, left - u, acc + cell[m][static_cast<std::size_t>(u)]);
            }
        };
        scan(0, units, 0.0);
    }

    // Water-filling on the fitted model, clipping negative components and
    // redistributing their mass until every active component is positive.
    // The fitted amplitude is channel 0's; other channels share the decay
    // shape but scale as 1/(gamma * fs).
    if (sol.fit_b > 0.0) {
        auto amp = [&](std::size_t m) {
            double scale0 = s.channels[0].pu_snr[0] * s.channels[0].effective_sampling_hz();
            double scale = s.channels[m].pu_snr[0] * s.channels[m].effective_sampling_hz();
            return sol.fit_a * scale0 / scale;
        };
        std::vector<std::size_t> active;
        for (std::size_t m = 0; m < M; ++m)
            if (t.weight[m] > 0.0) active.push_back(m);
        std::vector<double> k(M, 0.0);
        while (!active.empty()) {
            double mean_log = 0.0;
            for (std::size_t m : active) mean_log += std::log(amp(m) * sol.fit_b * t.weight[m]) / sol.fit_b;
            double level = (mean_log - N) / static_cast<double>(active.size());
            bool clipped = false;
            for (std::size_t m : active)
                k[m] = std::log(amp(m) * sol.fit_b * t.weight[m]) / sol.fit_b - level;
            std::vector<std::size_t> next;
            for (std::size_t m : active) {
                if (k[m] < 0.0) {
                    k[m] = 0.0;
                    clipped = true;
                } else {
                    next.push_back(m);
                }
            }
            if (!clipped) break;
            active.swap(next);
        }
        double v = value_of(k);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }

    // The integer optimum is itself feasible for the relaxed problem; it
    // also wins grid ties so the bound never falls below parallel_dp.
    {
        Allocation ki = detail::bellman_allocate(
            [&](int m, int j) { return t.payoff(static_cast<std::size_t>(m), j); },
            static_cast<int>(M), N);
        std::vector<double> k(M);
        for (std::size_t m = 0; m < M; ++m) k[m] = static_cast<double>(ki[m]);
        double v = value_of(k);
        if (v >= best) {
            best = v;
            best_k = k;
        }
    }

    sol.allocation = best_k;
    sol.bound_bps = best;
    return sol;
}

// ---------------------------------------------------------------------------
// Sequential-parallel machinery: disjoint sensor groups each run their own
// sequential lane over a channel subset, lanes in parallel.
// ---------------------------------------------------------------------------

/// Per-(channel-subset, group-size) optimal sequential throughput table.
struct SeqParTables {
    int m_count = 0;
    int n_sensors = 0;
    TauTable tau;
    std::vector<double> lane_value;  // [mask * (N+1) + j]

    double rs(std::uint32_t mask, int j) const {
        return lane_value[mask * static_cast<std::uint32_t>(n_sensors + 1) + static_cast<std::uint32_t>(j)];
    }
};

inline void seqpar_size_guard(const Scenario& s) {
    if (s.n_channels() > 16 || s.n_sensors > 16)
        throw SizeGuardError("sequential-parallel strategies are limited to 16 channels and 16 sensors");
}

inline SeqParTables build_seqpar_tables(const Scenario& s) {
    seqpar_size_guard(s);
    SeqParTables tab;
    tab.m_count = static_cast<int>(s.n_channels());
    tab.n_sensors = s.n_sensors;
    tab.tau = build_tau_table(s);
    const int M = tab.m_count, N = tab.n_sensors;
    const double T = s.slot_s;
    tab.lane_value.assign((std::size_t{1} << M) * static_cast<std::size_t>(N + 1), 0.0);

    std::vector<int> order(static_cast<std::size_t>(M));
    for (int j = 1; j <= N; ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return tab.tau.weight[static_cast<std::size_t>(a)] / tab.tau.tau[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)] >
                   tab.tau.weight[static_cast<std::size_t>(b)] / tab.tau.tau[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
        });
        for (std::uint32_t mask = 1; mask < (1u << M); ++mask) {
            double cum = 0.0, value = 0.0;
            for (int m : order) {
                if (!(mask & (1u << m))) continue;
                cum += tab.tau.tau[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)];
                if (cum <= T) value += (T - cum) * tab.tau.weight[static_cast<std::size_t>(m)] / T;
            }
            tab.lane_value[mask * static_cast<std::uint32_t>(N + 1) + static_cast<std::uint32_t>(j)] = value;
        }
    }
    return tab;
}

namespace detail {

struct Lane {
    std::uint32_t mask;
    int users;
};

/// Realizes lanes as a schedule: each lane gets the next block of sensors and
/// senses its channels back-to-back from t=0 in ratio order.
inline Schedule schedule_from_lanes(const Scenario& s, const SeqParTables& tab,
                                    const std::vector<Lane>& lanes) {
    Schedule sch = Schedule::unsensed(s);
    int cursor = 0;
    for (const auto& lane : lanes) {
        std::vector<int> members(static_cast<std::size_t>(lane.users));
        std::iota(members.begin(), members.end(), cursor);
        cursor += lane.users;

        std::vector<int> chans;
        for (int m = 0; m < tab.m_count; ++m)
            if (lane.mask & (1u << m)) chans.push_back(m);
        std::stable_sort(chans.begin(), chans.end(), [&](int a, int b) {
            return tab.tau.weight[static_cast<std::size_t>(a)] / tab.tau.tau[static_cast<std::size_t>(a)][static_cast<std::size_t>(lane.users)] >
                   tab.tau.weight[static_cast<std::size_t>(b)] / tab.tau.tau[static_cast<std::size_t>(b)][static_cast<std::size_t>(lane.users)];
        });
        double cum = 0.0;
        for (int m : chans) {
            double tau = tab.tau.tau[static_cast<std::size_t>(m)][static_cast<std::size_t>(lane.users)];
            if (cum + tau <= s.slot_s) sch.add_job(m, members, cum, tau);
            cum += tau;
        }
    }
    return sch;
}

}  // namespace detail

/**
 * Optimal sequential-parallel plan. States are (unsensed channel subset,
 * unassigned users); each decision commits one channel subset and one group
 * size to a sequential lane. Solved bottom-up over subsets; value ties
 * prefer smaller lanes, then lower channel indices, then fewer users.
 */
inline Schedule seqpar_dp(const Scenario& s) {
    SeqParTables tab = build_seqpar_tables(s);
    const int M = tab.m_count, N = tab.n_sensors;
    const std::uint32_t full = (1u << M) - 1u;
    const std::size_t width = static_cast<std::size_t>(N + 1);

    std::vector<double> v((std::size_t{1} << M) * width, 0.0);
    std::vector<std::uint32_t> choice((std::size_t{1} << M) * width, 0);  // 0 = stop

    auto key_of = [](std::uint32_t x, int j) {
        return (static_cast<std::uint64_t>(std::popcount(x)) << 40) |
               (static_cast<std::uint64_t>(x) << 8) | static_cast<std::uint64_t>(j);
    };

    for (std::uint32_t mask = 1; mask <= full; ++mask)
        for (int n = 1; n <= N; ++n) {
            double best = 0.0;
            std::uint32_t best_choice = 0;
            std::uint64_t best_key = ~0ull;
            for (std::uint32_t x = mask; x; x = (x - 1) & mask)
                for (int j = 1; j <= n; ++j) {
                    double cand = tab.rs(x, j) + v[(mask ^ x) * width + static_cast<std::size_t>(n - j)];
                    std::uint64_t key = key_of(x, j);
                    if (cand > best || (cand == best && best_choice != 0 && key < best_key)) {
                        best = cand;
                        best_choice = x | (static_cast<std::uint32_t>(j) << 16);
                        best_key = key;
                    }
                }
            v[mask * width + static_cast<std::size_t>(n)] = best;
            choice[mask * width + static_cast<std::size_t>(n)] = best_choice;
        }

    std::vector<detail::Lane> lanes;
    std::uint32_t mask = full;
    int n = N;
    while (mask && n > 0) {
        std::uint32_t c = choice[mask * width + static_cast<std::size_t>(n)];
        if (c == 0) break;
        std::uint32_t x = c & 0xFFFFu;
        int j = static_cast<int>(c >> 16);
        lanes.push_back({x, j});
        mask ^= x;
        n -= j;
    }
    return detail::schedule_from_lanes(s, tab, lanes);
}

/**
 * Knapsack-style heuristic: repeatedly commit the (subset, group size) pair
 * with the best throughput-per-user, dropping conflicting pairs, then keep
 * the better of that packing and the single best pair outright. The final
 * comparison is what carries the classical half-of-optimal guarantee of
 * density greedies; it also makes the single-channel case exact.
 */
inline Schedule seqpar_greedy(const Scenario& s) {
    SeqParTables tab = build_seqpar_tables(s);
    const int M = tab.m_count, N = tab.n_sensors;
    const std::uint32_t full = (1u << M) - 1u;

    struct Entry {
        std::uint32_t mask;
        int users;
        double value;
    };
    std::vector<Entry> entries;
    Entry best_single{0, 0, 0.0};
    for (std::uint32_t mask = 1; mask <= full; ++mask)
        for (int j = 1; j <= N; ++j) {
            double val = tab.rs(mask, j);
            if (val <= 0.0) continue;
            entries.push_back({mask, j, val});
            if (val > best_single.value) best_single = {mask, j, val};
        }

    std::vector<detail::Lane> lanes;
    double packed_value = 0.0;
    std::uint32_t used = 0;
    int n_rem = N;
    while (n_rem > 0) {
        const Entry* pick = nullptr;
        double pick_ratio = 0.0;
        for (const auto& e : entries) {
            if ((e.mask & used) || e.users > n_rem) continue;
            double ratio = e.value / e.users;
            if (pick == nullptr || ratio > pick_ratio ||
                (ratio == pick_ratio &&
                 std::tuple(std::popcount(e.mask), e.mask, e.users) <
                     std::tuple(std::popcount(pick->mask), pick->mask, pick->users))) {
                pick = &e;
                pick_ratio = ratio;
            }
        }
        if (pick == nullptr || pick_ratio <= 0.0) break;
        lanes.push_back({pick->mask, pick->users});
        packed_value += pick->value;
        used |= pick->mask;
        n_rem -= pick->users;
    }

    if (best_single.users > 0 && best_single.value > packed_value)
        lanes.assign(1, detail::Lane{best_single.mask, best_single.users});
    return detail::schedule_from_lanes(s, tab, lanes);
}

/**
 * Iterative application of the parallel optimizer to the general model.
 * At each decision point the effective sensing time of a channel by k users
 * is the wait for the k-th earliest-free sensor plus the fresh cooperative
 * time (cooperators must start together, so the longest remaining job among
 * the group gates the start). The reference point then advances to the next
 * job completion. Myopic by construction.
 */
inline Schedule iterative_parallel(const Scenario& s) {
    TauTable t = build_tau_table(s);
    const int M = static_cast<int>(s.n_channels());
    const int N = s.n_sensors;
    const double T = s.slot_s;

    Schedule sch = Schedule::unsensed(s);
    std::vector<double> busy(static_cast<std::size_t>(N), 0.0);
    std::vector<int> remaining(static_cast<std::size_t>(M));
    std::iota(remaining.begin(), remaining.end(), 0);
    double t_ref = 0.0;

    while (!remaining.empty() && t_ref < T) {
        std::vector<int> by_avail(static_cast<std::size_t>(N));
        std::iota(by_avail.begin(), by_avail.end(), 0);
        std::stable_sort(by_avail.begin(), by_avail.end(),
                         [&](int a, int b) { return busy[static_cast<std::size_t>(a)] < busy[static_cast<std::size_t>(b)]; });
        std::vector<double> wait(static_cast<std::size_t>(N) + 1, 0.0);
        for (int j = 1; j <= N; ++j)
            wait[static_cast<std::size_t>(j)] =
                std::max(busy[static_cast<std::size_t>(by_avail[static_cast<std::size_t>(j - 1)])] - t_ref, 0.0);

        double t_left = T - t_ref;
        auto payoff = [&](int mi, int j) {
            if (j <= 0) return 0.0;
            std::size_t m = static_cast<std::size_t>(remaining[static_cast<std::size_t>(mi)]);
            double eff = wait[static_cast<std::size_t>(j)] + t.tau[m][static_cast<std::size_t>(j)];
            return std::max(t_left - eff, 0.0) * t.weight[m] / T;
        };
        Allocation k = detail::bellman_allocate(payoff, static_cast<int>(remaining.size()), N);
        double gain = 0.0;
        for (std::size_t i = 0; i < remaining.size(); ++i) gain += payoff(static_cast<int>(i), k[i]);
        if (gain <= 0.0) break;

        // Realize this round: channels in index order take the earliest-free
        // sensors still unclaimed in the round.
        std::vector<bool> taken(static_cast<std::size_t>(N), false);
        std::vector<int> still_remaining;
        bool emitted = false;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            int m = remaining[i];
            if (k[i] <= 0) {
                still_remaining.push_back(m);
                continue;
            }
            std::vector<int> free_sorted;
            for (int u : by_avail)
                if (!taken[static_cast<std::size_t>(u)]) free_sorted.push_back(u);
            if (static_cast<int>(free_sorted.size()) < k[i]) {
                still_remaining.push_back(m);
                continue;
            }
            std::vector<int> group(free_sorted.begin(), free_sorted.begin() + k[i]);
            double start = t_ref;
            for (int u : group) start = std::max(start, busy[static_cast<std::size_t>(u)]);
            double dur = t.tau[static_cast<std::size_t>(m)][static_cast<std::size_t>(k[i])];
            if (start + dur <= T) {
                std::sort(group.begin(), group.end());
                for (int u : group) {
                    busy[static_cast<std::size_t>(u)] = start + dur;
                    taken[static_cast<std::size_t>(u)] = true;
                }
                sch.add_job(m, std::move(group), start, dur);
                emitted = true;
            } else {
                still_remaining.push_back(m);
            }
        }
        remaining.swap(still_remaining);

        // Advance to the earliest completion after the reference point.
        double t_next = std::numeric_limits<double>::infinity();
        for (double b : busy)
            if (b > t_ref) t_next = std::min(t_next, b);
        if (!emitted && !std::isfinite(t_next)) break;
        if (!std::isfinite(t_next)) break;
        t_ref = t_next;
    }
    return sch;
}

// ---------------------------------------------------------------------------
// Closed-form throughput of the three schemes on homogeneous channels.
// ---------------------------------------------------------------------------

enum class AnalyticKind { Par, ParGh, Seq };

/**
 * Closed-form expected throughput for M identical channels of weight
 * C(1-u), slot T, and the cooperative-time ladder tau[n-1] = tau_n:
 *
 *  - Seq: all N sensors sweep channels; K = min(floor(T/tau_N), M) fit.
 *  - Par: even split, floor(N/M) per channel with the remainder spread one
 *    extra each; reported unclamped, so it diverges once tau exceeds T
 *    (callers detect that regime by inspecting the tau ladder).
 *  - ParGh: the rounding heuristic's four-branch closed form with
 *    Q = [N/M]; the over-rounding branch drains t-1 channels fully and one
 *    partially. Throws BranchError if no branch applies.
 */
inline double hom_analytic(AnalyticKind kind, int m_count, int n_sensors, double weight, double slot_s,
                           const std::vector<double>& tau) {
    if (m_count < 1 || n_sensors < 1) throw std::domain_error("hom_analytic needs M >= 1 and N >= 1");
    if (static_cast<int>(tau.size()) < n_sensors)
        throw std::domain_error("hom_analytic needs tau_1..tau_N");
    const double T = slot_s;
    const double M = m_count, N = n_sensors;
    auto tau_at = [&](int n) { return tau[static_cast<std::size_t>(n - 1)]; };

    switch (kind) {
        case AnalyticKind::Seq: {
            int fit = static_cast<int>(std::floor(T / tau_at(n_sensors)));
            int K = std::min(fit, m_count);
            if (K <= 0) return 0.0;
            return K * weight * (T - 0.5 * (K + 1) * tau_at(n_sensors)) / T;
        }
        case AnalyticKind::Par: {
            int L = n_sensors / m_count;
            int r = n_sensors % m_count;
            double base = L > 0 ? (M - r) * weight * (T - tau_at(L)) : 0.0;
            double extra = r > 0 ? r * weight * (T - tau_at(L + 1)) : 0.0;
            return (base + extra) / T;
        }
        case AnalyticKind::ParGh: {
            int Q = static_cast<int>(std::llround(N / M));
            if (n_sensors < m_count) return N * weight * (T - tau_at(1)) / T;
            long total = static_cast<long>(m_count) * Q;
            if (total == n_sensors) return M * weight * (T - tau_at(Q)) / T;
            if (total < n_sensors) {
                int partial = n_sensors - (m_count - 1) * Q;
                return ((M - 1) * (T - tau_at(Q)) + (T - tau_at(partial))) * weight / T;
            }
            // Over-rounded: remove users starting from the first channel,
            // draining t-1 channels fully and the t-th down to `partial`.
            long deficit = total - n_sensors;
            int t_drained = static_cast<int>((deficit + Q - 1) / Q);
            if (t_drained < 1 || t_drained > m_count)
                throw BranchError("no applicable branch for the rounding heuristic closed form");
            int partial = n_sensors - (m_count - t_drained) * Q;
            double tail = partial > 0 ? (T - tau_at(partial)) : 0.0;
            return ((M - t_drained) * (T - tau_at(Q)) + tail) * weight / T;
        }
    }
    throw BranchError("unknown analytic kind");
}

// ---------------------------------------------------------------------------
// Exhaustive oracles (deliberately independent of the DP code paths).
// ---------------------------------------------------------------------------

/**
 * Exhaustive search over every integer allocation, enumerated in
 * lexicographically decreasing order so value ties resolve exactly like the
 * recursion's more-users-on-lower-channels preference.
 */
inline ParallelResult brute_force_parallel(const Scenario& s) {
    if (s.n_channels() > 4 || s.n_sensors > 6)
        throw SizeGuardError("brute_force_parallel is limited to 4 channels and 6 sensors");
    TauTable t = build_tau_table(s);
    const std::size_t M = s.n_channels();

    Allocation current(M, 0), best;
    double best_value = -std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, int)> rec = [&](std::size_t m, int left) {
        if (m + 1 == M) {
            current[m] = left;
            double v = 0.0;
            for (std::size_t i = 0; i < M; ++i) v += t.payoff(i, current[i]);
            if (v > best_value) {
                best_value = v;
                best = current;
            }
            return;
        }
        for (int j = left; j >= 0; --j) {
            current[m] = j;
            rec(m + 1, left - j);
        }
    };
    rec(0, s.n_sensors);
    return {best, detail::schedule_from_allocation(s, t, best)};
}

/**
 * Exhaustive search over every way to split channels into disjoint lanes
 * (with any subset left unsensed) and every user split over the lanes.
 */
inline Schedule brute_force_seqpar(const Scenario& s) {
    if (s.n_channels() > 4 || s.n_sensors > 4)
        throw SizeGuardError("brute_force_seqpar is limited to 4 channels and 4 sensors");
    SeqParTables tab = build_seqpar_tables(s);
    const int M = tab.m_count, N = tab.n_sensors;

    std::vector<int> group_of(static_cast<std::size_t>(M));  // 0 = unsensed
    double best_value = 0.0;
    std::vector<detail::Lane> best_lanes;

    std::vector<std::uint32_t> masks;
    std::vector<int> users;
    std::function<void(std::size_t, double, int)> assign_users = [&](std::size_t g, double acc, int left) {
        if (g == masks.size()) {
            if (acc > best_value) {
                best_value = acc;
                best_lanes.clear();
                for (std::size_t i = 0; i < masks.size(); ++i)
                    best_lanes.push_back({masks[i], users[i]});
            }
            return;
        }
        for (int j = 1; j <= left - static_cast<int>(masks.size() - g - 1); ++j) {
            users[g] = j;
            assign_users(g + 1, acc + tab.rs(masks[g], j), left - j);
        }
    };
    std::function<void(int, int)> split = [&](int m, int groups) {
        if (m == M) {
            masks.assign(static_cast<std::size_t>(groups), 0);
            for (int i = 0; i < M; ++i)
                if (group_of[static_cast<std::size_t>(i)] > 0)
                    masks[static_cast<std::size_t>(group_of[static_cast<std::size_t>(i)] - 1)] |=
                        (1u << i);
            if (static_cast<int>(masks.size()) > N) return;
            users.assign(masks.size(), 0);
            assign_users(0, 0.0, N);
            return;
        }
        for (int g = 0; g <= groups + 1 && g <= M; ++g) {
            group_of[static_cast<std::size_t>(m)] = g;
            split(m + 1, std::max(groups, g));
        }
    };
    split(0, 0);
    return detail::schedule_from_lanes(s, tab, best_lanes);
}

}  // namespace specsense
