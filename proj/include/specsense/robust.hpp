#pragma once

#include <algorithm>
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
#include "specsense/rng.hpp"
#include "specsense/strategies.hpp"

namespace specsense {

/// Two-state primary-user traffic chain. p01 is the idle->busy transition
/// probability, p11 the busy->busy one. The stationary duty cycle is
/// u = p01/(p01+p10) and the mixing parameter r = p11 - p01 controls how
/// correlated consecutive samples are (r = 1 would freeze the chain).
struct DtmcTraffic {
    double p01 = 0.0;
    double p11 = 0.0;

    double p00() const { return 1.0 - p01; }
    double p10() const { return 1.0 - p11; }
    double u() const { return p01 / (p01 + p10()); }
    double r() const { return p11 - p01; }

    void validate() const {
        if (p01 < 0.0 || p01 > 1.0 || p11 < 0.0 || p11 > 1.0)
            throw std::domain_error("transition probabilities must lie in [0,1]");
        if (!(p01 + p10() > 0.0)) throw std::domain_error("frozen chain: p01 + p10 must be positive");
    }

    /// Builds the chain from a duty cycle and the idle self-transition p00.
    static DtmcTraffic from_duty_cycle(double duty, double p00) {
        if (!(duty > 0.0 && duty < 1.0)) throw std::domain_error("duty cycle must lie in (0,1)");
        if (!(p00 >= 0.0 && p00 <= 1.0)) throw std::domain_error("p00 must lie in [0,1]");
        DtmcTraffic t;
        t.p01 = 1.0 - p00;
        double p10 = t.p01 * (1.0 - duty) / duty;
        if (p10 > 1.0) throw std::domain_error("duty cycle and p00 are inconsistent (p10 > 1)");
        t.p11 = 1.0 - p10;
        return t;
    }
};

/**
 * Draws w binary traffic samples from the chain. The first sample follows
 * the stationary law P{z=1} = u; later ones follow the transitions.
 * Reproducible from the seed.
 */
inline std::vector<std::uint8_t> dtmc_simulate(const DtmcTraffic& traffic, std::size_t w,
                                               std::uint64_t seed) {
    traffic.validate();
    if (w < 1) throw std::domain_error("dtmc_simulate needs at least one sample");
    SplitMix64 rng(seed);
    std::vector<std::uint8_t> z(w);
    z[0] = rng.next_bernoulli(traffic.u()) ? 1 : 0;
    for (std::size_t i = 1; i < w; ++i)
        z[i] = rng.next_bernoulli(z[i - 1] ? traffic.p11 : traffic.p01) ? 1 : 0;
    return z;
}

/// Average estimator of the duty cycle; unbiased under the stationary start.
inline double estimate_duty_cycle(const std::vector<std::uint8_t>& samples) {
    if (samples.empty()) throw std::domain_error("estimate_duty_cycle needs samples");
    double sum = 0.0;
    for (auto z : samples) sum += z;
    return sum / static_cast<double>(samples.size());
}

/**
 * Exact variance of the average estimator over w correlated samples:
 *
 *   u(1-u)/w + 2 u(1-u) r (r^w - w r + w - 1) / (w^2 (1-r)^2)
 *
 * Reduces to the iid value at r = 0 and to u(1-u) at w = 1; decays to zero
 * as w grows for any |r| < 1.
 */
inline double estimator_variance(double u, double r, long w) {
    if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("duty cycle must lie in [0,1]");
    if (!(std::abs(r) < 1.0)) throw std::domain_error("estimator variance requires |r| < 1");
    if (w < 1) throw std::domain_error("estimator variance requires w >= 1");
    double W = static_cast<double>(w);
    double base = u * (1.0 - u) / W;
    if (r == 0.0) return base;
    double corr = 2.0 * u * (1.0 - u) * r * (std::pow(r, W) - W * r + W - 1.0) /
                  (W * W * (1.0 - r) * (1.0 - r));
    return base + corr;
}

/// Stationary correlation E{z_i z_{i+j}} of the chain at lag j.
inline double lag_correlation(double u, double p01, double p11, long j) {
    if (j < 0) throw std::domain_error("lag must be nonnegative");
    double r = p11 - p01;
    if (!(std::abs(r) < 1.0)) throw std::domain_error("lag correlation requires |r| < 1");
    double rj = std::pow(r, static_cast<double>(j));
    return u * p01 * (1.0 - rj) / (1.0 - r) + u * rj;
}

/**
 * Variance of the estimated schedule throughput induced by per-channel
 * duty-cycle estimation: sum of squared residual-time-weighted capacities
 * times each channel's estimator variance.
 */
inline double throughput_variance_traffic(const Scenario& s, const Schedule& schedule,
                                          const std::vector<long>& samples,
                                          const std::vector<DtmcTraffic>& traffic) {
    auto violations = validate_schedule(s, schedule);
    if (!violations.empty())
        throw std::invalid_argument("invalid schedule: " + violations.front());
    if (samples.size() != s.n_channels() || traffic.size() != s.n_channels())
        throw std::invalid_argument("need one sample count and one traffic model per channel");
    double var = 0.0;
    for (std::size_t m = 0; m < s.n_channels(); ++m) {
        double residual = std::max(s.slot_s - schedule.completion[m], 0.0);
        double coef = residual * capacity(s.channels[m].bandwidth_hz, s.channels[m].su_snr) / s.slot_s;
        var += coef * coef * estimator_variance(traffic[m].u(), traffic[m].r(), samples[m]);
    }
    return var;
}

// ---------------------------------------------------------------------------
// Robust selection over the parallel strategy space.
// ---------------------------------------------------------------------------

/// One enumerated candidate with its expected throughput and variance.
struct RopCandidate {
    Allocation allocation;
    double expected_bps = 0.0;
    double variance = 0.0;
};

struct RopReport {
    Allocation allocation;       // chosen strategy
    double expected_bps = 0.0;   // its expected throughput
    double variance = 0.0;       // its throughput variance
    double unconstrained_bps = 0.0;  // best expected throughput ignoring the constraint

    double normalized_loss() const {
        return unconstrained_bps > 0.0 ? (unconstrained_bps - expected_bps) / unconstrained_bps : 0.0;
    }
};

namespace detail {

inline void rop_space_guard(const Scenario& s) {
    if (s.n_channels() > 8 || s.n_sensors > 12)
        throw SizeGuardError("robust selection enumerates parallel allocations; limited to 8 channels and 12 sensors");
}

/// All integer allocations in lexicographically decreasing order, evaluated
/// through `score`; ties keep the lexicographically greater allocation.
inline std::vector<Allocation> enumerate_allocations(int m_count, int n_total) {
    std::vector<Allocation> all;
    Allocation current(static_cast<std::size_t>(m_count), 0);
    std::function<void(int, int)> rec = [&](int m, int left) {
        if (m + 1 == m_count) {
            current[static_cast<std::size_t>(m)] = left;
            all.push_back(current);
            return;
        }
        for (int j = left; j >= 0; --j) {
            current[static_cast<std::size_t>(m)] = j;
            rec(m + 1, left - j);
        }
    };
    rec(0, n_total);
    return all;
}

/// Algorithm shared by the robust problems: sort candidates by expected
/// throughput (descending) and return the first satisfying the variance
/// threshold. The enumeration order breaks expected-value ties.
inline RopReport select_best_feasible(std::vector<RopCandidate> candidates, double eta) {
    std::vector<std::size_t> idx(candidates.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return candidates[a].expected_bps > candidates[b].expected_bps;
    });
    RopReport report;
    report.unconstrained_bps = candidates[idx.front()].expected_bps;
    for (std::size_t i : idx) {
        if (candidates[i].variance <= eta) {
            report.allocation = candidates[i].allocation;
            report.expected_bps = candidates[i].expected_bps;
            report.variance = candidates[i].variance;
            return report;
        }
    }
    throw NoSolutionError("no strategy satisfies the variance threshold");
}

}  // namespace detail

/**
 * Robust selection under traffic uncertainty: across all parallel
 * allocations, pick the highest expected throughput whose estimated-
 * throughput variance stays at or below eta. Expected throughput uses the
 * true duty cycles (the duty-cycle estimator is unbiased).
 */
inline RopReport rop1_solve(const Scenario& s, const std::vector<DtmcTraffic>& traffic,
                            const std::vector<long>& samples, double eta) {
    detail::rop_space_guard(s);
    if (traffic.size() != s.n_channels() || samples.size() != s.n_channels())
        throw std::invalid_argument("need one traffic model and sample count per channel");
    TauTable t = build_tau_table(s);
    const double T = s.slot_s;

    std::vector<RopCandidate> candidates;
    for (auto& k : detail::enumerate_allocations(static_cast<int>(s.n_channels()), s.n_sensors)) {
        RopCandidate c;
        c.allocation = k;
        for (std::size_t m = 0; m < s.n_channels(); ++m) {
            c.expected_bps += t.payoff(m, k[m]);
            if (k[m] > 0) {
                double residual = std::max(T - t.tau[m][static_cast<std::size_t>(k[m])], 0.0);
                double coef = residual * capacity(s.channels[m].bandwidth_hz, s.channels[m].su_snr) / T;
                c.variance += coef * coef * estimator_variance(traffic[m].u(), traffic[m].r(), samples[m]);
            }
        }
        candidates.push_back(std::move(c));
    }
    return detail::select_best_feasible(std::move(candidates), eta);
}

/// Which sample-budget design to solve: one shared count or per-channel counts.
enum class SampleDesign { Uniform = 1, PerChannel = 2 };

/**
 * Minimum traffic samples needed to keep the throughput variance of a fixed
 * schedule at or below eta.
 *
 * Uniform: the smallest shared W, found by doubling then integer bisection
 * (the variance is decreasing in W). PerChannel: marginal-allocation greedy
 * starting from one sample per channel, always incrementing the channel with
 * the largest variance reduction; optimal because each channel's weighted
 * variance is convex and decreasing in its count.
 */
inline std::vector<long> rop_min_samples(SampleDesign design, const Scenario& s,
                                         const Schedule& schedule,
                                         const std::vector<DtmcTraffic>& traffic, double eta) {
    if (!(eta > 0.0)) throw InfeasibleError("variance threshold must be positive");
    const std::size_t M = s.n_channels();
    if (traffic.size() != M) throw std::invalid_argument("need one traffic model per channel");

    std::vector<double> coef(M);
    for (std::size_t m = 0; m < M; ++m) {
        double residual = std::max(s.slot_s - schedule.completion[m], 0.0);
        double c = residual * capacity(s.channels[m].bandwidth_hz, s.channels[m].su_snr) / s.slot_s;
        coef[m] = c * c;
    }
    auto channel_var = [&](std::size_t m, long w) {
        return coef[m] * estimator_variance(traffic[m].u(), traffic[m].r(), w);
    };
    auto total_var = [&](const std::vector<long>& w) {
        double v = 0.0;
        for (std::size_t m = 0; m < M; ++m) v += channel_var(m, w[m]);
        return v;
    };

    if (design == SampleDesign::Uniform) {
        auto var_at = [&](long w) {
            double v = 0.0;
            for (std::size_t m = 0; m < M; ++m) v += channel_var(m, w);
            return v;
        };
        long hi = 1;
        while (var_at(hi) > eta) {
            hi *= 2;
            if (hi > (1L << 40)) throw InfeasibleError("uniform sample search exceeded its range");
        }
        long lo = hi / 2;  // var_at(lo) > eta (or lo == 0)
        while (hi - lo > 1) {
            long mid = lo + (hi - lo) / 2;
            (var_at(mid) <= eta ? hi : lo) = mid;
        }
        return std::vector<long>(M, hi);
    }

    std::vector<long> w(M, 1);
    while (total_var(w) > eta) {
        std::size_t best_m = 0;
        double best_drop = -1.0;
        for (std::size_t m = 0; m < M; ++m) {
            double drop = channel_var(m, w[m]) - channel_var(m, w[m] + 1);
            if (drop > best_drop) {
                best_drop = drop;
                best_m = m;
            }
        }
        if (!(best_drop > 0.0)) throw InfeasibleError("variance cannot be reduced further");
        ++w[best_m];
    }
    return w;
}

/**
 * Minimum achievable throughput variance under a total sample budget:
 * the same marginal-allocation greedy, stopped when the budget is spent.
 * With the budget set to an optimal rop_min_samples total, the greedy
 * retraces the same increments, which is the equivalence between the
 * sample-minimizing and variance-minimizing problems.
 */
inline std::pair<std::vector<long>, double> rop_min_variance(const Scenario& s,
                                                             const Schedule& schedule,
                                                             const std::vector<DtmcTraffic>& traffic,
                                                             long budget) {
    const std::size_t M = s.n_channels();
    if (budget < static_cast<long>(M))
        throw InfeasibleError("budget must allow at least one sample per channel");
    if (traffic.size() != M) throw std::invalid_argument("need one traffic model per channel");

    std::vector<double> coef(M);
    for (std::size_t m = 0; m < M; ++m) {
        double residual = std::max(s.slot_s - schedule.completion[m], 0.0);
        double c = residual * capacity(s.channels[m].bandwidth_hz, s.channels[m].su_snr) / s.slot_s;
        coef[m] = c * c;
    }
    auto channel_var = [&](std::size_t m, long w) {
        return coef[m] * estimator_variance(traffic[m].u(), traffic[m].r(), w);
    };

    std::vector<long> w(M, 1);
    for (long spent = static_cast<long>(M); spent < budget; ++spent) {
        std::size_t best_m = 0;
        double best_drop = -1.0;
        for (std::size_t m = 0; m < M; ++m) {
            double drop = channel_var(m, w[m]) - channel_var(m, w[m] + 1);
            if (drop > best_drop) {
                best_drop = drop;
                best_m = m;
            }
        }
        ++w[best_m];
    }
    double v = 0.0;
    for (std::size_t m = 0; m < M; ++m) v += channel_var(m, w[m]);
    return {w, v};
}

// ---------------------------------------------------------------------------
// Channel (detection SNR) uncertainty.
// ---------------------------------------------------------------------------

/**
 * Exponential integral E1(x) = integral_x^inf e^{-t}/t dt for x > 0,
 * via the alternating series below x = 1 and a modified-Lentz continued
 * fraction above; good to ~1e-14 relative.
 */
inline double expint_e1(double x) {
    if (!(x > 0.0)) throw std::domain_error("expint_e1 requires x > 0");
    static constexpr double euler = 0.57721566490153286061;
    if (x <= 1.0) {
        double sum = 0.0, term = 1.0;
        for (int k = 1; k < 80; ++k) {
            term *= x / k;  // x^k / k!
            double add = (k % 2 ? term : -term) / k;
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return -euler - std::log(x) + sum;
    }
    static constexpr double tiny = 1e-300;
    double b = x + 1.0, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 200; ++i) {
        double a = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x);
}

/// First and second inverse moments (and the mean) of a truncated
/// exponential SNR, in closed form on the exponential integral.
struct TruncExpMoments {
    double e_inv = 0.0;    // E{1/gamma}
    double e_inv2 = 0.0;   // E{1/gamma^2}
    double var_inv = 0.0;  // Var{1/gamma}
    double e_gamma = 0.0;  // E{gamma}
};

inline TruncExpMoments trunc_exp_inverse_moments(const TruncExpSnr& dist) {
    dist.validate();
    const double b = dist.beta, lo = dist.phi_l, hi = dist.phi_u;
    const double d = std::exp(-b * lo) - std::exp(-b * hi);
    const double e1 = expint_e1(b * lo) - expint_e1(b * hi);
    TruncExpMoments m;
    m.e_inv = b * e1 / d;
    m.e_inv2 = b / d * (std::exp(-b * lo) / lo - std::exp(-b * hi) / hi - b * e1);
    m.var_inv = m.e_inv2 - m.e_inv * m.e_inv;
    m.e_gamma = 1.0 / b + (lo * std::exp(-b * lo) - hi * std::exp(-b * hi)) / d;
    return m;
}

/// Inverse-CDF sample from the truncated exponential SNR.
inline double trunc_exp_sample(const TruncExpSnr& dist, SplitMix64& rng) {
    const double a = std::exp(-dist.beta * dist.phi_l);
    const double d = a - std::exp(-dist.beta * dist.phi_u);
    return -std::log(a - rng.next_double() * d) / dist.beta;
}

/// Truncated exponential whose underlying rate matches a mean SNR in dB.
inline TruncExpSnr trunc_exp_from_mean_db(double mean_db, double lo_db, double hi_db) {
    TruncExpSnr d;
    d.beta = 1.0 / db_to_linear(mean_db);
    d.phi_l = db_to_linear(lo_db);
    d.phi_u = db_to_linear(hi_db);
    d.validate();
    return d;
}

/**
 * Robust selection under detection-SNR uncertainty. The sensing time of a
 * sensed channel separates as A_i(k_i)/gamma with a gamma-independent
 * constant, so the expected throughput substitutes E{1/gamma} and the
 * variance is Var{1/gamma} times the squared weighted sum of the constants.
 * Same sorted-scan selection as the traffic case.
 */
inline RopReport rop4_solve(const Scenario& s, const TruncExpSnr& dist, double eta) {
    detail::rop_space_guard(s);
    const TruncExpMoments moments = trunc_exp_inverse_moments(dist);
    const double T = s.slot_s;
    const std::size_t M = s.n_channels();

    // gamma-independent sensing-time constants per channel and group size
    std::vector<std::vector<double>> a_const(M, std::vector<double>(static_cast<std::size_t>(s.n_sensors) + 1, 0.0));
    for (std::size_t m = 0; m < M; ++m) {
        SensingRequirements reqs = s.requirements(m);
        for (int k = 1; k <= s.n_sensors; ++k)  // tau at gamma = 1 is exactly the constant
            a_const[m][static_cast<std::size_t>(k)] = coop_sensing_time_hom(reqs, 1.0, k);
    }

    std::vector<double> weight(M);
    for (std::size_t m = 0; m < M; ++m) weight[m] = channel_weight(s.channels[m]);

    std::vector<RopCandidate> candidates;
    for (auto& k : detail::enumerate_allocations(static_cast<int>(M), s.n_sensors)) {
        RopCandidate c;
        c.allocation = k;
        double a_sum = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            if (k[m] <= 0) continue;
            double a = a_const[m][static_cast<std::size_t>(k[m])];
            c.expected_bps += (T - a * moments.e_inv) * weight[m] / T;
            a_sum += a * weight[m] / T;
        }
        c.variance = moments.var_inv * a_sum * a_sum;
        candidates.push_back(std::move(c));
    }
    return detail::select_best_feasible(std::move(candidates), eta);
}

}  // namespace specsense
