#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "specsense/common.hpp"

namespace specsense {

/// Detection quality targets for one sensing task: cumulative (post-fusion)
/// detection and false-alarm probabilities, sampling rate and fusion rule.
struct SensingRequirements {
    double qd_target;    // cumulative probability of detection target
    double qf_target;    // cumulative probability of false alarm target
    double sampling_hz;  // receiver sampling frequency
    Fusion fusion = Fusion::OR;

    void validate() const {
        if (!(qf_target > 0.0 && qf_target < qd_target && qd_target < 1.0))
            throw std::domain_error("sensing requirements need 0 < qf < qd < 1");
        if (!(sampling_hz > 0.0)) throw std::domain_error("sampling_hz must be positive");
    }
};

/// Result of the heterogeneous minimum-cooperative-time solve: the sensing
/// time, one matched-filter threshold per participating sensor, and the
/// participating sensor indices (descending SNR for subset searches).
struct HetSensingSolution {
    double tau_s = 0.0;
    std::vector<double> thresholds;
    std::vector<int> subset;
};

struct HetSolverOptions {
    double tau_cap_s = 10.0;  // feasibility search gives up past this time
    double rel_tol = 1e-11;   // bisection convergence on tau
};

/**
 * Gaussian tail probability Q(x) = P(Z > x) for standard normal Z.
 * Total on all finite inputs; Q(x) + Q(-x) = 1.
 */
inline double q_func(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

namespace detail {

inline double normal_pdf(double x) {
    static constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Acklam's rational approximation of the standard normal quantile,
// accurate to ~1.15e-9 relative; used only to seed the bisection.
inline double norm_quantile_seed(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace detail

/**
 * Inverse of q_func on (0, 1): returns x with Q(x) = p.
 *
 * Monotone bisection on q_func seeded by a rational quantile approximation,
 * polished with one Newton step; q_func(q_inv(p)) matches p to better than
 * 1e-12 relative.
 */
inline double q_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_inv requires 0 < p < 1");
    // Q(x) = p  <=>  x = -Phi^{-1}(p)
    double seed = -detail::norm_quantile_seed(p);

    // Expand a bracket around the seed. q_func is strictly decreasing, so we
    // need q_func(lo) >= p >= q_func(hi).
    double radius = 1e-6;
    double lo = seed - radius, hi = seed + radius;
    while (q_func(lo) < p && radius < 64.0) {
        radius *= 2.0;
        lo = seed - radius;
    }
    while (q_func(hi) > p && radius < 64.0) {
        radius *= 2.0;
        hi = seed + radius;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++i) {
        double mid = 0.5 * (lo + hi);
        (q_func(mid) >= p ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    // One Newton step: d/dx Q(x) = -pdf(x).
    double pdf = detail::normal_pdf(x);
    if (pdf > 0.0) x += (q_func(x) - p) / pdf;
    return x;
}

/**
 * Minimum sensing time for one matched-filter sensor to reach per-sensor
 * targets (pf, pd) at linear detection SNR gamma and sampling rate fs:
 *
 *   tau = [Q^{-1}(pf) - Q^{-1}(pd)]^2 / (gamma * fs)
 *
 * Strictly decreasing in gamma; tau * gamma is invariant for fixed targets.
 */
inline double sensing_time_single(double pf, double pd, double gamma, double fs) {
    if (!(pf > 0.0 && pf < pd && pd < 1.0))
        throw std::domain_error("sensing_time_single requires 0 < pf < pd < 1");
    if (!(gamma > 0.0)) throw std::domain_error("sensing_time_single requires gamma > 0");
    if (!(fs > 0.0)) throw std::domain_error("sensing_time_single requires fs > 0");
    double d = q_inv(pf) - q_inv(pd);
    return d * d / (gamma * fs);
}

/**
 * Minimum cooperative sensing time for n homogeneous sensors meeting the
 * cumulative targets in reqs under the OR or AND fusion rule.
 *
 * The cumulative targets are split into identical per-sensor targets
 * (OR: pd = 1-(1-Qd)^{1/n}; AND: pd = Qd^{1/n}; likewise for pf) and fed to
 * the single-sensor time. n is kept continuous: relaxed optimizers evaluate
 * fractional sensor counts and nothing here requires an integer.
 */
inline double coop_sensing_time_hom(const SensingRequirements& reqs, double gamma, double n) {
    reqs.validate();
    if (!(n > 0.0)) throw std::domain_error("coop_sensing_time_hom requires n > 0");
    double pd, pf;
    if (reqs.fusion == Fusion::OR) {
        pd = 1.0 - std::pow(1.0 - reqs.qd_target, 1.0 / n);
        pf = 1.0 - std::pow(1.0 - reqs.qf_target, 1.0 / n);
    } else {
        pd = std::pow(reqs.qd_target, 1.0 / n);
        pf = std::pow(reqs.qf_target, 1.0 / n);
    }
    if (!(pf > 0.0 && pf < pd && pd < 1.0))
        throw std::domain_error("derived per-sensor targets violate 0 < pf < pd < 1");
    return sensing_time_single(pf, pd, gamma, reqs.sampling_hz);
}

/**
 * Minimum cooperative sensing time for heterogeneous sensors under the AND
 * rule, with per-sensor matched-filter thresholds.
 *
 * The cumulative false-alarm budget is split evenly, pf_i = (Qf*)^{1/|S|},
 * which pins every threshold once tau is known; the smallest tau whose
 * detection product reaches Qd* is then found by bisection. The product
 * of per-sensor detection probabilities is strictly increasing in tau, so
 * the bisection is exact to rel_tol. Throws InfeasibleError if no
 * tau <= tau_cap_s satisfies the targets.
 */
inline HetSensingSolution het_coop_sensing_time(const std::vector<double>& snrs,
                                                const SensingRequirements& reqs,
                                                double noise_power,
                                                const HetSolverOptions& opts = {}) {
    reqs.validate();
    if (reqs.fusion != Fusion::AND)
        throw std::domain_error("het_coop_sensing_time is defined for the AND rule only");
    if (snrs.empty()) throw std::domain_error("het_coop_sensing_time needs at least one sensor");
    for (double g : snrs)
        if (!(g > 0.0)) throw std::domain_error("detection SNRs must be positive");
    if (!(noise_power > 0.0)) throw std::domain_error("noise power must be positive");

    const std::size_t n = snrs.size();
    const double fs = reqs.sampling_hz;
    const double pf_each = std::pow(reqs.qf_target, 1.0 / static_cast<double>(n));
    const double x = q_inv(pf_each);

    // Detection product at a candidate sensing time. Each sensor operates at
    // Q(x - sqrt(tau * fs * gamma_i)) under its equal-split threshold.
    auto qd_at = [&](double tau) {
        double prod = 1.0;
        for (double g : snrs) prod *= q_func(x - std::sqrt(tau * fs * g));
        return prod;
    };

    double hi = 1e-9;
    while (qd_at(hi) < reqs.qd_target) {
        hi *= 2.0;
        if (hi > opts.tau_cap_s)
            throw InfeasibleError("no feasible cooperative sensing time below the cap");
    }
    double lo = hi * 0.5;
    if (hi <= 2e-9) lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > opts.rel_tol * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (qd_at(mid) >= reqs.qd_target ? hi : lo) = mid;
    }

    HetSensingSolution sol;
    sol.tau_s = hi;
    sol.thresholds.resize(n);
    sol.subset.resize(n);
    std::iota(sol.subset.begin(), sol.subset.end(), 0);
    // Matched-filter threshold recovered from the per-sensor operating point:
    // pf_i = Q(eps_i / (sigma_w^2 * sqrt(tau fs gamma_i))).
    for (std::size_t i = 0; i < n; ++i)
        sol.thresholds[i] = x * noise_power * std::sqrt(hi * fs * snrs[i]);
    return sol;
}

/**
 * Best sensor subset for one channel under the AND rule.
 *
 * Sensors are sorted by descending SNR and only the N prefix subsets
 * {1}, {1,2}, ... are solved: for any subset size k the k strongest sensors
 * give the largest detection product at every tau, so the optimum over all
 * 2^N - 1 subsets is always attained on a prefix. All prefixes are evaluated
 * (the time-vs-size curve need not be unimodal) and the fastest one wins,
 * ties going to fewer sensors. Subset indices refer to the input order.
 */
inline HetSensingSolution het_optimal_subset(const std::vector<double>& snrs,
                                             const SensingRequirements& reqs,
                                             double noise_power,
                                             const HetSolverOptions& opts = {}) {
    if (snrs.empty()) throw std::domain_error("het_optimal_subset needs at least one sensor");
    std::vector<int> order(snrs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return snrs[a] > snrs[b]; });

    HetSensingSolution best;
    bool found = false;
    std::vector<double> prefix;
    prefix.reserve(snrs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        prefix.push_back(snrs[order[k]]);
        try {
            HetSensingSolution sol = het_coop_sensing_time(prefix, reqs, noise_power, opts);
            if (!found || sol.tau_s < best.tau_s) {
                best = sol;
                best.subset.assign(order.begin(), order.begin() + static_cast<long>(k) + 1);
                found = true;
            }
        } catch (const InfeasibleError&) {
            // this prefix cannot meet the targets below the cap; larger ones may
        }
    }
    if (!found) throw InfeasibleError("no sensor subset meets the targets below the cap");
    return best;
}

}  // namespace specsense
