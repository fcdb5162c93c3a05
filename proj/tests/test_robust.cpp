#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "specsense/robust.hpp"
#include "specsense/scenario_io.hpp"

using namespace specsense;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Scenario robust_scenario() {
    return load_scenario_file(std::string(SPECSENSE_SCENARIO_DIR) + "/robust_traffic.json");
}

std::vector<DtmcTraffic> traffic_of(const Scenario& s) {
    std::vector<DtmcTraffic> t;
    for (const auto& tm : s.traffic) t.push_back({tm.p01, tm.p11});
    return t;
}

}  // namespace

TEST_CASE("dtmc_simulate: stationarity and correlation") {
    // absorbing idle chain never leaves zero once started there
    DtmcTraffic frozen{0.0, 0.5};
    bool all_zero = true;
    for (int rep = 0; rep < 50; ++rep) {
        auto z = dtmc_simulate(frozen, 200, 1000 + static_cast<std::uint64_t>(rep));
        if (z[0] == 0)
            for (auto v : z) all_zero = all_zero && v == 0;
    }
    CHECK(all_zero);

    // r = 0 chain is iid: lag-1 correlation vanishes
    {
        DtmcTraffic iid{0.3, 0.3};
        auto z = dtmc_simulate(iid, 1000000, 7);
        double m = estimate_duty_cycle(z);
        double corr = 0.0;
        for (std::size_t i = 0; i + 1 < z.size(); ++i) corr += z[i] * z[i + 1];
        corr /= static_cast<double>(z.size() - 1);
        double expect = m * m;
        double sigma = std::sqrt(0.3 * 0.7 / static_cast<double>(z.size()));
        CHECK_THAT(corr, WithinAbs(expect, 3.0 * sigma));
    }

    // stationary mean is the duty cycle
    {
        auto t = DtmcTraffic::from_duty_cycle(0.3, 0.9);
        CHECK_THAT(t.u(), WithinAbs(0.3, 1e-12));
        CHECK_THAT(t.r(), WithinAbs(2.0 / 3.0, 1e-12));
        auto z = dtmc_simulate(t, 1000000, 11);
        // correlated samples: inflate the error bar by the variance formula
        double se = std::sqrt(estimator_variance(0.3, t.r(), 1000000));
        CHECK_THAT(estimate_duty_cycle(z), WithinAbs(0.3, 3.0 * se));
    }

    CHECK_THROWS_AS(dtmc_simulate({0.0, 1.0}, 10, 1), std::domain_error);  // frozen chain
}

TEST_CASE("estimate_duty_cycle basics") {
    CHECK(estimate_duty_cycle({1, 1, 1}) == 1.0);
    CHECK(estimate_duty_cycle({0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(estimate_duty_cycle({}), std::domain_error);
}

TEST_CASE("estimator_variance: closed form vs Monte Carlo") {
    CHECK_THAT(estimator_variance(0.3, 0.0, 17), WithinRel(0.3 * 0.7 / 17.0, 1e-15));
    for (double r : {-0.5, 0.2, 0.9}) CHECK_THAT(estimator_variance(0.4, r, 1), WithinRel(0.24, 1e-12));
    CHECK_THROWS_AS(estimator_variance(0.3, 1.0, 10), std::domain_error);
    CHECK_THROWS_AS(estimator_variance(1.3, 0.0, 10), std::domain_error);

    // u = 0.3, p00 = 0.9, W = 20: simulated variance matches the formula
    auto t = DtmcTraffic::from_duty_cycle(0.3, 0.9);
    const int reps = 200000, w = 20;
    double s1 = 0.0, s2 = 0.0;
    SplitMix64 master(2718);
    for (int i = 0; i < reps; ++i) {
        double uh = estimate_duty_cycle(dtmc_simulate(t, w, master.next_u64()));
        s1 += uh;
        s2 += uh * uh;
    }
    double mean = s1 / reps;
    double var = s2 / reps - mean * mean;
    CHECK_THAT(var, WithinRel(estimator_variance(0.3, t.r(), w), 0.02));
    CHECK_THAT(mean, WithinAbs(0.3, 4.0 * std::sqrt(estimator_variance(0.3, t.r(), w) / reps)));

    // positive correlation inflates, negative deflates; decreasing in W
    for (double u : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (double r : {-0.5, 0.0, 0.5, 0.9}) {
            double iid = u * (1.0 - u);
            double prev = estimator_variance(u, r, 1);
            CHECK_THAT(prev, WithinRel(iid, 1e-12));
            for (long w2 : {2L, 5L, 20L, 100L, 500L}) {
                double v = estimator_variance(u, r, w2);
                CHECK(v < prev);
                if (r > 0.0) CHECK(v >= iid / static_cast<double>(w2) - 1e-15);
                if (r < 0.0) CHECK(v <= iid / static_cast<double>(w2) + 1e-15);
                prev = v;
            }
        }
    }
}

TEST_CASE("lag_correlation") {
    CHECK_THAT(lag_correlation(0.3, 0.1, 0.7667, 0), WithinRel(0.3, 1e-12));
    // independent chain: E{z_i z_{i+j}} = u^2
    CHECK_THAT(lag_correlation(0.3, 0.3, 0.3, 5), WithinRel(0.09, 1e-12));

    auto t = DtmcTraffic::from_duty_cycle(0.3, 0.9);
    auto z = dtmc_simulate(t, 1000000, 13);
    double acc = 0.0;
    for (std::size_t i = 0; i + 3 < z.size(); ++i) acc += z[i] * z[i + 3];
    acc /= static_cast<double>(z.size() - 3);
    double sigma = std::sqrt(0.25 / static_cast<double>(z.size()));  // crude bound on the se
    CHECK_THAT(acc, WithinAbs(lag_correlation(t.u(), t.p01, t.p11, 3), 5.0 * sigma));

    CHECK_THROWS_AS(lag_correlation(0.3, 0.0, 1.0, 2), std::domain_error);
}

TEST_CASE("throughput_variance_traffic") {
    Scenario s = robust_scenario();
    auto traffic = traffic_of(s);
    Schedule sch = parallel_dp(s).schedule;

    // huge sample counts kill the variance (relative to the working point)
    std::vector<long> huge(s.n_channels(), 2000000);
    double at20 = throughput_variance_traffic(s, sch, std::vector<long>(6, 20), traffic);
    CHECK(throughput_variance_traffic(s, sch, huge, traffic) < 1e-4 * at20);

    // a channel finishing at the slot boundary carries no weight
    Scenario one = s;
    one.channels.resize(1);
    one.traffic.resize(1);
    Schedule edge = Schedule::unsensed(one);
    edge.add_job(0, {0}, 0.0, one.slot_s);
    CHECK(throughput_variance_traffic(one, edge, {5}, {traffic[0]}) == 0.0);

    // decreasing in the shared sample count
    double v20 = throughput_variance_traffic(s, sch, std::vector<long>(6, 20), traffic);
    double v100 = throughput_variance_traffic(s, sch, std::vector<long>(6, 100), traffic);
    double v500 = throughput_variance_traffic(s, sch, std::vector<long>(6, 500), traffic);
    CHECK(v20 > v100);
    CHECK(v100 > v500);

    // single-channel cross-check against simulated estimates
    {
        Scenario sc = one;
        Schedule half = Schedule::unsensed(sc);
        half.add_job(0, {0}, 0.0, sc.slot_s / 2);
        double formula = throughput_variance_traffic(sc, half, {20}, {traffic[0]});
        double coef = 0.5 * capacity(sc.channels[0].bandwidth_hz, sc.channels[0].su_snr);
        const int reps = 200000;
        double s1 = 0.0, s2 = 0.0;
        SplitMix64 master(31415);
        for (int i = 0; i < reps; ++i) {
            double uh = estimate_duty_cycle(dtmc_simulate(traffic[0], 20, master.next_u64()));
            double rhat = coef * (1.0 - uh);
            s1 += rhat;
            s2 += rhat * rhat;
        }
        double mean = s1 / reps;
        CHECK_THAT(s2 / reps - mean * mean, WithinRel(formula, 0.03));
    }
}

TEST_CASE("rop1_solve: threshold scan") {
    Scenario s = robust_scenario();
    auto traffic = traffic_of(s);
    std::vector<long> w(s.n_channels(), 20);

    // no constraint: the plain parallel optimum, allocation (0,2,2,2,2,2)
    auto unconstrained = rop1_solve(s, traffic, w, 1e18);
    CHECK(unconstrained.allocation == Allocation{0, 2, 2, 2, 2, 2});
    CHECK_THAT(unconstrained.expected_bps,
               WithinRel(evaluate_schedule(s, parallel_dp(s).schedule).total_bps, 1e-12));
    CHECK(unconstrained.normalized_loss() == 0.0);

    // a zero threshold rejects every positive-variance strategy
    CHECK_THROWS_AS(rop1_solve(s, traffic, w, 0.0), NoSolutionError);

    // loss is non-increasing in eta
    double prev_loss = 1.0;
    for (double sigma : {400.0, 800.0, 1600.0, 3200.0, 6400.0}) {
        try {
            auto rep = rop1_solve(s, traffic, w, sigma * sigma);
            CHECK(rep.normalized_loss() <= prev_loss + 1e-12);
            prev_loss = rep.normalized_loss();
        } catch (const NoSolutionError&) {
            CHECK(prev_loss == 1.0);
        }
    }

    Scenario big = s;
    big.channels.assign(9, s.channels[0]);
    big.traffic.assign(9, s.traffic[0]);
    CHECK_THROWS_AS(rop1_solve(big, traffic_of(big), std::vector<long>(9, 20), 1.0), SizeGuardError);
}

TEST_CASE("rop_min_samples and rop_min_variance") {
    Scenario s = robust_scenario();
    auto traffic = traffic_of(s);
    Schedule sch = parallel_dp(s).schedule;

    // single channel: both designs coincide
    {
        Scenario one = s;
        one.channels.resize(1);
        one.traffic.resize(1);
        Schedule e = Schedule::unsensed(one);
        e.add_job(0, {0}, 0.0, one.slot_s / 3);
        auto w1 = rop_min_samples(SampleDesign::Uniform, one, e, {traffic[0]}, 1e5);
        auto w2 = rop_min_samples(SampleDesign::PerChannel, one, e, {traffic[0]}, 1e5);
        CHECK(w1 == w2);
    }

    // per-channel never needs more than uniform; both meet the threshold
    for (double sigma : {2000.0, 3000.0, 5000.0}) {
        auto w1 = rop_min_samples(SampleDesign::Uniform, s, sch, traffic, sigma * sigma);
        auto w2 = rop_min_samples(SampleDesign::PerChannel, s, sch, traffic, sigma * sigma);
        long t1 = 0, t2 = 0;
        for (long x : w1) t1 += x;
        for (long x : w2) t2 += x;
        CHECK(t2 <= t1);
        CHECK(throughput_variance_traffic(s, sch, w2, traffic) <= sigma * sigma);
        // minimality of the uniform count
        std::vector<long> less(w1.size(), w1[0] - 1);
        if (w1[0] > 1) CHECK(throughput_variance_traffic(s, sch, less, traffic) > sigma * sigma);

        // budget form retraces the same allocation (the two problems are
        // solved by the same marginal path)
        auto [w3, v3] = rop_min_variance(s, sch, traffic, t2);
        CHECK(w3 == w2);
        CHECK_THAT(v3, WithinRel(throughput_variance_traffic(s, sch, w2, traffic), 1e-12));
    }

    // two-channel toy matches an exhaustive grid
    {
        Scenario toy = s;
        toy.channels.resize(2);
        toy.traffic.resize(2);
        std::vector<DtmcTraffic> tt{traffic[0], traffic[1]};
        Schedule e = Schedule::unsensed(toy);
        e.add_job(0, {0}, 0.0, toy.slot_s / 4);
        e.add_job(1, {1}, 0.0, toy.slot_s / 2);
        double eta = 2.0e5;
        auto greedy = rop_min_samples(SampleDesign::PerChannel, toy, e, tt, eta);
        long best_total = 1L << 40;
        for (long a = 1; a <= 200; ++a)
            for (long b = 1; b <= 200; ++b)
                if (throughput_variance_traffic(toy, e, {a, b}, tt) <= eta)
                    best_total = std::min(best_total, a + b);
        CHECK(greedy[0] + greedy[1] == best_total);
    }

    // minimum-variance form: the budget is forced at one per channel
    auto [w_min, v_min] = rop_min_variance(s, sch, traffic, static_cast<long>(s.n_channels()));
    CHECK(w_min == std::vector<long>(s.n_channels(), 1));
    CHECK_THROWS_AS(rop_min_variance(s, sch, traffic, 3), InfeasibleError);
    CHECK_THROWS_AS(rop_min_samples(SampleDesign::PerChannel, s, sch, traffic, 0.0), InfeasibleError);

    // two-channel minimum-variance toy matches an exhaustive budget split
    {
        Scenario toy = s;
        toy.channels.resize(2);
        toy.traffic.resize(2);
        std::vector<DtmcTraffic> tt{traffic[0], traffic[1]};
        Schedule e = Schedule::unsensed(toy);
        e.add_job(0, {0}, 0.0, toy.slot_s / 4);
        e.add_job(1, {1}, 0.0, toy.slot_s / 2);
        for (long budget : {7L, 23L, 61L}) {
            auto [wg, vg] = rop_min_variance(toy, e, tt, budget);
            double best = std::numeric_limits<double>::infinity();
            for (long a = 1; a < budget; ++a)
                best = std::min(best, throughput_variance_traffic(toy, e, {a, budget - a}, tt));
            CHECK_THAT(vg, WithinRel(best, 1e-12));
        }
    }
}

TEST_CASE("expint_e1: series, continued fraction, quadrature") {
    CHECK_THAT(expint_e1(1.0), WithinAbs(0.2193839, 1e-7));
    CHECK_THAT(expint_e1(0.1), WithinAbs(1.8229240, 1e-7));
    for (double x : {0.01, 0.1, 0.5, 0.999, 1.0001, 2.0, 7.5, 30.0})
        CHECK_THAT(expint_e1(x), WithinRel(oracles::e1_quad(x), 1e-10));
    CHECK(expint_e1(50.0) < 1e-23);
    CHECK_THROWS_AS(expint_e1(0.0), std::domain_error);
    CHECK_THROWS_AS(expint_e1(-1.0), std::domain_error);
}

TEST_CASE("trunc_exp_inverse_moments: closed forms vs quadrature and limits") {
    // bounds (-15, -1) dB with unit rate
    {
        TruncExpSnr d{1.0, db_to_linear(-15.0), db_to_linear(-1.0)};
        auto m = trunc_exp_inverse_moments(d);
        auto q = oracles::trunc_exp_moments_quad(d.beta, d.phi_l, d.phi_u);
        CHECK_THAT(m.e_inv, WithinRel(q.e_inv, 1e-8));
        CHECK_THAT(m.e_inv2, WithinRel(q.e_inv2, 1e-8));
        CHECK_THAT(m.var_inv, WithinRel(q.e_inv2 - q.e_inv * q.e_inv, 1e-6));
    }

    // nearly-flat density: E{1/g} -> ln(hi/lo)/(hi-lo)
    {
        TruncExpSnr d{1e-6, 0.2, 0.8};
        auto m = trunc_exp_inverse_moments(d);
        CHECK_THAT(m.e_inv, WithinRel(std::log(0.8 / 0.2) / 0.6, 1e-4));
    }

    // collapsing interval: point mass at the lower bound
    {
        TruncExpSnr d{1.0, 0.4, 0.4 + 1e-6};
        auto m = trunc_exp_inverse_moments(d);
        CHECK_THAT(m.e_inv, WithinRel(1.0 / 0.4, 1e-4));
        CHECK_THAT(m.e_gamma, WithinRel(0.4, 1e-4));
    }

    // sampler hits the analytic mean
    {
        TruncExpSnr d = trunc_exp_from_mean_db(-5.0, -15.0, 0.0);
        auto m = trunc_exp_inverse_moments(d);
        SplitMix64 rng(99);
        double acc = 0.0;
        const int n = 400000;
        for (int i = 0; i < n; ++i) acc += trunc_exp_sample(d, rng);
        CHECK_THAT(acc / n, WithinRel(m.e_gamma, 5e-3));
    }

    CHECK_THROWS_AS(trunc_exp_inverse_moments({0.0, 0.1, 0.5}), std::domain_error);
    CHECK_THROWS_AS(trunc_exp_inverse_moments({1.0, 0.5, 0.1}), std::domain_error);
}

TEST_CASE("rop4_solve: degenerate distribution and ladder") {
    Scenario s = robust_scenario();

    // near point mass: decisions coincide with the deterministic optimizer
    {
        double g0 = db_to_linear(-5.0);
        TruncExpSnr point{1.0, g0 * (1.0 - 1e-9), g0 * (1.0 + 1e-9)};
        auto rep = rop4_solve(s, point, 1e18);
        CHECK(rep.allocation == parallel_dp(s).allocation);
        CHECK(rep.normalized_loss() == 0.0);
    }

    // unconstrained selection has zero loss; loss non-increasing in eta and
    // piecewise constant (few distinct levels over a fine grid)
    auto rep_inf = rop4_solve(s, s.snr_dist, 1e18);
    CHECK(rep_inf.normalized_loss() == 0.0);

    double prev = 2.0;
    std::vector<double> losses;
    for (int i = 0; i <= 40; ++i) {
        double sigma = 800.0 + 120.0 * i;
        try {
            auto rep = rop4_solve(s, s.snr_dist, sigma * sigma);
            CHECK(rep.normalized_loss() <= prev + 1e-12);
            prev = rep.normalized_loss();
            losses.push_back(rep.normalized_loss());
        } catch (const NoSolutionError&) {
            CHECK(losses.empty());
        }
    }
    std::vector<double> distinct = losses;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    CHECK(distinct.size() >= 2);
    CHECK(distinct.size() * 2 <= losses.size());  // a step function, not a smooth slope

    // SNR uncertainty relaxes more slowly than traffic uncertainty: at the
    // threshold where the traffic problem first reaches zero loss, the SNR
    // problem still pays a positive loss
    {
        auto traffic = traffic_of(s);
        std::vector<long> w(s.n_channels(), 20);
        double eta_zero = rop1_solve(s, traffic, w, 1e18).variance;  // optimum's own variance
        CHECK(rop1_solve(s, traffic, w, eta_zero).normalized_loss() == 0.0);
        CHECK(rop4_solve(s, s.snr_dist, eta_zero).normalized_loss() > 0.0);
    }
}
