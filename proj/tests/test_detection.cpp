#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "specsense/detection.hpp"

using namespace specsense;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("q_func: symmetry, tails, quadrature agreement") {
    CHECK(q_func(0.0) == 0.5);
    CHECK(q_func(40.0) <= 1e-300);
    CHECK_THAT(q_func(1.0), WithinAbs(0.158655, 1e-6));
    CHECK_THAT(q_func(1.0), WithinRel(oracles::q_tail_quad(1.0), 1e-13));
    for (double x : {-3.0, -1.2, -0.4, 0.3, 0.9, 2.1, 4.5}) {
        CHECK_THAT(q_func(x), WithinRel(oracles::q_tail_quad(x), 1e-12));
        CHECK_THAT(q_func(x) + q_func(-x), WithinAbs(1.0, 1e-15));
    }
    double prev = q_func(-6.0);
    for (double x = -5.5; x <= 6.0; x += 0.5) {
        CHECK(q_func(x) < prev);
        prev = q_func(x);
    }
}

TEST_CASE("q_inv: anchors, round trip, domain") {
    CHECK_THAT(q_inv(0.5), WithinAbs(0.0, 1e-12));
    // bisection on the quadrature oracle gives 1.0364334 and -1.2815516
    CHECK_THAT(q_inv(0.15), WithinAbs(1.0364333894938, 1e-9));
    CHECK_THAT(q_inv(0.15), WithinAbs(oracles::q_inv_quad(0.15), 1e-9));
    CHECK_THAT(q_inv(0.9), WithinAbs(-1.2815515655446, 1e-9));
    CHECK_THAT(q_inv(0.9), WithinAbs(oracles::q_inv_quad(0.9), 1e-9));

    for (double p : {1e-12, 1e-6, 0.01, 0.15, 0.35, 0.5, 0.77, 0.97, 1.0 - 1e-9})
        CHECK_THAT(q_func(q_inv(p)), WithinRel(p, 1e-12));
    // Round trip at 1e-10 where the tail probability itself carries that
    // much information. Deep in the left tail q_func(x) rounds to within one
    // ulp of 1, which alone perturbs the recovered x by ~ulp(1)/pdf(x); the
    // check there is against that representability floor instead.
    for (double x = -8.0; x <= 8.0; x += 0.25) {
        double floor_tol = 4.0 * 1.2e-16 / oracles::normal_pdf(x);
        CHECK_THAT(q_inv(q_func(x)), WithinAbs(x, std::max(1e-10, floor_tol)));
    }
    for (double x = -4.5; x <= 8.0; x += 0.25) CHECK_THAT(q_inv(q_func(x)), WithinAbs(x, 1e-10));

    CHECK_THROWS_AS(q_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(q_inv(1.0), std::domain_error);
    CHECK_THROWS_AS(q_inv(-0.2), std::domain_error);
}

TEST_CASE("sensing_time_single: anchors and structure") {
    // 5 kHz sampling, -5 dB SNR, targets (0.15, 0.9): about 3.40 ms
    double tau = sensing_time_single(0.15, 0.9, db_to_linear(-5.0), 5000.0);
    CHECK_THAT(tau, WithinAbs(3.40e-3, 0.05e-3));
    CHECK_THAT(tau, WithinRel(3.398218e-3, 1e-6));

    // oracle value: [Qinv(0.1) - Qinv(0.9)]^2 / 1000 with quadrature inverses
    double d = oracles::q_inv_quad(0.1) - oracles::q_inv_quad(0.9);
    CHECK_THAT(sensing_time_single(0.1, 0.9, 1.0, 1000.0), WithinRel(d * d / 1000.0, 1e-8));
    CHECK_THAT(sensing_time_single(0.1, 0.9, 1.0, 1000.0), WithinRel(6.569498e-3, 1e-6));

    // numerator vanishes as pd -> pf+
    CHECK(sensing_time_single(0.3, 0.3 + 1e-9, 1.0, 1000.0) < 1e-15);

    // decreasing in gamma, increasing in pd; tau * gamma invariant
    double base = sensing_time_single(0.1, 0.9, 0.5, 1000.0);
    CHECK(sensing_time_single(0.1, 0.9, 1.0, 1000.0) < base);
    CHECK(sensing_time_single(0.1, 0.95, 0.5, 1000.0) > base);
    double ref = sensing_time_single(0.1, 0.9, 1.0, 1000.0);
    for (double g : {0.03, 0.2, 0.7, 2.5})
        CHECK_THAT(sensing_time_single(0.1, 0.9, g, 1000.0) * g, WithinRel(ref, 1e-12));

    CHECK_THROWS_AS(sensing_time_single(0.9, 0.1, 1.0, 1000.0), std::domain_error);
    CHECK_THROWS_AS(sensing_time_single(0.5, 0.5, 1.0, 1000.0), std::domain_error);
    CHECK_THROWS_AS(sensing_time_single(0.1, 0.9, 0.0, 1000.0), std::domain_error);
    CHECK_THROWS_AS(sensing_time_single(0.1, 0.9, 1.0, 0.0), std::domain_error);
}

TEST_CASE("coop_sensing_time_hom: fusion splits") {
    SensingRequirements r_or{0.9, 0.15, 5000.0, Fusion::OR};
    SensingRequirements r_and{0.9, 0.15, 5000.0, Fusion::AND};
    double g = db_to_linear(-5.0);

    // one cooperating sensor is plain single-sensor sensing
    CHECK_THAT(coop_sensing_time_hom(r_or, g, 1),
               WithinRel(sensing_time_single(0.15, 0.9, g, 5000.0), 1e-14));
    CHECK_THAT(coop_sensing_time_hom(r_and, g, 1),
               WithinRel(sensing_time_single(0.15, 0.9, g, 5000.0), 1e-14));

    // three OR-fused sensors land near 1.85 ms
    CHECK_THAT(coop_sensing_time_hom(r_or, g, 3), WithinAbs(1.85e-3, 0.1e-3));
    CHECK_THAT(coop_sensing_time_hom(r_or, g, 3), WithinRel(1.846954e-3, 1e-6));

    // AND pair against an independent search: smallest tau whose per-sensor
    // operating points (quadrature inverses) meet the cumulative targets
    {
        double pf_each = std::sqrt(0.15);
        double x = oracles::q_inv_quad(pf_each);
        double lo = 0.0, hi = 0.1;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            double pd = oracles::q_tail_quad(x - std::sqrt(mid * 5000.0 * g));
            (pd * pd >= 0.9 ? hi : lo) = mid;
        }
        CHECK_THAT(coop_sensing_time_hom(r_and, g, 2), WithinRel(hi, 1e-8));
    }

    // gain of each extra sensor shrinks monotonically (both rules)
    for (Fusion f : {Fusion::OR, Fusion::AND}) {
        SensingRequirements r{0.9, 0.15, 5000.0, f};
        std::vector<double> tau;
        for (int n = 1; n <= 21; ++n) tau.push_back(coop_sensing_time_hom(r, g, n));
        for (std::size_t n = 0; n + 2 < tau.size(); ++n)
            CHECK(tau[n] - tau[n + 1] > tau[n + 1] - tau[n + 2]);
    }

    CHECK_THROWS_AS(coop_sensing_time_hom(r_or, g, 0), std::domain_error);
    SensingRequirements swapped{0.15, 0.9, 5000.0, Fusion::OR};
    CHECK_THROWS_AS(coop_sensing_time_hom(swapped, g, 1), std::domain_error);
}

TEST_CASE("het_coop_sensing_time: specializations and thresholds") {
    SensingRequirements r{0.9, 0.15, 4000.0, Fusion::AND};
    double g1 = db_to_linear(-5.0);
    const double noise = 1e-5;

    // products collapse for one sensor
    auto single = het_coop_sensing_time({g1}, r, noise);
    CHECK_THAT(single.tau_s, WithinRel(sensing_time_single(0.15, 0.9, g1, 4000.0), 1e-6));

    // two equal sensors match the homogeneous AND formula
    auto pair = het_coop_sensing_time({g1, g1}, r, noise);
    CHECK_THAT(pair.tau_s, WithinRel(coop_sensing_time_hom(r, g1, 2), 1e-6));
    REQUIRE(pair.thresholds.size() == 2);
    REQUIRE(pair.subset == std::vector<int>{0, 1});

    // thresholds reproduce the targets through the matched-filter relations
    {
        std::vector<double> snrs{g1, db_to_linear(-4.0)};
        auto sol = het_coop_sensing_time(snrs, r, noise);
        double qf = 1.0, qd = 1.0;
        for (std::size_t i = 0; i < snrs.size(); ++i) {
            double scale = noise * std::sqrt(sol.tau_s * 4000.0 * snrs[i]);
            double x = sol.thresholds[i] / scale;
            qf *= q_func(x);
            qd *= q_func(x - std::sqrt(sol.tau_s * 4000.0 * snrs[i]));
        }
        CHECK_THAT(qf, WithinAbs(0.15, 1e-6));
        CHECK(qd >= 0.9 - 1e-6);
        CHECK_THAT(qd, WithinAbs(0.9, 1e-6));
    }

    SensingRequirements r_or{0.9, 0.15, 4000.0, Fusion::OR};
    CHECK_THROWS_AS(het_coop_sensing_time({g1}, r_or, noise), std::domain_error);
    HetSolverOptions tight;
    tight.tau_cap_s = 1e-9;
    CHECK_THROWS_AS(het_coop_sensing_time({g1}, r, noise, tight), InfeasibleError);
}

TEST_CASE("het_optimal_subset: prefix search matches exhaustive") {
    SensingRequirements r{0.9, 0.15, 4000.0, Fusion::AND};
    const double noise = 1e-5;

    auto one = het_optimal_subset({db_to_linear(-5.0)}, r, noise);
    CHECK(one.subset == std::vector<int>{0});

    // a -20 dB partner never joins a -5 dB sensor
    auto keep_best = het_optimal_subset({db_to_linear(-5.0), db_to_linear(-20.0)}, r, noise);
    CHECK(keep_best.subset == std::vector<int>{0});

    // exhaustive subset search at N <= 5 over random draws
    SplitMix64 rng(2024);
    for (int it = 0; it < 200; ++it) {
        int n = 2 + static_cast<int>(rng.next_u64() % 4);
        std::vector<double> snrs;
        for (int i = 0; i < n; ++i) snrs.push_back(db_to_linear(-12.0 + 10.0 * rng.next_double()));
        auto best = het_optimal_subset(snrs, r, noise);

        double brute = std::numeric_limits<double>::infinity();
        for (unsigned mask = 1; mask < (1u << n); ++mask) {
            std::vector<double> sub;
            for (int i = 0; i < n; ++i)
                if (mask & (1u << i)) sub.push_back(snrs[static_cast<std::size_t>(i)]);
            brute = std::min(brute, het_coop_sensing_time(sub, r, noise).tau_s);
        }
        CHECK_THAT(best.tau_s, WithinRel(brute, 1e-7));

        // never beaten by any descending-SNR prefix
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return snrs[static_cast<std::size_t>(a)] > snrs[static_cast<std::size_t>(b)];
        });
        std::vector<double> prefix;
        for (int idx : order) {
            prefix.push_back(snrs[static_cast<std::size_t>(idx)]);
            CHECK(best.tau_s <= het_coop_sensing_time(prefix, r, noise).tau_s * (1.0 + 1e-9));
        }
    }
}
