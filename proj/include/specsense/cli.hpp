#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specsense/common.hpp"
#include "specsense/het_strategies.hpp"
#include "specsense/model.hpp"
#include "specsense/robust.hpp"
#include "specsense/scenario_io.hpp"
#include "specsense/strategies.hpp"

namespace specsense::cli {

inline constexpr const char* kCsvHeader =
    "strategy,fusion,param,value,throughput_bps,variance,samples_total,runtime_ms,seed,error";

/// One output row; optional fields print as empty CSV cells.
struct ResultRow {
    std::string strategy;
    std::string fusion;
    std::string param;
    std::optional<double> value;
    std::optional<double> throughput_bps;
    std::optional<double> variance;
    std::optional<long> samples_total;
    std::optional<double> runtime_ms;
    std::optional<std::uint64_t> seed;
    std::string error;
};

inline std::string fmt_num(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << "\n";
    for (const auto& r : rows) {
        out << r.strategy << ',' << r.fusion << ',' << r.param << ',';
        if (r.value) out << fmt_num(*r.value);
        out << ',';
        if (r.throughput_bps) out << fmt_num(*r.throughput_bps);
        out << ',';
        if (r.variance) out << fmt_num(*r.variance);
        out << ',';
        if (r.samples_total) out << *r.samples_total;
        out << ',';
        if (r.runtime_ms) out << fmt_num(*r.runtime_ms);
        out << ',';
        if (r.seed) out << *r.seed;
        out << ',' << r.error << "\n";
    }
}

inline void write_json_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j["strategy"] = r.strategy;
        j["fusion"] = r.fusion;
        j["param"] = r.param;
        if (r.value) j["value"] = *r.value;
        if (r.throughput_bps) j["throughput_bps"] = *r.throughput_bps;
        if (r.variance) j["variance"] = *r.variance;
        if (r.samples_total) j["samples_total"] = *r.samples_total;
        if (r.runtime_ms) j["runtime_ms"] = *r.runtime_ms;
        if (r.seed) j["seed"] = *r.seed;
        if (!r.error.empty()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Strategy registry
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names = {
        "seq",        "par-dp",         "par-gh",      "par-relax",   "seq-par-dp",
        "seq-par-gh", "iter-par",       "het-seq-opt", "het-seq-avg", "het-par-dp",
        "het-par-dpsim", "het-par-avg", "het-seq-par-dp", "het-seq-par-gh"};
    return names;
}

inline void require_known_strategy(const std::string& name) {
    const auto& names = strategy_names();
    if (std::find(names.begin(), names.end(), name) != names.end()) return;
    std::string msg = "unknown strategy '" + name + "'; valid names:";
    for (const auto& n : names) msg += " " + n;
    throw std::invalid_argument(msg);
}

struct StrategyRun {
    Schedule schedule;
    double throughput_bps = 0.0;
    std::optional<Allocation> allocation;
    std::optional<std::vector<double>> real_allocation;  // relaxation only
};

inline StrategyRun run_strategy(const std::string& name, const Scenario& s) {
    StrategyRun r;
    r.schedule = Schedule::unsensed(s);
    if (name == "seq") {
        r.schedule = sequential_schedule(s);
    } else if (name == "par-dp") {
        auto res = parallel_dp(s);
        r.schedule = std::move(res.schedule);
        r.allocation = std::move(res.allocation);
    } else if (name == "par-gh") {
        auto res = parallel_greedy(s);
        r.schedule = std::move(res.schedule);
        r.allocation = std::move(res.allocation);
    } else if (name == "par-relax") {
        auto res = parallel_relaxed(s);
        r.real_allocation = std::move(res.allocation);
        r.throughput_bps = res.bound_bps;
        return r;  // a bound, not a realizable schedule
    } else if (name == "seq-par-dp") {
        r.schedule = seqpar_dp(s);
    } else if (name == "seq-par-gh") {
        r.schedule = seqpar_greedy(s);
    } else if (name == "iter-par") {
        r.schedule = iterative_parallel(s);
    } else if (name == "het-seq-opt") {
        r.schedule = het_sequential(s, HetSeqVariant::Opt);
    } else if (name == "het-seq-avg") {
        r.schedule = het_sequential(s, HetSeqVariant::Avg);
    } else if (name == "het-par-dp") {
        r.schedule = het_parallel(s, HetParVariant::DpOpt);
    } else if (name == "het-par-dpsim") {
        r.schedule = het_parallel(s, HetParVariant::DpSim);
    } else if (name == "het-par-avg") {
        r.schedule = het_parallel(s, HetParVariant::AvgGreedy);
    } else if (name == "het-seq-par-dp") {
        r.schedule = het_seqpar(s, HetSeqParVariant::DpOpt);
    } else if (name == "het-seq-par-gh") {
        r.schedule = het_seqpar(s, HetSeqParVariant::Heuristic);
    } else {
        require_known_strategy(name);
    }
    r.throughput_bps = evaluate_schedule(s, r.schedule).total_bps;
    return r;
}

// ---------------------------------------------------------------------------
// Option helpers
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string scenario_path;
    std::string out_format = "csv";
    bool quiet = false;
    bool timings = false;
};

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

/// Parses "a:b:n" as an n-point inclusive grid.
inline std::vector<double> parse_grid(const std::string& spec) {
    double a, b;
    int n;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || (n > 1 && b <= a))
        throw std::invalid_argument("grid must be a:b:n with b > a and n >= 1: " + spec);
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
    return v;
}

/// Parses "name=a:b:step" as an inclusive arithmetic sweep.
struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
};

inline SweepSpec parse_sweep(const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--vary expects name=a:b:step");
    SweepSpec sw;
    sw.parameter = spec.substr(0, eq);
    const std::vector<std::string> known = {"n_sensors", "n_channels", "qd", "eta", "snr_mean", "samples"};
    if (std::find(known.begin(), known.end(), sw.parameter) == known.end()) {
        std::string msg = "unknown sweep parameter '" + sw.parameter + "'; valid:";
        for (const auto& k : known) msg += " " + k;
        throw std::invalid_argument(msg);
    }
    double a, b, step;
    char c1, c2;
    std::istringstream is(spec.substr(eq + 1));
    if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0 || b < a)
        throw std::invalid_argument("--vary expects name=a:b:step with step > 0 and b >= a");
    for (double v = a; v <= b + 1e-9 * step; v += step) sw.values.push_back(v);
    if (sw.values.empty()) throw std::invalid_argument("sweep produced no values");
    return sw;
}

/// Applies one swept parameter to a scenario copy.
inline Scenario apply_sweep_value(const Scenario& base, const std::string& param, double value) {
    Scenario s = base;
    if (param == "n_sensors") {
        s.n_sensors = static_cast<int>(std::llround(value));
        for (auto& c : s.channels)
            if (c.pu_snr.size() > 1) c.pu_snr.resize(static_cast<std::size_t>(s.n_sensors), c.pu_snr.back());
    } else if (param == "n_channels") {
        int m = static_cast<int>(std::llround(value));
        if (m < 1) throw std::invalid_argument("n_channels must be >= 1");
        ChannelSpec tmpl = s.channels.front();
        TrafficModel traffic_tmpl = s.traffic.empty() ? TrafficModel{} : s.traffic.front();
        s.channels.assign(static_cast<std::size_t>(m), tmpl);
        if (s.has_traffic) s.traffic.assign(static_cast<std::size_t>(m), traffic_tmpl);
    } else if (param == "qd") {
        s.qd = value;
    } else if (param == "snr_mean") {
        for (auto& c : s.channels)
            for (auto& g : c.pu_snr) g = db_to_linear(value);
    } else if (param == "samples") {
        s.robust.samples = static_cast<long>(std::llround(value));
        s.has_robust = true;
    } else if (param == "eta") {
        s.robust.eta = value;
        s.has_robust = true;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_plan(const CommonOpts& opts, const std::string& strategy,
                    const std::string& fusion_override, std::ostream& out) {
    Scenario s = load_scenario_file(opts.scenario_path);
    if (!fusion_override.empty()) s.fusion = fusion_from_string(fusion_override);
    auto start = std::chrono::steady_clock::now();
    StrategyRun run = run_strategy(strategy, s);
    double ms = elapsed_ms(start);

    if (!opts.quiet) {
        out << "strategy: " << strategy << "  fusion: " << to_string(s.fusion) << "\n";
        if (run.allocation) {
            out << "allocation:";
            for (int k : *run.allocation) out << ' ' << k;
            out << "\n";
        }
        if (run.real_allocation) {
            out << "relaxed allocation:";
            for (double k : *run.real_allocation) out << ' ' << fmt_num(k);
            out << "\n";
        }
        for (const auto& job : run.schedule.jobs) {
            out << "  channel " << job.channel << "  sensors";
            for (int u : job.sensors) out << ' ' << u;
            out << "  start " << fmt_num(job.start_s * 1e3) << " ms  duration "
                << fmt_num(job.duration_s * 1e3) << " ms\n";
        }
        out << "throughput: " << fmt_num(run.throughput_bps) << " bits/s\n";
    }

    ResultRow row;
    row.strategy = strategy;
    row.fusion = to_string(s.fusion);
    row.param = "plan";
    row.throughput_bps = run.throughput_bps;
    if (opts.timings) row.runtime_ms = ms;
    std::vector<ResultRow> rows{row};
    if (opts.out_format == "json") {
        nlohmann::json j;
        j["strategy"] = strategy;
        j["fusion"] = to_string(s.fusion);
        j["throughput_bps"] = run.throughput_bps;
        if (run.allocation) j["allocation"] = *run.allocation;
        if (run.real_allocation) j["allocation"] = *run.real_allocation;
        j["jobs"] = nlohmann::json::array();
        for (const auto& job : run.schedule.jobs)
            j["jobs"].push_back({{"channel", job.channel},
                                 {"sensors", job.sensors},
                                 {"start_s", job.start_s},
                                 {"duration_s", job.duration_s}});
        j["completion_s"] = run.schedule.completion;
        out << j.dump(2) << "\n";
    } else {
        write_csv(out, rows);
    }
    return 0;
}

inline int cmd_sweep(const CommonOpts& opts, const std::string& vary,
                     const std::vector<std::string>& strategies, const std::string& fusion_override,
                     std::ostream& out) {
    if (strategies.empty()) throw std::invalid_argument("sweep needs a nonempty strategy list");
    Scenario base = load_scenario_file(opts.scenario_path);
    if (!fusion_override.empty()) base.fusion = fusion_from_string(fusion_override);
    SweepSpec sweep = parse_sweep(vary);
    for (const auto& name : strategies) require_known_strategy(name);

    struct Point {
        std::vector<ResultRow> rows;
    };
    std::vector<std::future<Point>> futures;
    for (double value : sweep.values) {
        futures.push_back(std::async(std::launch::async, [&, value]() {
            Point p;
            Scenario s = apply_sweep_value(base, sweep.parameter, value);
            for (const auto& name : strategies) {
                ResultRow row;
                row.strategy = name;
                row.fusion = to_string(s.fusion);
                row.param = sweep.parameter;
                row.value = value;
                auto start = std::chrono::steady_clock::now();
                try {
                    StrategyRun run = run_strategy(name, s);
                    row.throughput_bps = run.throughput_bps;
                    if (s.has_traffic && !s.traffic.empty() && name != "par-relax") {
                        std::vector<DtmcTraffic> traffic;
                        for (const auto& t : s.traffic) traffic.push_back({t.p01, t.p11});
                        std::vector<long> w(s.n_channels(), s.robust.samples);
                        row.variance = throughput_variance_traffic(s, run.schedule, w, traffic);
                        row.samples_total = static_cast<long>(s.n_channels()) * s.robust.samples;
                    }
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                if (opts.timings) row.runtime_ms = elapsed_ms(start);
                p.rows.push_back(std::move(row));
            }
            return p;
        }));
    }
    std::vector<ResultRow> rows;
    for (auto& f : futures)
        for (auto& r : f.get().rows) rows.push_back(std::move(r));
    if (opts.out_format == "json")
        write_json_rows(out, rows);
    else
        write_csv(out, rows);
    return 0;
}

inline int cmd_simulate(const CommonOpts& opts, long runs, std::uint64_t seed, bool het,
                        std::vector<std::string> strategies, std::ostream& out) {
    if (runs < 1) throw std::invalid_argument("--runs must be >= 1");
    Scenario base = load_scenario_file(opts.scenario_path);
    if (!base.has_snr_dist)
        throw std::invalid_argument("simulate needs an snr_dist block in the scenario file");
    if (strategies.empty()) strategies.push_back(het ? "het-seq-opt" : "seq");

    // Per-run seeds derived once, so aggregation order never depends on
    // scheduling.
    std::vector<std::uint64_t> run_seeds(static_cast<std::size_t>(runs));
    SplitMix64 master(seed);
    for (auto& rs : run_seeds) rs = master.next_u64();

    auto draw_scenario = [&](std::uint64_t run_seed) {
        Scenario s = base;
        SplitMix64 rng(run_seed);
        for (auto& c : s.channels) {
            if (het) {
                c.pu_snr.assign(static_cast<std::size_t>(s.n_sensors), 0.0);
                for (auto& g : c.pu_snr) g = trunc_exp_sample(base.snr_dist, rng);
            } else {
                c.pu_snr.assign(1, trunc_exp_sample(base.snr_dist, rng));
            }
        }
        return s;
    };

    std::vector<std::future<std::vector<double>>> futures;
    const long chunk = std::max<long>(1, runs / 8);
    for (long begin = 0; begin < runs; begin += chunk) {
        long end = std::min(runs, begin + chunk);
        futures.push_back(std::async(std::launch::async, [&, begin, end]() {
            std::vector<double> vals;
            for (long i = begin; i < end; ++i) {
                Scenario s = draw_scenario(run_seeds[static_cast<std::size_t>(i)]);
                for (const auto& name : strategies)
                    vals.push_back(run_strategy(name, s).throughput_bps);
            }
            return vals;
        }));
    }
    std::vector<double> all;
    for (auto& f : futures)
        for (double v : f.get()) all.push_back(v);

    std::vector<ResultRow> rows;
    for (std::size_t si = 0; si < strategies.size(); ++si) {
        double sum = 0.0, sum2 = 0.0;
        for (long i = 0; i < runs; ++i) {
            double v = all[static_cast<std::size_t>(i) * strategies.size() + si];
            sum += v;
            sum2 += v * v;
        }
        double mean = sum / static_cast<double>(runs);
        ResultRow row;
        row.strategy = strategies[si];
        row.fusion = to_string(base.fusion);
        row.param = "runs";
        row.value = static_cast<double>(runs);
        row.throughput_bps = mean;
        row.seed = seed;
        if (runs > 1) {
            double svar = (sum2 - sum * mean) / static_cast<double>(runs - 1);
            row.variance = svar / static_cast<double>(runs);  // variance of the mean
            if (!opts.quiet) {
                double ci = 1.6448536269514722 * std::sqrt(*row.variance);  // 90% normal CI
                out << strategies[si] << ": mean " << fmt_num(mean) << " bits/s +- " << fmt_num(ci)
                    << " (90% CI, " << runs << " runs)\n";
            }
        } else if (!opts.quiet) {
            out << strategies[si] << ": mean " << fmt_num(mean)
                << " bits/s (single run; CI not applicable)\n";
        }
        rows.push_back(std::move(row));
    }
    if (opts.out_format == "json")
        write_json_rows(out, rows);
    else
        write_csv(out, rows);
    return 0;
}

inline int cmd_robust(const CommonOpts& opts, const std::string& mode, const std::string& eta_grid,
                      const std::string& sigma_grid, long budget, int design, long samples,
                      std::ostream& out) {
    Scenario s = load_scenario_file(opts.scenario_path);
    if (!s.has_traffic && (mode == "rop1" || mode == "rop2" || mode == "rop3"))
        throw std::invalid_argument(mode + " needs a traffic block in the scenario file");
    std::vector<DtmcTraffic> traffic;
    for (const auto& t : s.traffic) traffic.push_back({t.p01, t.p11});
    if (samples <= 0) samples = s.robust.samples;

    std::vector<ResultRow> rows;
    bool any_solution = false;

    auto loss_rows_for = [&](const std::string& label,
                             const std::function<RopReport(double)>& solve,
                             const std::vector<double>& etas, std::optional<long> samp_total) {
        ResultRow max_row;
        max_row.strategy = label;
        max_row.fusion = to_string(s.fusion);
        max_row.param = "r_max";
        max_row.value = 0.0;
        bool have_max = false;
        std::vector<ResultRow> local;
        for (double eta : etas) {
            ResultRow row;
            row.strategy = label;
            row.fusion = to_string(s.fusion);
            row.param = "eta";
            row.value = eta;
            try {
                RopReport rep = solve(eta);
                row.throughput_bps = rep.expected_bps;
                row.variance = rep.variance;
                row.samples_total = samp_total;
                if (!have_max) {
                    max_row.throughput_bps = rep.unconstrained_bps;
                    have_max = true;
                }
                any_solution = true;
                if (!opts.quiet)
                    out << label << " eta=" << fmt_num(eta) << "  loss=" << fmt_num(rep.normalized_loss())
                        << "  throughput=" << fmt_num(rep.expected_bps) << "\n";
            } catch (const NoSolutionError&) {
                row.error = "no-solution";
                if (!opts.quiet) out << label << " eta=" << fmt_num(eta) << "  no solution\n";
            }
            local.push_back(std::move(row));
        }
        if (have_max) rows.push_back(std::move(max_row));
        for (auto& r : local) rows.push_back(std::move(r));
    };

    if (mode == "rop1") {
        if (eta_grid.empty()) throw std::invalid_argument("rop1 needs --eta-grid a:b:n");
        std::vector<long> w(s.n_channels(), samples);
        loss_rows_for(
            "rop1", [&](double eta) { return rop1_solve(s, traffic, w, eta); }, parse_grid(eta_grid),
            static_cast<long>(s.n_channels()) * samples);
    } else if (mode == "rop4") {
        if (eta_grid.empty()) throw std::invalid_argument("rop4 needs --eta-grid a:b:n");
        if (!s.has_snr_dist)
            throw std::invalid_argument("rop4 needs an snr_dist block in the scenario file");
        loss_rows_for(
            "rop4", [&](double eta) { return rop4_solve(s, s.snr_dist, eta); }, parse_grid(eta_grid),
            std::nullopt);
    } else if (mode == "rop2") {
        if (sigma_grid.empty()) throw std::invalid_argument("rop2 needs --sigma-grid a:b:n");
        Schedule schedule = parallel_dp(s).schedule;
        for (double sigma : parse_grid(sigma_grid)) {
            for (int d : {1, 2}) {
                if (design != 0 && design != d) continue;
                ResultRow row;
                row.strategy = d == 1 ? "design1" : "design2";
                row.fusion = to_string(s.fusion);
                row.param = "sigma";
                row.value = sigma;
                try {
                    auto w = rop_min_samples(d == 1 ? SampleDesign::Uniform : SampleDesign::PerChannel,
                                             s, schedule, traffic, sigma * sigma);
                    long total = 0;
                    for (long x : w) total += x;
                    row.samples_total = total;
                    row.variance = throughput_variance_traffic(s, schedule, w, traffic);
                    any_solution = true;
                    if (!opts.quiet)
                        out << row.strategy << " sigma=" << fmt_num(sigma) << "  samples=" << total << "\n";
                } catch (const InfeasibleError& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    } else if (mode == "rop3") {
        if (budget <= 0) throw std::invalid_argument("rop3 needs --budget E");
        Schedule schedule = parallel_dp(s).schedule;
        ResultRow row;
        row.strategy = "rop3";
        row.fusion = to_string(s.fusion);
        row.param = "budget";
        row.value = static_cast<double>(budget);
        auto [w, var] = rop_min_variance(s, schedule, traffic, budget);
        long total = 0;
        for (long x : w) total += x;
        row.samples_total = total;
        row.variance = var;
        any_solution = true;
        if (!opts.quiet) out << "rop3 budget=" << budget << "  variance=" << fmt_num(var) << "\n";
        rows.push_back(std::move(row));
    } else {
        throw std::invalid_argument("unknown robust mode '" + mode + "' (rop1|rop2|rop3|rop4)");
    }

    if (opts.out_format == "json")
        write_json_rows(out, rows);
    else
        write_csv(out, rows);
    return any_solution ? 0 : 4;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"cooperative spectrum sensing schedule optimizer"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string strategy, fusion_override, vary, strategies_csv, mode, eta_grid, sigma_grid;
    long runs = 500, budget = 0, samples = 0;
    std::uint64_t seed = 1;
    int design = 0;
    bool het = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", opts.scenario_path, "scenario file (JSON)")->required();
        cmd->add_option("--out", opts.out_format, "output format: csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_flag("--quiet", opts.quiet, "suppress human-readable output");
        cmd->add_flag("--timings", opts.timings, "include wall-clock runtime_ms in rows");
    };

    CLI::App* plan = app.add_subcommand("plan", "run one strategy and print its schedule");
    add_common(plan);
    plan->add_option("--strategy", strategy, "strategy name")->required();
    plan->add_option("--fusion", fusion_override, "override fusion rule: or|and");

    CLI::App* sweep = app.add_subcommand("sweep", "run strategies over a parameter sweep");
    add_common(sweep);
    sweep->add_option("--vary", vary, "parameter sweep, name=a:b:step")->required();
    sweep->add_option("--strategies", strategies_csv, "comma-separated strategy names")->required();
    sweep->add_option("--fusion", fusion_override, "override fusion rule: or|and");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo over random detection SNRs");
    add_common(simulate);
    simulate->add_option("--runs", runs, "number of Monte Carlo runs");
    simulate->add_option("--seed", seed, "RNG seed");
    simulate->add_flag("--het", het, "draw per-sensor SNR matrices and run het strategies");
    simulate->add_option("--strategies", strategies_csv, "comma-separated strategy names");

    CLI::App* robust = app.add_subcommand("robust", "robust schedule selection and sample designs");
    add_common(robust);
    robust->add_option("--mode", mode, "rop1|rop2|rop3|rop4")->required();
    robust->add_option("--eta-grid", eta_grid, "variance thresholds, a:b:n");
    robust->add_option("--sigma-grid", sigma_grid, "standard-deviation thresholds, a:b:n");
    robust->add_option("--budget", budget, "total sample budget (rop3)");
    robust->add_option("--design", design, "sample design 1 or 2 (rop2; default both)");
    robust->add_option("--samples", samples, "per-channel traffic samples (rop1)");

    std::vector<const char*> argv;
    std::string prog = "specsense";
    argv.push_back(prog.c_str());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    auto split_csv = [](const std::string& text) {
        std::vector<std::string> parts;
        std::istringstream is(text);
        std::string item;
        while (std::getline(is, item, ','))
            if (!item.empty()) parts.push_back(item);
        return parts;
    };

    try {
        if (plan->parsed()) return cmd_plan(opts, strategy, fusion_override, out);
        if (sweep->parsed())
            return cmd_sweep(opts, vary, split_csv(strategies_csv), fusion_override, out);
        if (simulate->parsed())
            return cmd_simulate(opts, runs, seed, het, split_csv(strategies_csv), out);
        if (robust->parsed())
            return cmd_robust(opts, mode, eta_grid, sigma_grid, budget, design, samples, out);
    } catch (const SizeGuardError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const NoSolutionError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace specsense::cli
