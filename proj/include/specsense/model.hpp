#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsense/common.hpp"
#include "specsense/detection.hpp"

namespace specsense {

/// One licensed channel: bandwidth, primary-user duty cycle, secondary-link
/// SNR and detection SNR(s). pu_snr holds one entry for homogeneous sensing
/// or one entry per sensor in the heterogeneous case. A sampling rate of 0
/// means "use the Nyquist default", twice the bandwidth.
struct ChannelSpec {
    double bandwidth_hz = 0.0;
    double occupancy = 0.0;              // probability the primary user holds the channel
    double su_snr = 1.0;                 // linear SNR of the secondary transmission
    std::vector<double> pu_snr;          // linear detection SNR(s)
    double sampling_hz = 0.0;

    double effective_sampling_hz() const {
        return sampling_hz > 0.0 ? sampling_hz : 2.0 * bandwidth_hz;
    }
};

/// Optional two-state primary-traffic chain attached to a channel; p01 is the
/// idle->busy transition probability, p11 the busy->busy one.
struct TrafficModel {
    double p01 = 0.0;
    double p11 = 0.0;
};

/// Optional robust-selection parameters carried by a scenario.
struct RobustSpec {
    double eta = 0.0;      // throughput-variance threshold
    long budget = 0;       // total traffic-sample budget
    long samples = 20;     // uniform per-channel sample count
};

/// Truncated exponential distribution for a random detection SNR, all in
/// linear units. The truncation keeps gamma inside (phi_l, phi_u).
struct TruncExpSnr {
    double beta = 0.0;   // rate of the underlying exponential
    double phi_l = 0.0;  // lower bound (SNR wall)
    double phi_u = 0.0;  // upper bound

    void validate() const {
        if (!(beta > 0.0 && phi_l > 0.0 && phi_l < phi_u))
            throw std::domain_error("truncated SNR needs beta > 0 and 0 < phi_l < phi_u");
    }
};

/**
 * Full optimization input: slot length, channels, sensor count and the
 * detection targets shared by every channel. Heterogeneous scenarios carry an
 * M x N detection-SNR matrix through the channels' pu_snr vectors.
 */
struct Scenario {
    double slot_s = 0.0;                       // slot length T
    std::vector<ChannelSpec> channels;
    int n_sensors = 0;
    double qd = 0.0;
    double qf = 0.0;
    Fusion fusion = Fusion::OR;
    double noise_power = 1e-8;                 // used by heterogeneous threshold solves
    std::vector<TrafficModel> traffic;         // empty or one per channel
    RobustSpec robust;
    bool has_traffic = false;
    bool has_robust = false;
    bool has_snr_dist = false;
    TruncExpSnr snr_dist;

    std::size_t n_channels() const { return channels.size(); }

    bool het() const {
        for (const auto& c : channels)
            if (c.pu_snr.size() > 1) return true;
        return false;
    }

    SensingRequirements requirements(std::size_t channel) const {
        return {qd, qf, channels[channel].effective_sampling_hz(), fusion};
    }

    /// Detection SNR of sensor i on channel m (scalar entries broadcast).
    double pu_snr_at(std::size_t m, std::size_t i) const {
        const auto& v = channels[m].pu_snr;
        return v.size() == 1 ? v[0] : v[i];
    }

    void validate() const {
        if (!(slot_s > 0.0)) throw std::invalid_argument("slot_s must be positive");
        if (channels.empty()) throw std::invalid_argument("at least one channel required");
        if (n_sensors < 1) throw std::invalid_argument("at least one sensor required");
        if (!(qf > 0.0 && qf < qd && qd < 1.0))
            throw std::invalid_argument("detection targets need 0 < qf < qd < 1");
        for (std::size_t m = 0; m < channels.size(); ++m) {
            const auto& c = channels[m];
            if (!(c.bandwidth_hz > 0.0))
                throw std::invalid_argument("channel " + std::to_string(m) + ": bandwidth must be positive");
            if (c.occupancy < 0.0 || c.occupancy > 1.0)
                throw std::invalid_argument("channel " + std::to_string(m) + ": occupancy must be in [0,1]");
            if (c.su_snr < 0.0)
                throw std::invalid_argument("channel " + std::to_string(m) + ": su_snr must be >= 0");
            if (c.pu_snr.size() != 1 && c.pu_snr.size() != static_cast<std::size_t>(n_sensors))
                throw std::invalid_argument("channel " + std::to_string(m) +
                                            ": pu_snr must have 1 or n_sensors entries");
            for (double g : c.pu_snr)
                if (!(g > 0.0))
                    throw std::invalid_argument("channel " + std::to_string(m) + ": pu_snr must be positive");
        }
        if (!traffic.empty() && traffic.size() != channels.size())
            throw std::invalid_argument("traffic block must cover every channel");
    }
};

/// One sensing job: a sensor set cooperatively observing one channel over
/// [start, start + duration). Cooperators share the start by construction.
struct SensingJob {
    int channel = 0;
    std::vector<int> sensors;
    double start_s = 0.0;
    double duration_s = 0.0;

    double end_s() const { return start_s + duration_s; }
};

/// A full slot plan: jobs plus the per-channel completion times T_I.
/// Channels that are not sensed carry completion == slot length.
struct Schedule {
    std::vector<SensingJob> jobs;
    std::vector<double> completion;

    static Schedule unsensed(const Scenario& s) {
        Schedule sch;
        sch.completion.assign(s.n_channels(), s.slot_s);
        return sch;
    }

    /// Registers a job and stamps the channel's completion time.
    void add_job(int channel, std::vector<int> sensors, double start, double duration) {
        jobs.push_back({channel, std::move(sensors), start, duration});
        completion[static_cast<std::size_t>(channel)] = start + duration;
    }
};

struct ThroughputReport {
    double total_bps = 0.0;
    std::vector<double> per_channel_bps;
    std::string strategy_name;
};

/// Shannon capacity B * log2(1 + snr) of a channel at linear SNR.
inline double capacity(double bandwidth_hz, double su_snr) {
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("capacity requires bandwidth > 0");
    if (su_snr < 0.0) throw std::domain_error("capacity requires su_snr >= 0");
    return bandwidth_hz * std::log2(1.0 + su_snr);
}

/// Capacity weighted by channel availability: C_m * (1 - u_m).
inline double channel_weight(const ChannelSpec& c) {
    return capacity(c.bandwidth_hz, c.su_snr) * (1.0 - c.occupancy);
}

/**
 * Structural checks on a schedule. Returns the violations in deterministic
 * order (scan by job index, then per-channel checks); an empty result means
 * the schedule is feasible.
 */
inline std::vector<std::string> validate_schedule(const Scenario& scenario, const Schedule& schedule) {
    std::vector<std::string> violations;
    const std::size_t m_count = scenario.n_channels();
    const double T = scenario.slot_s;

    if (schedule.completion.size() != m_count) {
        violations.push_back("completion vector does not cover every channel");
        return violations;
    }

    std::vector<int> jobs_on_channel(m_count, 0);
    for (std::size_t j = 0; j < schedule.jobs.size(); ++j) {
        const auto& job = schedule.jobs[j];
        std::string tag = "job " + std::to_string(j) + ": ";
        if (job.channel < 0 || static_cast<std::size_t>(job.channel) >= m_count) {
            violations.push_back(tag + "channel index out of range");
            continue;
        }
        if (job.sensors.empty()) violations.push_back(tag + "no sensors assigned");
        for (int s : job.sensors)
            if (s < 0 || s >= scenario.n_sensors) {
                violations.push_back(tag + "sensor index out of range");
                break;
            }
        auto sorted = job.sensors;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            violations.push_back(tag + "duplicate sensor within one job");
        if (!(job.duration_s > 0.0)) violations.push_back(tag + "non-positive duration");
        if (job.start_s < 0.0) violations.push_back(tag + "starts before the slot");
        if (job.end_s() > T * (1.0 + 1e-12)) violations.push_back(tag + "ends past the slot");
        ++jobs_on_channel[static_cast<std::size_t>(job.channel)];
    }

    // Cooperators must start together: two jobs on one channel with different
    // timing is the representable form of unsynchronized cooperation.
    for (std::size_t j = 0; j < schedule.jobs.size(); ++j)
        for (std::size_t k = j + 1; k < schedule.jobs.size(); ++k) {
            const auto& a = schedule.jobs[j];
            const auto& b = schedule.jobs[k];
            if (a.channel == b.channel) {
                if (a.start_s != b.start_s || a.duration_s != b.duration_s)
                    violations.push_back("jobs " + std::to_string(j) + "," + std::to_string(k) +
                                         ": cooperators not synchronized");
                else
                    violations.push_back("jobs " + std::to_string(j) + "," + std::to_string(k) +
                                         ": channel sensed twice");
            }
            bool share_sensor = false;
            for (int s : a.sensors)
                if (std::find(b.sensors.begin(), b.sensors.end(), s) != b.sensors.end()) {
                    share_sensor = true;
                    break;
                }
            if (share_sensor && a.start_s < b.end_s() && b.start_s < a.end_s())
                violations.push_back("jobs " + std::to_string(j) + "," + std::to_string(k) +
                                     ": sensor overlap");
        }

    for (std::size_t m = 0; m < m_count; ++m) {
        double ti = schedule.completion[m];
        if (jobs_on_channel[m] == 0) {
            if (ti != T)
                violations.push_back("channel " + std::to_string(m) +
                                     ": unsensed channel must have completion == slot length");
        } else {
            bool matched = false;
            for (const auto& job : schedule.jobs)
                if (static_cast<std::size_t>(job.channel) == m && job.end_s() == ti) matched = true;
            if (!matched)
                violations.push_back("channel " + std::to_string(m) +
                                     ": completion does not match its job");
        }
    }
    return violations;
}

/**
 * Expected normalized throughput of a schedule: each channel found idle
 * contributes its residual slot time at the availability-weighted capacity,
 *
 *   sum_m max(T - T_I^(m), 0) * C_m * (1 - u_m) / T
 *
 * Unsensed channels (T_I == T) contribute nothing. Throws on an invalid
 * schedule, naming the first violated invariant.
 */
inline ThroughputReport evaluate_schedule(const Scenario& scenario, const Schedule& schedule) {
    auto violations = validate_schedule(scenario, schedule);
    if (!violations.empty())
        throw std::invalid_argument("invalid schedule: " + violations.front());

    ThroughputReport report;
    const double T = scenario.slot_s;
    report.per_channel_bps.resize(scenario.n_channels());
    for (std::size_t m = 0; m < scenario.n_channels(); ++m) {
        double residual = std::max(T - schedule.completion[m], 0.0);
        report.per_channel_bps[m] = residual * channel_weight(scenario.channels[m]) / T;
        report.total_bps += report.per_channel_bps[m];
    }
    return report;
}

}  // namespace specsense
