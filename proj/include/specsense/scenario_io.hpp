#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsense/common.hpp"
#include "specsense/model.hpp"

namespace specsense {

/**
 * Scenario files are JSON (// comments allowed). Field names:
 *
 *   slot_s, fusion ("or"/"and"), qd, qf, n_sensors, noise_power,
 *   channels: [ { bandwidth_hz, occupancy, su_snr_db,
 *                 pu_snr_db (scalar or length-N list), sampling_hz? } ],
 *   traffic:  { p00 } or { p00: [...] }          (optional)
 *   robust:   { eta, budget, samples }           (optional)
 *   snr_dist: { mean_db | beta, lo_db, hi_db }   (optional)
 *
 * Unset fields fall back to the six-channel reference setup (5 ms slot,
 * OR rule, Qd = 0.9, Qf = 0.15, 10 dB link SNR, -5 dB detection SNR,
 * Nyquist sampling), so a minimal file is runnable as-is.
 */
inline Scenario scenario_from_json(const nlohmann::json& j) {
    Scenario s;
    s.slot_s = j.value("slot_s", 5e-3);
    s.fusion = fusion_from_string(j.value("fusion", std::string("or")));
    s.qd = j.value("qd", 0.9);
    s.qf = j.value("qf", 0.15);
    s.n_sensors = j.value("n_sensors", 3);
    s.noise_power = j.value("noise_power", 1e-8);

    auto parse_channel = [&](const nlohmann::json& cj) {
        ChannelSpec c;
        c.bandwidth_hz = cj.value("bandwidth_hz", 2500.0);
        c.occupancy = cj.value("occupancy", 0.3);
        c.su_snr = db_to_linear(cj.value("su_snr_db", 10.0));
        c.sampling_hz = cj.value("sampling_hz", 0.0);
        if (cj.contains("pu_snr_db") && cj["pu_snr_db"].is_array()) {
            for (const auto& v : cj["pu_snr_db"]) c.pu_snr.push_back(db_to_linear(v.get<double>()));
        } else {
            c.pu_snr.push_back(db_to_linear(cj.value("pu_snr_db", -5.0)));
        }
        return c;
    };

    if (j.contains("channels")) {
        for (const auto& cj : j["channels"]) s.channels.push_back(parse_channel(cj));
    } else {
        // Reference six-channel setup: B = (1, 1.5, 2, 2.5, 3, 5) kHz,
        // u = (0.1, 0.2, 0.3, 0.4, 0.5, 0.3).
        const double bw[] = {1000, 1500, 2000, 2500, 3000, 5000};
        const double occ[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.3};
        for (int i = 0; i < 6; ++i) {
            ChannelSpec c;
            c.bandwidth_hz = bw[i];
            c.occupancy = occ[i];
            c.su_snr = db_to_linear(10.0);
            c.pu_snr.push_back(db_to_linear(-5.0));
            s.channels.push_back(c);
        }
    }

    if (j.contains("traffic")) {
        const auto& tj = j["traffic"];
        s.has_traffic = true;
        for (std::size_t m = 0; m < s.channels.size(); ++m) {
            TrafficModel t;
            double p00 = tj.contains("p00") && tj["p00"].is_array()
                             ? tj["p00"].at(m).get<double>()
                             : tj.value("p00", 0.9);
            t.p01 = 1.0 - p00;
            double u = s.channels[m].occupancy;
            if (!(u > 0.0 && u < 1.0))
                throw std::invalid_argument("traffic block requires occupancy in (0,1) on every channel");
            double p10 = t.p01 * (1.0 - u) / u;
            if (p10 > 1.0)
                throw std::invalid_argument("traffic block inconsistent: implied p10 > 1 on channel " +
                                            std::to_string(m));
            t.p11 = 1.0 - p10;
            s.traffic.push_back(t);
        }
    }

    if (j.contains("robust")) {
        const auto& rj = j["robust"];
        s.has_robust = true;
        s.robust.eta = rj.value("eta", 0.0);
        s.robust.budget = rj.value("budget", 0L);
        s.robust.samples = rj.value("samples", 20L);
    }

    if (j.contains("snr_dist")) {
        const auto& dj = j["snr_dist"];
        s.has_snr_dist = true;
        double lo_db = dj.value("lo_db", -15.0);
        double hi_db = dj.value("hi_db", 0.0);
        s.snr_dist.phi_l = db_to_linear(lo_db);
        s.snr_dist.phi_u = db_to_linear(hi_db);
        s.snr_dist.beta = dj.contains("beta") ? dj["beta"].get<double>()
                                              : 1.0 / db_to_linear(dj.value("mean_db", -5.0));
        s.snr_dist.validate();
    }

    s.validate();
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str(), nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("scenario file " + path + " is not valid JSON: " + e.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("scenario file " + path + ": " + e.what());
    }
}

}  // namespace specsense
