#include "relaysim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace relaysim::metrics {

std::vector<double> delays_in_slots(const MetricsRecord& record) {
    std::vector<double> out;
    out.reserve(record.delivered.size());
    for (const auto& p : record.delivered) {
        out.push_back(static_cast<double>(p.delivery_slot - p.arrival_slot));
    }
    return out;
}

std::vector<CdfPoint> delay_cdf(const std::vector<double>& delay_slots,
                                double slot_duration_ms) {
    if (delay_slots.empty()) {
        throw std::invalid_argument("delay_cdf: no delay samples");
    }
    std::vector<double> sorted = delay_slots;
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> cdf;
    const double n = static_cast<double>(sorted.size());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            ++j;
        }
        cdf.push_back(CdfPoint{sorted[i] * slot_duration_ms, static_cast<double>(j) / n});
        i = j;
    }
    cdf.back().cum_prob = 1.0;  // exact terminal value
    return cdf;
}

double mean_delay_ms(const std::vector<double>& delay_slots, double slot_duration_ms) {
    if (delay_slots.empty()) {
        throw std::invalid_argument("mean_delay_ms: no delay samples");
    }
    const double sum = std::accumulate(delay_slots.begin(), delay_slots.end(), 0.0);
    return sum / static_cast<double>(delay_slots.size()) * slot_duration_ms;
}

Window full_window(const MetricsRecord& record) {
    return Window{1, record.slots_run == 0 ? 1 : record.slots_run};
}

Throughput throughput(const MetricsRecord& record, Window window) {
    if (window.first_slot < 1 || window.last_slot < window.first_slot ||
        window.last_slot > record.slots_run) {
        throw std::invalid_argument("throughput: window must lie within the run horizon");
    }
    if (record.delivered.empty() && record.delivered_packets > 0) {
        throw std::invalid_argument(
            "throughput: record carries no per-packet deliveries (saturated traffic)");
    }
    Throughput result;
    double bits = 0.0;
    for (const auto& p : record.delivered) {
        if (p.delivery_slot >= window.first_slot && p.delivery_slot <= window.last_slot) {
            ++result.packets;
            bits += p.size_bits;
        }
    }
    const double window_slots =
        static_cast<double>(window.last_slot - window.first_slot + 1);
    const double duration_s = window_slots * record.config.slot_duration_s;
    result.packets_per_s = static_cast<double>(result.packets) / duration_s;
    result.bits_per_slot = bits / window_slots;
    return result;
}

const char* stability_name(Stability s) {
    return s == Stability::kStable ? "Stable" : "Unstable";
}

double default_drift_threshold_bits_per_slot(double packet_size_bits) {
    return 0.01 * packet_size_bits;
}

StabilityResult stability_classify(const std::vector<double>& occupancy_trace,
                                   double drift_threshold_bits_per_slot) {
    if (occupancy_trace.size() < 2000) {
        throw std::invalid_argument("stability_classify: needs at least 2000 samples");
    }
    const std::size_t n = occupancy_trace.size();
    const std::size_t half = n / 2;

    double mean_first = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
        mean_first += occupancy_trace[i];
    }
    mean_first /= static_cast<double>(half);

    // Least squares over the last half, abscissa centered for conditioning.
    const std::size_t m = n - half;
    const double x_mean = (static_cast<double>(m) - 1.0) / 2.0;
    double y_mean = 0.0;
    for (std::size_t i = half; i < n; ++i) {
        y_mean += occupancy_trace[i];
    }
    y_mean /= static_cast<double>(m);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = half; i < n; ++i) {
        const double dx = static_cast<double>(i - half) - x_mean;
        sxy += dx * (occupancy_trace[i] - y_mean);
        sxx += dx * dx;
    }
    StabilityResult result;
    result.drift_bits_per_slot = sxy / sxx;
    result.normalized_drift = result.drift_bits_per_slot / std::max(mean_first, 1.0);
    result.verdict = result.drift_bits_per_slot > drift_threshold_bits_per_slot
                         ? Stability::kUnstable
                         : Stability::kStable;
    return result;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    return out;
}

} // namespace

void write_trace_csv(const MetricsRecord& record, const std::filesystem::path& path) {
    if (record.q_bs_trace.size() != record.slots_run) {
        throw std::invalid_argument("write_trace_csv: record has no per-slot traces");
    }
    auto out = open_for_write(path);
    out << "slot,q_bs_bits,q_relay_bits,delivered_bits_cum\n";
    for (std::uint64_t t = 0; t < record.slots_run; ++t) {
        out << (t + 1) << ',' << fmt(record.q_bs_trace[t]) << ','
            << fmt(record.q_relay_trace[t]) << ','
            << fmt(record.delivered_bits_trace[t]) << '\n';
    }
}

void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "delay_ms,cum_prob\n";
    for (const auto& point : cdf) {
        out << fmt(point.delay_ms) << ',' << fmt(point.cum_prob) << '\n';
    }
}

nlohmann::ordered_json config_to_json(const engine::ScenarioConfig& config) {
    using engine::Mode;
    nlohmann::ordered_json j;
    j["mode"] = engine::mode_name(config.mode);
    j["horizon_slots"] = config.horizon_slots;
    j["slot_duration_s"] = config.slot_duration_s;
    j["seed"] = config.seed;
    if (config.relay_buffer_cap_bits == engine::kUnlimitedBuffer) {
        j["relay_buffer_cap_bits"] = "unlimited";
    } else {
        j["relay_buffer_cap_bits"] = config.relay_buffer_cap_bits;
    }

    nlohmann::ordered_json traffic;
    switch (config.traffic.kind()) {
    case traffic::TrafficKind::kDeterministicBits:
        traffic["model"] = "deterministic_bits";
        traffic["n_bits"] = config.traffic.n_bits();
        break;
    case traffic::TrafficKind::kPoisson:
        traffic["model"] = "poisson";
        traffic["rate_pps"] = config.traffic.rate_pps();
        traffic["packet_size_bits"] = config.traffic.packet_size_bits();
        break;
    case traffic::TrafficKind::kSaturated:
        traffic["model"] = "saturated";
        traffic["packet_size_bits"] = config.traffic.packet_size_bits();
        traffic["min_backlog_bits"] = config.traffic.min_backlog_bits();
        break;
    }
    j["traffic"] = traffic;

    if (engine::is_bernoulli(config.mode)) {
        j["bernoulli"] = {{"p1", config.bernoulli.probs.p1},
                          {"p2", config.bernoulli.probs.p2},
                          {"forced_inactive_slots", config.bernoulli.forced_inactive_slots}};
    } else {
        auto budget_json = [](const channel::LinkBudget& b) {
            nlohmann::ordered_json lb;
            lb["tx_power_dbm"] = b.tx_power_dbm;
            lb["distance_m"] = b.distance_m;
            lb["pathloss_a_db"] = b.pathloss_a_db;
            lb["pathloss_b"] = b.pathloss_b;
            lb["noise_psd_dbm_hz"] = b.noise_psd_dbm_hz;
            lb["bandwidth_hz"] = b.bandwidth_hz;
            return lb;
        };
        auto fading_json = [](const channel::FadingModel& m) {
            nlohmann::ordered_json f;
            if (m.kind() == channel::FadingKind::kRician) {
                f["model"] = "rician";
                f["k_db"] = m.rician_k_db();
            } else {
                f["model"] = "rayleigh";
            }
            return f;
        };
        j["link_bs_relay"] = budget_json(config.fading.bs_relay_budget);
        j["link_bs_relay"]["fading"] = fading_json(config.fading.bs_relay_fading);
        j["link_relay_user"] = budget_json(config.fading.relay_user_budget);
        j["link_relay_user"]["fading"] = fading_json(config.fading.relay_user_fading);
        j["scheduler"] = {
            {"kind", config.scheduler.kind == engine::SchedulerKind::kMaxWeight
                         ? "max_weight"
                         : "fixed_subslots"},
            {"mw_weight_rule",
             config.scheduler.weight_rule == engine::MwWeightRule::kDifferentialBacklog
                 ? "differential"
                 : "queue_length"}};
    }
    return j;
}

nlohmann::ordered_json summary_json(const MetricsRecord& record,
                                    std::uint64_t warmup_slots) {
    nlohmann::ordered_json j;
    j["mode"] = engine::mode_name(record.config.mode);
    j["seed"] = record.config.seed;
    j["slots_run"] = record.slots_run;
    j["warmup_slots"] = warmup_slots;
    j["arrived_packets"] = record.arrived_packets;
    j["delivered_packets"] = record.delivered_packets;
    j["censored_packets"] = record.censored_packets;
    j["delivered_bits_total"] = record.delivered_bits_total;
    j["delivered_slot_fraction"] = record.delivered_slot_fraction();
    j["interruption_fraction"] = 1.0 - record.delivered_slot_fraction();
    j["conservation_max_abs_error"] = record.conservation_max_abs_error;

    const double slot_ms = record.config.slot_duration_s * 1e3;
    std::vector<double> delays;
    delays.reserve(record.delivered.size());
    for (const auto& p : record.delivered) {
        if (p.delivery_slot > warmup_slots) {
            delays.push_back(static_cast<double>(p.delivery_slot - p.arrival_slot));
        }
    }
    if (!delays.empty()) {
        j["mean_delay_ms"] = mean_delay_ms(delays, slot_ms);
        j["delay_samples"] = delays.size();
    } else {
        j["mean_delay_ms"] = nullptr;
        j["delay_samples"] = 0;
    }

    if (!record.delivered.empty() || record.delivered_packets == 0) {
        Window w = full_window(record);
        if (warmup_slots + 1 < record.slots_run) {
            w.first_slot = warmup_slots + 1;
        }
        if (record.slots_run > 0) {
            const Throughput tp = throughput(record, w);
            j["throughput_pps"] = tp.packets_per_s;
            j["throughput_bits_per_slot"] = tp.bits_per_slot;
        }
    } else {
        j["throughput_pps"] = nullptr;
        j["throughput_bits_per_slot"] = nullptr;
    }

    if (record.q_bs_trace.size() >= 2000) {
        const double threshold = default_drift_threshold_bits_per_slot(
            record.config.traffic.packet_size_bits());
        const auto bs = stability_classify(record.q_bs_trace, threshold);
        const auto relay = stability_classify(record.q_relay_trace, threshold);
        j["stability"] = {
            {"bs", stability_name(bs.verdict)},
            {"bs_drift_bits_per_slot", bs.drift_bits_per_slot},
            {"relay", stability_name(relay.verdict)},
            {"relay_drift_bits_per_slot", relay.drift_bits_per_slot},
            {"drift_threshold_bits_per_slot", threshold}};
    } else {
        j["stability"] = nullptr;
    }

    j["config"] = config_to_json(record.config);
    return j;
}

} // namespace relaysim::metrics
