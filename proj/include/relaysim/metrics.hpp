#ifndef RELAYSIM_METRICS_HPP
#define RELAYSIM_METRICS_HPP

#include "relaysim/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace relaysim::metrics {

using engine::MetricsRecord;

// End-to-end delays of delivered packets, in slots.
std::vector<double> delays_in_slots(const MetricsRecord& record);

struct CdfPoint {
    double delay_ms = 0.0;
    double cum_prob = 0.0;
};

// Empirical right-continuous CDF over delivered-packet delays, converted to
// milliseconds. Throws std::invalid_argument on an empty sample set.
std::vector<CdfPoint> delay_cdf(const std::vector<double>& delay_slots,
                                double slot_duration_ms);

double mean_delay_ms(const std::vector<double>& delay_slots, double slot_duration_ms);

// Inclusive slot range, 1-based.
struct Window {
    std::uint64_t first_slot = 1;
    std::uint64_t last_slot = 1;
};

Window full_window(const MetricsRecord& record);

struct Throughput {
    std::uint64_t packets = 0;
    double packets_per_s = 0.0;
    double bits_per_slot = 0.0;
};

// Delivered packets whose delivery slot falls inside the window, divided by
// the window duration. Throws std::invalid_argument on an empty/invalid
// window or when the record carries no per-packet deliveries.
Throughput throughput(const MetricsRecord& record, Window window);

enum class Stability { kStable, kUnstable };

const char* stability_name(Stability s);

struct StabilityResult {
    Stability verdict = Stability::kStable;
    double drift_bits_per_slot = 0.0;  // least-squares slope over the last half
    double normalized_drift = 0.0;     // slope / mean occupancy of the first half
};

// Default drift threshold: growth of 1% of a packet per slot.
double default_drift_threshold_bits_per_slot(double packet_size_bits);

// Least-squares slope of the last half of the trace; Unstable iff the slope
// exceeds the threshold. Requires >= 2000 samples.
StabilityResult stability_classify(const std::vector<double>& occupancy_trace,
                                   double drift_threshold_bits_per_slot);

// --- file emission ---------------------------------------------------------

// Columns: slot,q_bs_bits,q_relay_bits,delivered_bits_cum
void write_trace_csv(const MetricsRecord& record, const std::filesystem::path& path);

// Columns: delay_ms,cum_prob
void write_cdf_csv(const std::vector<CdfPoint>& cdf, const std::filesystem::path& path);

nlohmann::ordered_json config_to_json(const engine::ScenarioConfig& config);

// Per-run summary: delays, throughput, stability verdicts, interruption
// fraction, full config echo and seed.
nlohmann::ordered_json summary_json(const MetricsRecord& record,
                                    std::uint64_t warmup_slots = 0);

} // namespace relaysim::metrics

#endif
