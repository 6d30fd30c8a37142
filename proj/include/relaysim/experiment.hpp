#ifndef RELAYSIM_EXPERIMENT_HPP
#define RELAYSIM_EXPERIMENT_HPP

#include "relaysim/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace relaysim::experiment {

// Parse/validation failure; the message names the field and, where known,
// the config line.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModeFilter { kConventional, kBuffered, kBoth };

struct ExperimentSpec {
    engine::ScenarioConfig scenario;
    std::vector<double> sweep_rates_pps;  // empty = single scenario
    std::uint64_t replications = 1;
    std::vector<std::uint64_t> seeds;     // resolved to one seed per replication
    ModeFilter mode_filter = ModeFilter::kBoth;
    std::filesystem::path out_dir = "results";
    int parallelism = 0;                  // 0 = one task per hardware thread
    std::uint64_t warmup_slots = 0;
};

// Reads the documented TOML-style key/value format. An empty file yields the
// all-defaults spec (reference scenario). Throws ConfigError with the field
// name and line on unknown keys, missing required fields and unit violations.
ExperimentSpec parse_config(const std::filesystem::path& path);
ExperimentSpec parse_config_text(std::string_view text, const std::string& origin);

// One fully resolved run: (relaying mode x arrival rate x replication).
// Conventional and buffered cells of the same (rate, replication) share a
// seed, so they see identical channel and traffic randomness.
struct RunCell {
    engine::ScenarioConfig config;
    std::string mode_label;  // "conventional" | "buffered"
    std::string rate_label;  // filename token, e.g. "50" or "sat"
    double rate_pps = 0.0;   // 0 when traffic is not poisson
    std::uint64_t seed = 0;
    std::uint32_t replication = 0;
};

std::vector<RunCell> expand_cells(const ExperimentSpec& spec);

// Serial reference runner.
std::vector<engine::MetricsRecord> run_cells_serial(const std::vector<RunCell>& cells);

// OpenMP runner; one task per cell, results identical to run_cells_serial.
// max_threads <= 0 uses all hardware threads.
std::vector<engine::MetricsRecord> run_cells(const std::vector<RunCell>& cells,
                                             int max_threads);

struct ExperimentResult {
    std::vector<std::filesystem::path> files_written;
    std::filesystem::path summary_path;
};

// Runs every cell and writes trace_<mode>_<rate>_<seed>.csv per cell,
// cdf_<mode>_<rate>.csv pooled over replications, and summary.json.
// Byte-identical across reruns with the same spec.
ExperimentResult run_experiment(const ExperimentSpec& spec);

} // namespace relaysim::experiment

#endif
