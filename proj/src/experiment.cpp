#include "relaysim/experiment.hpp"

#include "relaysim/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace relaysim::experiment {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct RawEntry {
    std::string value;
    int line = 0;
    bool consumed = false;
};

// Flat view of the file: "section.key" -> raw value + line.
class RawConfig {
public:
    RawConfig(std::string_view text, std::string origin) : origin_(std::move(origin)) {
        std::string section;
        int line_no = 0;
        std::istringstream stream{std::string(text)};
        std::string line;
        while (std::getline(stream, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']' || t.size() < 3) {
                    fail(line_no, t, "malformed section header");
                }
                section = trim(t.substr(1, t.size() - 2));
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                fail(line_no, t, "expected key = value");
            }
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty()) {
                fail(line_no, t, "empty key");
            }
            // strip trailing comments outside quotes/brackets
            if (!value.empty() && value[0] != '"') {
                bool in_bracket = false;
                for (std::size_t i = 0; i < value.size(); ++i) {
                    if (value[i] == '[') in_bracket = true;
                    if (value[i] == ']') in_bracket = false;
                    if (value[i] == '#' && !in_bracket) {
                        value = trim(value.substr(0, i));
                        break;
                    }
                }
            }
            if (value.empty()) {
                fail(line_no, key, "missing value");
            }
            const std::string full = section.empty() ? key : section + "." + key;
            if (!entries_.emplace(full, RawEntry{value, line_no}).second) {
                fail(line_no, full, "duplicate key");
            }
        }
    }

    [[noreturn]] void fail(int line, const std::string& what, const std::string& message) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + what + ": " + message);
    }

    [[noreturn]] void fail_key(const std::string& key, const std::string& message) const {
        const auto it = entries_.find(key);
        const int line = it == entries_.end() ? 0 : it->second.line;
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + key + ": " + message);
    }

    std::optional<std::string> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.consumed = true;
        return it->second.value;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    void require_all_consumed() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.consumed) {
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": " + key +
                                  ": unknown key");
            }
        }
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
    std::map<std::string, RawEntry> entries_;
};

double to_double(RawConfig& cfg, const std::string& key, const std::string& raw) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        cfg.fail_key(key, "not a number: '" + raw + "'");
    }
}

std::uint64_t to_uint(RawConfig& cfg, const std::string& key, const std::string& raw) {
    try {
        if (!raw.empty() && raw[0] == '-') throw std::invalid_argument(raw);
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        cfg.fail_key(key, "not a non-negative integer: '" + raw + "'");
    }
}

bool to_bool(RawConfig& cfg, const std::string& key, const std::string& raw) {
    if (raw == "true") return true;
    if (raw == "false") return false;
    cfg.fail_key(key, "expected true or false, got '" + raw + "'");
}

std::string unquote(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
        return raw.substr(1, raw.size() - 2);
    }
    return raw;
}

std::vector<std::string> split_array(RawConfig& cfg, const std::string& key,
                                     const std::string& raw) {
    if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
        cfg.fail_key(key, "expected an array like [1, 2, 3]");
    }
    std::vector<std::string> items;
    std::string inner = raw.substr(1, raw.size() - 2);
    std::size_t start = 0;
    while (start <= inner.size()) {
        const auto comma = inner.find(',', start);
        const std::string item =
            trim(inner.substr(start, comma == std::string::npos ? std::string::npos
                                                                : comma - start));
        if (!item.empty()) items.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return items;
}

template <typename Parse>
auto take_or(RawConfig& cfg, const std::string& key, Parse parse,
             decltype(parse(std::string{})) fallback) {
    const auto raw = cfg.take(key);
    return raw ? parse(*raw) : fallback;
}

engine::Mode parse_mode(RawConfig& cfg, const std::string& key, const std::string& raw) {
    using engine::Mode;
    if (raw == "conventional_bernoulli") return Mode::kConventionalBernoulli;
    if (raw == "buffered_bernoulli") return Mode::kBufferedBernoulli;
    if (raw == "conventional_fading") return Mode::kConventionalFading;
    if (raw == "buffered_fading") return Mode::kBufferedFading;
    cfg.fail_key(key, "unknown mode '" + raw +
                          "' (expected conventional_bernoulli, buffered_bernoulli, "
                          "conventional_fading or buffered_fading)");
}

void parse_link(RawConfig& cfg, const std::string& section, channel::LinkBudget& budget,
                channel::FadingModel& fading) {
    auto num = [&](const char* name, double& slot) {
        if (auto raw = cfg.take(section + "." + name)) {
            slot = to_double(cfg, section + "." + name, *raw);
        }
    };
    num("tx_power_dbm", budget.tx_power_dbm);
    num("distance_m", budget.distance_m);
    num("pathloss_a_db", budget.pathloss_a_db);
    num("pathloss_b", budget.pathloss_b);
    num("noise_psd_dbm_hz", budget.noise_psd_dbm_hz);
    num("bandwidth_hz", budget.bandwidth_hz);
    if (!(budget.distance_m > 0.0)) {
        cfg.fail_key(section + ".distance_m", "must be > 0");
    }
    if (!(budget.bandwidth_hz > 0.0)) {
        cfg.fail_key(section + ".bandwidth_hz", "must be > 0");
    }

    const auto kind = cfg.take(section + ".fading");
    double k_db = fading.kind() == channel::FadingKind::kRician ? fading.rician_k_db() : 6.0;
    if (auto raw = cfg.take(section + ".rician_k_db")) {
        k_db = to_double(cfg, section + ".rician_k_db", *raw);
    }
    if (kind) {
        if (*kind == "rayleigh") {
            fading = channel::FadingModel::rayleigh();
        } else if (*kind == "rician") {
            fading = channel::FadingModel::rician(k_db);
        } else {
            cfg.fail_key(section + ".fading", "expected rayleigh or rician, got '" + *kind + "'");
        }
    } else if (fading.kind() == channel::FadingKind::kRician) {
        fading = channel::FadingModel::rician(k_db);
    }
}

ExperimentSpec parse_raw(RawConfig cfg) {
    ExperimentSpec spec;
    auto& scenario = spec.scenario;

    // [scenario]
    if (auto raw = cfg.take("scenario.mode")) {
        scenario.mode = parse_mode(cfg, "scenario.mode", *raw);
    }
    if (auto raw = cfg.take("scenario.horizon_slots")) {
        scenario.horizon_slots = to_uint(cfg, "scenario.horizon_slots", *raw);
        if (scenario.horizon_slots < 1) {
            cfg.fail_key("scenario.horizon_slots", "must be >= 1");
        }
    }
    if (auto raw = cfg.take("scenario.slot_duration_s")) {
        scenario.slot_duration_s = to_double(cfg, "scenario.slot_duration_s", *raw);
        if (!(scenario.slot_duration_s > 0.0)) {
            cfg.fail_key("scenario.slot_duration_s", "must be > 0");
        }
    }
    if (auto raw = cfg.take("scenario.seed")) {
        scenario.seed = to_uint(cfg, "scenario.seed", *raw);
    }
    if (auto raw = cfg.take("scenario.relay_buffer_cap_bits")) {
        if (*raw == "unlimited") {
            scenario.relay_buffer_cap_bits = engine::kUnlimitedBuffer;
        } else {
            scenario.relay_buffer_cap_bits =
                to_double(cfg, "scenario.relay_buffer_cap_bits", *raw);
            if (!(scenario.relay_buffer_cap_bits >= 1.0)) {
                cfg.fail_key("scenario.relay_buffer_cap_bits", "must be >= 1 or unlimited");
            }
        }
    }
    if (auto raw = cfg.take("scenario.scheduler")) {
        if (*raw == "max_weight") {
            scenario.scheduler.kind = engine::SchedulerKind::kMaxWeight;
        } else if (*raw == "fixed_subslots") {
            scenario.scheduler.kind = engine::SchedulerKind::kFixedSubslots;
        } else {
            cfg.fail_key("scenario.scheduler", "expected max_weight or fixed_subslots");
        }
    }
    if (auto raw = cfg.take("scenario.mw_weight_rule")) {
        if (*raw == "differential") {
            scenario.scheduler.weight_rule = engine::MwWeightRule::kDifferentialBacklog;
        } else if (*raw == "queue_length") {
            scenario.scheduler.weight_rule = engine::MwWeightRule::kQueueLength;
        } else {
            cfg.fail_key("scenario.mw_weight_rule", "expected differential or queue_length");
        }
    }
    if (auto raw = cfg.take("scenario.record_traces")) {
        scenario.record_traces = to_bool(cfg, "scenario.record_traces", *raw);
    }
    if (auto raw = cfg.take("scenario.record_delivery_flags")) {
        scenario.record_delivery_flags =
            to_bool(cfg, "scenario.record_delivery_flags", *raw);
    }

    // [traffic]
    {
        const auto model = cfg.take("traffic.model");
        const auto rate_raw = cfg.take("traffic.rate_pps");
        const auto size_raw = cfg.take("traffic.packet_size_bits");
        const auto nbits_raw = cfg.take("traffic.n_bits");
        const auto backlog_raw = cfg.take("traffic.min_backlog_bits");
        const std::string kind = model ? *model : "poisson";
        const double size = size_raw ? to_double(cfg, "traffic.packet_size_bits", *size_raw)
                                     : (kind == "poisson" ? 1000.0 : 1.0);
        try {
            if (kind == "poisson") {
                const double rate =
                    rate_raw ? to_double(cfg, "traffic.rate_pps", *rate_raw) : 50.0;
                scenario.traffic = traffic::TrafficModel::poisson(rate, size);
            } else if (kind == "deterministic_bits") {
                if (!nbits_raw) {
                    cfg.fail_key("traffic.model",
                                 "traffic.n_bits is required for deterministic_bits");
                }
                scenario.traffic = traffic::TrafficModel::deterministic_bits(
                    to_uint(cfg, "traffic.n_bits", *nbits_raw));
            } else if (kind == "saturated") {
                const double backlog =
                    backlog_raw ? to_double(cfg, "traffic.min_backlog_bits", *backlog_raw)
                                : size;
                scenario.traffic = traffic::TrafficModel::saturated(size, backlog);
            } else {
                cfg.fail_key("traffic.model",
                             "expected poisson, deterministic_bits or saturated, got '" +
                                 kind + "'");
            }
        } catch (const std::invalid_argument& e) {
            cfg.fail_key("traffic.model", e.what());
        }
        if (kind != "deterministic_bits" && nbits_raw) {
            cfg.fail_key("traffic.n_bits", "only valid for deterministic_bits traffic");
        }
    }

    // [bernoulli]
    if (auto raw = cfg.take("bernoulli.p1")) {
        scenario.bernoulli.probs.p1 = to_double(cfg, "bernoulli.p1", *raw);
    }
    if (auto raw = cfg.take("bernoulli.p2")) {
        scenario.bernoulli.probs.p2 = to_double(cfg, "bernoulli.p2", *raw);
    }
    if (engine::is_bernoulli(scenario.mode)) {
        if (!(scenario.bernoulli.probs.p1 >= 0.0 && scenario.bernoulli.probs.p1 <= 1.0)) {
            cfg.fail_key("bernoulli.p1", "must lie in [0,1]");
        }
        if (!(scenario.bernoulli.probs.p2 >= 0.0 && scenario.bernoulli.probs.p2 <= 1.0)) {
            cfg.fail_key("bernoulli.p2", "must lie in [0,1]");
        }
    }
    if (auto raw = cfg.take("bernoulli.forced_inactive_slots")) {
        std::vector<std::uint64_t> slots;
        for (const auto& item : split_array(cfg, "bernoulli.forced_inactive_slots", *raw)) {
            slots.push_back(to_uint(cfg, "bernoulli.forced_inactive_slots", item));
        }
        scenario.bernoulli.forced_inactive_slots = std::move(slots);
    }

    // [link_bs_relay] / [link_relay_user]
    parse_link(cfg, "link_bs_relay", scenario.fading.bs_relay_budget,
               scenario.fading.bs_relay_fading);
    parse_link(cfg, "link_relay_user", scenario.fading.relay_user_budget,
               scenario.fading.relay_user_fading);

    // [experiment]
    if (auto raw = cfg.take("experiment.replications")) {
        spec.replications = to_uint(cfg, "experiment.replications", *raw);
        if (spec.replications < 1) {
            cfg.fail_key("experiment.replications", "must be >= 1");
        }
    }
    if (auto raw = cfg.take("experiment.seeds")) {
        for (const auto& item : split_array(cfg, "experiment.seeds", *raw)) {
            spec.seeds.push_back(to_uint(cfg, "experiment.seeds", item));
        }
        if (spec.seeds.empty()) {
            cfg.fail_key("experiment.seeds", "seed list must not be empty");
        }
        if (cfg.has("experiment.replications") &&
            spec.seeds.size() != spec.replications) {
            cfg.fail_key("experiment.seeds",
                         "length must equal experiment.replications");
        }
        spec.replications = spec.seeds.size();
    }
    if (auto raw = cfg.take("experiment.sweep_rates_pps")) {
        double prev = 0.0;
        for (const auto& item : split_array(cfg, "experiment.sweep_rates_pps", *raw)) {
            const double v = to_double(cfg, "experiment.sweep_rates_pps", item);
            if (!(v > 0.0) || v <= prev) {
                cfg.fail_key("experiment.sweep_rates_pps",
                             "rates must be positive and strictly increasing");
            }
            spec.sweep_rates_pps.push_back(v);
            prev = v;
        }
        if (scenario.traffic.kind() != traffic::TrafficKind::kPoisson) {
            cfg.fail_key("experiment.sweep_rates_pps", "requires poisson traffic");
        }
    }
    if (auto raw = cfg.take("experiment.mode")) {
        if (*raw == "conventional") {
            spec.mode_filter = ModeFilter::kConventional;
        } else if (*raw == "buffered") {
            spec.mode_filter = ModeFilter::kBuffered;
        } else if (*raw == "both") {
            spec.mode_filter = ModeFilter::kBoth;
        } else {
            cfg.fail_key("experiment.mode", "expected conventional, buffered or both");
        }
    }
    if (auto raw = cfg.take("experiment.parallel")) {
        spec.parallelism = static_cast<int>(to_uint(cfg, "experiment.parallel", *raw));
    }
    if (auto raw = cfg.take("experiment.out_dir")) {
        spec.out_dir = unquote(*raw);
    }

    // [metrics]
    if (auto raw = cfg.take("metrics.warmup_slots")) {
        spec.warmup_slots = to_uint(cfg, "metrics.warmup_slots", *raw);
    }

    cfg.require_all_consumed();

    if (spec.seeds.empty()) {
        for (std::uint64_t k = 0; k < spec.replications; ++k) {
            spec.seeds.push_back(scenario.seed + k);
        }
    }

    try {
        engine::validate(scenario);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.origin() + ": " + e.what());
    }
    return spec;
}

std::string format_rate(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", rate);
    return buf;
}

std::string base_rate_label(const engine::ScenarioConfig& scenario) {
    switch (scenario.traffic.kind()) {
    case traffic::TrafficKind::kPoisson:
        return format_rate(scenario.traffic.rate_pps());
    case traffic::TrafficKind::kDeterministicBits:
        return "det" + std::to_string(scenario.traffic.n_bits());
    case traffic::TrafficKind::kSaturated:
        return "sat";
    }
    return "unknown";
}

} // namespace

ExperimentSpec parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

ExperimentSpec parse_config_text(std::string_view text, const std::string& origin) {
    return parse_raw(RawConfig(text, origin));
}

std::vector<RunCell> expand_cells(const ExperimentSpec& spec) {
    std::vector<bool> buffered_variants;
    if (spec.mode_filter != ModeFilter::kBuffered) buffered_variants.push_back(false);
    if (spec.mode_filter != ModeFilter::kConventional) buffered_variants.push_back(true);

    std::vector<double> rates = spec.sweep_rates_pps;
    const bool sweeping = !rates.empty();
    if (!sweeping) {
        rates.push_back(0.0);  // single cell per (mode, replication)
    }

    std::vector<RunCell> cells;
    cells.reserve(rates.size() * buffered_variants.size() * spec.replications);
    for (double rate : rates) {
        for (bool buffered : buffered_variants) {
            for (std::uint64_t k = 0; k < spec.replications; ++k) {
                RunCell cell;
                cell.config = spec.scenario;
                cell.config.mode = engine::with_buffering(spec.scenario.mode, buffered);
                cell.config.seed = spec.seeds[k];
                if (sweeping) {
                    cell.config.traffic = traffic::TrafficModel::poisson(
                        rate, spec.scenario.traffic.packet_size_bits());
                    cell.rate_pps = rate;
                    cell.rate_label = format_rate(rate);
                } else {
                    cell.rate_pps = spec.scenario.traffic.kind() == traffic::TrafficKind::kPoisson
                                        ? spec.scenario.traffic.rate_pps()
                                        : 0.0;
                    cell.rate_label = base_rate_label(spec.scenario);
                }
                cell.mode_label = buffered ? "buffered" : "conventional";
                cell.seed = spec.seeds[k];
                cell.replication = static_cast<std::uint32_t>(k);
                cells.push_back(std::move(cell));
            }
        }
    }
    return cells;
}

std::vector<engine::MetricsRecord> run_cells_serial(const std::vector<RunCell>& cells) {
    std::vector<engine::MetricsRecord> records(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        records[i] = engine::run_scenario(cells[i].config);
    }
    return records;
}

std::vector<engine::MetricsRecord> run_cells(const std::vector<RunCell>& cells,
                                             int max_threads) {
    std::vector<engine::MetricsRecord> records(cells.size());
    const int threads = max_threads > 0 ? max_threads : omp_get_max_threads();
    std::exception_ptr error;

    #pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(cells.size()); ++i) {
        try {
            records[static_cast<std::size_t>(i)] =
                engine::run_scenario(cells[static_cast<std::size_t>(i)].config);
        } catch (...) {
            #pragma omp critical
            {
                if (!error) error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return records;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);

    const auto cells = expand_cells(spec);
    const auto records = run_cells(cells, spec.parallelism);

    ExperimentResult result;
    const double slot_ms = spec.scenario.slot_duration_s * 1e3;

    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (records[i].q_bs_trace.size() == records[i].slots_run &&
            records[i].slots_run > 0) {
            const fs::path path = spec.out_dir / ("trace_" + cells[i].mode_label + "_" +
                                                  cells[i].rate_label + "_" +
                                                  std::to_string(cells[i].seed) + ".csv");
            metrics::write_trace_csv(records[i], path);
            result.files_written.push_back(path);
        }
    }

    // Pooled delay CDF per (mode, rate), replications merged in seed order.
    std::vector<std::pair<std::string, std::string>> groups;  // (mode, rate) in cell order
    for (const auto& cell : cells) {
        const auto key = std::make_pair(cell.mode_label, cell.rate_label);
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) {
            groups.push_back(key);
        }
    }
    for (const auto& [mode_label, rate_label] : groups) {
        std::vector<double> pooled;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].mode_label != mode_label || cells[i].rate_label != rate_label) {
                continue;
            }
            for (const auto& p : records[i].delivered) {
                if (p.delivery_slot > spec.warmup_slots) {
                    pooled.push_back(static_cast<double>(p.delivery_slot - p.arrival_slot));
                }
            }
        }
        if (pooled.empty()) continue;
        const fs::path path =
            spec.out_dir / ("cdf_" + mode_label + "_" + rate_label + ".csv");
        metrics::write_cdf_csv(metrics::delay_cdf(pooled, slot_ms), path);
        result.files_written.push_back(path);
    }

    nlohmann::ordered_json summary;
    summary["out_dir"] = spec.out_dir.string();
    summary["replications"] = spec.replications;
    summary["seeds"] = spec.seeds;
    summary["warmup_slots"] = spec.warmup_slots;
    summary["base_config"] = metrics::config_to_json(spec.scenario);

    nlohmann::ordered_json cell_array = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        nlohmann::ordered_json c;
        c["mode"] = cells[i].mode_label;
        c["rate_label"] = cells[i].rate_label;
        c["rate_pps"] = cells[i].rate_pps;
        c["replication"] = cells[i].replication;
        c["seed"] = cells[i].seed;
        c["summary"] = metrics::summary_json(records[i], spec.warmup_slots);
        cell_array.push_back(std::move(c));
    }
    summary["cells"] = std::move(cell_array);

    nlohmann::ordered_json aggregates = nlohmann::ordered_json::array();
    for (const auto& [mode_label, rate_label] : groups) {
        std::vector<double> pooled_delays;
        std::uint64_t arrived = 0;
        std::uint64_t delivered = 0;
        std::uint64_t censored = 0;
        double duration_s = 0.0;
        double rate_pps = 0.0;
        int bs_stable = 0;
        int relay_stable = 0;
        int classified = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (cells[i].mode_label != mode_label || cells[i].rate_label != rate_label) {
                continue;
            }
            const auto& record = records[i];
            rate_pps = cells[i].rate_pps;
            arrived += record.arrived_packets;
            delivered += record.delivered_packets;
            censored += record.censored_packets;
            duration_s += static_cast<double>(record.slots_run) *
                          record.config.slot_duration_s;
            for (const auto& p : record.delivered) {
                if (p.delivery_slot > spec.warmup_slots) {
                    pooled_delays.push_back(
                        static_cast<double>(p.delivery_slot - p.arrival_slot));
                }
            }
            if (record.q_bs_trace.size() >= 2000) {
                ++classified;
                const double threshold = metrics::default_drift_threshold_bits_per_slot(
                    record.config.traffic.packet_size_bits());
                if (metrics::stability_classify(record.q_bs_trace, threshold).verdict ==
                    metrics::Stability::kStable) {
                    ++bs_stable;
                }
                if (metrics::stability_classify(record.q_relay_trace, threshold).verdict ==
                    metrics::Stability::kStable) {
                    ++relay_stable;
                }
            }
        }
        nlohmann::ordered_json a;
        a["mode"] = mode_label;
        a["rate_label"] = rate_label;
        a["rate_pps"] = rate_pps;
        a["arrived_packets"] = arrived;
        a["delivered_packets"] = delivered;
        a["censored_packets"] = censored;
        a["throughput_pps"] = duration_s > 0.0
                                  ? static_cast<double>(delivered) / duration_s
                                  : 0.0;
        if (!pooled_delays.empty()) {
            a["mean_delay_ms"] = metrics::mean_delay_ms(pooled_delays, slot_ms);
            a["delay_samples"] = pooled_delays.size();
        } else {
            a["mean_delay_ms"] = nullptr;
            a["delay_samples"] = 0;
        }
        a["replications_classified"] = classified;
        a["bs_stable_replications"] = bs_stable;
        a["relay_stable_replications"] = relay_stable;
        aggregates.push_back(std::move(a));
    }
    summary["aggregates"] = std::move(aggregates);

    result.summary_path = spec.out_dir / "summary.json";
    std::ofstream out(result.summary_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + result.summary_path.string());
    }
    out << summary.dump(2) << '\n';
    result.files_written.push_back(result.summary_path);
    return result;
}

} // namespace relaysim::experiment
