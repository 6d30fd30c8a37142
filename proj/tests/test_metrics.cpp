#include "relaysim/metrics.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

using namespace relaysim;
using namespace relaysim::metrics;

TEST_SUITE_BEGIN("metrics");

namespace {

MetricsRecord synthetic_record(std::uint64_t slots, std::uint64_t packets,
                               double size_bits = 1000.0) {
    MetricsRecord record;
    record.slots_run = slots;
    record.config.slot_duration_s = 1e-3;
    for (std::uint64_t i = 0; i < packets; ++i) {
        const std::uint64_t arrival = 1 + (i * slots) / (packets + 1);
        record.delivered.push_back(
            engine::DeliveredPacket{i + 1, arrival, arrival + 2, size_bits});
    }
    record.delivered_packets = packets;
    return record;
}

double integral_of_complement(const std::vector<CdfPoint>& cdf) {
    double integral = 0.0;
    double prev_x = 0.0;
    double prev_f = 0.0;
    for (const auto& point : cdf) {
        integral += (point.delay_ms - prev_x) * (1.0 - prev_f);
        prev_x = point.delay_ms;
        prev_f = point.cum_prob;
    }
    return integral;
}

} // namespace

TEST_CASE("delay cdf: pinned cases") {
    auto cdf = delay_cdf({1, 1, 1}, 1.0);
    REQUIRE(cdf.size() == 1);
    CHECK(cdf[0].delay_ms == 1.0);
    CHECK(cdf[0].cum_prob == 1.0);

    cdf = delay_cdf({1, 2, 2, 5}, 1.0);
    REQUIRE(cdf.size() == 3);
    CHECK(cdf[0].delay_ms == 1.0);
    CHECK(cdf[0].cum_prob == doctest::Approx(0.25));
    CHECK(cdf[1].delay_ms == 2.0);
    CHECK(cdf[1].cum_prob == doctest::Approx(0.75));
    CHECK(cdf[2].delay_ms == 5.0);
    CHECK(cdf[2].cum_prob == 1.0);

    CHECK_THROWS_AS(delay_cdf({}, 1.0), std::invalid_argument);
}

TEST_CASE("delay cdf of an uninterrupted deterministic run is degenerate at 1 ms") {
    engine::ScenarioConfig cfg;
    cfg.mode = engine::Mode::kConventionalBernoulli;
    cfg.bernoulli.probs = {1.0, 1.0};
    cfg.traffic = traffic::TrafficModel::deterministic_bits(50);
    cfg.horizon_slots = 60;
    const auto record = engine::run_scenario(cfg);
    const auto cdf = delay_cdf(delays_in_slots(record), 1.0);
    REQUIRE(cdf.size() == 1);
    CHECK(cdf[0].delay_ms == 1.0);
    CHECK(cdf[0].cum_prob == 1.0);
}

TEST_CASE("cdf is monotone, bounded and ends at exactly one") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> delay(1, 40);
    std::uniform_int_distribution<int> count(1, 400);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> samples;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) samples.push_back(delay(rng));
        const auto cdf = delay_cdf(samples, 0.5);
        double prev = 0.0;
        for (const auto& point : cdf) {
            CHECK(point.cum_prob > prev);
            CHECK(point.cum_prob <= 1.0);
            prev = point.cum_prob;
        }
        CHECK(cdf.back().cum_prob == 1.0);
    }
}

TEST_CASE("mean delay: pinned cases and CDF integral identity") {
    CHECK(mean_delay_ms({10, 14}, 1.0) == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(mean_delay_ms({1}, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(mean_delay_ms({}, 1.0), std::invalid_argument);

    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> delay(1, 200);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> samples;
        for (int i = 0; i < 150; ++i) samples.push_back(delay(rng));
        const double mean = mean_delay_ms(samples, 1.0);
        const double integral = integral_of_complement(delay_cdf(samples, 1.0));
        CHECK(integral == doctest::Approx(mean).epsilon(1e-9));
    }
}

TEST_CASE("throughput: arithmetic and window handling") {
    const auto record = synthetic_record(10000, 500);
    const auto tp = throughput(record, full_window(record));
    CHECK(tp.packets == 500);
    CHECK(tp.packets_per_s == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(tp.bits_per_slot == doctest::Approx(500.0 * 1000.0 / 10000.0).epsilon(1e-12));
    // throughput * duration returns the exact count
    CHECK(tp.packets_per_s * 10.0 == doctest::Approx(500.0).epsilon(1e-12));

    const auto empty = synthetic_record(100, 0);
    CHECK(throughput(empty, full_window(empty)).packets_per_s == 0.0);

    CHECK_THROWS_AS(throughput(record, Window{0, 10}), std::invalid_argument);
    CHECK_THROWS_AS(throughput(record, Window{20, 10}), std::invalid_argument);
    CHECK_THROWS_AS(throughput(record, Window{1, 10001}), std::invalid_argument);

    MetricsRecord saturated = synthetic_record(3000, 0);
    saturated.delivered_packets = 1200;  // counters only, no per-packet data
    CHECK_THROWS_AS(throughput(saturated, full_window(saturated)), std::invalid_argument);
}

TEST_CASE("stability classification") {
    std::vector<double> constant(3000, 42.0);
    auto result = stability_classify(constant, 10.0);
    CHECK(result.verdict == Stability::kStable);
    CHECK(result.drift_bits_per_slot == doctest::Approx(0.0));

    std::vector<double> ramp;
    for (int t = 1; t <= 3000; ++t) ramp.push_back(100.0 * t);
    result = stability_classify(ramp, 10.0);
    CHECK(result.verdict == Stability::kUnstable);
    CHECK(result.drift_bits_per_slot == doctest::Approx(100.0).epsilon(1e-9));

    CHECK_THROWS_AS(stability_classify(std::vector<double>(1999, 1.0), 10.0),
                    std::invalid_argument);

    CHECK(default_drift_threshold_bits_per_slot(1000.0) == doctest::Approx(10.0));
}

TEST_CASE("trace csv layout") {
    engine::ScenarioConfig cfg;
    cfg.mode = engine::Mode::kConventionalBernoulli;
    cfg.bernoulli.probs = {1.0, 1.0};
    cfg.traffic = traffic::TrafficModel::deterministic_bits(2);
    cfg.horizon_slots = 3;
    const auto record = engine::run_scenario(cfg);

    const auto path = std::filesystem::temp_directory_path() / "relaysim_trace_test.csv";
    write_trace_csv(record, path);
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(buffer.str() ==
          "slot,q_bs_bits,q_relay_bits,delivered_bits_cum\n"
          "1,0,0,1\n"
          "2,0,0,2\n"
          "3,0,0,2\n");
    std::filesystem::remove(path);
}

TEST_CASE("cdf csv layout") {
    const auto path = std::filesystem::temp_directory_path() / "relaysim_cdf_test.csv";
    write_cdf_csv({{1.0, 0.25}, {2.5, 1.0}}, path);
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(buffer.str() == "delay_ms,cum_prob\n1,0.25\n2.5,1\n");
    std::filesystem::remove(path);
}

TEST_CASE("summary json carries the essentials") {
    engine::ScenarioConfig cfg;
    cfg.mode = engine::Mode::kBufferedFading;
    cfg.traffic = traffic::TrafficModel::poisson(50, 1000);
    cfg.horizon_slots = 2500;
    cfg.seed = 42;
    const auto record = engine::run_scenario(cfg);
    const auto j = summary_json(record);
    CHECK(j["mode"] == "buffered_fading");
    CHECK(j["seed"] == 42);
    CHECK(j["slots_run"] == 2500);
    CHECK(j["arrived_packets"].get<std::uint64_t>() ==
          record.delivered_packets + record.censored_packets);
    CHECK(j["config"]["traffic"]["rate_pps"] == 50.0);
    CHECK(j["stability"].contains("bs"));
}

TEST_SUITE_END();
