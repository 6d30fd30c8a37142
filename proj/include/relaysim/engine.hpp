#ifndef RELAYSIM_ENGINE_HPP
#define RELAYSIM_ENGINE_HPP

#include "relaysim/analytic.hpp"
#include "relaysim/channel.hpp"
#include "relaysim/rng.hpp"
#include "relaysim/traffic.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

namespace relaysim::engine {

enum class Mode {
    kConventionalBernoulli,
    kBufferedBernoulli,
    kConventionalFading,
    kBufferedFading,
};

bool is_bernoulli(Mode mode);
bool is_buffered(Mode mode);
Mode with_buffering(Mode mode, bool buffered);
const char* mode_name(Mode mode);

enum class SchedulerKind { kFixedSubslots, kMaxWeight };
enum class MwWeightRule { kDifferentialBacklog, kQueueLength };

struct SchedulerPolicy {
    SchedulerKind kind = SchedulerKind::kMaxWeight;
    MwWeightRule weight_rule = MwWeightRule::kDifferentialBacklog;
};

enum class LinkChoice { kBsToRelay, kRelayToUser, kIdle };

// One scheduling decision: weight_1 = (q_bs - q_relay)^+ * r_br under the
// differential-backlog rule (q_bs * r_br under the plain rule), weight_2 =
// q_relay * r_ru. Idle iff both weights are zero; ties go to the relay so
// work already near the destination drains first.
LinkChoice mw_schedule(double q_bs_bits, double q_relay_bits, double r_br_bits,
                       double r_ru_bits,
                       MwWeightRule rule = MwWeightRule::kDifferentialBacklog);

struct BernoulliChannelConfig {
    analytic::ChannelProbs probs;
    // Slots whose joint state is forced to Bad/Bad, strictly increasing.
    std::vector<std::uint64_t> forced_inactive_slots;
};

// Default link budgets for the reference scenario: relay halfway to the cell
// edge, Table-style bandwidth/noise/slot, transmit powers calibrated so the
// conventional scheme saturates near 60 packets/s at 1000-bit packets.
inline constexpr double kDefaultBsTxDbm = -25.0;
inline constexpr double kDefaultRelayTxDbm = -24.0;

struct FadingChannelConfig {
    channel::LinkBudget bs_relay_budget{
        kDefaultBsTxDbm, 500.0, 100.7, 23.5, -174.0, 180e3};
    channel::LinkBudget relay_user_budget{
        kDefaultRelayTxDbm, 500.0, 103.8, 20.9, -174.0, 180e3};
    channel::FadingModel bs_relay_fading = channel::FadingModel::rician(6.0);
    channel::FadingModel relay_user_fading = channel::FadingModel::rayleigh();
};

inline constexpr double kUnlimitedBuffer = std::numeric_limits<double>::infinity();

struct ScenarioConfig {
    Mode mode = Mode::kBufferedFading;
    BernoulliChannelConfig bernoulli;
    FadingChannelConfig fading;
    traffic::TrafficModel traffic = traffic::TrafficModel::poisson(50.0, 1000.0);
    SchedulerPolicy scheduler;
    std::uint64_t horizon_slots = 10000;
    double slot_duration_s = 1e-3;
    std::uint64_t seed = 1;
    double relay_buffer_cap_bits = kUnlimitedBuffer;
    bool record_traces = true;
    bool record_delivery_flags = false;
};

// Throws std::invalid_argument naming the offending field.
void validate(const ScenarioConfig& config);

struct DeliveredPacket {
    std::uint64_t id = 0;
    std::uint64_t arrival_slot = 0;
    std::uint64_t delivery_slot = 0;
    double size_bits = 0.0;
};

struct MetricsRecord {
    ScenarioConfig config;

    // Per-slot traces (present iff config.record_traces). Occupancies are
    // sampled at slot end; delivered_bits_trace is cumulative.
    std::vector<double> q_bs_trace;
    std::vector<double> q_relay_trace;
    std::vector<double> delivered_bits_trace;
    // 1 for each slot that delivered at least one bit (present iff
    // config.record_delivery_flags).
    std::vector<std::uint8_t> delivery_flag_trace;

    // Completed packets in delivery order. Empty for saturated traffic,
    // whose delay statistics are not meaningful.
    std::vector<DeliveredPacket> delivered;

    std::uint64_t slots_run = 0;
    std::uint64_t arrived_packets = 0;
    double arrived_bits = 0.0;
    std::uint64_t delivered_packets = 0;
    std::uint64_t censored_packets = 0;  // still queued at horizon end
    double delivered_bits_total = 0.0;
    std::uint64_t slots_with_delivery = 0;

    // Worst per-slot residual of arrivals = dq_bs + dq_relay + delivered.
    double conservation_max_abs_error = 0.0;

    double delivered_slot_fraction() const {
        return slots_run == 0 ? 0.0
                              : static_cast<double>(slots_with_delivery) /
                                    static_cast<double>(slots_run);
    }
};

// Slotted two-hop simulation. run_scenario drives it start to finish;
// tests can instead construct one and inject per-slot channel states.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& config);

    // Advance one slot with injected channel states (bernoulli modes).
    void step_bernoulli(bool s1_good, bool s2_good);

    // Advance one slot with injected full-slot link rates (fading modes).
    void step_fading(double r_br_bits_full_slot, double r_ru_bits_full_slot);

    // Draw channel states per the configured mode and advance one slot.
    void step_with_drawn_channels();

    std::uint64_t current_slot() const { return slot_; }
    double q_bs_bits() const { return q_bs_bits_; }
    double q_relay_bits() const { return q_relay_bits_; }
    double delivered_bits_total() const { return record_.delivered_bits_total; }

    // Finalizes censored-packet accounting and yields the record.
    MetricsRecord finish();

private:
    struct InFlight {
        std::uint64_t id;
        std::uint64_t arrival_slot;
        double size_bits;
        double bs_remaining_bits;  // not yet transferred to the relay
        double relay_bits;         // at the relay, not yet delivered
    };

    void begin_slot();
    void end_slot();
    double relay_space() const;
    double transfer_bs_to_relay(double budget_bits);
    double transfer_relay_to_user(double budget_bits);
    double deliver_end_to_end(double budget_bits);
    void complete_front_packet();

    ScenarioConfig config_;
    MetricsRecord record_;

    RngStream link1_rng_;
    RngStream link2_rng_;
    RngStream traffic_rng_;

    double snr_mean_linear1_ = 0.0;
    double snr_mean_linear2_ = 0.0;

    std::deque<InFlight> flight_;
    std::size_t hop1_index_ = 0;  // first packet with bits still at the BS
    double q_bs_bits_ = 0.0;
    double q_relay_bits_ = 0.0;

    std::uint64_t slot_ = 0;
    std::uint64_t next_packet_id_ = 1;
    std::size_t forced_inactive_cursor_ = 0;

    // Per-slot accounting between begin_slot and end_slot.
    double arrivals_bits_this_slot_ = 0.0;
    double delivered_bits_this_slot_ = 0.0;
    double q_bs_at_slot_start_ = 0.0;
    double q_relay_at_slot_start_ = 0.0;
};

MetricsRecord run_scenario(const ScenarioConfig& config);

} // namespace relaysim::engine

#endif
