#ifndef RELAYSIM_TRAFFIC_HPP
#define RELAYSIM_TRAFFIC_HPP

#include "relaysim/rng.hpp"

#include <cstdint>
#include <vector>

namespace relaysim::traffic {

// One arrival at the BS buffer. Delivery is tracked by the engine.
struct Packet {
    std::uint64_t id = 0;
    std::uint64_t arrival_slot = 0;
    double size_bits = 0.0;
};

enum class TrafficKind { kDeterministicBits, kPoisson, kSaturated };

class TrafficModel {
public:
    // One 1-bit packet at the start of each slot t = 1..n_bits.
    static TrafficModel deterministic_bits(std::uint64_t n_bits);

    // Poisson(rate * slot duration) packets per slot, each of packet_size_bits.
    static TrafficModel poisson(double rate_pps, double packet_size_bits);

    // Keeps the BS queue topped up to min_backlog_bits so it never empties.
    // Per-packet delay statistics are suppressed for this model.
    static TrafficModel saturated(double packet_size_bits = 1.0,
                                  double min_backlog_bits = 1.0);

    TrafficKind kind() const { return kind_; }
    std::uint64_t n_bits() const { return n_bits_; }
    double rate_pps() const { return rate_pps_; }
    double packet_size_bits() const { return packet_size_bits_; }
    double min_backlog_bits() const { return min_backlog_bits_; }

    bool delay_stats_meaningful() const { return kind_ != TrafficKind::kSaturated; }

private:
    TrafficModel() = default;

    TrafficKind kind_ = TrafficKind::kSaturated;
    std::uint64_t n_bits_ = 0;
    double rate_pps_ = 0.0;
    double packet_size_bits_ = 1.0;
    double min_backlog_bits_ = 1.0;
};

// Packets arriving at the beginning of slot t. next_id is advanced for each
// generated packet; current_bs_backlog_bits is consulted only by the
// saturated model to size its top-up.
std::vector<Packet> arrivals_for_slot(const TrafficModel& model, std::uint64_t t,
                                      double slot_duration_s, RngStream& rng,
                                      std::uint64_t& next_id,
                                      double current_bs_backlog_bits);

} // namespace relaysim::traffic

#endif
