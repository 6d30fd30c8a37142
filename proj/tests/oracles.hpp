#ifndef RELAYSIM_TESTS_ORACLES_HPP
#define RELAYSIM_TESTS_ORACLES_HPP

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

// Brute-force reference simulators, written naively and kept independent of
// the library implementation so they can serve as oracles.
namespace oracles {

// Single buffer fed one bit per slot (bit i arrives at slot i, i = 1..n_bits),
// served one bit per slot whenever the slot is not in `inactive`. A bit served
// in slot t reaches the destination at slot t + 1. Returns the delivery slot
// of every bit, index 0 holding bit 1.
std::vector<std::uint64_t> single_queue_delivery_slots(
    std::uint64_t n_bits, const std::set<std::uint64_t>& inactive);

struct BernoulliSlotState {
    long q_bs = 0;
    long q_relay = 0;
    long delivered_cum = 0;
};

struct BernoulliTrace {
    std::vector<BernoulliSlotState> per_slot;           // state at end of each slot
    std::vector<std::uint64_t> delivery_slot_per_bit;   // k-th delivered bit = bit k+1
};

// Two-hop relay with Good/Bad links, one bit per sub-slot. Deterministic
// arrivals (bit i at slot i, i <= n_bits) or a saturated source when
// saturated = true. relay_cap < 0 means unlimited.
BernoulliTrace brute_bernoulli(bool buffered, bool saturated, long n_bits,
                               const std::vector<std::pair<bool, bool>>& states,
                               long relay_cap);

} // namespace oracles

#endif
