#ifndef RELAYSIM_ANALYTIC_HPP
#define RELAYSIM_ANALYTIC_HPP

#include <cstdint>
#include <vector>

namespace relaysim::analytic {

// Probability of each hop being Good in the two-state (Good/Bad) channel
// abstraction: p1 for BS->relay, p2 for relay->user.
struct ChannelProbs {
    double p1 = 1.0;
    double p2 = 1.0;
};

// Throws std::invalid_argument if either probability is outside [0,1].
void validate(const ChannelProbs& p);

// Joint distribution of the two hop states in one slot (independent hops).
struct JointStateDistribution {
    double gg = 0.0;
    double gb = 0.0;
    double bg = 0.0;
    double bb = 0.0;
};

JointStateDistribution joint_state_probs(const ChannelProbs& p);

// Per-slot probability that the end-to-end conventional (immediate-forward)
// server is interrupted: 1 - p1*p2.
double interruption_prob_conventional(const ChannelProbs& p);

// Slots in which the overall server is inactive, for the deterministic
// one-bit-per-slot scenario. Indices are 1-based, strictly increasing.
class InactiveSlotSet {
public:
    InactiveSlotSet() = default;

    // Throws std::invalid_argument unless slots are strictly increasing and >= 1.
    explicit InactiveSlotSet(std::vector<std::uint64_t> slots);

    const std::vector<std::uint64_t>& slots() const { return slots_; }

    // Number of inactive slots <= slot.
    std::uint64_t count_up_to(std::uint64_t slot) const;

private:
    std::vector<std::uint64_t> slots_;
};

// Delivery slot of the bit arriving at slot i in the single-queue system fed
// one bit per slot and served one bit per active slot: the bit is served in
// the i-th active slot s_i and delivered at s_i + 1. Equivalently
// i + n_i + 1, with n_i the number of interruptions the bit sees before its
// service completes. Exact for arbitrary inactive sets.
std::uint64_t deterministic_delivery_slot(std::uint64_t arrival_slot,
                                          const InactiveSlotSet& inactive);

// Stationary behaviour of the relay occupancy chain for the buffered
// Bernoulli system under a saturated BS source. States are relay occupancies
// 0..buffer_cap measured at slot start; one slot is: arrival to the relay
// w.p. p1 if not full, then departure w.p. p2 if any bit is present
// (including one that just arrived).
struct BufferedChainSolution {
    std::vector<double> stationary;   // index = occupancy, sums to 1
    double delivery_prob = 0.0;       // long-run fraction of slots delivering a bit

    double interruption_prob() const { return 1.0 - delivery_prob; }
};

// Throws std::invalid_argument for buffer_cap < 1 or invalid probabilities;
// std::runtime_error if the balance-equation solve degenerates.
BufferedChainSolution solve_buffered_bernoulli_chain(const ChannelProbs& p,
                                                     int buffer_cap);

} // namespace relaysim::analytic

#endif
