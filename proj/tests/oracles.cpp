#include "oracles.hpp"

#include <deque>

namespace oracles {

std::vector<std::uint64_t> single_queue_delivery_slots(
    std::uint64_t n_bits, const std::set<std::uint64_t>& inactive) {
    std::vector<std::uint64_t> delivery(n_bits, 0);
    std::deque<std::uint64_t> queue;
    std::uint64_t served = 0;
    for (std::uint64_t t = 1; served < n_bits; ++t) {
        if (t <= n_bits) {
            queue.push_back(t);
        }
        if (inactive.count(t) == 0 && !queue.empty()) {
            const std::uint64_t bit = queue.front();
            queue.pop_front();
            delivery[bit - 1] = t + 1;
            ++served;
        }
    }
    return delivery;
}

BernoulliTrace brute_bernoulli(bool buffered, bool saturated, long n_bits,
                               const std::vector<std::pair<bool, bool>>& states,
                               long relay_cap) {
    BernoulliTrace trace;
    long q_bs = 0;
    long q_relay = 0;
    long delivered = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::uint64_t t = i + 1;
        if (saturated) {
            if (q_bs < 1) {
                q_bs = 1;
            }
        } else if (static_cast<long>(t) <= n_bits) {
            ++q_bs;
        }
        const bool s1 = states[i].first;
        const bool s2 = states[i].second;
        if (buffered) {
            if (s1 && q_bs > 0 && (relay_cap < 0 || q_relay < relay_cap)) {
                --q_bs;
                ++q_relay;
            }
            if (s2 && q_relay > 0) {
                --q_relay;
                ++delivered;
                trace.delivery_slot_per_bit.push_back(t + 1);
            }
        } else {
            if (s1 && s2 && q_bs > 0) {
                --q_bs;
                ++delivered;
                trace.delivery_slot_per_bit.push_back(t + 1);
            }
        }
        trace.per_slot.push_back(BernoulliSlotState{q_bs, q_relay, delivered});
    }
    return trace;
}

} // namespace oracles
