#include "relaysim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relaysim::analytic {

void validate(const ChannelProbs& p) {
    if (!(p.p1 >= 0.0 && p.p1 <= 1.0)) {
        throw std::invalid_argument("ChannelProbs.p1 must lie in [0,1], got " +
                                    std::to_string(p.p1));
    }
    if (!(p.p2 >= 0.0 && p.p2 <= 1.0)) {
        throw std::invalid_argument("ChannelProbs.p2 must lie in [0,1], got " +
                                    std::to_string(p.p2));
    }
}

JointStateDistribution joint_state_probs(const ChannelProbs& p) {
    validate(p);
    JointStateDistribution d;
    d.gg = p.p1 * p.p2;
    d.gb = p.p1 * (1.0 - p.p2);
    d.bg = (1.0 - p.p1) * p.p2;
    d.bb = (1.0 - p.p1) * (1.0 - p.p2);
    return d;
}

double interruption_prob_conventional(const ChannelProbs& p) {
    validate(p);
    return 1.0 - p.p1 * p.p2;
}

InactiveSlotSet::InactiveSlotSet(std::vector<std::uint64_t> slots)
    : slots_(std::move(slots)) {
    std::uint64_t prev = 0;
    for (std::uint64_t s : slots_) {
        if (s < 1) {
            throw std::invalid_argument("InactiveSlotSet: slot indices must be >= 1");
        }
        if (s <= prev) {
            throw std::invalid_argument("InactiveSlotSet: slots must be strictly increasing");
        }
        prev = s;
    }
}

std::uint64_t InactiveSlotSet::count_up_to(std::uint64_t slot) const {
    auto it = std::upper_bound(slots_.begin(), slots_.end(), slot);
    return static_cast<std::uint64_t>(it - slots_.begin());
}

std::uint64_t deterministic_delivery_slot(std::uint64_t arrival_slot,
                                          const InactiveSlotSet& inactive) {
    if (arrival_slot < 1) {
        throw std::invalid_argument("deterministic_delivery_slot: arrival_slot must be >= 1");
    }
    // Service happens in the arrival_slot-th active slot; each inactive slot
    // at or below the current candidate pushes the service one slot later.
    std::uint64_t service_slot = arrival_slot;
    for (std::uint64_t x : inactive.slots()) {
        if (x <= service_slot) {
            ++service_slot;
        } else {
            break;
        }
    }
    return service_slot + 1;
}

namespace {

// Gaussian elimination with partial pivoting; a is row-major n x n.
// Solves in place, returns x. Throws std::runtime_error on a null pivot.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a[static_cast<size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a[static_cast<size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-14) {
            throw std::runtime_error("buffered chain: balance equations are singular");
        }
        if (pivot != col) {
            for (int c = col; c < n; ++c) {
                std::swap(a[static_cast<size_t>(pivot) * n + c],
                          a[static_cast<size_t>(col) * n + c]);
            }
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[static_cast<size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<size_t>(r) * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) {
                a[static_cast<size_t>(r) * n + c] -= f * a[static_cast<size_t>(col) * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(static_cast<size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) {
            acc -= a[static_cast<size_t>(r) * n + c] * x[c];
        }
        x[r] = acc / a[static_cast<size_t>(r) * n + r];
    }
    return x;
}

} // namespace

BufferedChainSolution solve_buffered_bernoulli_chain(const ChannelProbs& p,
                                                     int buffer_cap) {
    validate(p);
    if (buffer_cap < 1) {
        throw std::invalid_argument("solve_buffered_bernoulli_chain: buffer_cap must be >= 1");
    }
    const int n = buffer_cap + 1;
    const double p1 = p.p1;
    const double p2 = p.p2;

    // Transition probabilities for occupancy q at slot start. Sub-slot A
    // admits a bit w.p. p1 unless full; sub-slot B removes one w.p. p2 when
    // a bit is present, including one admitted in this same slot.
    auto row = [&](int q, int to) -> double {
        if (q == 0) {
            if (to == 0) return p1 * p2 + (1.0 - p1);
            if (to == 1) return p1 * (1.0 - p2);
            return 0.0;
        }
        if (q == buffer_cap) {
            if (to == q - 1) return p2;
            if (to == q) return 1.0 - p2;
            return 0.0;
        }
        if (to == q - 1) return (1.0 - p1) * p2;
        if (to == q) return p1 * p2 + (1.0 - p1) * (1.0 - p2);
        if (to == q + 1) return p1 * (1.0 - p2);
        return 0.0;
    };

    // Global balance: for each state j, sum_q pi_q P(q,j) - pi_j = 0; the last
    // equation is replaced by the normalization sum_q pi_q = 1.
    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n - 1; ++j) {
        for (int q = 0; q < n; ++q) {
            a[static_cast<size_t>(j) * n + q] = row(q, j);
        }
        a[static_cast<size_t>(j) * n + j] -= 1.0;
    }
    for (int q = 0; q < n; ++q) {
        a[static_cast<size_t>(n - 1) * n + q] = 1.0;
    }
    b[static_cast<size_t>(n - 1)] = 1.0;

    BufferedChainSolution sol;
    sol.stationary = solve_dense(std::move(a), std::move(b), n);
    for (double& v : sol.stationary) {
        if (v < 0.0 && v > -1e-12) v = 0.0;  // scrub solver round-off
    }

    // A slot delivers with prob p1*p2 from an empty relay (the bit must first
    // arrive) and with prob p2 otherwise.
    const double pi0 = sol.stationary[0];
    sol.delivery_prob = pi0 * p1 * p2 + (1.0 - pi0) * p2;
    return sol;
}

} // namespace relaysim::analytic
