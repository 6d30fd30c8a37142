#include "relaysim/traffic.hpp"

#include <random>
#include <stdexcept>

namespace relaysim::traffic {

TrafficModel TrafficModel::deterministic_bits(std::uint64_t n_bits) {
    if (n_bits < 1) {
        throw std::invalid_argument("TrafficModel::deterministic_bits: n_bits must be >= 1");
    }
    TrafficModel m;
    m.kind_ = TrafficKind::kDeterministicBits;
    m.n_bits_ = n_bits;
    m.packet_size_bits_ = 1.0;
    return m;
}

TrafficModel TrafficModel::poisson(double rate_pps, double packet_size_bits) {
    if (!(rate_pps >= 0.0)) {
        throw std::invalid_argument("TrafficModel::poisson: rate_pps must be >= 0");
    }
    if (!(packet_size_bits >= 1.0)) {
        throw std::invalid_argument("TrafficModel::poisson: packet_size_bits must be >= 1");
    }
    TrafficModel m;
    m.kind_ = TrafficKind::kPoisson;
    m.rate_pps_ = rate_pps;
    m.packet_size_bits_ = packet_size_bits;
    return m;
}

TrafficModel TrafficModel::saturated(double packet_size_bits, double min_backlog_bits) {
    if (!(packet_size_bits >= 1.0)) {
        throw std::invalid_argument("TrafficModel::saturated: packet_size_bits must be >= 1");
    }
    if (!(min_backlog_bits >= 1.0)) {
        throw std::invalid_argument("TrafficModel::saturated: min_backlog_bits must be >= 1");
    }
    TrafficModel m;
    m.kind_ = TrafficKind::kSaturated;
    m.packet_size_bits_ = packet_size_bits;
    m.min_backlog_bits_ = min_backlog_bits;
    return m;
}

std::vector<Packet> arrivals_for_slot(const TrafficModel& model, std::uint64_t t,
                                      double slot_duration_s, RngStream& rng,
                                      std::uint64_t& next_id,
                                      double current_bs_backlog_bits) {
    if (t < 1) {
        throw std::invalid_argument("arrivals_for_slot: slot index must be >= 1");
    }
    std::vector<Packet> out;
    switch (model.kind()) {
    case TrafficKind::kDeterministicBits:
        if (t <= model.n_bits()) {
            out.push_back(Packet{next_id++, t, 1.0});
        }
        break;
    case TrafficKind::kPoisson: {
        const double mean = model.rate_pps() * slot_duration_s;
        if (mean > 0.0) {
            std::poisson_distribution<unsigned> count(mean);
            const unsigned n = count(rng.engine());
            out.reserve(n);
            for (unsigned i = 0; i < n; ++i) {
                out.push_back(Packet{next_id++, t, model.packet_size_bits()});
            }
        }
        break;
    }
    case TrafficKind::kSaturated: {
        double backlog = current_bs_backlog_bits;
        while (backlog < model.min_backlog_bits()) {
            out.push_back(Packet{next_id++, t, model.packet_size_bits()});
            backlog += model.packet_size_bits();
        }
        break;
    }
    }
    return out;
}

} // namespace relaysim::traffic
