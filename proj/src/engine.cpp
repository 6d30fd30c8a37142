#include "relaysim/engine.hpp"

#include "relaysim/units.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relaysim::engine {

bool is_bernoulli(Mode mode) {
    return mode == Mode::kConventionalBernoulli || mode == Mode::kBufferedBernoulli;
}

bool is_buffered(Mode mode) {
    return mode == Mode::kBufferedBernoulli || mode == Mode::kBufferedFading;
}

Mode with_buffering(Mode mode, bool buffered) {
    if (is_bernoulli(mode)) {
        return buffered ? Mode::kBufferedBernoulli : Mode::kConventionalBernoulli;
    }
    return buffered ? Mode::kBufferedFading : Mode::kConventionalFading;
}

const char* mode_name(Mode mode) {
    switch (mode) {
    case Mode::kConventionalBernoulli: return "conventional_bernoulli";
    case Mode::kBufferedBernoulli: return "buffered_bernoulli";
    case Mode::kConventionalFading: return "conventional_fading";
    case Mode::kBufferedFading: return "buffered_fading";
    }
    return "unknown";
}

LinkChoice mw_schedule(double q_bs_bits, double q_relay_bits, double r_br_bits,
                       double r_ru_bits, MwWeightRule rule) {
    const double backlog = rule == MwWeightRule::kDifferentialBacklog
                               ? std::max(q_bs_bits - q_relay_bits, 0.0)
                               : q_bs_bits;
    const double weight_bs = backlog * r_br_bits;
    const double weight_relay = q_relay_bits * r_ru_bits;
    if (weight_bs == 0.0 && weight_relay == 0.0) {
        return LinkChoice::kIdle;
    }
    return weight_bs > weight_relay ? LinkChoice::kBsToRelay : LinkChoice::kRelayToUser;
}

void validate(const ScenarioConfig& config) {
    if (config.horizon_slots < 1) {
        throw std::invalid_argument("ScenarioConfig.horizon_slots: must be >= 1");
    }
    if (!(config.slot_duration_s > 0.0)) {
        throw std::invalid_argument("ScenarioConfig.slot_duration_s: must be > 0");
    }
    if (!(config.relay_buffer_cap_bits >= 1.0)) {
        throw std::invalid_argument(
            "ScenarioConfig.relay_buffer_cap_bits: must be >= 1 (or unlimited)");
    }
    if (is_bernoulli(config.mode)) {
        try {
            analytic::validate(config.bernoulli.probs);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("ScenarioConfig.bernoulli: ") + e.what());
        }
        std::uint64_t prev = 0;
        for (std::uint64_t s : config.bernoulli.forced_inactive_slots) {
            if (s < 1 || s <= prev) {
                throw std::invalid_argument(
                    "ScenarioConfig.bernoulli.forced_inactive_slots: must be strictly "
                    "increasing and >= 1");
            }
            prev = s;
        }
    } else {
        for (const auto* budget : {&config.fading.bs_relay_budget,
                                   &config.fading.relay_user_budget}) {
            if (!(budget->distance_m > 0.0)) {
                throw std::invalid_argument("ScenarioConfig.fading: distance_m must be > 0");
            }
            if (!(budget->bandwidth_hz > 0.0)) {
                throw std::invalid_argument("ScenarioConfig.fading: bandwidth_hz must be > 0");
            }
        }
    }
}

Simulation::Simulation(const ScenarioConfig& config)
    : config_(config),
      link1_rng_(config.seed, StreamId::kLinkBsRelay),
      link2_rng_(config.seed, StreamId::kLinkRelayUser),
      traffic_rng_(config.seed, StreamId::kTraffic) {
    validate(config_);
    record_.config = config_;
    if (!is_bernoulli(config_.mode)) {
        snr_mean_linear1_ = db_to_linear(channel::mean_snr_db(config_.fading.bs_relay_budget));
        snr_mean_linear2_ = db_to_linear(channel::mean_snr_db(config_.fading.relay_user_budget));
    }
    if (config_.record_traces) {
        record_.q_bs_trace.reserve(config_.horizon_slots);
        record_.q_relay_trace.reserve(config_.horizon_slots);
        record_.delivered_bits_trace.reserve(config_.horizon_slots);
    }
    if (config_.record_delivery_flags) {
        record_.delivery_flag_trace.reserve(config_.horizon_slots);
    }
}

void Simulation::begin_slot() {
    ++slot_;
    q_bs_at_slot_start_ = q_bs_bits_;
    q_relay_at_slot_start_ = q_relay_bits_;
    arrivals_bits_this_slot_ = 0.0;
    delivered_bits_this_slot_ = 0.0;

    // Arrivals occur at the beginning of the slot, before any service.
    const auto arrivals = traffic::arrivals_for_slot(
        config_.traffic, slot_, config_.slot_duration_s, traffic_rng_,
        next_packet_id_, q_bs_bits_);
    for (const auto& packet : arrivals) {
        flight_.push_back(InFlight{packet.id, packet.arrival_slot, packet.size_bits,
                                   packet.size_bits, 0.0});
        q_bs_bits_ += packet.size_bits;
        arrivals_bits_this_slot_ += packet.size_bits;
        ++record_.arrived_packets;
        record_.arrived_bits += packet.size_bits;
    }
}

void Simulation::end_slot() {
    record_.delivered_bits_total += delivered_bits_this_slot_;
    const bool delivered_any = delivered_bits_this_slot_ > 0.0;
    if (delivered_any) {
        ++record_.slots_with_delivery;
    }
    if (config_.record_traces) {
        record_.q_bs_trace.push_back(q_bs_bits_);
        record_.q_relay_trace.push_back(q_relay_bits_);
        record_.delivered_bits_trace.push_back(record_.delivered_bits_total);
    }
    if (config_.record_delivery_flags) {
        record_.delivery_flag_trace.push_back(delivered_any ? 1 : 0);
    }
    const double residual =
        arrivals_bits_this_slot_ -
        ((q_bs_bits_ - q_bs_at_slot_start_) + (q_relay_bits_ - q_relay_at_slot_start_) +
         delivered_bits_this_slot_);
    record_.conservation_max_abs_error =
        std::max(record_.conservation_max_abs_error, std::fabs(residual));
    ++record_.slots_run;
}

double Simulation::relay_space() const {
    if (config_.relay_buffer_cap_bits == kUnlimitedBuffer) {
        return kUnlimitedBuffer;
    }
    return std::max(config_.relay_buffer_cap_bits - q_relay_bits_, 0.0);
}

void Simulation::complete_front_packet() {
    const InFlight& p = flight_.front();
    if (config_.traffic.delay_stats_meaningful()) {
        record_.delivered.push_back(
            DeliveredPacket{p.id, p.arrival_slot, slot_ + 1, p.size_bits});
    }
    ++record_.delivered_packets;
    flight_.pop_front();
    if (hop1_index_ > 0) {
        --hop1_index_;
    }
}

double Simulation::transfer_bs_to_relay(double budget_bits) {
    double moved = 0.0;
    while (budget_bits > 0.0 && hop1_index_ < flight_.size()) {
        InFlight& p = flight_[hop1_index_];
        const double part = std::min(p.bs_remaining_bits, budget_bits);
        p.bs_remaining_bits -= part;
        p.relay_bits += part;
        budget_bits -= part;
        moved += part;
        if (p.bs_remaining_bits == 0.0) {
            ++hop1_index_;
        }
    }
    q_bs_bits_ -= moved;
    q_relay_bits_ += moved;
    return moved;
}

double Simulation::transfer_relay_to_user(double budget_bits) {
    double moved = 0.0;
    while (budget_bits > 0.0 && !flight_.empty()) {
        InFlight& p = flight_.front();
        if (p.relay_bits == 0.0) {
            break;  // next in-order bit is still upstream
        }
        const double part = std::min(p.relay_bits, budget_bits);
        p.relay_bits -= part;
        budget_bits -= part;
        moved += part;
        if (p.relay_bits == 0.0 && p.bs_remaining_bits == 0.0) {
            complete_front_packet();
        } else if (p.relay_bits == 0.0) {
            break;
        }
    }
    q_relay_bits_ -= moved;
    delivered_bits_this_slot_ += moved;
    return moved;
}

double Simulation::deliver_end_to_end(double budget_bits) {
    double moved = 0.0;
    while (budget_bits > 0.0 && !flight_.empty()) {
        InFlight& p = flight_.front();
        const double part = std::min(p.bs_remaining_bits, budget_bits);
        p.bs_remaining_bits -= part;
        budget_bits -= part;
        moved += part;
        if (p.bs_remaining_bits == 0.0) {
            complete_front_packet();
        }
    }
    q_bs_bits_ -= moved;
    delivered_bits_this_slot_ += moved;
    return moved;
}

void Simulation::step_bernoulli(bool s1_good, bool s2_good) {
    if (!is_bernoulli(config_.mode)) {
        throw std::logic_error("step_bernoulli called on a fading-mode simulation");
    }
    begin_slot();
    if (config_.mode == Mode::kConventionalBernoulli) {
        // The overall server moves one bit end to end only on a Good/Good slot;
        // the relay keeps nothing across slots.
        if (s1_good && s2_good) {
            deliver_end_to_end(1.0);
        }
    } else {
        // Sub-slot A: BS -> relay; sub-slot B: relay -> user. A bit stored in
        // A may leave in B of the same slot.
        if (s1_good) {
            transfer_bs_to_relay(std::min(1.0, relay_space()));
        }
        if (s2_good) {
            transfer_relay_to_user(1.0);
        }
    }
    end_slot();
}

void Simulation::step_fading(double r_br_bits_full_slot, double r_ru_bits_full_slot) {
    if (is_bernoulli(config_.mode)) {
        throw std::logic_error("step_fading called on a bernoulli-mode simulation");
    }
    begin_slot();
    if (config_.mode == Mode::kConventionalFading) {
        deliver_end_to_end(0.5 * std::min(r_br_bits_full_slot, r_ru_bits_full_slot));
    } else {
        for (int epoch = 0; epoch < 2; ++epoch) {
            LinkChoice choice;
            if (config_.scheduler.kind == SchedulerKind::kFixedSubslots) {
                choice = epoch == 0 ? LinkChoice::kBsToRelay : LinkChoice::kRelayToUser;
            } else {
                choice = mw_schedule(q_bs_bits_, q_relay_bits_, r_br_bits_full_slot,
                                     r_ru_bits_full_slot, config_.scheduler.weight_rule);
            }
            if (choice == LinkChoice::kBsToRelay) {
                transfer_bs_to_relay(std::min(0.5 * r_br_bits_full_slot, relay_space()));
            } else if (choice == LinkChoice::kRelayToUser) {
                transfer_relay_to_user(0.5 * r_ru_bits_full_slot);
            }
        }
    }
    end_slot();
}

void Simulation::step_with_drawn_channels() {
    if (is_bernoulli(config_.mode)) {
        bool s1 = channel::bernoulli_realize(config_.bernoulli.probs.p1, link1_rng_);
        bool s2 = channel::bernoulli_realize(config_.bernoulli.probs.p2, link2_rng_);
        const auto& forced = config_.bernoulli.forced_inactive_slots;
        const std::uint64_t upcoming = slot_ + 1;
        while (forced_inactive_cursor_ < forced.size() &&
               forced[forced_inactive_cursor_] < upcoming) {
            ++forced_inactive_cursor_;
        }
        if (forced_inactive_cursor_ < forced.size() &&
            forced[forced_inactive_cursor_] == upcoming) {
            s1 = false;
            s2 = false;
        }
        step_bernoulli(s1, s2);
    } else {
        const double g1 = channel::draw_fading_gain(config_.fading.bs_relay_fading, link1_rng_);
        const double g2 = channel::draw_fading_gain(config_.fading.relay_user_fading, link2_rng_);
        const double r1 = channel::rate_bits_full_slot(
            snr_mean_linear1_ * g1, config_.fading.bs_relay_budget.bandwidth_hz,
            config_.slot_duration_s);
        const double r2 = channel::rate_bits_full_slot(
            snr_mean_linear2_ * g2, config_.fading.relay_user_budget.bandwidth_hz,
            config_.slot_duration_s);
        step_fading(r1, r2);
    }
}

MetricsRecord Simulation::finish() {
    record_.censored_packets = record_.arrived_packets - record_.delivered_packets;
    return std::move(record_);
}

MetricsRecord run_scenario(const ScenarioConfig& config) {
    Simulation sim(config);
    for (std::uint64_t t = 0; t < config.horizon_slots; ++t) {
        sim.step_with_drawn_channels();
    }
    return sim.finish();
}

} // namespace relaysim::engine
