#ifndef RELAYSIM_CHANNEL_HPP
#define RELAYSIM_CHANNEL_HPP

#include "relaysim/rng.hpp"

namespace relaysim::channel {

enum class FadingKind { kRayleigh, kRician };

// Block-fading model with unit-mean linear power gain, redrawn i.i.d. each
// slot. Rician kappa is the LOS/scatter power ratio.
class FadingModel {
public:
    static FadingModel rayleigh();
    static FadingModel rician(double k_db);

    FadingKind kind() const { return kind_; }
    double rician_k_db() const { return k_db_; }
    double rician_k_linear() const { return k_linear_; }

private:
    FadingModel(FadingKind kind, double k_db, double k_linear)
        : kind_(kind), k_db_(k_db), k_linear_(k_linear) {}

    FadingKind kind_;
    double k_db_;
    double k_linear_;
};

// Static link parameters. Pathloss follows A + B*log10(d_km).
struct LinkBudget {
    double tx_power_dbm = 0.0;
    double distance_m = 0.0;
    double pathloss_a_db = 0.0;   // intercept at 1 km
    double pathloss_b = 0.0;      // dB per decade of km
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 180e3;
};

// Per-slot realization of one hop.
struct LinkRealization {
    double gain_linear = 0.0;
    double snr_linear = 0.0;
    double rate_bits_full_slot = 0.0;  // capacity if the link used the whole slot
};

double pathloss_db(const LinkBudget& budget);

double noise_power_dbm(double noise_psd_dbm_hz, double bandwidth_hz);

// Mean SNR (fading gain = 1) implied by the budget.
double mean_snr_db(const LinkBudget& budget);

// One unit-mean power-gain draw: |h|^2 with h complex Gaussian around the
// LOS component. Rayleigh is the kappa = 0 special case (Exponential(1)).
double draw_fading_gain(const FadingModel& model, RngStream& rng);

double rate_bits_full_slot(double snr_linear, double bandwidth_hz, double slot_duration_s);

LinkRealization realize_link(const LinkBudget& budget, const FadingModel& model,
                             double slot_duration_s, RngStream& rng);

// Good w.p. p, independently per call. Throws std::invalid_argument outside [0,1].
bool bernoulli_realize(double p, RngStream& rng);

} // namespace relaysim::channel

#endif
