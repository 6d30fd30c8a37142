#include "relaysim/channel.hpp"

#include "relaysim/units.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace relaysim::channel {

FadingModel FadingModel::rayleigh() {
    return FadingModel(FadingKind::kRayleigh, 0.0, 0.0);
}

FadingModel FadingModel::rician(double k_db) {
    if (!std::isfinite(k_db)) {
        throw std::invalid_argument("FadingModel: Rician kappa (dB) must be finite");
    }
    const double k_linear = db_to_linear(k_db);
    return FadingModel(FadingKind::kRician, k_db, k_linear);
}

double pathloss_db(const LinkBudget& budget) {
    if (!(budget.distance_m > 0.0)) {
        throw std::invalid_argument("LinkBudget.distance_m must be > 0");
    }
    return budget.pathloss_a_db + budget.pathloss_b * std::log10(budget.distance_m / 1000.0);
}

double noise_power_dbm(double noise_psd_dbm_hz, double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0)) {
        throw std::invalid_argument("noise_power_dbm: bandwidth_hz must be > 0");
    }
    return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

double mean_snr_db(const LinkBudget& budget) {
    return budget.tx_power_dbm - pathloss_db(budget) -
           noise_power_dbm(budget.noise_psd_dbm_hz, budget.bandwidth_hz);
}

double draw_fading_gain(const FadingModel& model, RngStream& rng) {
    // h = sqrt(k/(k+1)) + CN(0, 1/(k+1)); E|h|^2 = 1 by construction.
    const double k = model.kind() == FadingKind::kRician ? model.rician_k_linear() : 0.0;
    const double los = std::sqrt(k / (k + 1.0));
    const double scatter_sigma = std::sqrt(0.5 / (k + 1.0));
    std::normal_distribution<double> normal(0.0, scatter_sigma);
    const double re = los + normal(rng.engine());
    const double im = normal(rng.engine());
    return re * re + im * im;
}

double rate_bits_full_slot(double snr_linear, double bandwidth_hz, double slot_duration_s) {
    return bandwidth_hz * slot_duration_s * std::log2(1.0 + snr_linear);
}

LinkRealization realize_link(const LinkBudget& budget, const FadingModel& model,
                             double slot_duration_s, RngStream& rng) {
    LinkRealization real;
    real.gain_linear = draw_fading_gain(model, rng);
    real.snr_linear = db_to_linear(mean_snr_db(budget)) * real.gain_linear;
    real.rate_bits_full_slot =
        rate_bits_full_slot(real.snr_linear, budget.bandwidth_hz, slot_duration_s);
    return real;
}

bool bernoulli_realize(double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli_realize: p must lie in [0,1], got " +
                                    std::to_string(p));
    }
    return rng.uniform01() < p;
}

} // namespace relaysim::channel
