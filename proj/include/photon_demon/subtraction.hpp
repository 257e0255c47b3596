#pragma once

// The demon's measurement: a high-transmittance beam splitter whose reflected
// port feeds an on/off click detector.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "photon_demon/fock.hpp"

namespace photon_demon::subtraction {

// Beam splitter transmittance T and detector efficiency eta. Everything that
// follows depends on the reflected light only through r = (1 - T) eta.
class MeasurementChannel {
  public:
    MeasurementChannel(double transmittance, double efficiency);

    double transmittance() const noexcept { return T_; }
    double efficiency() const noexcept { return eta_; }
    double reflectance() const noexcept { return 1.0 - T_; }
    double effective_loss() const noexcept { return (1.0 - T_) * eta_; }

  private:
    double T_;
    double eta_;
};

// Click probability for a single thermal mode with Boltzmann ratio lambda:
// lambda r / (1 - (1 - r) lambda).
double click_probability(const MeasurementChannel& channel, double lambda);

// Click probability for a (possibly multimode) ensemble. In the discrete
// regime 1 - p = (1 + m r)^-k; in the continuous regime the intensity law
// gives 1 - p = (1 + m s)^-k with s = -ln(1 - r). m is the mean per mode.
double click_probability(const MeasurementChannel& channel, const fock::ThermalEnsemble& ensemble,
                         fock::Regime regime = fock::Regime::discrete);

// 1 - (1 - r)^n; n may be real.
double click_probability_given_n(const MeasurementChannel& channel, double n);

// Conditional-mean factors relative to the unconditional transmitted mean
// T <n>_t, as functions of the click rate p and mode count k.
//   click:    (1 - (1-p)^((k+1)/k)) / p     (single mode: 2 - p)
//   no click: (1 - p)^(1/k)
double post_click_factor(double p, double modes_k);
double post_noclick_factor(double p, double modes_k);

// Mean transmitted photon number after a click / no click, for an ensemble of
// mean_t photons over modes_k modes measured through `channel`.
double post_click_mean(const MeasurementChannel& channel, double mean_t, double modes_k);
double post_noclick_mean(const MeasurementChannel& channel, double mean_t, double modes_k);

// Channel with transmittance T whose detector efficiency is chosen so that
// the ensemble clicks at `target_rate`. Efficiency saturates at 1.
MeasurementChannel tune_channel(const fock::ThermalEnsemble& ensemble, double transmittance,
                                double target_rate, fock::Regime regime);

// Kraus operators of the lossless (eta = 1) measurement on Fock space
// truncated at n_max photons:
//   M_k = sum_i sqrt(C(i,k) T^(i-k) (1-T)^k) |i-k><i|
// no_click holds M_0; click holds M_1 .. M_n_max.
struct KrausSets {
    std::vector<Eigen::MatrixXd> no_click;
    std::vector<Eigen::MatrixXd> click;
};

// When `lambda` is given, the thermal tail beyond n_max must be below
// `tail_tol` or a TruncationError is thrown.
KrausSets build_kraus(const MeasurementChannel& channel, int n_max,
                      std::optional<double> lambda = std::nullopt, double tail_tol = 1e-12);

// max |sum_m M^dag M - 1| over all entries.
double completeness_defect(const KrausSets& sets);

// Diagonal coefficients of sum_i M_m(|i><i|) on the truncated space, for
// m = 0 and m = 1, plus the analytic sandwich bounds on the m = 1
// coefficients. Interior levels exclude the top 10% of the retained space
// and any level whose source distribution is cut off by the truncation by
// more than 1e-12.
struct NondisturbanceReport {
    double defect_m0 = 0.0;
    double defect_m1 = 0.0;
    double upper = 0.0;            // 1/T - 1, the bound on defect_m1
    double lower = 0.0;            // smallest per-level lower bound
    double coefficient_max = 0.0;  // over interior levels, <= 1/T
    std::vector<int> interior;
    std::vector<double> coefficients_m1;  // indexed like `interior`
    std::vector<double> lower_bounds;     // (i+1) T^i (1-T) / (1 - T^(i+1))
};

NondisturbanceReport nondisturbance_defect(const MeasurementChannel& channel, int n_max);

}  // namespace photon_demon::subtraction
