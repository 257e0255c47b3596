#pragma once

// Thermal photon statistics: Bose-Einstein distributions, pulse-energy
// samplers and intensity correlation estimators. Energies are in units of
// the single-photon energy.

#include <cstdint>
#include <random>
#include <span>

namespace photon_demon::fock {

using Rng = std::mt19937_64;

// Independent generator for sub-stream `stream` of a run seeded with `seed`.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

enum class Regime {
    discrete,    // integer photon numbers, sum of geometric draws
    continuous,  // Gamma-distributed intensity, real mode count
};

const char* to_string(Regime regime);
Regime regime_from_string(const char* name);

// Thermal light source: total mean photon number per pulse spread over an
// effective number of thermal modes. Mode count may be non-integer; only
// the discrete sampler needs it integral.
class ThermalEnsemble {
  public:
    ThermalEnsemble(double mean_n, double modes_k);

    // Effective mode count from a measured g2(0).
    static ThermalEnsemble from_g2(double mean_n, double g2);

    double mean_n() const noexcept { return mean_n_; }
    double modes_k() const noexcept { return modes_k_; }
    double mean_per_mode() const noexcept { return mean_n_ / modes_k_; }
    // Per-mode Boltzmann ratio exp(-beta h nu).
    double lambda() const noexcept;
    double predicted_g2() const noexcept { return 1.0 + 1.0 / modes_k_; }
    bool integer_modes() const noexcept;

  private:
    double mean_n_;
    double modes_k_;
};

// (1 - lambda) lambda^i
double boltzmann_pmf(double lambda, std::uint64_t i);

// lambda for a single mode holding `mean` photons on average.
double lambda_for_mean(double mean);

// One pulse energy. Discrete: sum of modes_k geometric draws of ratio
// lambda. Continuous: Gamma(shape = modes_k, scale = mean_n / modes_k).
double sample_pulse_energy(const ThermalEnsemble& ensemble, Regime regime, Rng& rng);

// <n^2> / <n>^2 over the sample.
double g2_estimator(std::span<const double> samples);

// 1 / (g2 - 1); g2 must lie in (1, 2].
double effective_mode_count(double g2);

// Pearson correlation coefficient.
double cross_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace photon_demon::fock
