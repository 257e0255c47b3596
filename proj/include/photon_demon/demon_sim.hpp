#pragma once

// Monte Carlo of the two-arm photonic demon: thermal pulses, click
// detection, polarity-flip feed-forward and capacitor/battery work.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "photon_demon/fock.hpp"
#include "photon_demon/subtraction.hpp"

namespace photon_demon::sim {

enum class Strategy {
    none,
    flip_on_click_noclick,  // flip when arm 1 clicks and arm 2 does not
    flip_on_noclick_click,  // flip when arm 2 clicks and arm 1 does not
};

const char* to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

// True when the strategy swaps polarity for this click pattern.
bool flips(Strategy strategy, bool click1, bool click2) noexcept;

// Capacitor and battery. kappa converts the photon-number difference
// between the arms into capacitor voltage. beta is in 1/J.
struct WorkModel {
    double capacitance = 2e-12;  // F
    double kappa = 1.0;          // V per photon
    double beta = 1.0 / (1.380649e-23 * 300.0);
    double battery_u0 = 0.0;     // V

    void validate() const;
};

// W = C (U - U0) U0, in joules.
double work_transfer(const WorkModel& model, double voltage);

struct PulseRecord {
    std::size_t index = 0;
    double n1 = 0.0;  // transmitted energy reaching photodiode 1 (photons)
    double n2 = 0.0;
    bool click1 = false;
    bool click2 = false;
    double u_raw = 0.0;   // kappa (n1 - n2)
    double u_post = 0.0;  // after the feed-forward polarity logic
};

struct Arm {
    fock::ThermalEnsemble ensemble;
    subtraction::MeasurementChannel channel;
};

struct ExperimentConfig {
    Arm arm1;
    Arm arm2;
    Strategy strategy = Strategy::none;
    fock::Regime regime = fock::Regime::continuous;
    WorkModel work_model;
    std::size_t n_pulses = 0;
    std::uint64_t seed = 0;
    // Results depend on (seed, shards) only; workers just run shards.
    std::size_t shards = 16;
    std::size_t workers = 1;
};

struct SummaryStats {
    std::size_t n_pulses = 0;
    double mean_u_f = 0.0;
    double mean_u_0 = 0.0;
    double sigma_u_0 = 0.0;
    double sigma_u_f = 0.0;
    // Standard error of mean_u_f - mean_u_0, from the per-pulse differences.
    double shift_se = 0.0;
    double rate1 = 0.0;
    double rate2 = 0.0;
    double g2_arm1 = 0.0;
    double g2_arm2 = 0.0;
    double cross_corr = 0.0;  // NaN when undefined
    double mean_w_f = 0.0;    // J
    double mean_w_0 = 0.0;
    double sigma_w_0 = 0.0;
    // Fraction of pulses on which the strategy flipped the polarity.
    double flip_fraction = 0.0;
    bool degenerate = false;  // sigma_u_0 == 0

    // |<U>_f - <U>_0| / sigma(U)_0
    double ratio() const noexcept;
};

struct ExperimentResult {
    std::vector<PulseRecord> records;
    SummaryStats stats;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// Re-applies a feed-forward strategy to recorded pulses (u_post only).
std::vector<PulseRecord> apply_feedforward(std::span<const PulseRecord> records, Strategy strategy);

SummaryStats summarize(std::span<const PulseRecord> records, const WorkModel& work_model);

// Expected <n>_1 - <n>_2 after the conditional swap, in units of the
// unconditional arm mean, for click rates p1, p2 and k thermal modes.
double expected_imbalance(double p1, double p2, Strategy strategy, double modes_k);

// Experiment at the given pair of click rates. Arms share mean photon
// number and mode count; detector efficiencies are tuned to the rates.
struct RateExperiment {
    double mean_n = 1e8;
    double modes_k = 1.0;
    double transmittance = 0.995;
    double rate1 = 0.5;
    double rate2 = 0.5;
    fock::Regime regime = fock::Regime::continuous;
};

// Builds a config with kappa = 1 V per unconditional arm mean, so voltages
// are measured in units of T <n>_t.
ExperimentConfig make_rate_experiment(const RateExperiment& setup, Strategy strategy, std::size_t n_pulses,
                                      std::uint64_t seed);

struct ScanConfig {
    double p2 = 0.311;
    std::vector<double> p1_grid;
    std::vector<Strategy> strategies{Strategy::flip_on_click_noclick, Strategy::flip_on_noclick_click};
    double modes_k = 10.0 / 9.0;
    double mean_n = 1e8;
    double transmittance = 0.995;
    fock::Regime regime = fock::Regime::continuous;
    std::size_t n_pulses_per_point = 100000;
    std::uint64_t seed = 0;
    std::size_t shards = 16;
    std::size_t workers = 1;
};

struct ScanRow {
    double p1 = 0.0;
    Strategy strategy = Strategy::none;
    double ratio = 0.0;          // simulated |<U>_f - <U>_0| / sigma(U)_0
    double ratio_se = 0.0;
    double model_ratio = 0.0;    // |expected_imbalance| sqrt(k/2): analytic sigma
    double signed_shift = 0.0;   // simulated (<U>_f - <U>_0) / sigma(U)_0
    double model_shift = 0.0;    // expected_imbalance kappa <n>_0 / simulated sigma(U)_0
    double model_z = 0.0;        // (signed_shift - model_shift) / ratio_se
    double bound = 0.0;          // sqrt(2 (I(p1) + I(p2)))
    double empirical_bound = 0.0;  // eps-optimized, ratio units, on the displaced side
    bool within_bound = false;
};

std::vector<ScanRow> scan_p1(const ScanConfig& config);

// Evenly spaced grid including both end points.
std::vector<double> linear_grid(double start, double stop, std::size_t points);

}  // namespace photon_demon::sim
