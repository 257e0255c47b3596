#pragma once

// Config-driven orchestration behind the photon-demon command line.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "photon_demon/demon_sim.hpp"

namespace photon_demon::cli {

enum ExitCode : int {
    kSuccess = 0,
    kCheckFailure = 1,
    kConfigError = 2,
    kIoError = 3,
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SimulateConfig {
    std::size_t n_pulses = 4000;
    fock::Regime regime = fock::Regime::continuous;
    double mean_photons = 1e8;
    double modes_k = 10.0 / 9.0;
    double transmittance = 0.995;
    double rate1 = 0.702;
    double rate2 = 0.311;
    sim::Strategy strategy = sim::Strategy::flip_on_click_noclick;
    std::size_t shards = 16;
    sim::WorkModel work_model;  // kappa defaults to 1 V per unconditional arm mean
    bool kappa_given = false;
    std::optional<std::size_t> histogram_bins;  // Freedman-Diaconis when empty
};

struct ScanCliConfig {
    double p2 = 0.311;
    std::vector<double> p1_grid = sim::linear_grid(0.0, 1.0, 21);
    std::vector<sim::Strategy> strategies{sim::Strategy::flip_on_click_noclick, sim::Strategy::flip_on_noclick_click};
    double modes_k = 10.0 / 9.0;
    double mean_photons = 1e8;
    double transmittance = 0.995;
    fock::Regime regime = fock::Regime::continuous;
    std::size_t n_pulses_per_point = 100000;
    std::size_t shards = 16;
    double model_sigma = 3.0;  // allowed |model_z|
};

struct VerifyConfig {
    std::size_t n_models = 100;
    int n_max = 3;
    int extraction_dim = 4;
    int max_outcomes = 3;
    double tol = 1e-10;
    std::vector<double> t_grid{0.9, 0.99, 0.999};
    int sweep_n_max = 3;
    int sweep_extraction_dim = 2;
    double slope_target = 1.0;
    double slope_tolerance = 0.15;
    bool negative_controls = true;
};

struct MiConfig {
    std::vector<double> q_grid = sim::linear_grid(0.05, 0.95, 19);
    std::vector<double> mean_photons{10.0, 100.0, 1e4, 1e6};
    double tol = 1e-10;
    double tail_tol = 1e-12;
    double limit_tolerance = 1e-3;  // |I_discrete(largest mean) - I_continuous|
};

struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 20160301;
    std::size_t workers = 1;
    std::filesystem::path output_dir = "out";
    SimulateConfig simulate;
    ScanCliConfig scan;
    VerifyConfig verify;
    MiConfig mi;
};

// Unknown keys at any level and missing/mismatched schema_version are
// ConfigErrors.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

struct CommandResult {
    int exit_code = kSuccess;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> failures;  // failed checks, empty on success
};

CommandResult cmd_simulate(const RunConfig& config);
CommandResult cmd_scan(const RunConfig& config);
CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_mi(const RunConfig& config);

// Full command line: photon-demon <simulate|scan|verify|mi> --config PATH
// [--seed N] [--out DIR] [--workers N]. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace photon_demon::cli
