#pragma once

// Exact enumeration of <exp(beta W - I)>_f and <exp(beta W)>_0 for a
// finite model: a two-mode thermal system (each mode truncated at n_max
// photons) measured and fed back on, coupled by an arbitrary unitary V to
// an extraction system. Work W = E_i + E_j - E_f is bookkept implicitly.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace photon_demon::fluct {

using Matrix = Eigen::MatrixXcd;

struct ModelDims {
    int n_max = 2;          // photons per thermal mode
    int extraction_dim = 2; // dimension of the work-extraction system
    int n_outcomes = 2;     // measurement outcomes of the classical measurement
};

struct TruncatedJointModel {
    std::uint64_t seed = 0;
    ModelDims dims;
    double beta = 1.0;
    double photon_energy = 1.0;
    std::vector<double> thermal_energies;     // photon_energy * (a + b) for |a,b>
    std::vector<double> extraction_energies;  // E_j
    std::vector<double> extraction_probs;     // p(j)
    std::vector<std::vector<Matrix>> kraus;   // per outcome m: {M_k^(m)}
    std::vector<Matrix> feedback;             // U_m
    Matrix V;                                 // on thermal (x) extraction, thermal index major

    int thermal_dim() const noexcept { return static_cast<int>(thermal_energies.size()); }
    int extraction_dim() const noexcept { return static_cast<int>(extraction_energies.size()); }
    int joint_dim() const noexcept { return thermal_dim() * extraction_dim(); }
    // Basis index of |a,b> in the thermal system.
    int thermal_index(int a, int b) const noexcept { return a * (dims.n_max + 1) + b; }
    // E_f of joint basis state f.
    double final_energy(int f) const;
    // exp(-beta E_i) / Z over retained thermal states.
    std::vector<double> thermal_probs() const;
    double partition_function() const;
};

// Random model: classical non-disturbing measurement with random p(m|i),
// random block unitaries inside each photon-number subspace as feedback,
// Haar-random V. Deterministic in seed.
TruncatedJointModel make_random_model(const ModelDims& dims, std::uint64_t seed);

// Haar-random unitary via QR of a complex Gaussian matrix.
Matrix random_unitary(int dim, std::uint64_t seed);

// Model variants used for the limit and control checks.
TruncatedJointModel with_trivial_measurement(TruncatedJointModel model);
// Beam-splitter click measurement (eta = 1) on each mode; outcome index
// 2 m1 + m2. Feedback swaps the modes on (click, no click).
TruncatedJointModel with_beam_splitter_measurement(TruncatedJointModel model, double transmittance);
// Every input collapses to |0,0> on outcome 0: violates non-disturbance.
TruncatedJointModel with_disturbing_measurement(TruncatedJointModel model);
// Feedback replaced by Haar-random unitaries on the whole thermal space.
TruncatedJointModel with_nonconserving_feedback(TruncatedJointModel model, std::uint64_t seed);
// Mode swap |a,b> -> |b,a>.
Matrix swap_unitary(int n_max);

// p(m|i) for every outcome m and thermal basis state i.
std::vector<std::vector<double>> outcome_given_state(const TruncatedJointModel& model);

// p(f | m, i, j) over f.
Eigen::VectorXd final_distribution(const TruncatedJointModel& model, int m, int i, int j);

double lhs_average(const TruncatedJointModel& model);

struct RhsAverage {
    double raw = 0.0;         // sum over i, j, f with the thermal state
    double simplified = 0.0;  // (1/Z) sum_{j,f} <f|V(1 (x) p(j)|j><j|)V^dag|f> e^{beta(E_j - E_f)}
};
RhsAverage rhs_average(const TruncatedJointModel& model);

// Structural checks on the model.
struct ModelDefects {
    double nondisturbance = 0.0;          // max |sum_i M_m(|i><i|) - 1| over all entries and outcomes
    double nondisturbance_interior = 0.0; // same, restricted to levels <= 0.9 n_max in each mode
    double completeness = 0.0;
    double feedback_unitarity = 0.0;
    double feedback_energy = 0.0;         // max |[U_m, H_thermal]|
    double v_unitarity = 0.0;
};
ModelDefects model_defects(const TruncatedJointModel& model);

enum class VerifyStatus { pass, fail, precondition_violation };
const char* to_string(VerifyStatus status);

struct Verification {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_diff = 0.0;
    ModelDefects defects;
    VerifyStatus status = VerifyStatus::fail;
    std::string reason;  // which precondition failed, if any
    bool pass() const noexcept { return status == VerifyStatus::pass; }
};

// Preconditions (non-disturbance, energy-conserving unitary feedback,
// unitary V) are checked at tol / 10 before the equality itself.
Verification verify_equality(const TruncatedJointModel& model, double tol);

struct SweepRow {
    double transmittance = 1.0;
    double abs_diff = 0.0;
    double defect = 0.0;  // interior non-disturbance defect
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double defect_slope = 0.0;  // d log(defect) / d log(1 - T), T < 1 rows
    double diff_slope = 0.0;    // d log(abs_diff) / d log(1 - T)
};

SweepResult convergence_sweep(const std::vector<double>& t_grid, const TruncatedJointModel& base_model);

}  // namespace photon_demon::fluct
