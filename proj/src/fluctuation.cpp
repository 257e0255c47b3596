#include "photon_demon/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "photon_demon/errors.hpp"
#include "photon_demon/fock.hpp"
#include "photon_demon/numerics.hpp"
#include "photon_demon/subtraction.hpp"

namespace photon_demon::fluct {

namespace {

using Complex = std::complex<double>;

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix random_unitary_from(int dim, fock::Rng& rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(dim, dim);
    for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) z(r, c) = Complex(normal(rng), normal(rng)) / std::sqrt(2.0);
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix& rmat = qr.matrixQR();
    for (int c = 0; c < dim; ++c) {
        const Complex d = rmat(c, c);
        const double mag = std::abs(d);
        q.col(c) *= mag > 0.0 ? d / mag : Complex(1.0);
    }
    return q;
}

// Unitary that mixes only states of equal total photon number.
Matrix random_block_unitary(int n_max, fock::Rng& rng)
{
    const int side = n_max + 1;
    Matrix u = Matrix::Zero(side * side, side * side);
    for (int total = 0; total <= 2 * n_max; ++total) {
        std::vector<int> block;
        for (int a = 0; a <= n_max; ++a) {
            const int b = total - a;
            if (b >= 0 && b <= n_max) block.push_back(a * side + b);
        }
        const Matrix w = random_unitary_from(static_cast<int>(block.size()), rng);
        for (std::size_t r = 0; r < block.size(); ++r) {
            for (std::size_t c = 0; c < block.size(); ++c) u(block[r], block[c]) = w(r, c);
        }
    }
    return u;
}

Matrix to_complex(const Eigen::MatrixXd& m) { return m.cast<Complex>(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Columns of V that act on |a> (x) |j> for fixed j.
Matrix columns_for_extraction_state(const TruncatedJointModel& model, int j)
{
    const int dt = model.thermal_dim();
    const int de = model.extraction_dim();
    Matrix out(model.joint_dim(), dt);
    for (int a = 0; a < dt; ++a) out.col(a) = model.V.col(a * de + j);
    return out;
}

double total_probability(const std::vector<double>& probs, const std::vector<double>& given)
{
    CompensatedSum s;
    for (std::size_t i = 0; i < probs.size(); ++i) s.add(probs[i] * given[i]);
    return s.value();
}

void check_model(const TruncatedJointModel& model)
{
    if (model.kraus.empty() || model.kraus.size() != model.feedback.size()) {
        throw UsageError("model needs one feedback unitary per measurement outcome");
    }
    if (model.V.rows() != model.joint_dim() || model.V.cols() != model.joint_dim()) {
        throw UsageError("V must act on the joint thermal (x) extraction space");
    }
    if (model.extraction_probs.size() != model.extraction_energies.size()) {
        throw UsageError("extraction probabilities and energies differ in length");
    }
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() < 2) return std::nan("");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

double TruncatedJointModel::final_energy(int f) const
{
    const int de = extraction_dim();
    return thermal_energies[f / de] + extraction_energies[f % de];
}

double TruncatedJointModel::partition_function() const
{
    CompensatedSum z;
    for (double e : thermal_energies) z.add(std::exp(-beta * e));
    return z.value();
}

std::vector<double> TruncatedJointModel::thermal_probs() const
{
    const double z = partition_function();
    std::vector<double> p(thermal_energies.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(-beta * thermal_energies[i]) / z;
    return p;
}

Matrix random_unitary(int dim, std::uint64_t seed)
{
    if (dim < 1) throw UsageError("random_unitary needs dim >= 1");
    fock::Rng rng = fock::make_rng(seed, 0x7a11);
    return random_unitary_from(dim, rng);
}

Matrix swap_unitary(int n_max)
{
    const int side = n_max + 1;
    Matrix s = Matrix::Zero(side * side, side * side);
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) s(b * side + a, a * side + b) = 1.0;
    }
    return s;
}

TruncatedJointModel make_random_model(const ModelDims& dims, std::uint64_t seed)
{
    if (dims.n_max < 1 || dims.extraction_dim < 1 || dims.n_outcomes < 1) {
        throw UsageError("make_random_model: n_max, extraction_dim and n_outcomes must be >= 1");
    }
    fock::Rng rng = fock::make_rng(seed, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    TruncatedJointModel model;
    model.seed = seed;
    model.dims = dims;
    model.beta = 0.2 + 1.3 * unit(rng);
    model.photon_energy = 0.3 + 0.9 * unit(rng);
    const int side = dims.n_max + 1;
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) model.thermal_energies.push_back(model.photon_energy * (a + b));
    }
    double norm = 0.0;
    for (int j = 0; j < dims.extraction_dim; ++j) {
        model.extraction_energies.push_back(2.0 * unit(rng));
        model.extraction_probs.push_back(0.1 + unit(rng));
        norm += model.extraction_probs.back();
    }
    for (double& p : model.extraction_probs) p /= norm;

    // Classical measurement: M_m = sum_i sqrt(p(m|i)) |i><i|.
    const int dt = side * side;
    std::vector<Eigen::VectorXd> amplitude(dims.n_outcomes, Eigen::VectorXd::Zero(dt));
    for (int i = 0; i < dt; ++i) {
        std::vector<double> w(dims.n_outcomes);
        double total = 0.0;
        for (double& x : w) {
            x = 0.05 + unit(rng);
            total += x;
        }
        for (int m = 0; m < dims.n_outcomes; ++m) amplitude[m](i) = std::sqrt(w[m] / total);
    }
    for (int m = 0; m < dims.n_outcomes; ++m) {
        model.kraus.push_back({to_complex(amplitude[m].asDiagonal().toDenseMatrix())});
        model.feedback.push_back(m == 1 ? swap_unitary(dims.n_max) : random_block_unitary(dims.n_max, rng));
    }
    model.V = random_unitary_from(dt * dims.extraction_dim, rng);
    return model;
}

TruncatedJointModel with_trivial_measurement(TruncatedJointModel model)
{
    const int dt = model.thermal_dim();
    model.kraus = {{Matrix::Identity(dt, dt)}};
    model.feedback = {Matrix::Identity(dt, dt)};
    return model;
}

TruncatedJointModel with_beam_splitter_measurement(TruncatedJointModel model, double transmittance)
{
    const subtraction::MeasurementChannel channel(transmittance, 1.0);
    const subtraction::KrausSets single = subtraction::build_kraus(channel, model.dims.n_max);
    const std::vector<Eigen::MatrixXd>* by_outcome[2] = {&single.no_click, &single.click};
    const int dt = model.thermal_dim();
    model.kraus.clear();
    model.feedback.clear();
    for (int m1 = 0; m1 < 2; ++m1) {
        for (int m2 = 0; m2 < 2; ++m2) {
            std::vector<Matrix> ops;
            for (const auto& a : *by_outcome[m1]) {
                for (const auto& b : *by_outcome[m2]) ops.push_back(kron(to_complex(a), to_complex(b)));
            }
            model.kraus.push_back(std::move(ops));
            const bool swap = m1 == 1 && m2 == 0;
            model.feedback.push_back(swap ? swap_unitary(model.dims.n_max) : Matrix::Identity(dt, dt));
        }
    }
    return model;
}

TruncatedJointModel with_disturbing_measurement(TruncatedJointModel model)
{
    const int dt = model.thermal_dim();
    fock::Rng rng = fock::make_rng(model.seed, 0xd157);
    std::uniform_real_distribution<double> unit(0.2, 0.8);
    std::vector<Matrix> reset;
    Matrix keep = Matrix::Zero(dt, dt);
    for (int i = 0; i < dt; ++i) {
        const double p0 = unit(rng);
        Matrix op = Matrix::Zero(dt, dt);
        op(0, i) = std::sqrt(p0);  // |0,0><i|
        reset.push_back(std::move(op));
        keep(i, i) = std::sqrt(1.0 - p0);
    }
    model.kraus = {std::move(reset), {keep}};
    model.feedback = {Matrix::Identity(dt, dt), swap_unitary(model.dims.n_max)};
    return model;
}

TruncatedJointModel with_nonconserving_feedback(TruncatedJointModel model, std::uint64_t seed)
{
    fock::Rng rng = fock::make_rng(seed, 0xfeed);
    for (auto& u : model.feedback) u = random_unitary_from(model.thermal_dim(), rng);
    return model;
}

std::vector<std::vector<double>> outcome_given_state(const TruncatedJointModel& model)
{
    std::vector<std::vector<double>> p(model.kraus.size(), std::vector<double>(model.thermal_dim(), 0.0));
    for (std::size_t m = 0; m < model.kraus.size(); ++m) {
        for (int i = 0; i < model.thermal_dim(); ++i) {
            double s = 0.0;
            for (const auto& op : model.kraus[m]) s += op.col(i).squaredNorm();
            p[m][i] = s;
        }
    }
    return p;
}

namespace {

// p(f | m, i, j) given the columns of V for extraction state j.
Eigen::VectorXd final_distribution_with(const TruncatedJointModel& model, const Matrix& v_j, int m, int i,
                                        double p_m_given_i)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(model.joint_dim());
    for (const auto& op : model.kraus[m]) {
        const Eigen::VectorXcd after = model.feedback[m] * op.col(i);
        out += (v_j * after).cwiseAbs2();
    }
    return out / p_m_given_i;
}

}  // namespace

Eigen::VectorXd final_distribution(const TruncatedJointModel& model, int m, int i, int j)
{
    check_model(model);
    const double p = outcome_given_state(model)[m][i];
    if (!(p > 0.0)) throw NullEventError("outcome has zero probability for this input state");
    return final_distribution_with(model, columns_for_extraction_state(model, j), m, i, p);
}

double lhs_average(const TruncatedJointModel& model)
{
    check_model(model);
    const std::vector<double> p_i = model.thermal_probs();
    const auto p_m_given_i = outcome_given_state(model);
    std::vector<Matrix> v_cols;
    for (int j = 0; j < model.extraction_dim(); ++j) v_cols.push_back(columns_for_extraction_state(model, j));

    CompensatedSum total;
    for (std::size_t m = 0; m < model.kraus.size(); ++m) {
        const double p_m = total_probability(p_i, p_m_given_i[m]);
        if (!(p_m > 0.0)) continue;
        const double log_p_m = std::log(p_m);
        for (int i = 0; i < model.thermal_dim(); ++i) {
            const double pmi = p_m_given_i[m][i];
            if (!(pmi > 0.0)) continue;
            const double info = std::log(pmi) - log_p_m;
            for (int j = 0; j < model.extraction_dim(); ++j) {
                const Eigen::VectorXd p_f = final_distribution_with(model, v_cols[j], static_cast<int>(m), i, pmi);
                const double weight = pmi * p_i[i] * model.extraction_probs[j];
                const double e_in = model.thermal_energies[i] + model.extraction_energies[j];
                for (int f = 0; f < model.joint_dim(); ++f) {
                    const double work = e_in - model.final_energy(f);
                    total.add(p_f(f) * weight * std::exp(model.beta * work - info));
                }
            }
        }
    }
    return total.value();
}

RhsAverage rhs_average(const TruncatedJointModel& model)
{
    check_model(model);
    const std::vector<double> p_i = model.thermal_probs();
    const double z = model.partition_function();
    const int de = model.extraction_dim();

    CompensatedSum raw;
    for (int i = 0; i < model.thermal_dim(); ++i) {
        for (int j = 0; j < de; ++j) {
            const double weight = p_i[i] * model.extraction_probs[j];
            const double e_in = model.thermal_energies[i] + model.extraction_energies[j];
            for (int f = 0; f < model.joint_dim(); ++f) {
                const double p_f = std::norm(model.V(f, i * de + j));
                raw.add(p_f * weight * std::exp(model.beta * (e_in - model.final_energy(f))));
            }
        }
    }

    CompensatedSum simplified;
    for (int j = 0; j < de; ++j) {
        for (int f = 0; f < model.joint_dim(); ++f) {
            double overlap = 0.0;  // <f| V (1 (x) |j><j|) V^dag |f>
            for (int a = 0; a < model.thermal_dim(); ++a) overlap += std::norm(model.V(f, a * de + j));
            simplified.add(overlap * model.extraction_probs[j] *
                           std::exp(model.beta * (model.extraction_energies[j] - model.final_energy(f))));
        }
    }
    return {raw.value(), simplified.value() / z};
}

ModelDefects model_defects(const TruncatedJointModel& model)
{
    check_model(model);
    const int dt = model.thermal_dim();
    const Matrix id = Matrix::Identity(dt, dt);
    const std::vector<double> p_i = model.thermal_probs();
    const auto p_m_given_i = outcome_given_state(model);
    const int side = model.dims.n_max + 1;
    const int interior_top = static_cast<int>(std::floor(0.9 * model.dims.n_max));
    const auto interior = [&](int idx) { return idx / side <= interior_top && idx % side <= interior_top; };

    ModelDefects d;
    Matrix completeness = Matrix::Zero(dt, dt);
    for (std::size_t m = 0; m < model.kraus.size(); ++m) {
        for (const auto& op : model.kraus[m]) completeness += op.adjoint() * op;
        if (!(total_probability(p_i, p_m_given_i[m]) > 0.0)) continue;

        Matrix sum = Matrix::Zero(dt, dt);
        for (int i = 0; i < dt; ++i) {
            const double p = p_m_given_i[m][i];
            if (!(p > 0.0)) continue;
            for (const auto& op : model.kraus[m]) sum += op.col(i) * op.col(i).adjoint() / p;
        }
        const Matrix diff = sum - id;
        d.nondisturbance = std::max(d.nondisturbance, max_abs(diff));
        for (int r = 0; r < dt; ++r) {
            for (int c = 0; c < dt; ++c) {
                if (interior(r) && interior(c)) {
                    d.nondisturbance_interior = std::max(d.nondisturbance_interior, std::abs(diff(r, c)));
                }
            }
        }
    }
    d.completeness = max_abs(completeness - id);

    for (const auto& u : model.feedback) {
        d.feedback_unitarity = std::max(d.feedback_unitarity, max_abs(u * u.adjoint() - id));
        for (int r = 0; r < dt; ++r) {
            for (int c = 0; c < dt; ++c) {
                const double commutator = std::abs(u(r, c)) * std::abs(model.thermal_energies[c] - model.thermal_energies[r]);
                d.feedback_energy = std::max(d.feedback_energy, commutator);
            }
        }
    }
    const Matrix vid = Matrix::Identity(model.joint_dim(), model.joint_dim());
    d.v_unitarity = max_abs(model.V * model.V.adjoint() - vid);
    return d;
}

const char* to_string(VerifyStatus status)
{
    switch (status) {
    case VerifyStatus::pass:
        return "pass";
    case VerifyStatus::fail:
        return "fail";
    case VerifyStatus::precondition_violation:
        return "precondition-violation";
    }
    return "fail";
}

Verification verify_equality(const TruncatedJointModel& model, double tol)
{
    Verification out;
    out.defects = model_defects(model);
    out.lhs = lhs_average(model);
    out.rhs = rhs_average(model).raw;
    out.abs_diff = std::abs(out.lhs - out.rhs);

    const double gate = tol / 10.0;
    std::vector<std::string> reasons;
    if (out.defects.completeness > gate) reasons.emplace_back("measurement operators are not complete");
    if (out.defects.nondisturbance > gate) reasons.emplace_back("measurement violates non-disturbance");
    if (out.defects.feedback_unitarity > gate) reasons.emplace_back("feedback is not unitary");
    if (out.defects.feedback_energy > gate) reasons.emplace_back("feedback is not energy conserving");
    if (out.defects.v_unitarity > gate) reasons.emplace_back("V is not unitary");
    if (!reasons.empty()) {
        out.status = VerifyStatus::precondition_violation;
        for (std::size_t n = 0; n < reasons.size(); ++n) out.reason += (n ? "; " : "") + reasons[n];
        return out;
    }
    out.status = out.abs_diff < tol ? VerifyStatus::pass : VerifyStatus::fail;
    return out;
}

SweepResult convergence_sweep(const std::vector<double>& t_grid, const TruncatedJointModel& base_model)
{
    SweepResult out;
    std::vector<double> log_gap;
    std::vector<double> log_defect;
    std::vector<double> log_diff_gap;
    std::vector<double> log_diff;
    for (double T : t_grid) {
        if (!(T > 0.0 && T <= 1.0)) throw DomainError("convergence_sweep: T must lie in (0,1]");
        // At T = 1 the click outcome is impossible and the measurement is
        // the trivial, exactly non-disturbing one.
        const TruncatedJointModel model =
            T == 1.0 ? with_trivial_measurement(base_model) : with_beam_splitter_measurement(base_model, T);
        const ModelDefects defects = model_defects(model);
        SweepRow row;
        row.transmittance = T;
        row.abs_diff = std::abs(lhs_average(model) - rhs_average(model).raw);
        row.defect = defects.nondisturbance_interior;
        out.rows.push_back(row);
        if (T < 1.0 && row.defect > 0.0) {
            log_gap.push_back(std::log(1.0 - T));
            log_defect.push_back(std::log(row.defect));
        }
        if (T < 1.0 && row.abs_diff > 0.0) {
            log_diff_gap.push_back(std::log(1.0 - T));
            log_diff.push_back(std::log(row.abs_diff));
        }
    }
    out.defect_slope = fit_slope(log_gap, log_defect);
    out.diff_slope = fit_slope(log_diff_gap, log_diff);
    return out;
}

}  // namespace photon_demon::fluct
