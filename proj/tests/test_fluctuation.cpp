#include <cmath>
#include <vector>

#include "doctest.h"
#include "photon_demon/errors.hpp"
#include "photon_demon/fluctuation.hpp"

using namespace photon_demon;
using namespace photon_demon::fluct;

namespace {

double unitarity_defect(const Matrix& u)
{
    return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

// Brute-force lhs from full density matrices on thermal (x) extraction.
double dense_lhs(const TruncatedJointModel& model)
{
    const int dt = model.thermal_dim();
    const int de = model.extraction_dim();
    const auto p_i = model.thermal_probs();
    double total = 0.0;
    for (std::size_t m = 0; m < model.kraus.size(); ++m) {
        double p_m = 0.0;
        std::vector<double> p_mi(dt, 0.0);
        for (int i = 0; i < dt; ++i) {
            for (const auto& op : model.kraus[m]) p_mi[i] += op.col(i).squaredNorm();
            p_m += p_i[i] * p_mi[i];
        }
        if (p_m == 0.0) continue;
        for (int i = 0; i < dt; ++i) {
            if (p_mi[i] == 0.0) continue;
            Matrix rho = Matrix::Zero(dt, dt);
            for (const auto& op : model.kraus[m]) rho += op.col(i) * op.col(i).adjoint();
            rho = model.feedback[m] * rho * model.feedback[m].adjoint();
            for (int j = 0; j < de; ++j) {
                Matrix proj = Matrix::Zero(de, de);
                proj(j, j) = 1.0;
                Matrix joint = Matrix::Zero(dt * de, dt * de);
                for (int a = 0; a < dt; ++a)
                    for (int b = 0; b < dt; ++b) joint.block(a * de, b * de, de, de) = rho(a, b) * proj;
                const Matrix out = model.V * joint * model.V.adjoint();
                for (int f = 0; f < dt * de; ++f) {
                    const double w = model.thermal_energies[i] + model.extraction_energies[j] - model.final_energy(f);
                    // p(f|m,i,j) p(m|i) p(i,j) = <f|..|f> p(i) p(j) once rho carries p(m|i).
                    total += out(f, f).real() * p_i[i] * model.extraction_probs[j] *
                             std::exp(model.beta * w - (std::log(p_mi[i]) - std::log(p_m)));
                }
            }
        }
    }
    return total;
}

std::vector<TruncatedJointModel> random_models(int count)
{
    std::vector<TruncatedJointModel> out;
    for (int s = 0; s < count; ++s) {
        ModelDims dims;
        dims.n_max = 1 + s % 3;
        dims.extraction_dim = 1 + (s / 3) % 4;
        dims.n_outcomes = 2 + s % 2;
        out.push_back(make_random_model(dims, 1000 + s));
    }
    return out;
}

}  // namespace

TEST_CASE("random models are deterministic and well formed")
{
    const ModelDims dims{3, 4, 3};
    const auto a = make_random_model(dims, 7);
    const auto b = make_random_model(dims, 7);
    const auto c = make_random_model(dims, 8);
    CHECK(a.beta == b.beta);
    CHECK(a.extraction_energies == b.extraction_energies);
    CHECK((a.V - b.V).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t m = 0; m < a.feedback.size(); ++m) CHECK((a.feedback[m] - b.feedback[m]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.V(0, 0) != c.V(0, 0));

    CHECK(a.thermal_dim() == 16);
    CHECK(a.joint_dim() == 64);
    CHECK(a.kraus.size() == 3);
    double pt = 0.0;
    for (double p : a.thermal_probs()) pt += p;
    double pj = 0.0;
    for (double p : a.extraction_probs) pj += p;
    CHECK(pt == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pj == doctest::Approx(1.0).epsilon(1e-14));

    const auto d = model_defects(a);
    CHECK(d.v_unitarity < 1e-12);
    CHECK(d.feedback_unitarity < 1e-12);
    CHECK(d.feedback_energy < 1e-12);
    CHECK(d.completeness < 1e-12);
    CHECK(d.nondisturbance < 1e-12);
}

TEST_CASE("helper unitaries")
{
    CHECK(unitarity_defect(random_unitary(9, 3)) < 1e-12);
    const Matrix s = swap_unitary(2);
    CHECK(unitarity_defect(s) < 1e-14);
    const auto model = make_random_model({2, 1, 2}, 1);
    CHECK(s(model.thermal_index(2, 0), model.thermal_index(0, 2)) == 1.0);
    CHECK(std::abs(s(model.thermal_index(1, 1), model.thermal_index(1, 1))) == 1.0);
}

TEST_CASE("final-state distributions are normalized")
{
    for (const auto& model : random_models(12)) {
        const auto p_mi = outcome_given_state(model);
        for (int i = 0; i < model.thermal_dim(); ++i) {
            double s = 0.0;
            for (const auto& p : p_mi) s += p[i];
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (std::size_t m = 0; m < model.kraus.size(); ++m) {
            for (int i = 0; i < model.thermal_dim(); ++i) {
                if (p_mi[m][i] == 0.0) continue;
                for (int j = 0; j < model.extraction_dim(); ++j) {
                    const Eigen::VectorXd p = final_distribution(model, static_cast<int>(m), i, j);
                    CHECK(p.minCoeff() >= -1e-15);
                    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("equality holds on randomized non-disturbing models")
{
    const auto models = random_models(100);
    for (const auto& model : models) {
        const Verification v = verify_equality(model, 1e-10);
        CHECK(v.pass());
        CHECK(v.abs_diff < 1e-10);
        const RhsAverage rhs = rhs_average(model);
        CHECK(std::abs(rhs.raw - rhs.simplified) < 1e-12);
    }
    for (int s = 0; s < 5; ++s) {
        CHECK(lhs_average(models[s * 7]) == doctest::Approx(dense_lhs(models[s * 7])).epsilon(1e-12));
    }
}

TEST_CASE("rhs does not depend on measurement or feedback")
{
    const auto model = make_random_model({2, 3, 2}, 5);
    const double rhs = rhs_average(model).raw;
    CHECK(rhs_average(with_disturbing_measurement(model)).raw == rhs);
    CHECK(rhs_average(with_nonconserving_feedback(model, 9)).raw == rhs);
    CHECK(rhs_average(with_beam_splitter_measurement(model, 0.8)).raw == rhs);

    auto identity = model;
    identity.V = Matrix::Identity(model.joint_dim(), model.joint_dim());
    CHECK(rhs_average(identity).raw == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rhs_average(identity).simplified == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("trivial measurement without feedback collapses lhs to rhs")
{
    for (const auto& base : random_models(10)) {
        const auto model = with_trivial_measurement(base);
        REQUIRE(model.kraus.size() == 1);
        CHECK((model.feedback[0] - Matrix::Identity(model.thermal_dim(), model.thermal_dim())).cwiseAbs().maxCoeff() == 0.0);
        const Verification v = verify_equality(model, 1e-10);
        CHECK(v.pass());
        CHECK(v.abs_diff < 1e-14);
    }
}

TEST_CASE("negative controls")
{
    const auto base = make_random_model({2, 2, 2}, 11);
    const Verification disturbing = verify_equality(with_disturbing_measurement(base), 1e-10);
    CHECK(disturbing.status == VerifyStatus::precondition_violation);
    CHECK(disturbing.abs_diff > 1e-10);
    CHECK(disturbing.defects.nondisturbance > 1e-11);

    const auto nonconserving = with_nonconserving_feedback(base, 4);
    const Verification v = verify_equality(nonconserving, 1e-10);
    CHECK(v.status == VerifyStatus::precondition_violation);
    CHECK(v.defects.feedback_energy > 1e-11);
    CHECK(v.defects.feedback_unitarity < 1e-12);
    // Only unitarity of the feedback enters the derivation.
    MESSAGE("non-conserving feedback |lhs - rhs| = " << v.abs_diff);
    CHECK(v.abs_diff < 1e-10);
    CHECK(std::string(to_string(v.status)) == "precondition-violation");
}

TEST_CASE("beam-splitter measurement converges as T -> 1")
{
    const auto base = make_random_model({3, 2, 2}, 3);
    const Verification v = verify_equality(with_beam_splitter_measurement(base, 0.9), 1e-10);
    CHECK(v.status == VerifyStatus::precondition_violation);
    CHECK(v.abs_diff > 1e-4);
    CHECK(v.abs_diff < 1.0);

    const auto sweep = convergence_sweep({0.9, 0.99, 0.999, 1.0}, base);
    REQUIRE(sweep.rows.size() == 4);
    CHECK(sweep.rows.back().abs_diff < 1e-12);
    CHECK(sweep.rows.back().defect < 1e-12);
    CHECK(sweep.defect_slope == doctest::Approx(1.0).epsilon(0.15));
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) CHECK(sweep.rows[i].abs_diff <= sweep.rows[i - 1].abs_diff);
    MESSAGE("defect slope " << sweep.defect_slope << ", diff slope " << sweep.diff_slope);
    CHECK_THROWS_AS(convergence_sweep({1.2}, base), DomainError);
}
