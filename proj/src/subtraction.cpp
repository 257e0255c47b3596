#include "photon_demon/subtraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "photon_demon/errors.hpp"

namespace photon_demon::subtraction {

namespace {

void check_lambda(double lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0,1)");
}

void check_rate(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("click rate must lie in [0,1]");
}

double log_binomial(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n,k) T^(n-k) (1-T)^k, exact zero when (1-T)^k or T^(n-k) vanishes.
double binomial_weight(int n, int k, double T)
{
    const double R = 1.0 - T;
    if (k > 0 && R == 0.0) return 0.0;
    if (n - k > 0 && T == 0.0) return 0.0;
    double log_w = log_binomial(n, k);
    if (k > 0) log_w += k * std::log(R);
    if (n - k > 0) log_w += (n - k) * std::log(T);
    return std::exp(log_w);
}

// Solves 1 - p = (1 + m x)^-k for x.
double loss_parameter_for_rate(double p, double mean_per_mode, double modes_k)
{
    return std::expm1(-std::log1p(-p) / modes_k) / mean_per_mode;
}

}  // namespace

MeasurementChannel::MeasurementChannel(double transmittance, double efficiency)
    : T_(transmittance), eta_(efficiency)
{
    if (!(transmittance > 0.0 && transmittance <= 1.0)) {
        throw DomainError("beam splitter transmittance must lie in (0,1]");
    }
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw DomainError("detector efficiency must lie in [0,1]");
    }
}

double click_probability(const MeasurementChannel& channel, double lambda)
{
    check_lambda(lambda);
    const double r = channel.effective_loss();
    return lambda * r / (1.0 - (1.0 - r) * lambda);
}

double click_probability(const MeasurementChannel& channel, const fock::ThermalEnsemble& ensemble,
                         fock::Regime regime)
{
    const double r = channel.effective_loss();
    const double x = regime == fock::Regime::discrete ? r : -std::log1p(-r);
    // 1 - (1 + m x)^-k
    return -std::expm1(-ensemble.modes_k() * std::log1p(ensemble.mean_per_mode() * x));
}

double click_probability_given_n(const MeasurementChannel& channel, double n)
{
    if (!(n >= 0.0)) throw DomainError("photon number must be non-negative");
    const double r = channel.effective_loss();
    if (r >= 1.0) return n > 0.0 ? 1.0 : 0.0;
    return -std::expm1(n * std::log1p(-r));
}

double post_click_factor(double p, double modes_k)
{
    check_rate(p);
    if (p == 0.0) throw NullEventError("post-click mean conditions on a click that never happens");
    if (p == 1.0) return 1.0;
    // 1 - (1-p)^((k+1)/k) without cancellation for small p
    return -std::expm1((modes_k + 1.0) / modes_k * std::log1p(-p)) / p;
}

double post_noclick_factor(double p, double modes_k)
{
    check_rate(p);
    if (p == 1.0) throw NullEventError("post-no-click mean conditions on a no-click that never happens");
    return std::exp(std::log1p(-p) / modes_k);
}

double post_click_mean(const MeasurementChannel& channel, double mean_t, double modes_k)
{
    const fock::ThermalEnsemble ensemble(mean_t, modes_k);
    const double p = click_probability(channel, ensemble);
    return channel.transmittance() * mean_t * post_click_factor(p, modes_k);
}

double post_noclick_mean(const MeasurementChannel& channel, double mean_t, double modes_k)
{
    const fock::ThermalEnsemble ensemble(mean_t, modes_k);
    const double p = click_probability(channel, ensemble);
    return channel.transmittance() * mean_t * post_noclick_factor(p, modes_k);
}

MeasurementChannel tune_channel(const fock::ThermalEnsemble& ensemble, double transmittance,
                                double target_rate, fock::Regime regime)
{
    check_rate(target_rate);
    if (target_rate == 0.0) return MeasurementChannel(transmittance, 0.0);
    const double R = 1.0 - transmittance;
    if (R <= 0.0) throw DomainError("a lossless beam splitter cannot produce clicks");
    if (target_rate == 1.0) return MeasurementChannel(transmittance, 1.0);
    const double x = loss_parameter_for_rate(target_rate, ensemble.mean_per_mode(), ensemble.modes_k());
    const double r = regime == fock::Regime::discrete ? x : -std::expm1(-x);
    return MeasurementChannel(transmittance, std::min(1.0, r / R));
}

KrausSets build_kraus(const MeasurementChannel& channel, int n_max, std::optional<double> lambda,
                      double tail_tol)
{
    if (n_max < 1) throw UsageError("build_kraus needs n_max >= 1");
    if (lambda) {
        check_lambda(*lambda);
        // P(n > n_max) = lambda^(n_max + 1)
        const double tail = std::exp((n_max + 1.0) * std::log(*lambda));
        if (tail > tail_tol) {
            throw TruncationError("n_max = " + std::to_string(n_max) +
                                  " leaves a thermal tail above tolerance");
        }
    }
    const double T = channel.transmittance();
    const int dim = n_max + 1;
    KrausSets sets;
    for (int k = 0; k <= n_max; ++k) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = k; i <= n_max; ++i) m(i - k, i) = std::sqrt(binomial_weight(i, k, T));
        if (k == 0) {
            sets.no_click.push_back(std::move(m));
        } else {
            sets.click.push_back(std::move(m));
        }
    }
    return sets;
}

double completeness_defect(const KrausSets& sets)
{
    const auto dim = sets.no_click.front().cols();
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& m : sets.no_click) total += m.transpose() * m;
    for (const auto& m : sets.click) total += m.transpose() * m;
    return (total - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

namespace {

// Diagonal of sum_i M_m(|i><i|), skipping inputs that never yield outcome m.
Eigen::VectorXd normalized_output_diagonal(const std::vector<Eigen::MatrixXd>& ops)
{
    const auto dim = ops.front().cols();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double p = 0.0;
        for (const auto& m : ops) p += m.col(i).squaredNorm();
        if (p <= 0.0) continue;
        for (const auto& m : ops) diag += m.col(i).cwiseAbs2() / p;
    }
    return diag;
}

}  // namespace

NondisturbanceReport nondisturbance_defect(const MeasurementChannel& channel, int n_max)
{
    const double T = channel.transmittance();
    const double R = 1.0 - T;
    const KrausSets sets = build_kraus(channel, n_max);
    const Eigen::VectorXd d0 = normalized_output_diagonal(sets.no_click);
    const Eigen::VectorXd d1 = normalized_output_diagonal(sets.click);

    NondisturbanceReport out;
    out.upper = 1.0 / T - 1.0;
    out.lower = std::numeric_limits<double>::infinity();
    const int top = static_cast<int>(std::floor(0.9 * n_max));
    for (int i = 0; i <= top; ++i) {
        // Level i collects C(i+k,k) T^(i+1) R^k from input i+k; mass lost above n_max:
        double kept = 0.0;
        for (int k = 0; k <= n_max - i; ++k) kept += binomial_weight(i + k, k, T) * T;
        if (1.0 - kept > 1e-12) continue;

        out.interior.push_back(i);
        out.coefficients_m1.push_back(d1(i));
        const double lower = R == 0.0 ? 1.0 : (i + 1.0) * std::pow(T, i) * R / (-std::expm1((i + 1.0) * std::log(T)));
        out.lower_bounds.push_back(lower);
        out.lower = std::min(out.lower, lower);
        out.defect_m0 = std::max(out.defect_m0, std::abs(d0(i) - 1.0));
        if (R > 0.0) {
            out.defect_m1 = std::max(out.defect_m1, std::abs(d1(i) - 1.0));
            out.coefficient_max = std::max(out.coefficient_max, d1(i));
        }
    }
    if (out.interior.empty()) {
        throw TruncationError("n_max = " + std::to_string(n_max) + " leaves no untruncated interior levels");
    }
    return out;
}

}  // namespace photon_demon::subtraction
