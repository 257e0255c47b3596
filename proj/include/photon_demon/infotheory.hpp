#pragma once

// Information acquired by the click measurement and the work bound it
// implies. Natural logarithms throughout.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "photon_demon/subtraction.hpp"

namespace photon_demon::info {

enum class MIMethod { continuous_quadrature, discrete_sum };

const char* to_string(MIMethod method);

struct MIResult {
    double q = 0.0;  // click rate
    double nats = 0.0;
    MIMethod method = MIMethod::continuous_quadrature;
    double est_error = 0.0;
};

// Binary Shannon entropy in nats, 0 log 0 = 0.
double register_entropy(double q);

// High-occupation, T -> 1 limit where the joint densities depend on q only:
//   P(0,x) = exp(-x/(1-q)),  P(1,x) = (1 - exp(-q x/(1-q))) exp(-x).
// Adaptive Gauss-Kronrod quadrature; est_error bounds the quadrature and
// truncation error.
MIResult mutual_info_continuous(double q, double tol = 1e-10);

// Exact sum over photon numbers for a single thermal mode with ratio lambda.
// Stops once the remaining Boltzmann tail mass drops below tail_tol.
MIResult mutual_info_discrete(const subtraction::MeasurementChannel& channel, double lambda,
                              double tail_tol = 1e-12);

// Mutual information between i ~ pmf and a binary outcome with
// P(click | i) = click_given(i), summed over i = 0 .. n_terms-1. Both
// outcome probabilities are accumulated from the same terms.
double binary_channel_information(const std::function<double(std::uint64_t)>& pmf,
                                  const std::function<double(std::uint64_t)>& click_given,
                                  std::uint64_t n_terms);

// I(q1) + I(q2) from the continuous formula; arms are independent.
double total_information(double q1, double q2);

// eps mu + eps^2 sigma^2 / 2
double gaussian_logmgf(double mu, double sigma, double eps);

// ln <exp(eps U)> over a (possibly weighted) sample, evaluated in
// log-sum-exp form about the sample mean so large eps cannot overflow.
class EmpiricalLogMgf {
  public:
    explicit EmpiricalLogMgf(std::span<const double> samples, std::span<const double> weights = {});

    double operator()(double eps) const;
    // ln <exp(eps (U - mean))>
    double centered(double eps) const;
    double mean() const noexcept { return mean_; }
    double sd() const noexcept { return sd_; }

  private:
    std::vector<double> centered_;
    std::vector<double> log_weights_;
    double mean_ = 0.0;
    double sd_ = 0.0;
};

struct BoundReport {
    double i_total = 0.0;
    double sqrt_bound = 0.0;      // sqrt(2 I)
    double gaussian_bound = 0.0;  // <U>_0 + sigma sqrt(2 I)
    double empirical_bound = 0.0; // min_eps [ln <e^(eps U)>_0 + I] / eps, bound on <U>_f
    double empirical_ratio_bound = 0.0;  // (empirical_bound - <U>_0) / sigma
    double epsilon_star = 0.0;
    double realized_ratio = 0.0;  // filled in by callers that have a feedback run
    double sigma = 0.0;
    bool fallback = false;        // log-MGF non-finite, Gaussian form used
};

// Tightest upper bound on <U>_f implied by Jensen's inequality applied to
// <exp(eps U - I)>_f = <exp(eps U)>_0, minimized over eps > 0. A bound on
// the other side follows from passing -U.
BoundReport optimize_bound(std::span<const double> samples_u0, double mean_u0, double i_total);

// Same minimization over an arbitrary log-MGF; `scale` is the standard
// deviation used to place the eps search range.
BoundReport optimize_bound(const std::function<double(double)>& log_mgf, double mean_u0, double scale,
                           double i_total);

}  // namespace photon_demon::info
