#include "photon_demon/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "photon_demon/errors.hpp"
#include "photon_demon/numerics.hpp"

namespace photon_demon::info {

namespace {

constexpr double kLn10 = 2.302585092994046;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

template <class F>
double integrate(F f, double a, double b, double tol, double& error)
{
    double err = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, tol, &err);
    error += err;
    return value;
}

}  // namespace

const char* to_string(MIMethod method)
{
    return method == MIMethod::continuous_quadrature ? "continuous-quadrature" : "discrete-sum";
}

double register_entropy(double q)
{
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("register_entropy: q must lie in [0,1]");
    return -xlogx(q) - xlogx(1.0 - q);
}

MIResult mutual_info_continuous(double q, double tol)
{
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("mutual_info_continuous: q must lie in [0,1]");
    MIResult out;
    out.q = q;
    out.method = MIMethod::continuous_quadrature;
    if (q == 0.0 || q == 1.0) return out;

    const double c = q / (1.0 - q);
    const double log_no_click = std::log1p(-q);
    const double log_click = std::log(q);
    double error = 0.0;

    // No-click branch; pointwise information is ln p(0|x) - ln(1-q) = -c x - ln(1-q).
    const double a = 1.0 / (1.0 - q);
    const double x0_max = 45.0 / a;
    const double no_click = integrate(
        [&](double x) { return std::exp(-a * x) * (-c * x - log_no_click); }, 0.0, x0_max, tol, error);
    // Tail beyond x0_max bounded in closed form.
    error += std::exp(-a * x0_max) / a * (c * (x0_max + 1.0 / a) + std::abs(log_no_click));

    // Click branch. Near x = 0 the integrand behaves as t (ln t - ln q) with
    // t = c x -> 0; that piece is taken from its series.
    const double t_cut = 1e-7;
    const double x_cut = t_cut / c;
    const double head = t_cut * t_cut / (2.0 * c) * (std::log(t_cut) - 0.5 - log_click);
    error += std::abs(t_cut * t_cut * t_cut / c) * (std::abs(std::log(t_cut)) + std::abs(log_click) + 1.0);
    const double x1_max = 16.0 * kLn10;  // exp(-x) < 1e-16 beyond
    const double click = integrate(
        [&](double x) {
            const double p_click_given_x = -std::expm1(-c * x);
            return p_click_given_x * std::exp(-x) * (std::log(p_click_given_x) - log_click);
        },
        x_cut, x1_max, tol, error);
    error += std::exp(-x1_max) * (std::abs(log_click) + 1.0);

    out.nats = std::max(0.0, no_click + head + click);
    out.est_error = error;
    return out;
}

double binary_channel_information(const std::function<double(std::uint64_t)>& pmf,
                                  const std::function<double(std::uint64_t)>& click_given,
                                  std::uint64_t n_terms)
{
    CompensatedSum p_click;
    CompensatedSum p_total;
    for (std::uint64_t i = 0; i < n_terms; ++i) {
        const double w = pmf(i);
        p_total.add(w);
        p_click.add(w * click_given(i));
    }
    const double p1 = p_click.value();
    const double p0 = p_total.value() - p1;
    CompensatedSum info;
    for (std::uint64_t i = 0; i < n_terms; ++i) {
        const double w = pmf(i);
        if (!(w > 0.0)) continue;
        const double c1 = click_given(i);
        const double c0 = 1.0 - c1;
        double term = 0.0;
        if (c0 > 0.0) term += c0 * (std::log(c0) - std::log(p0));
        if (c1 > 0.0) term += c1 * (std::log(c1) - std::log(p1));
        info.add(w * term);
    }
    return std::max(0.0, info.value());
}

MIResult mutual_info_discrete(const subtraction::MeasurementChannel& channel, double lambda, double tail_tol)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("mutual_info_discrete: lambda must lie in (0,1)");
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw UsageError("mutual_info_discrete: tail_tol must lie in (0,1)");
    MIResult out;
    out.method = MIMethod::discrete_sum;
    const double r = channel.effective_loss();
    out.q = subtraction::click_probability(channel, lambda);
    if (r == 0.0) return out;

    const double log_lambda = std::log(lambda);
    const double log_keep = std::log1p(-r);  // ln p(0 | 1 photon)
    const double keep = std::exp(log_keep);
    const double p0 = (1.0 - lambda) / (1.0 - (1.0 - r) * lambda);
    const double log_p0 = std::log(p0);
    const double log_p1 = std::log(out.q);
    // lambda^n_terms < tail_tol
    const auto n_terms = static_cast<std::uint64_t>(std::ceil(std::log(tail_tol) / log_lambda));

    CompensatedSum info;
    double w = 0.0;
    double c0 = 0.0;
    for (std::uint64_t i = 0; i < n_terms; ++i) {
        const double di = static_cast<double>(i);
        // Multiplicative updates, re-anchored every 1024 terms.
        if (i % 1024 == 0) {
            w = (1.0 - lambda) * std::exp(di * log_lambda);
            c0 = std::exp(di * log_keep);
        }
        const double log_c0 = di * log_keep;
        const double c1 = c0 < 0.5 ? 1.0 - c0 : -std::expm1(log_c0);
        double term = c0 * (log_c0 - log_p0);
        if (c1 > 0.0) term += c1 * (std::log(c1) - log_p1);
        info.add(w * term);
        w *= lambda;
        c0 *= keep;
    }
    out.nats = std::max(0.0, info.value());
    // Remaining tail mass times the largest pointwise information it can carry.
    out.est_error = tail_tol * (std::abs(log_p0) + std::abs(log_p1) + static_cast<double>(n_terms) * std::abs(log_keep));
    return out;
}

double total_information(double q1, double q2)
{
    return mutual_info_continuous(q1).nats + mutual_info_continuous(q2).nats;
}

double gaussian_logmgf(double mu, double sigma, double eps)
{
    if (!(sigma >= 0.0)) throw DomainError("gaussian_logmgf: sigma must be non-negative");
    return eps * mu + 0.5 * eps * eps * sigma * sigma;
}

EmpiricalLogMgf::EmpiricalLogMgf(std::span<const double> samples, std::span<const double> weights)
{
    if (samples.size() < 2) throw UsageError("log-MGF estimate needs at least two samples");
    if (!weights.empty() && weights.size() != samples.size()) {
        throw UsageError("weights must match samples in length");
    }
    CompensatedSum wsum;
    CompensatedSum wx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        if (!(w >= 0.0)) throw UsageError("sample weights must be non-negative");
        wsum.add(w);
        wx.add(w * samples[i]);
    }
    if (!(wsum.value() > 0.0)) throw UsageError("sample weights sum to zero");
    mean_ = wx.value() / wsum.value();
    CompensatedSum wvar;
    centered_.reserve(samples.size());
    log_weights_.reserve(samples.size());
    const double log_total = std::log(wsum.value());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        const double d = samples[i] - mean_;
        wvar.add(w * d * d);
        centered_.push_back(d);
        log_weights_.push_back(w > 0.0 ? std::log(w) - log_total : -std::numeric_limits<double>::infinity());
    }
    sd_ = std::sqrt(wvar.value() / wsum.value());
}

double EmpiricalLogMgf::centered(double eps) const
{
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centered_.size(); ++i) peak = std::max(peak, log_weights_[i] + eps * centered_[i]);
    if (!std::isfinite(peak)) return peak;
    CompensatedSum s;
    for (std::size_t i = 0; i < centered_.size(); ++i) s.add(std::exp(log_weights_[i] + eps * centered_[i] - peak));
    return peak + std::log(s.value());
}

double EmpiricalLogMgf::operator()(double eps) const { return eps * mean_ + centered(eps); }

namespace {

// Minimizes offset + g(eps) over log-spaced eps in [1e-6, 1e3] / scale,
// then refines the best grid bracket with Brent's method.
BoundReport minimize_bound(const std::function<double(double)>& g, double offset, double mean_u0, double scale,
                           double i_total)
{
    if (!(i_total >= 0.0)) throw DomainError("optimize_bound: information must be non-negative");
    BoundReport out;
    out.i_total = i_total;
    out.sigma = scale;
    out.sqrt_bound = std::sqrt(2.0 * i_total);
    out.gaussian_bound = mean_u0 + scale * out.sqrt_bound;
    out.realized_ratio = std::numeric_limits<double>::quiet_NaN();
    const auto to_ratio = [&](double bound) { return scale > 0.0 ? (bound - mean_u0) / scale : 0.0; };

    if (i_total == 0.0 || !(scale > 0.0)) {
        // I = 0 is the eps -> 0 limit and sigma = 0 the eps -> inf limit; both
        // leave no room to displace the mean.
        out.empirical_bound = mean_u0;
        out.empirical_ratio_bound = 0.0;
        return out;
    }

    constexpr int kGrid = 241;
    const double lo = 1e-6 / scale;
    const double hi = 1e3 / scale;
    std::vector<double> eps(kGrid);
    std::vector<double> value(kGrid, std::numeric_limits<double>::infinity());
    int best = -1;
    for (int n = 0; n < kGrid; ++n) {
        eps[n] = lo * std::pow(hi / lo, static_cast<double>(n) / (kGrid - 1));
        const double v = g(eps[n]);
        if (std::isfinite(v)) {
            value[n] = v;
            if (best < 0 || v < value[best]) best = n;
        }
    }
    if (best < 0) {
        out.fallback = true;
        out.epsilon_star = out.sqrt_bound / scale;
        out.empirical_bound = out.gaussian_bound;
        out.empirical_ratio_bound = to_ratio(out.empirical_bound);
        return out;
    }

    const double a = eps[std::max(best - 1, 0)];
    const double b = eps[std::min(best + 1, kGrid - 1)];
    const auto objective = [&](double e) {
        const double v = g(e);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::uintmax_t max_iter = 500;
    const auto [e_star, g_star] =
        boost::math::tools::brent_find_minima(objective, a, b, std::numeric_limits<double>::digits / 2, max_iter);
    if (g_star <= value[best]) {
        out.epsilon_star = e_star;
        out.empirical_bound = offset + g_star;
    } else {
        out.epsilon_star = eps[best];
        out.empirical_bound = offset + value[best];
    }
    out.empirical_ratio_bound = to_ratio(out.empirical_bound);
    return out;
}

}  // namespace

BoundReport optimize_bound(std::span<const double> samples_u0, double mean_u0, double i_total)
{
    const EmpiricalLogMgf mgf(samples_u0);
    const auto g = [&](double eps) { return (mgf.centered(eps) + i_total) / eps; };
    return minimize_bound(g, mgf.mean(), mean_u0, mgf.sd(), i_total);
}

BoundReport optimize_bound(const std::function<double(double)>& log_mgf, double mean_u0, double scale,
                           double i_total)
{
    const auto g = [&](double eps) { return (log_mgf(eps) + i_total) / eps; };
    return minimize_bound(g, 0.0, mean_u0, scale, i_total);
}

}  // namespace photon_demon::info
