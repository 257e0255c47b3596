#include "photon_demon/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "photon_demon/errors.hpp"
#include "photon_demon/numerics.hpp"

namespace photon_demon::fock {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream)
{
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(stream + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return Rng(seq);
}

const char* to_string(Regime regime)
{
    return regime == Regime::discrete ? "discrete" : "continuous";
}

Regime regime_from_string(const char* name)
{
    if (std::strcmp(name, "discrete") == 0) return Regime::discrete;
    if (std::strcmp(name, "continuous") == 0) return Regime::continuous;
    throw UsageError(std::string("unknown sampling regime '") + name + "'");
}

ThermalEnsemble::ThermalEnsemble(double mean_n, double modes_k) : mean_n_(mean_n), modes_k_(modes_k)
{
    if (!(mean_n > 0.0) || !std::isfinite(mean_n)) {
        throw DomainError("thermal ensemble needs a positive finite mean photon number");
    }
    if (!(modes_k >= 1.0) || !std::isfinite(modes_k)) {
        throw DomainError("thermal ensemble needs modes_k >= 1");
    }
}

ThermalEnsemble ThermalEnsemble::from_g2(double mean_n, double g2)
{
    return ThermalEnsemble(mean_n, effective_mode_count(g2));
}

double ThermalEnsemble::lambda() const noexcept
{
    const double m = mean_per_mode();
    return m / (1.0 + m);
}

bool ThermalEnsemble::integer_modes() const noexcept
{
    return std::floor(modes_k_) == modes_k_;
}

double boltzmann_pmf(double lambda, std::uint64_t i)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("boltzmann_pmf: lambda must lie in (0,1)");
    return (1.0 - lambda) * std::exp(static_cast<double>(i) * std::log(lambda));
}

double lambda_for_mean(double mean)
{
    if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("lambda_for_mean: mean must be positive");
    return mean / (1.0 + mean);
}

double sample_pulse_energy(const ThermalEnsemble& ensemble, Regime regime, Rng& rng)
{
    if (regime == Regime::continuous) {
        std::gamma_distribution<double> gamma(ensemble.modes_k(), ensemble.mean_per_mode());
        return gamma(rng);
    }
    if (!ensemble.integer_modes()) {
        throw UsageError("discrete sampling needs an integer number of thermal modes");
    }
    // std::geometric_distribution counts failures: P(i) = p (1-p)^i, so p = 1 - lambda.
    std::geometric_distribution<std::uint64_t> geometric(1.0 - ensemble.lambda());
    const auto k = static_cast<std::uint64_t>(ensemble.modes_k());
    std::uint64_t total = 0;
    for (std::uint64_t mode = 0; mode < k; ++mode) total += geometric(rng);
    return static_cast<double>(total);
}

double g2_estimator(std::span<const double> samples)
{
    if (samples.size() < 2) throw UsageError("g2_estimator needs at least two samples");
    CompensatedSum s1;
    CompensatedSum s2;
    for (double x : samples) {
        s1.add(x);
        s2.add(x * x);
    }
    const double n = static_cast<double>(samples.size());
    const double mean = s1.value() / n;
    if (mean == 0.0) throw UndefinedEstimateError("g2 undefined for zero mean intensity");
    return (s2.value() / n) / (mean * mean);
}

double effective_mode_count(double g2)
{
    if (!(g2 > 1.0 && g2 <= 2.0)) throw DomainError("g2 outside (1, 2] is not thermal light");
    return 1.0 / (g2 - 1.0);
}

double cross_correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2) {
        throw UsageError("cross_correlation needs two series of equal length >= 2");
    }
    const double ma = compensated_sum(a) / static_cast<double>(a.size());
    const double mb = compensated_sum(b) / static_cast<double>(b.size());
    CompensatedSum sab;
    CompensatedSum saa;
    CompensatedSum sbb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab.add(da * db);
        saa.add(da * da);
        sbb.add(db * db);
    }
    if (saa.value() <= 0.0 || sbb.value() <= 0.0) {
        throw UndefinedEstimateError("cross correlation undefined for a zero-variance series");
    }
    const double rho = sab.value() / std::sqrt(saa.value() * sbb.value());
    return std::clamp(rho, -1.0, 1.0);
}

}  // namespace photon_demon::fock
