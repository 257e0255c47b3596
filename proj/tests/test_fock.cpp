#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "photon_demon/errors.hpp"
#include "photon_demon/fock.hpp"

using namespace photon_demon;
using namespace photon_demon::fock;

namespace {

std::vector<double> draw(const ThermalEnsemble& e, Regime regime, std::size_t n, std::uint64_t seed)
{
    Rng rng = make_rng(seed, 0);
    std::vector<double> out(n);
    for (auto& x : out) x = sample_pulse_energy(e, regime, rng);
    return out;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double m4 = 0.0;  // fourth central moment
};

Moments moments(const std::vector<double>& xs)
{
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) {
        const double d = x - m.mean;
        m.var += d * d;
        m.m4 += d * d * d * d;
    }
    m.var /= static_cast<double>(xs.size() - 1);
    m.m4 /= static_cast<double>(xs.size());
    return m;
}

}  // namespace

TEST_CASE("boltzmann pmf sums to one with mean lambda/(1-lambda)")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.01, 0.95);
    for (int trial = 0; trial < 50; ++trial) {
        const double lambda = u(gen);
        double total = 0.0;
        double mean = 0.0;
        for (std::uint64_t i = 0; i < 4000; ++i) {
            const double p = boltzmann_pmf(lambda, i);
            total += p;
            mean += static_cast<double>(i) * p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mean == doctest::Approx(lambda / (1.0 - lambda)).epsilon(1e-10));
    }
}

TEST_CASE("lambda_for_mean inverts the single-mode mean")
{
    for (double m : {1e-3, 0.5, 1.0, 10.0, 1e6}) {
        const double l = lambda_for_mean(m);
        CHECK(l / (1.0 - l) == doctest::Approx(m).epsilon(1e-9));
    }
    CHECK_THROWS_AS(lambda_for_mean(0.0), DomainError);
}

TEST_CASE("ensemble validation and derived quantities")
{
    CHECK_THROWS_AS(ThermalEnsemble(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ThermalEnsemble(1.0, 0.5), DomainError);
    const ThermalEnsemble e(10.0, 2.0);
    CHECK(e.mean_per_mode() == doctest::Approx(5.0));
    CHECK(e.lambda() == doctest::Approx(5.0 / 6.0));
    CHECK(e.predicted_g2() == doctest::Approx(1.5));
    CHECK(e.integer_modes());
    CHECK_FALSE(ThermalEnsemble(10.0, 10.0 / 9.0).integer_modes());
    CHECK(ThermalEnsemble::from_g2(1e8, 1.9).modes_k() == doctest::Approx(10.0 / 9.0));
}

TEST_CASE("discrete single-mode sampler follows the geometric law (chi-square)")
{
    const ThermalEnsemble e(2.0, 1.0);
    const std::size_t n = 100000;
    const auto xs = draw(e, Regime::discrete, n, 5);
    const int bins = 15;  // 0..13 and a tail bin
    std::vector<double> observed(bins, 0.0);
    for (double x : xs) observed[std::min<int>(bins - 1, static_cast<int>(x))] += 1.0;
    double chi2 = 0.0;
    double tail = 1.0;
    for (int b = 0; b < bins; ++b) {
        const double p = b < bins - 1 ? boltzmann_pmf(e.lambda(), static_cast<std::uint64_t>(b)) : tail;
        tail -= b < bins - 1 ? p : 0.0;
        const double expected = p * static_cast<double>(n);
        chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    // 14 degrees of freedom; 99.9% quantile is 36.12.
    CHECK(chi2 < 36.12);
}

TEST_CASE("sampler mean and variance match k m (1 + m)")
{
    struct Case {
        double mean;
        double k;
        Regime regime;
    };
    for (const Case c : {Case{3.0, 1.0, Regime::discrete}, Case{6.0, 3.0, Regime::discrete},
                         Case{1e8, 1.0, Regime::continuous}, Case{1e8, 10.0 / 9.0, Regime::continuous},
                         Case{50.0, 2.5, Regime::continuous}}) {
        const ThermalEnsemble e(c.mean, c.k);
        const std::size_t n = 100000;
        const Moments m = moments(draw(e, c.regime, n, 17));
        const double per_mode = e.mean_per_mode();
        // Continuous intensity has variance k m^2; the discrete photon count adds shot noise k m.
        const double var = c.regime == Regime::discrete ? c.k * per_mode * (1.0 + per_mode) : c.k * per_mode * per_mode;
        const double se_mean = std::sqrt(var / n);
        const double se_var = std::sqrt((m.m4 - m.var * m.var) / n);
        CHECK(std::abs(m.mean - c.mean) < 4.0 * se_mean);
        CHECK(std::abs(m.var - var) < 4.0 * se_var);
    }
}

TEST_CASE("discrete regime requires integer mode count")
{
    Rng rng = make_rng(1, 0);
    CHECK_THROWS_AS(sample_pulse_energy(ThermalEnsemble(10.0, 1.5), Regime::discrete, rng), UsageError);
}

TEST_CASE("g2 estimator")
{
    SUBCASE("constant samples give 1")
    {
        const std::vector<double> c(100, 3.5);
        CHECK(g2_estimator(c) == doctest::Approx(1.0));
    }
    SUBCASE("thermal samples give 1 + 1/k")
    {
        for (double k : {1.0, 2.0, 10.0, 10.0 / 9.0}) {
            const auto xs = draw(ThermalEnsemble(1e8, k), Regime::continuous, 100000, 23);
            CHECK(g2_estimator(xs) == doctest::Approx(1.0 + 1.0 / k).epsilon(0.05 / (1.0 + 1.0 / k)));
        }
    }
    SUBCASE("errors")
    {
        const std::vector<double> one{1.0};
        const std::vector<double> zeros{0.0, 0.0, 0.0};
        CHECK_THROWS_AS(g2_estimator(one), UsageError);
        CHECK_THROWS_AS(g2_estimator(zeros), UndefinedEstimateError);
    }
}

TEST_CASE("effective mode count")
{
    CHECK(effective_mode_count(2.0) == doctest::Approx(1.0));
    CHECK(effective_mode_count(1.5) == doctest::Approx(2.0));
    CHECK(effective_mode_count(1.9) == doctest::Approx(10.0 / 9.0));
    CHECK_THROWS_AS(effective_mode_count(1.0), DomainError);
    CHECK_THROWS_AS(effective_mode_count(2.1), DomainError);
}

TEST_CASE("cross correlation")
{
    const std::vector<double> a{1.0, 2.0, 4.0, 8.0, 3.0};
    std::vector<double> neg;
    for (double x : a) neg.push_back(-x);
    CHECK(cross_correlation(a, a) == doctest::Approx(1.0));
    CHECK(cross_correlation(a, neg) == doctest::Approx(-1.0));
    const std::vector<double> flat(5, 2.0);
    CHECK_THROWS_AS(cross_correlation(a, flat), UndefinedEstimateError);
    const std::vector<double> shorter{1.0, 2.0};
    CHECK_THROWS_AS(cross_correlation(a, shorter), UsageError);

    const std::size_t n = 100000;
    const ThermalEnsemble e(1e8, 10.0 / 9.0);
    const auto x = draw(e, Regime::continuous, n, 31);
    const auto y = draw(e, Regime::continuous, n, 32);
    CHECK(std::abs(cross_correlation(x, y)) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("rng streams are reproducible and distinct")
{
    Rng a = make_rng(42, 3);
    Rng b = make_rng(42, 3);
    Rng c = make_rng(42, 4);
    Rng d = make_rng(43, 3);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("regime names round-trip")
{
    for (Regime r : {Regime::discrete, Regime::continuous}) CHECK(regime_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(regime_from_string("quantum"), UsageError);
}
