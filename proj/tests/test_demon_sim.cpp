#include <cmath>
#include <vector>

#include "doctest.h"
#include "photon_demon/demon_sim.hpp"
#include "photon_demon/errors.hpp"
#include "photon_demon/infotheory.hpp"

using namespace photon_demon;
using namespace photon_demon::sim;

namespace {

// Four-case enumeration of <n1> - <n2> after the conditional swap, with the
// single-mode post-measurement means (2 - p) and (1 - p).
double four_case_single_mode(double p1, double p2, Strategy s)
{
    double total = 0.0;
    for (int c1 = 0; c1 < 2; ++c1) {
        for (int c2 = 0; c2 < 2; ++c2) {
            const double prob = (c1 ? p1 : 1 - p1) * (c2 ? p2 : 1 - p2);
            const double a1 = c1 ? 2 - p1 : 1 - p1;
            const double a2 = c2 ? 2 - p2 : 1 - p2;
            total += prob * (flips(s, c1, c2) ? a2 - a1 : a1 - a2);
        }
    }
    return total;
}

double mean_of(const std::vector<PulseRecord>& rs, double PulseRecord::*field)
{
    double s = 0.0;
    for (const auto& r : rs) s += r.*field;
    return s / static_cast<double>(rs.size());
}

}  // namespace

TEST_CASE("strategy truth table and names")
{
    CHECK_FALSE(flips(Strategy::none, true, false));
    CHECK(flips(Strategy::flip_on_click_noclick, true, false));
    CHECK_FALSE(flips(Strategy::flip_on_click_noclick, false, true));
    CHECK_FALSE(flips(Strategy::flip_on_click_noclick, true, true));
    CHECK(flips(Strategy::flip_on_noclick_click, false, true));
    CHECK_FALSE(flips(Strategy::flip_on_noclick_click, false, false));
    for (Strategy s : {Strategy::none, Strategy::flip_on_click_noclick, Strategy::flip_on_noclick_click}) {
        CHECK(strategy_from_string(to_string(s)) == s);
    }
    CHECK_THROWS_AS(strategy_from_string("always"), UsageError);
}

TEST_CASE("work transfer")
{
    WorkModel w;
    w.capacitance = 2e-12;
    w.battery_u0 = 0.0;
    CHECK(work_transfer(w, 3.0) == 0.0);
    w.battery_u0 = 0.7;
    CHECK(work_transfer(w, 0.7) == 0.0);
    w.battery_u0 = 0.5;
    CHECK(work_transfer(w, 1.0) == doctest::Approx(5e-13).epsilon(1e-13));
    WorkModel bad;
    bad.capacitance = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = WorkModel{};
    bad.kappa = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("expected imbalance")
{
    CHECK(expected_imbalance(0.4, 0.4, Strategy::none, 1.0) == 0.0);
    CHECK(std::abs(expected_imbalance(1.0 / 3.0, 2.0 / 3.0, Strategy::flip_on_noclick_click, 1.0) - 16.0 / 27.0) < 1e-15);
    CHECK(expected_imbalance(0.5, 0.5, Strategy::flip_on_noclick_click, 1.0) == doctest::Approx(0.5));
    // Flipping on (click, no click) moves the mean towards arm 2.
    CHECK(expected_imbalance(0.702, 0.311, Strategy::flip_on_click_noclick, 10.0 / 9.0) < 0.0);
    CHECK(expected_imbalance(0.0, 0.311, Strategy::flip_on_click_noclick, 10.0 / 9.0) == 0.0);
    CHECK(expected_imbalance(1.0, 0.311, Strategy::flip_on_noclick_click, 10.0 / 9.0) == 0.0);
    CHECK_THROWS_AS(expected_imbalance(1.5, 0.3, Strategy::none, 1.0), DomainError);

    for (int a = 0; a <= 10; ++a) {
        for (int b = 0; b <= 10; ++b) {
            const double p1 = a / 10.0;
            const double p2 = b / 10.0;
            for (Strategy s : {Strategy::none, Strategy::flip_on_click_noclick, Strategy::flip_on_noclick_click}) {
                CHECK(expected_imbalance(p1, p2, s, 1.0) == doctest::Approx(four_case_single_mode(p1, p2, s)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("null strategy is unbiased for balanced arms")
{
    RateExperiment setup;
    setup.modes_k = 10.0 / 9.0;
    setup.rate1 = setup.rate2 = 0.5;
    const auto result = run_experiment(make_rate_experiment(setup, Strategy::none, 200000, 3));
    const auto& s = result.stats;
    CHECK(s.mean_u_f == s.mean_u_0);
    CHECK(std::abs(s.mean_u_0) < 4.0 * s.sigma_u_0 / std::sqrt(200000.0));
    CHECK(s.flip_fraction == 0.0);
}

TEST_CASE("optimal imbalance reproduced by simulation")
{
    RateExperiment setup;
    setup.modes_k = 1.0;
    setup.transmittance = 0.995;
    setup.rate1 = 1.0 / 3.0;
    setup.rate2 = 2.0 / 3.0;
    const auto result = run_experiment(make_rate_experiment(setup, Strategy::flip_on_noclick_click, 200000, 9));
    const auto& s = result.stats;
    // kappa is one volt per T <n>, so the shift is in units of the arm mean.
    const double shift = s.mean_u_f - s.mean_u_0;
    CHECK(std::abs(shift - 16.0 / 27.0) < 3.0 * s.shift_se);
    CHECK(s.rate1 == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    CHECK(s.rate2 == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("experimental rates displace the mean as the model predicts")
{
    for (fock::Regime regime : {fock::Regime::continuous, fock::Regime::discrete}) {
        RateExperiment setup;
        setup.modes_k = regime == fock::Regime::continuous ? 10.0 / 9.0 : 1.0;
        setup.mean_n = regime == fock::Regime::continuous ? 1e8 : 2000.0;  // 0.702 reachable at T = 0.995
        setup.rate1 = 0.702;
        setup.rate2 = 0.311;
        setup.regime = regime;
        const auto result = run_experiment(make_rate_experiment(setup, Strategy::flip_on_click_noclick, 100000, 21));
        const auto& s = result.stats;
        const double model = expected_imbalance(0.702, 0.311, Strategy::flip_on_click_noclick, setup.modes_k);
        CHECK(std::abs((s.mean_u_f - s.mean_u_0) - model) < 4.0 * s.shift_se);
    }
}

TEST_CASE("multimode imbalance agrees with conditioned Gamma Monte Carlo")
{
    // Oracle independent of the closed form: condition sampled intensities on
    // simulated clicks and swap arms by hand.
    const double k = 10.0 / 9.0;
    RateExperiment setup;
    setup.modes_k = k;
    setup.rate1 = 0.55;
    setup.rate2 = 0.25;
    const auto cfg = make_rate_experiment(setup, Strategy::none, 200000, 44);
    const auto result = run_experiment(cfg);
    double acc = 0.0;
    double acc2 = 0.0;
    for (const auto& r : result.records) {
        const double d = flips(Strategy::flip_on_noclick_click, r.click1, r.click2) ? r.n2 - r.n1 : r.n1 - r.n2;
        const double scaled = d / (setup.transmittance * setup.mean_n);
        acc += scaled;
        acc2 += scaled * scaled;
    }
    const double n = static_cast<double>(result.records.size());
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean - expected_imbalance(0.55, 0.25, Strategy::flip_on_noclick_click, k)) < 4.0 * se);
}

TEST_CASE("polarity flip equals swapping the arms, record by record")
{
    RateExperiment setup;
    setup.rate1 = 0.6;
    setup.rate2 = 0.4;
    const auto cfg = make_rate_experiment(setup, Strategy::flip_on_click_noclick, 5000, 1);
    const auto result = run_experiment(cfg);
    const double kappa = cfg.work_model.kappa;
    std::size_t flipped = 0;
    for (const auto& r : result.records) {
        const bool f = flips(cfg.strategy, r.click1, r.click2);
        const double swapped = kappa * (r.n2 - r.n1);
        CHECK(r.u_raw == kappa * (r.n1 - r.n2));
        CHECK(r.u_post == (f ? swapped : r.u_raw));
        flipped += f ? 1 : 0;
    }
    CHECK(flipped > 0);
    const auto again = apply_feedforward(result.records, cfg.strategy);
    for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].u_post == result.records[i].u_post);
}

TEST_CASE("per-cell conditional means match the subtraction model")
{
    RateExperiment setup;
    setup.modes_k = 1.0;
    setup.rate1 = 0.702;
    setup.rate2 = 0.311;
    const auto cfg = make_rate_experiment(setup, Strategy::none, 200000, 12);
    const auto result = run_experiment(cfg);
    const double unit = setup.transmittance * setup.mean_n;
    for (int c1 = 0; c1 < 2; ++c1) {
        std::vector<PulseRecord> cell;
        for (const auto& r : result.records) {
            if (r.click1 == static_cast<bool>(c1)) cell.push_back(r);
        }
        const double expected = c1 ? subtraction::post_click_factor(result.stats.rate1, 1.0)
                                   : subtraction::post_noclick_factor(result.stats.rate1, 1.0);
        // Single-mode thermal: conditional sd equals the conditional mean.
        const double m = mean_of(cell, &PulseRecord::n1) / unit;
        CHECK(std::abs(m - expected) < 4.0 * (expected + 0.05) / std::sqrt(static_cast<double>(cell.size())));
    }
}

TEST_CASE("runs are deterministic in (seed, shards) and independent of workers")
{
    RateExperiment setup;
    auto cfg = make_rate_experiment(setup, Strategy::flip_on_noclick_click, 3001, 77);
    const auto a = run_experiment(cfg);
    cfg.workers = 3;
    const auto b = run_experiment(cfg);
    REQUIRE(a.records.size() == 3001);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].index == i);
        CHECK(a.records[i].n1 == b.records[i].n1);
        CHECK(a.records[i].u_post == b.records[i].u_post);
    }
    CHECK(a.stats.mean_u_f == b.stats.mean_u_f);
    cfg.seed = 78;
    CHECK(run_experiment(cfg).records[0].n1 != a.records[0].n1);
}

TEST_CASE("summary statistics")
{
    SUBCASE("degenerate constant arms")
    {
        std::vector<PulseRecord> rs(10);
        for (auto& r : rs) r.n1 = r.n2 = 5.0;
        const auto s = summarize(rs, WorkModel{});
        CHECK(s.degenerate);
        CHECK(s.sigma_u_0 == 0.0);
        CHECK(std::isnan(s.cross_corr));
    }
    SUBCASE("too few records")
    {
        std::vector<PulseRecord> rs(1);
        CHECK_THROWS_AS(summarize(rs, WorkModel{}), UsageError);
    }
    SUBCASE("single-mode arms: g2 near 2, no cross correlation")
    {
        RateExperiment setup;
        setup.modes_k = 1.0;
        const auto result = run_experiment(make_rate_experiment(setup, Strategy::none, 100000, 5));
        CHECK(result.stats.g2_arm1 == doctest::Approx(2.0).epsilon(0.025));
        CHECK(result.stats.g2_arm2 == doctest::Approx(2.0).epsilon(0.025));
        CHECK(std::abs(result.stats.cross_corr) < 3.0 / std::sqrt(100000.0));
    }
    SUBCASE("battery work follows the voltages")
    {
        RateExperiment setup;
        auto cfg = make_rate_experiment(setup, Strategy::flip_on_click_noclick, 2000, 5);
        cfg.work_model.battery_u0 = 0.3;
        const auto result = run_experiment(cfg);
        double w = 0.0;
        for (const auto& r : result.records) w += work_transfer(cfg.work_model, r.u_post);
        CHECK(result.stats.mean_w_f == doctest::Approx(w / 2000.0).epsilon(1e-12));
    }
}

TEST_CASE("p1 scan")
{
    ScanConfig cfg;
    cfg.p1_grid = {0.0, 2.0 / 3.0, 1.0};
    cfg.n_pulses_per_point = 20000;
    cfg.seed = 2;
    const auto rows = scan_p1(cfg);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].strategy == Strategy::flip_on_click_noclick);
    CHECK(rows[0].ratio == 0.0);
    CHECK(rows[5].ratio == 0.0);  // p1 = 1: arm 1 always clicks
    CHECK(std::abs(rows[2].ratio - rows[3].ratio) > 5.0 * (rows[2].ratio_se + rows[3].ratio_se));
    for (const auto& row : rows) {
        CHECK(row.within_bound);
        CHECK(row.bound == doctest::Approx(std::sqrt(2.0 * info::total_information(row.p1, 0.311))));
        CHECK(std::abs(row.model_z) < 4.0);
        CHECK(row.model_ratio ==
              doctest::Approx(std::abs(expected_imbalance(row.p1, 0.311, row.strategy, cfg.modes_k)) *
                              std::sqrt(cfg.modes_k / 2.0)));
    }
}

TEST_CASE("linear grid")
{
    const auto g = linear_grid(0.0, 1.0, 21);
    REQUIRE(g.size() == 21);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[10] == doctest::Approx(0.5));
    CHECK_THROWS_AS(linear_grid(0.0, 1.0, 1), UsageError);
}
