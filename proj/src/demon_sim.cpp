#include "photon_demon/demon_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <thread>

#include "photon_demon/errors.hpp"
#include "photon_demon/infotheory.hpp"
#include "photon_demon/numerics.hpp"

namespace photon_demon::sim {

const char* to_string(Strategy strategy)
{
    switch (strategy) {
    case Strategy::none:
        return "none";
    case Strategy::flip_on_click_noclick:
        return "flip-on-click-noclick";
    case Strategy::flip_on_noclick_click:
        return "flip-on-noclick-click";
    }
    return "none";
}

Strategy strategy_from_string(const std::string& name)
{
    for (Strategy s : {Strategy::none, Strategy::flip_on_click_noclick, Strategy::flip_on_noclick_click}) {
        if (name == to_string(s)) return s;
    }
    throw UsageError("unknown feed-forward strategy '" + name + "'");
}

bool flips(Strategy strategy, bool click1, bool click2) noexcept
{
    switch (strategy) {
    case Strategy::flip_on_click_noclick:
        return click1 && !click2;
    case Strategy::flip_on_noclick_click:
        return !click1 && click2;
    case Strategy::none:
        break;
    }
    return false;
}

void WorkModel::validate() const
{
    if (!(capacitance > 0.0)) throw DomainError("capacitance must be positive");
    if (!(kappa > 0.0)) throw DomainError("kappa must be positive");
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    if (!std::isfinite(battery_u0)) throw DomainError("battery voltage must be finite");
}

double work_transfer(const WorkModel& model, double voltage)
{
    return model.capacitance * (voltage - model.battery_u0) * model.battery_u0;
}

double SummaryStats::ratio() const noexcept
{
    return sigma_u_0 > 0.0 ? std::abs(mean_u_f - mean_u_0) / sigma_u_0 : 0.0;
}

namespace {

struct ArmSample {
    double transmitted = 0.0;
    bool click = false;
};

ArmSample sample_arm(const Arm& arm, fock::Regime regime, fock::Rng& rng)
{
    const double n = fock::sample_pulse_energy(arm.ensemble, regime, rng);
    const double T = arm.channel.transmittance();
    ArmSample out;
    if (regime == fock::Regime::continuous) {
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        out.click = uniform(rng) < subtraction::click_probability_given_n(arm.channel, n);
        out.transmitted = T * n;
        return out;
    }
    // Each photon is transmitted, reflected and detected, or reflected and lost.
    const auto photons = static_cast<std::uint64_t>(n);
    std::binomial_distribution<std::uint64_t> reflect(photons, 1.0 - T);
    const std::uint64_t reflected = reflect(rng);
    std::binomial_distribution<std::uint64_t> detect(reflected, arm.channel.efficiency());
    out.click = detect(rng) > 0;
    out.transmitted = static_cast<double>(photons - reflected);
    return out;
}

void simulate_range(const ExperimentConfig& config, std::size_t shard, std::size_t begin, std::size_t end,
                    std::vector<PulseRecord>& records)
{
    fock::Rng rng = fock::make_rng(config.seed, shard);
    const double kappa = config.work_model.kappa;
    for (std::size_t idx = begin; idx < end; ++idx) {
        const ArmSample a = sample_arm(config.arm1, config.regime, rng);
        const ArmSample b = sample_arm(config.arm2, config.regime, rng);
        PulseRecord& rec = records[idx];
        rec.index = idx;
        rec.n1 = a.transmitted;
        rec.n2 = b.transmitted;
        rec.click1 = a.click;
        rec.click2 = b.click;
        rec.u_raw = kappa * (a.transmitted - b.transmitted);
        rec.u_post = flips(config.strategy, a.click, b.click) ? -rec.u_raw : rec.u_raw;
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    if (config.n_pulses < 1) throw UsageError("run_experiment needs at least one pulse");
    if (config.shards < 1) throw UsageError("run_experiment needs at least one shard");
    config.work_model.validate();
    if (config.regime == fock::Regime::discrete &&
        !(config.arm1.ensemble.integer_modes() && config.arm2.ensemble.integer_modes())) {
        throw UsageError("discrete sampling needs an integer number of thermal modes");
    }

    ExperimentResult result;
    result.records.resize(config.n_pulses);
    const std::size_t shards = std::min(config.shards, config.n_pulses);
    const auto shard_begin = [&](std::size_t s) { return s * config.n_pulses / shards; };

    const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, shards);
    if (workers == 1) {
        for (std::size_t s = 0; s < shards; ++s) {
            simulate_range(config, s, shard_begin(s), shard_begin(s + 1), result.records);
        }
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t s = w; s < shards; s += workers) {
                    simulate_range(config, s, shard_begin(s), shard_begin(s + 1), result.records);
                }
            });
        }
    }
    if (result.records.size() >= 2) result.stats = summarize(result.records, config.work_model);
    return result;
}

std::vector<PulseRecord> apply_feedforward(std::span<const PulseRecord> records, Strategy strategy)
{
    std::vector<PulseRecord> out(records.begin(), records.end());
    for (auto& rec : out) rec.u_post = flips(strategy, rec.click1, rec.click2) ? -rec.u_raw : rec.u_raw;
    return out;
}

SummaryStats summarize(std::span<const PulseRecord> records, const WorkModel& work_model)
{
    if (records.size() < 2) throw UsageError("summarize needs at least two pulse records");
    const std::size_t n = records.size();
    std::vector<double> u0(n), uf(n), shift(n), n1(n), n2(n), w0(n), wf(n);
    std::size_t clicks1 = 0;
    std::size_t clicks2 = 0;
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const PulseRecord& r = records[i];
        u0[i] = r.u_raw;
        uf[i] = r.u_post;
        shift[i] = r.u_post - r.u_raw;
        n1[i] = r.n1;
        n2[i] = r.n2;
        w0[i] = work_transfer(work_model, r.u_raw);
        wf[i] = work_transfer(work_model, r.u_post);
        clicks1 += r.click1 ? 1 : 0;
        clicks2 += r.click2 ? 1 : 0;
        flipped += r.u_post != r.u_raw ? 1 : 0;
    }

    SummaryStats s;
    s.n_pulses = n;
    const MeanSd m0 = mean_sd(u0);
    const MeanSd mf = mean_sd(uf);
    s.mean_u_0 = m0.mean;
    s.sigma_u_0 = m0.sd;
    s.mean_u_f = mf.mean;
    s.sigma_u_f = mf.sd;
    s.shift_se = mean_sd(shift).sd / std::sqrt(static_cast<double>(n));
    s.rate1 = static_cast<double>(clicks1) / static_cast<double>(n);
    s.rate2 = static_cast<double>(clicks2) / static_cast<double>(n);
    s.flip_fraction = static_cast<double>(flipped) / static_cast<double>(n);
    const MeanSd mw0 = mean_sd(w0);
    s.mean_w_0 = mw0.mean;
    s.sigma_w_0 = mw0.sd;
    s.mean_w_f = mean_sd(wf).mean;
    s.degenerate = !(s.sigma_u_0 > 0.0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto guarded = [nan](auto&& f) {
        try {
            return f();
        } catch (const UndefinedEstimateError&) {
            return nan;
        }
    };
    s.g2_arm1 = guarded([&] { return fock::g2_estimator(n1); });
    s.g2_arm2 = guarded([&] { return fock::g2_estimator(n2); });
    s.cross_corr = guarded([&] { return fock::cross_correlation(n1, n2); });
    return s;
}

double expected_imbalance(double p1, double p2, Strategy strategy, double modes_k)
{
    if (!(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0)) {
        throw DomainError("expected_imbalance: rates must lie in [0,1]");
    }
    if (!(modes_k >= 1.0)) throw DomainError("expected_imbalance: modes_k must be >= 1");
    // Without feedback the arms are balanced, so only the flipped cell
    // contributes: flipping a cell of probability P and difference D moves
    // the mean by -2 P D.
    const auto factor = [modes_k](double p, bool click) {
        return click ? subtraction::post_click_factor(p, modes_k) : subtraction::post_noclick_factor(p, modes_k);
    };
    double total = 0.0;
    for (bool c1 : {false, true}) {
        for (bool c2 : {false, true}) {
            if (!flips(strategy, c1, c2)) continue;
            const double prob = (c1 ? p1 : 1.0 - p1) * (c2 ? p2 : 1.0 - p2);
            if (prob == 0.0) continue;
            total += -2.0 * prob * (factor(p1, c1) - factor(p2, c2));
        }
    }
    return total;
}

ExperimentConfig make_rate_experiment(const RateExperiment& setup, Strategy strategy, std::size_t n_pulses,
                                      std::uint64_t seed)
{
    const fock::ThermalEnsemble ensemble(setup.mean_n, setup.modes_k);
    WorkModel work_model;
    work_model.kappa = 1.0 / (setup.transmittance * setup.mean_n);
    return ExperimentConfig{
        .arm1 = {ensemble, subtraction::tune_channel(ensemble, setup.transmittance, setup.rate1, setup.regime)},
        .arm2 = {ensemble, subtraction::tune_channel(ensemble, setup.transmittance, setup.rate2, setup.regime)},
        .strategy = strategy,
        .regime = setup.regime,
        .work_model = work_model,
        .n_pulses = n_pulses,
        .seed = seed,
    };
}

std::vector<double> linear_grid(double start, double stop, std::size_t points)
{
    if (points < 2) throw UsageError("linear_grid needs at least two points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) {
        grid[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    grid.back() = stop;
    return grid;
}

namespace {

// Relative standard error of the sample standard deviation.
double sd_relative_se(std::span<const double> xs, double mean, double sd)
{
    if (!(sd > 0.0)) return 0.0;
    CompensatedSum m4;
    for (double x : xs) {
        const double d = (x - mean) / sd;
        m4.add(d * d * d * d);
    }
    const double n = static_cast<double>(xs.size());
    const double kurtosis = m4.value() / n;
    return std::sqrt(std::max(0.0, kurtosis - 1.0) / (4.0 * n));
}

}  // namespace

std::vector<ScanRow> scan_p1(const ScanConfig& config)
{
    if (config.p1_grid.empty()) throw UsageError("scan_p1 needs a non-empty p1 grid");
    for (double p1 : config.p1_grid) {
        if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("scan_p1: grid values must lie in [0,1]");
    }
    const double i2 = info::mutual_info_continuous(config.p2).nats;

    std::vector<ScanRow> rows;
    for (std::size_t point = 0; point < config.p1_grid.size(); ++point) {
        const double p1 = config.p1_grid[point];
        RateExperiment setup{.mean_n = config.mean_n,
                             .modes_k = config.modes_k,
                             .transmittance = config.transmittance,
                             .rate1 = p1,
                             .rate2 = config.p2,
                             .regime = config.regime};
        ExperimentConfig exp = make_rate_experiment(setup, Strategy::none, config.n_pulses_per_point,
                                                    fock::make_rng(config.seed, point)());
        exp.shards = config.shards;
        exp.workers = config.workers;
        const ExperimentResult base = run_experiment(exp);

        std::vector<double> u0(base.records.size());
        for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = base.records[i].u_raw;
        const MeanSd m0 = mean_sd(u0);
        const double sigma_rel_se = sd_relative_se(u0, m0.mean, m0.sd);
        const double i_total = info::mutual_info_continuous(p1).nats + i2;
        const double unit = exp.work_model.kappa * config.transmittance * config.mean_n;  // kappa <n>_0

        for (Strategy strategy : config.strategies) {
            const auto records = apply_feedforward(base.records, strategy);
            const SummaryStats stats = summarize(records, exp.work_model);
            ScanRow row;
            row.p1 = p1;
            row.strategy = strategy;
            const double shift = stats.mean_u_f - stats.mean_u_0;
            row.signed_shift = shift / stats.sigma_u_0;
            row.ratio = std::abs(row.signed_shift);
            const double shift_rel = stats.shift_se / stats.sigma_u_0;
            row.ratio_se = std::hypot(shift_rel, row.ratio * sigma_rel_se);
            const double imbalance = expected_imbalance(p1, config.p2, strategy, config.modes_k);
            row.model_ratio = std::abs(imbalance) * std::sqrt(config.modes_k / 2.0);
            row.model_shift = imbalance * unit / stats.sigma_u_0;
            row.model_z = stats.shift_se > 0.0 ? (shift - imbalance * unit) / stats.shift_se : 0.0;
            row.bound = std::sqrt(2.0 * i_total);

            // The bound applies on the side the feedback displaced the mean.
            std::vector<double> side(u0);
            if (shift < 0.0) {
                for (double& u : side) u = -u;
            }
            const double side_mean = shift < 0.0 ? -stats.mean_u_0 : stats.mean_u_0;
            row.empirical_bound = info::optimize_bound(side, side_mean, i_total).empirical_ratio_bound;
            row.within_bound = row.ratio < row.bound;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace photon_demon::sim
