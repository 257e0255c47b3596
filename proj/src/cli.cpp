#include "photon_demon/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "photon_demon/errors.hpp"
#include "photon_demon/fluctuation.hpp"
#include "photon_demon/infotheory.hpp"
#include "photon_demon/report_io.hpp"

namespace photon_demon::cli {

using nlohmann::json;

namespace {

// Reads keys out of one JSON object and rejects whatever is left over.
class Section {
  public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path))
    {
        if (!node_.is_object()) throw ConfigError(where() + " must be a JSON object");
    }

    bool has(const std::string& key) const { return node_.contains(key); }

    const json* take(const std::string& key)
    {
        if (!node_.contains(key)) return nullptr;
        used_.insert(key);
        return &node_.at(key);
    }

    void read(const std::string& key, double& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
            out = v->get<double>();
        }
    }

    void read(const std::string& key, bool& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
            out = v->get<bool>();
        }
    }

    void read(const std::string& key, int& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            out = v->get<int>();
        }
    }

    void read(const std::string& key, std::size_t& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void read(const std::string& key, std::string& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }

    void read(const std::string& key, std::vector<double>& out)
    {
        if (const json* v = take(key)) {
            if (!v->is_array() || v->empty()) throw ConfigError(where(key) + " must be a non-empty array of numbers");
            std::vector<double> values;
            for (const auto& x : *v) {
                if (!x.is_number()) throw ConfigError(where(key) + " must contain only numbers");
                values.push_back(x.get<double>());
            }
            out = std::move(values);
        }
    }

    Section child(const std::string& key)
    {
        const json* v = take(key);
        return Section(v ? *v : empty(), path_.empty() ? key : path_ + "." + key);
    }

    void finish() const
    {
        for (const auto& [key, value] : node_.items()) {
            if (!used_.count(key)) throw ConfigError("unknown config key '" + where(key) + "'");
        }
    }

    std::string where(const std::string& key = "") const
    {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    static const json& empty()
    {
        static const json obj = json::object();
        return obj;
    }

    const json& node_;
    std::string path_;
    std::set<std::string> used_;
};

template <class Enum, class Parse>
void read_enum(Section& s, const std::string& key, Enum& out, Parse parse)
{
    std::string name;
    if (!s.has(key)) return;
    s.read(key, name);
    try {
        out = parse(name);
    } catch (const UsageError& e) {
        throw ConfigError(s.where(key) + ": " + e.what());
    }
}

// Accepts either "modes_k" or "g2"; g2 is converted through 1/(g2 - 1).
void read_modes(Section& s, double& modes_k)
{
    if (s.has("modes_k") && s.has("g2")) throw ConfigError(s.where() + ": give either modes_k or g2, not both");
    s.read("modes_k", modes_k);
    if (s.has("g2")) {
        double g2 = 0.0;
        s.read("g2", g2);
        try {
            modes_k = fock::effective_mode_count(g2);
        } catch (const DomainError& e) {
            throw ConfigError(s.where("g2") + ": " + e.what());
        }
    }
}

std::vector<double> read_grid(Section& parent, const std::string& key, std::vector<double> fallback)
{
    if (!parent.has(key)) return fallback;
    if (parent.take(key)->is_array()) {
        std::vector<double> values;
        parent.read(key, values);
        return values;
    }
    Section g = parent.child(key);
    double start = 0.0;
    double stop = 1.0;
    std::size_t points = 2;
    g.read("start", start);
    g.read("stop", stop);
    g.read("points", points);
    g.finish();
    if (points < 2) throw ConfigError(g.where("points") + " must be >= 2");
    return sim::linear_grid(start, stop, points);
}

void parse_simulate(Section s, SimulateConfig& c)
{
    s.read("n_pulses", c.n_pulses);
    read_enum(s, "regime", c.regime, [](const std::string& n) { return fock::regime_from_string(n.c_str()); });
    s.read("mean_photons", c.mean_photons);
    read_modes(s, c.modes_k);
    s.read("transmittance", c.transmittance);
    s.read("rate1", c.rate1);
    s.read("rate2", c.rate2);
    read_enum(s, "strategy", c.strategy, sim::strategy_from_string);
    s.read("shards", c.shards);
    if (s.has("work_model")) {
        Section w = s.child("work_model");
        w.read("capacitance_f", c.work_model.capacitance);
        c.kappa_given = w.has("kappa_v_per_photon");
        w.read("kappa_v_per_photon", c.work_model.kappa);
        w.read("beta_per_j", c.work_model.beta);
        w.read("battery_u0_v", c.work_model.battery_u0);
        w.finish();
    }
    if (s.has("histogram_bins")) {
        const json* v = s.take("histogram_bins");
        if (v->is_string() && v->get<std::string>() == "fd") {
            c.histogram_bins.reset();
        } else if (v->is_number_unsigned() && v->get<std::size_t>() > 0) {
            c.histogram_bins = v->get<std::size_t>();
        } else {
            throw ConfigError(s.where("histogram_bins") + " must be \"fd\" or a positive integer");
        }
    }
    s.finish();
    if (c.n_pulses < 1) throw ConfigError(s.where("n_pulses") + " must be >= 1");
}

void parse_scan(Section s, ScanCliConfig& c)
{
    s.read("p2", c.p2);
    c.p1_grid = read_grid(s, "p1_grid", c.p1_grid);
    if (s.has("strategies")) {
        const json* v = s.take("strategies");
        if (!v->is_array() || v->empty()) throw ConfigError(s.where("strategies") + " must be a non-empty array");
        c.strategies.clear();
        for (const auto& x : *v) {
            if (!x.is_string()) throw ConfigError(s.where("strategies") + " must contain strategy names");
            try {
                c.strategies.push_back(sim::strategy_from_string(x.get<std::string>()));
            } catch (const UsageError& e) {
                throw ConfigError(s.where("strategies") + ": " + e.what());
            }
        }
    }
    read_modes(s, c.modes_k);
    s.read("mean_photons", c.mean_photons);
    s.read("transmittance", c.transmittance);
    read_enum(s, "regime", c.regime, [](const std::string& n) { return fock::regime_from_string(n.c_str()); });
    s.read("n_pulses_per_point", c.n_pulses_per_point);
    s.read("shards", c.shards);
    s.read("model_sigma", c.model_sigma);
    s.finish();
    if (c.n_pulses_per_point < 2) throw ConfigError(s.where("n_pulses_per_point") + " must be >= 2");
}

void parse_verify(Section s, VerifyConfig& c)
{
    s.read("n_models", c.n_models);
    s.read("n_max", c.n_max);
    s.read("extraction_dim", c.extraction_dim);
    s.read("max_outcomes", c.max_outcomes);
    s.read("tol", c.tol);
    s.read("t_grid", c.t_grid);
    s.read("sweep_n_max", c.sweep_n_max);
    s.read("sweep_extraction_dim", c.sweep_extraction_dim);
    s.read("slope_target", c.slope_target);
    s.read("slope_tolerance", c.slope_tolerance);
    s.read("negative_controls", c.negative_controls);
    s.finish();
    if (c.n_max < 1 || c.extraction_dim < 1 || c.max_outcomes < 2 || c.sweep_n_max < 1 || c.sweep_extraction_dim < 1) {
        throw ConfigError("verify: n_max, extraction dims >= 1 and max_outcomes >= 2 required");
    }
    if (!(c.tol > 0.0)) throw ConfigError("verify.tol must be positive");
}

void parse_mi(Section s, MiConfig& c)
{
    c.q_grid = read_grid(s, "q_grid", c.q_grid);
    s.read("mean_photons", c.mean_photons);
    s.read("tol", c.tol);
    s.read("tail_tol", c.tail_tol);
    s.read("limit_tolerance", c.limit_tolerance);
    s.finish();
    for (double q : c.q_grid) {
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("mi.q_grid values must lie in [0,1]");
    }
    for (double m : c.mean_photons) {
        if (!(m > 0.0)) throw ConfigError("mi.mean_photons values must be positive");
    }
}

}  // namespace

RunConfig parse_config(const json& doc)
{
    RunConfig c;
    Section root(doc, "");
    if (!root.has("schema_version")) throw ConfigError("config is missing schema_version");
    root.read("schema_version", c.schema_version);
    if (c.schema_version != io::kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
    }
    std::uint64_t seed = c.seed;
    if (const json* v = root.take("seed")) {
        if (!v->is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
        seed = v->get<std::uint64_t>();
    }
    c.seed = seed;
    root.read("workers", c.workers);
    std::string out = c.output_dir.string();
    root.read("output_dir", out);
    c.output_dir = out;
    parse_simulate(root.child("simulate"), c.simulate);
    parse_scan(root.child("scan"), c.scan);
    parse_verify(root.child("verify"), c.verify);
    parse_mi(root.child("mi"), c.mi);
    root.finish();
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name, CommandResult& result)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    result.files.push_back(path);
    return out;
}

void write_json(const std::filesystem::path& dir, const std::string& name, const json& doc, CommandResult& result)
{
    auto out = open_output(dir, name, result);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + (dir / name).string());
}

void finalize(CommandResult& result)
{
    result.exit_code = result.failures.empty() ? kSuccess : kCheckFailure;
}

json number(double x)
{
    if (!std::isfinite(x)) return nullptr;
    return x;
}

}  // namespace

CommandResult cmd_simulate(const RunConfig& config)
{
    const SimulateConfig& c = config.simulate;
    CommandResult result;
    sim::RateExperiment setup{.mean_n = c.mean_photons,
                              .modes_k = c.modes_k,
                              .transmittance = c.transmittance,
                              .rate1 = c.rate1,
                              .rate2 = c.rate2,
                              .regime = c.regime};
    sim::ExperimentConfig exp = sim::make_rate_experiment(setup, c.strategy, c.n_pulses, config.seed);
    const double kappa_default = exp.work_model.kappa;
    exp.work_model = c.work_model;
    if (!c.kappa_given) exp.work_model.kappa = kappa_default;
    exp.shards = c.shards;
    exp.workers = config.workers;
    const sim::ExperimentResult run = sim::run_experiment(exp);
    if (run.records.size() < 2) throw UsageError("simulate needs at least two pulses for statistics");

    {
        auto out = open_output(config.output_dir, "pulses.csv", result);
        io::write_pulses_csv(out, run.records);
        if (!out) throw IoError("failed writing pulses.csv");
    }
    std::vector<double> u0;
    std::vector<double> uf;
    for (const auto& r : run.records) {
        u0.push_back(r.u_raw);
        uf.push_back(r.u_post);
    }
    {
        auto out = open_output(config.output_dir, "histogram.csv", result);
        io::write_histogram_csv(out, io::make_histogram(u0, uf, c.histogram_bins));
        if (!out) throw IoError("failed writing histogram.csv");
    }

    const sim::SummaryStats& s = run.stats;
    const double i_total = info::total_information(s.rate1, s.rate2);
    const double shift = s.mean_u_f - s.mean_u_0;
    std::vector<double> side(u0);
    if (shift < 0.0) {
        for (double& u : side) u = -u;
    }
    info::BoundReport bound = info::optimize_bound(side, shift < 0.0 ? -s.mean_u_0 : s.mean_u_0, i_total);
    bound.realized_ratio = s.ratio();
    const double imbalance = sim::expected_imbalance(c.rate1, c.rate2, c.strategy, c.modes_k);
    const double unit = exp.work_model.kappa * c.transmittance * c.mean_photons;
    const double beta_c = exp.work_model.beta * exp.work_model.capacitance;

    json doc;
    doc["schema_version"] = io::kSchemaVersion;
    doc["seed"] = config.seed;
    doc["strategy"] = sim::to_string(c.strategy);
    doc["regime"] = fock::to_string(c.regime);
    doc["target_rates"] = {c.rate1, c.rate2};
    doc["modes_k"] = c.modes_k;
    doc["kappa_v_per_photon"] = exp.work_model.kappa;
    doc["summary"] = io::to_json(s);
    doc["bound"] = io::to_json(bound);
    doc["model"] = {{"expected_imbalance", imbalance},
                    {"expected_shift_v", imbalance * unit},
                    {"z", number(s.shift_se > 0.0 ? (shift - imbalance * unit) / s.shift_se : 0.0)}};
    doc["optimal_battery_u0_v"] = number(bound.epsilon_star / beta_c);
    const bool ok = bound.realized_ratio < bound.sqrt_bound || (bound.realized_ratio == 0.0 && i_total == 0.0);
    doc["checks"] = {{"bound_respected", ok}};
    if (!ok) result.failures.push_back("feedback displacement exceeds sqrt(2 I)");
    write_json(config.output_dir, "summary.json", doc, result);
    finalize(result);
    return result;
}

CommandResult cmd_scan(const RunConfig& config)
{
    const ScanCliConfig& c = config.scan;
    CommandResult result;
    sim::ScanConfig scan;
    scan.p2 = c.p2;
    scan.p1_grid = c.p1_grid;
    scan.strategies = c.strategies;
    scan.modes_k = c.modes_k;
    scan.mean_n = c.mean_photons;
    scan.transmittance = c.transmittance;
    scan.regime = c.regime;
    scan.n_pulses_per_point = c.n_pulses_per_point;
    scan.seed = config.seed;
    scan.shards = c.shards;
    scan.workers = config.workers;
    const auto rows = sim::scan_p1(scan);

    json doc;
    doc["schema_version"] = io::kSchemaVersion;
    doc["seed"] = config.seed;
    doc["p2"] = c.p2;
    doc["modes_k"] = c.modes_k;
    doc["n_pulses_per_point"] = c.n_pulses_per_point;
    doc["model_sigma"] = c.model_sigma;
    doc["rows"] = json::array();
    std::size_t outside_bound = 0;
    std::size_t off_model = 0;
    {
        auto out = open_output(config.output_dir, "scan.csv", result);
        const std::vector<std::string> header{"p1",         "strategy",     "ratio",       "ratio_se",
                                              "model_ratio", "signed_shift", "model_shift", "model_z",
                                              "bound",      "empirical_bound", "within_bound"};
        io::write_csv_row(out, header);
        for (const auto& row : rows) {
            const std::vector<std::string> fields{
                io::format_double(row.p1),          sim::to_string(row.strategy),
                io::format_double(row.ratio),       io::format_double(row.ratio_se),
                io::format_double(row.model_ratio), io::format_double(row.signed_shift),
                io::format_double(row.model_shift), io::format_double(row.model_z),
                io::format_double(row.bound),       io::format_double(row.empirical_bound),
                row.within_bound ? "1" : "0"};
            io::write_csv_row(out, fields);
            doc["rows"].push_back(io::to_json(row));
            outside_bound += row.within_bound ? 0 : 1;
            off_model += std::abs(row.model_z) <= c.model_sigma ? 0 : 1;
        }
        if (!out) throw IoError("failed writing scan.csv");
    }
    doc["checks"] = {{"all_within_bound", outside_bound == 0}, {"all_match_model", off_model == 0}};
    if (outside_bound) result.failures.push_back(std::to_string(outside_bound) + " scan rows exceed the bound");
    if (off_model) result.failures.push_back(std::to_string(off_model) + " scan rows deviate from the model");
    write_json(config.output_dir, "scan.json", doc, result);
    finalize(result);
    return result;
}

CommandResult cmd_verify(const RunConfig& config)
{
    const VerifyConfig& c = config.verify;
    CommandResult result;
    json doc;
    doc["schema_version"] = io::kSchemaVersion;
    doc["seed"] = config.seed;
    doc["tol"] = c.tol;

    json models = json::array();
    std::size_t failed = 0;
    for (std::size_t n = 0; n < c.n_models; ++n) {
        fock::Rng draw = fock::make_rng(config.seed, 1000 + n);
        const std::uint64_t model_seed = draw();
        fluct::ModelDims dims;
        dims.n_max = 1 + static_cast<int>(draw() % static_cast<std::uint64_t>(c.n_max));
        dims.extraction_dim = 1 + static_cast<int>(draw() % static_cast<std::uint64_t>(c.extraction_dim));
        dims.n_outcomes = 2 + static_cast<int>(draw() % static_cast<std::uint64_t>(c.max_outcomes - 1));
        const auto model = fluct::make_random_model(dims, model_seed);
        const auto v = fluct::verify_equality(model, c.tol);
        const auto rhs = fluct::rhs_average(model);
        json entry = io::to_json(v);
        entry["seed"] = model_seed;
        entry["dims"] = {{"n_max", dims.n_max}, {"extraction_dim", dims.extraction_dim}, {"n_outcomes", dims.n_outcomes}};
        entry["rhs_simplified"] = rhs.simplified;
        entry["rhs_forms_diff"] = std::abs(rhs.raw - rhs.simplified);
        models.push_back(entry);
        failed += v.pass() ? 0 : 1;
    }
    doc["models"] = models;
    doc["all_models_pass"] = failed == 0;
    if (failed) result.failures.push_back(std::to_string(failed) + " randomized models failed the equality");

    const auto base = fluct::make_random_model({c.sweep_n_max, c.sweep_extraction_dim, 2}, fock::make_rng(config.seed, 7)());
    const auto sweep = fluct::convergence_sweep(c.t_grid, base);
    json sweep_doc = io::to_json(sweep);
    const bool slope_ok = std::abs(sweep.defect_slope - c.slope_target) <= c.slope_tolerance;
    sweep_doc["slope_target"] = c.slope_target;
    sweep_doc["slope_tolerance"] = c.slope_tolerance;
    sweep_doc["slope_ok"] = slope_ok;
    doc["sweep"] = sweep_doc;
    if (!slope_ok) result.failures.push_back("non-disturbance defect slope outside tolerance");

    if (c.negative_controls) {
        json controls;
        const auto trivial = fluct::verify_equality(fluct::with_trivial_measurement(base), c.tol);
        controls["trivial_measurement"] = io::to_json(trivial);
        controls["trivial_measurement"]["expected"] = "pass";
        if (!trivial.pass()) result.failures.push_back("trivial measurement control did not pass");

        const auto disturbing = fluct::verify_equality(fluct::with_disturbing_measurement(base), c.tol);
        const bool disturbing_ok =
            disturbing.status == fluct::VerifyStatus::precondition_violation && disturbing.abs_diff > c.tol;
        controls["disturbing_measurement"] = io::to_json(disturbing);
        controls["disturbing_measurement"]["expected"] = "expected-fail";
        controls["disturbing_measurement"]["as_expected"] = disturbing_ok;
        if (!disturbing_ok) result.failures.push_back("disturbing measurement control was not flagged");

        const auto nonconserving =
            fluct::verify_equality(fluct::with_nonconserving_feedback(base, config.seed), c.tol);
        const bool flagged = nonconserving.status == fluct::VerifyStatus::precondition_violation;
        controls["nonconserving_feedback"] = io::to_json(nonconserving);
        controls["nonconserving_feedback"]["expected"] = "expected-fail";
        controls["nonconserving_feedback"]["as_expected"] = flagged;
        controls["nonconserving_feedback"]["equality_holds"] = nonconserving.abs_diff < c.tol;
        if (!flagged) result.failures.push_back("non-conserving feedback control was not flagged");
        doc["negative_controls"] = controls;
    }
    doc["checks_pass"] = result.failures.empty();
    write_json(config.output_dir, "verify.json", doc, result);
    finalize(result);
    return result;
}

CommandResult cmd_mi(const RunConfig& config)
{
    const MiConfig& c = config.mi;
    CommandResult result;
    json doc;
    doc["schema_version"] = io::kSchemaVersion;
    doc["mean_photons"] = c.mean_photons;
    doc["rows"] = json::array();
    std::size_t above_entropy = 0;
    std::size_t off_limit = 0;
    std::size_t non_monotone = 0;

    auto out = open_output(config.output_dir, "mi.csv", result);
    std::vector<std::string> header{"q", "I_continuous", "est_error", "H"};
    for (double m : c.mean_photons) header.push_back("I_discrete_n" + io::format_double(m));
    io::write_csv_row(out, header);

    // The largest mean photon number is the one compared against the limit.
    std::size_t largest = 0;
    for (std::size_t k = 0; k < c.mean_photons.size(); ++k) {
        if (c.mean_photons[k] > c.mean_photons[largest]) largest = k;
    }

    for (double q : c.q_grid) {
        const info::MIResult cont = info::mutual_info_continuous(q, c.tol);
        const double h = info::register_entropy(q);
        std::vector<std::string> fields{io::format_double(q), io::format_double(cont.nats),
                                        io::format_double(cont.est_error), io::format_double(h)};
        json row{{"q", q}, {"I_continuous", cont.nats}, {"est_error", cont.est_error}, {"H", h}};
        json discrete = json::array();
        if (cont.nats > h + 1e-12) ++above_entropy;
        std::vector<std::pair<double, double>> gaps;  // (mean, |I_disc - I_cont|)
        for (std::size_t k = 0; k < c.mean_photons.size(); ++k) {
            const double mean = c.mean_photons[k];
            const double r = (q > 0.0 && q < 1.0) ? q / ((1.0 - q) * mean) : 0.0;
            if (q <= 0.0 || q >= 1.0 || r >= 1.0) {
                // Single-mode click rate cannot exceed lambda; no such channel.
                fields.emplace_back("");
                discrete.push_back(nullptr);
                if (k == largest && q > 0.0 && q < 1.0) ++off_limit;
                continue;
            }
            const subtraction::MeasurementChannel channel(1.0 - r, 1.0);
            const info::MIResult disc = info::mutual_info_discrete(channel, fock::lambda_for_mean(mean), c.tail_tol);
            fields.push_back(io::format_double(disc.nats));
            discrete.push_back(disc.nats);
            if (disc.nats > h + 1e-12) ++above_entropy;
            const double gap = std::abs(disc.nats - cont.nats);
            gaps.emplace_back(mean, gap);
            if (k == largest && gap > c.limit_tolerance) ++off_limit;
        }
        std::sort(gaps.begin(), gaps.end());
        for (std::size_t k = 1; k < gaps.size(); ++k) {
            if (gaps[k].second > gaps[k - 1].second) ++non_monotone;
        }
        row["I_discrete"] = discrete;
        io::write_csv_row(out, fields);
        doc["rows"].push_back(row);
    }
    if (!out) throw IoError("failed writing mi.csv");
    doc["checks"] = {{"information_below_entropy", above_entropy == 0},
                     {"continuous_limit", off_limit == 0},
                     {"monotone_convergence", non_monotone == 0}};
    if (above_entropy) result.failures.push_back("mutual information above register entropy");
    if (off_limit) result.failures.push_back("discrete sum does not reach the continuous limit");
    if (non_monotone) result.failures.push_back("discrete sum does not converge monotonically");
    write_json(config.output_dir, "mi.json", doc, result);
    finalize(result);
    return result;
}

int run(int argc, char** argv)
{
    CLI::App app{"Photonic Maxwell's demon simulation and verification"};
    std::string command;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> workers;
    app.add_option("command", command, "simulate | scan | verify | mi")
        ->required()
        ->check(CLI::IsMember({"simulate", "scan", "verify", "mi"}));
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--workers", workers, "worker threads for pulse simulation")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        RunConfig config = load_config(config_path);
        if (seed) config.seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        if (workers) config.workers = *workers;

        CommandResult result;
        if (command == "simulate") {
            result = cmd_simulate(config);
        } else if (command == "scan") {
            result = cmd_scan(config);
        } else if (command == "verify") {
            result = cmd_verify(config);
        } else {
            result = cmd_mi(config);
        }
        for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
        for (const auto& msg : result.failures) std::cerr << "check failed: " << msg << '\n';
        return result.exit_code;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {  // UsageError
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::domain_error& e) {  // DomainError, NullEventError
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

}  // namespace photon_demon::cli
