#include "photon_demon/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "photon_demon/errors.hpp"

namespace photon_demon::io {

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_field(fields[i]);
    }
    out << "\r\n";
}

void write_pulses_csv(std::ostream& out, std::span<const sim::PulseRecord> records)
{
    const std::vector<std::string> header{"index", "n1", "n2", "click1", "click2", "U_raw", "U_post"};
    write_csv_row(out, header);
    for (const auto& r : records) {
        const std::vector<std::string> row{std::to_string(r.index), format_double(r.n1), format_double(r.n2),
                                           r.click1 ? "1" : "0",    r.click2 ? "1" : "0", format_double(r.u_raw),
                                           format_double(r.u_post)};
        write_csv_row(out, row);
    }
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

Histogram make_histogram(std::span<const double> u0, std::span<const double> uf, std::optional<std::size_t> bins)
{
    std::vector<double> pooled(u0.begin(), u0.end());
    pooled.insert(pooled.end(), uf.begin(), uf.end());
    if (pooled.empty()) throw UsageError("histogram of an empty sample");
    if (bins && *bins == 0) throw UsageError("histogram needs at least one bin");
    std::sort(pooled.begin(), pooled.end());
    const double lo = pooled.front();
    const double hi = pooled.back();

    std::size_t n_bins = 1;
    if (bins) {
        n_bins = *bins;
    } else if (hi > lo) {
        const double iqr = quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
        const double width = 2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
        // Sturges when the IQR collapses.
        const double raw = width > 0.0 ? std::ceil((hi - lo) / width)
                                       : std::ceil(std::log2(static_cast<double>(pooled.size())) + 1.0);
        n_bins = static_cast<std::size_t>(std::clamp(raw, 1.0, 10000.0));
    }

    Histogram h;
    const double span_width = hi > lo ? hi - lo : 1.0;
    const double left = hi > lo ? lo : lo - 0.5;
    h.edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b) {
        h.edges[b] = left + span_width * static_cast<double>(b) / static_cast<double>(n_bins);
    }
    h.counts_0.assign(n_bins, 0);
    h.counts_f.assign(n_bins, 0);
    const auto bin_of = [&](double x) {
        const auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
        const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - h.edges.begin() - 1));
        return std::min(idx, n_bins - 1);
    };
    for (double x : u0) ++h.counts_0[bin_of(x)];
    for (double x : uf) ++h.counts_f[bin_of(x)];
    return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h)
{
    const std::vector<std::string> header{"bin_lo", "bin_hi", "count_0", "count_f"};
    write_csv_row(out, header);
    for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
        const std::vector<std::string> row{format_double(h.edges[b]), format_double(h.edges[b + 1]),
                                           std::to_string(h.counts_0[b]), std::to_string(h.counts_f[b])};
        write_csv_row(out, row);
    }
}

namespace {

// NaN and infinities have no JSON form; they become null.
nlohmann::json number(double x)
{
    if (!std::isfinite(x)) return nullptr;
    return x;
}

}  // namespace

nlohmann::json to_json(const sim::SummaryStats& s)
{
    return {
        {"n_pulses", s.n_pulses},         {"mean_U_f", number(s.mean_u_f)},
        {"mean_U_0", number(s.mean_u_0)}, {"sigma_U_0", number(s.sigma_u_0)},
        {"sigma_U_f", number(s.sigma_u_f)}, {"shift_se", number(s.shift_se)},
        {"ratio", number(s.ratio())},     {"rate1", s.rate1},
        {"rate2", s.rate2},               {"g2_arm1", number(s.g2_arm1)},
        {"g2_arm2", number(s.g2_arm2)},   {"cross_corr", number(s.cross_corr)},
        {"mean_W_f", number(s.mean_w_f)}, {"mean_W_0", number(s.mean_w_0)},
        {"sigma_W_0", number(s.sigma_w_0)}, {"flip_fraction", s.flip_fraction},
        {"degenerate", s.degenerate},
    };
}

nlohmann::json to_json(const info::BoundReport& b)
{
    return {
        {"I_total", number(b.i_total)},
        {"sqrt_bound", number(b.sqrt_bound)},
        {"gaussian_bound", number(b.gaussian_bound)},
        {"empirical_bound", number(b.empirical_bound)},
        {"empirical_ratio_bound", number(b.empirical_ratio_bound)},
        {"epsilon_star", number(b.epsilon_star)},
        {"realized_ratio", number(b.realized_ratio)},
        {"sigma", number(b.sigma)},
        {"fallback", b.fallback},
    };
}

nlohmann::json to_json(const sim::ScanRow& row)
{
    return {
        {"p1", row.p1},
        {"strategy", sim::to_string(row.strategy)},
        {"ratio", number(row.ratio)},
        {"ratio_se", number(row.ratio_se)},
        {"model_ratio", number(row.model_ratio)},
        {"signed_shift", number(row.signed_shift)},
        {"model_shift", number(row.model_shift)},
        {"model_z", number(row.model_z)},
        {"bound", number(row.bound)},
        {"empirical_bound", number(row.empirical_bound)},
        {"within_bound", row.within_bound},
    };
}

nlohmann::json to_json(const fluct::Verification& v)
{
    return {
        {"lhs", number(v.lhs)},
        {"rhs", number(v.rhs)},
        {"diff", number(v.abs_diff)},
        {"defect", number(v.defects.nondisturbance)},
        {"feedback_energy_defect", number(v.defects.feedback_energy)},
        {"status", fluct::to_string(v.status)},
        {"reason", v.reason},
        {"pass", v.pass()},
    };
}

nlohmann::json to_json(const fluct::SweepResult& s)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) {
        rows.push_back({{"T", r.transmittance}, {"abs_diff", number(r.abs_diff)}, {"defect", number(r.defect)}});
    }
    return {{"rows", rows}, {"defect_slope", number(s.defect_slope)}, {"diff_slope", number(s.diff_slope)}};
}

}  // namespace photon_demon::io
