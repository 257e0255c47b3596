#pragma once

// Data-only outputs: CSV tables and JSON reports.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "photon_demon/demon_sim.hpp"
#include "photon_demon/fluctuation.hpp"
#include "photon_demon/infotheory.hpp"

namespace photon_demon::io {

inline constexpr int kSchemaVersion = 1;

// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_double(double x);

// RFC 4180 field: quoted when it contains a comma, quote or line break.
std::string csv_field(const std::string& text);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

// index,n1,n2,click1,click2,U_raw,U_post
void write_pulses_csv(std::ostream& out, std::span<const sim::PulseRecord> records);

struct Histogram {
    std::vector<double> edges;  // size = bins + 1
    std::vector<std::size_t> counts_0;
    std::vector<std::size_t> counts_f;
};

// Freedman-Diaconis bin width 2 IQR / n^(1/3) over the pooled sample
// unless `bins` is given. Both distributions share the same edges.
Histogram make_histogram(std::span<const double> u0, std::span<const double> uf, std::optional<std::size_t> bins);

void write_histogram_csv(std::ostream& out, const Histogram& h);

nlohmann::json to_json(const sim::SummaryStats& s);
nlohmann::json to_json(const info::BoundReport& b);
nlohmann::json to_json(const sim::ScanRow& row);
nlohmann::json to_json(const fluct::Verification& v);
nlohmann::json to_json(const fluct::SweepResult& s);

}  // namespace photon_demon::io
