#pragma once

// Export formats: JSON (ledger, lineage, manifest), CSV (tables), OBJ (meshes).
// Numbers go through fixed printf formats or nlohmann's shortest round-trip
// printer, so identical inputs give identical bytes.

#include "hplateau/config.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace hplateau {

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DomainError("cannot write " + path.string());
  out << text;
  if (!out)
    throw DomainError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path &path, const ojson &j) {
  write_text(path, j.dump(2) + "\n");
}

inline ojson read_json(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DomainError("cannot open " + path.string());
  try {
    return ojson::parse(in);
  } catch (const ojson::parse_error &e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void row(const std::vector<double> &values) {
    require(values.size() == columns_.size(), "csv: row width does not match the header");
    rows_.push_back(values);
  }

  std::string str() const {
    std::string s;
    for (std::size_t i = 0; i < columns_.size(); ++i)
      s += (i ? "," : "") + columns_[i];
    s += "\n";
    for (const auto &r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i)
        s += (i ? "," : "") + format_number(r[i]);
      s += "\n";
    }
    return s;
  }

  void write(const std::filesystem::path &path) const { write_text(path, str()); }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

/// `v x y z` then `f i j k`, 1-based; only the first three coordinates are
/// written when dim > 3.
inline std::string obj_string(const DiscMap &map) {
  std::string s;
  char buf[128];
  for (int v = 0; v < map.positions.cols(); ++v) {
    std::snprintf(buf, sizeof buf, "v %.12g %.12g %.12g\n", map.positions(0, v),
                  map.positions(1, v), map.positions(2, v));
    s += buf;
  }
  for (const auto &t : map.mesh().triangles) {
    std::snprintf(buf, sizeof buf, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    s += buf;
  }
  return s;
}

inline void write_obj(const std::filesystem::path &path, const DiscMap &map) {
  write_text(path, obj_string(map));
}

/// Fresh directory `<out>/<command>-<UTC timestamp>`, suffixed when taken.
inline std::filesystem::path make_run_dir(const std::filesystem::path &out,
                                          const std::string &command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  std::filesystem::create_directories(out);
  const std::string base = command + "-" + stamp;
  for (int i = 0;; ++i) {
    const auto dir = out / (i == 0 ? base : base + "-" + std::to_string(i));
    if (std::filesystem::create_directory(dir))
      return dir;
  }
}

inline std::string r_label(double R) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", R);
  return buf;
}

// ---------------------------------------------------------------------------
// JSON documents

inline ojson to_json(const ConcentrationEvent &e) {
  return {{"theta_star", e.theta_star}, {"covered_fraction", e.covered_fraction}, {"kind", e.kind}};
}

inline ojson to_json(const BlowupRecord &r) {
  return {{"R", r.R},
          {"depth", r.depth},
          {"kind", r.kind},
          {"theta_star", r.theta_star},
          {"covered_fraction", r.covered_fraction},
          {"s", r.s},
          {"r", r.r},
          {"cut_arc_length", r.cut_arc_length},
          {"cl_bound", r.cl_bound},
          {"curve_length_before", r.curve_length_before},
          {"curve_length_after", r.curve_length_after},
          {"energy_total", r.energy_total},
          {"energy_retained", r.energy_retained},
          {"energy_discarded", r.energy_discarded},
          {"energy_rescaled", r.energy_rescaled},
          {"coverage_span_before", r.coverage_span_before},
          {"coverage_span_after", r.coverage_span_after}};
}

inline ojson to_json(const BlowupLineage &lin) {
  ojson ev = ojson::array();
  for (const auto &r : lin.events)
    ev.push_back(to_json(r));
  return {{"events", ev},
          {"cumulative_discarded", lin.cumulative_discarded},
          {"energy_decreasing", lin.energy_decreasing}};
}

inline ojson to_json(const LedgerEntry &e) {
  ojson table = ojson::array();
  for (const auto &a : e.area_table)
    table.push_back({{"s", a.s}, {"area", a.area}, {"bound", a.bound}, {"ok", a.ok}});
  ojson j{{"R", e.R},
          {"energy", e.energy},
          {"euclidean_energy", e.euclidean_energy},
          {"area", e.area},
          {"area_b", e.area_b},
          {"area_b_inside_rho", e.area_b_inside_rho},
          {"defect", e.defect},
          {"converged", e.converged},
          {"iterations", e.iterations},
          {"grad_norm", e.grad_norm},
          {"recentered", e.recentered},
          {"z_star", {e.z_star.x(), e.z_star.y()}},
          {"hitting_radius", e.hitting_radius},
          {"area_table", table},
          {"area_ok", e.area_ok},
          {"ten_bound", e.ten_bound},
          {"ten_ok", e.ten_ok},
          {"rho_ok", e.rho_ok},
          {"hausdorff", {{"one_sided", e.hausdorff.one_sided}, {"symmetric", e.hausdorff.symmetric}}}};
  j["concentration"] = e.concentration ? to_json(*e.concentration) : ojson(nullptr);
  return j;
}

inline ojson to_json(const ExpansionLedger &led) {
  ojson entries = ojson::array();
  for (const auto &e : led.entries)
    entries.push_back(to_json(e));
  return {{"curve", led.curve},
          {"L", led.L},
          {"C", led.C},
          {"rho", led.rho},
          {"rho_hat", led.rho_hat},
          {"E0", led.E0},
          {"schedule", led.schedule},
          {"entries", entries},
          {"blowup_lineage", to_json(led.blowup)}};
}

inline ojson to_json(const std::vector<ManifestEntry> &m) {
  ojson checks = ojson::array();
  for (const auto &e : m)
    checks.push_back({{"tag", e.tag},
                      {"pass", e.result.pass},
                      {"value", e.result.value},
                      {"tolerance", e.result.tolerance},
                      {"detail", e.result.detail}});
  return {{"all_pass", manifest_passes(m)}, {"checks", checks}};
}

inline std::vector<ManifestEntry> manifest_from_json(const ojson &j) {
  std::vector<ManifestEntry> m;
  for (const auto &c : j.at("checks")) {
    ManifestEntry e;
    e.tag = c.at("tag").get<std::string>();
    e.result.pass = c.at("pass").get<bool>();
    e.result.value = c.at("value").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                              : c.at("value").get<double>();
    e.result.tolerance = c.at("tolerance").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                      : c.at("tolerance").get<double>();
    e.result.detail = c.at("detail").get<std::string>();
    m.push_back(std::move(e));
  }
  return m;
}

} // namespace hplateau
