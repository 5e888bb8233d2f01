#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "schac/errors.hpp"
#include "schac/solver.hpp"

namespace schac {

inline constexpr const char *kVersion = "schac 1.0.0";

/// Round-trip formatting used in every output file.
inline std::string fmt_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

inline const std::vector<std::string> &trajectory_columns() {
  static const std::vector<std::string> cols{"t",         "mass",      "energy",      "energy_yosida",
                                             "sup_abs_phi", "grad_norm", "mu_dev_norm", "mu_mean"};
  return cols;
}

inline void write_trajectory_csv(std::ostream &out, const TrajectoryRecord &rec) {
  const auto &cols = trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t i = 0; i < rec.size(); ++i) {
    out << fmt_num(rec.times[i]) << ',' << fmt_num(rec.mass[i]) << ',' << fmt_num(rec.energy[i]) << ','
        << fmt_num(rec.energy_yosida[i]) << ',' << fmt_num(rec.sup_abs_phi[i]) << ',' << fmt_num(rec.grad_norm[i])
        << ',' << fmt_num(rec.mu_dev_norm[i]) << ',' << fmt_num(rec.mu_mean[i]) << '\n';
  }
  if (rec.failed) out << "# failed: " << rec.failure << '\n';
}

inline void write_trajectory_csv(const std::string &path, const TrajectoryRecord &rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_trajectory_csv(out, rec);
}

/// One acceptance contract evaluated by a runner.
struct Check {
  std::string id;
  bool passed = false;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string detail;
};

struct ExperimentReport {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();

  bool passed() const {
    for (const auto &c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }

  const Check *find(const std::string &id) const {
    for (const auto &c : checks) {
      if (c.id == id) return &c;
    }
    return nullptr;
  }
};

inline nlohmann::json check_json(const Check &c) {
  return {{"id", c.id}, {"passed", c.passed}, {"measured", fmt_num(c.measured)}, {"bound", fmt_num(c.bound)},
          {"detail", c.detail}};
}

inline void write_table_csv(const std::string &path, const std::vector<std::string> &columns,
                            const std::vector<std::vector<std::string>> &rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto &r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
    out << '\n';
  }
}

/// Writes report.csv, checks.csv and manifest.json into `dir`.
inline void write_report(const ExperimentReport &rep, const nlohmann::json &provenance, const std::string &dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_table_csv((d / "report.csv").string(), rep.columns, rep.rows);
  std::vector<std::vector<std::string>> crow;
  for (const auto &c : rep.checks) {
    crow.push_back({c.id, c.passed ? "PASS" : "FAIL", fmt_num(c.measured), fmt_num(c.bound), "\"" + c.detail + "\""});
  }
  write_table_csv((d / "checks.csv").string(), {"id", "status", "measured", "bound", "detail"}, crow);
  nlohmann::json m = provenance;
  m["version"] = kVersion;
  m["kind"] = rep.kind;
  m["details"] = rep.details;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto &c : rep.checks) checks.push_back(check_json(c));
  m["checks"] = checks;
  m["passed"] = rep.passed();
  std::ofstream out((d / "manifest.json").string(), std::ios::binary);
  if (!out) throw Error("cannot write manifest in '" + dir + "'");
  out << m.dump(2) << '\n';
}

} // namespace schac
