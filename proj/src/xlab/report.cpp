// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#include "bkr/xlab/report.hpp"

#include <cmath>
#include <fstream>

#include "bkr/csv.hpp"
#include "bkr/error.hpp"

namespace bkr::xlab {
namespace {

// JSON has no infinities; they are written as strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json numbers(const std::vector<double>& values) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return out;
}

}  // namespace

nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [k, v] : r.quantiles) q[k] = number(v);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : r.grid) {
    grid.push_back({{"eps", g.eps},
                    {"threshold", number(g.threshold)},
                    {"violation_fraction", g.violation_fraction},
                    {"allowed", g.allowed},
                    {"pass", g.pass}});
  }
  nlohmann::json trials = {{"sigma_min", numbers(r.sigma_min)},
                           {"sigma_max", numbers(r.sigma_max)},
                           {"statistic", numbers(r.statistic)}};
  if (!r.group.empty()) trials["group"] = r.group;
  return {{"schema", kExperimentSchema},
          {"spec", r.spec},
          {"statistic_name", r.statistic_name},
          {"trials", trials},
          {"quantiles", q},
          {"bound_value", number(r.bound_value)},
          {"violation_fraction", r.violation_fraction},
          {"pass", r.pass},
          {"grid", grid},
          {"extra", r.extra},
          {"note", r.note},
          {"wall_time", r.wall_time}};
}

void write_trials_csv(std::ostream& out, const ExperimentReport& r) {
  out << "trial,group,sigma_min,sigma_max,statistic,violated\n";
  for (Index t = 0; t < r.statistic.size(); ++t) {
    const Index group = r.group.empty() ? r.spec.dim : r.group[t];
    out << t << ',' << group << ',' << io::format_double(r.sigma_min[t]) << ','
        << io::format_double(r.sigma_max[t]) << ',' << io::format_double(r.statistic[t]) << ','
        << (r.statistic[t] <= r.bound_value ? 1 : 0) << '\n';
  }
}

void write_decay_csv(std::ostream& out, const ExperimentReport& r) {
  out << "m,median_sigma_min,ratio\n";
  if (!r.extra.contains("decay")) return;
  for (const auto& row : r.extra.at("decay")) {
    out << row.at("m").get<Index>() << ',' << io::format_double(row.at("median_sigma_min").get<double>()) << ',';
    if (!row.at("ratio").is_null()) out << io::format_double(row.at("ratio").get<double>());
    out << '\n';
  }
}

void write_report(const std::filesystem::path& dir, const ExperimentReport& r) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "report.json");
    out << to_json(r).dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "trials.csv");
    write_trials_csv(out, r);
  }
  if (r.spec.kind == EnsembleKind::counterexample) {
    auto out = open_out(dir / "decay.csv");
    write_decay_csv(out, r);
  }
}

}  // namespace bkr::xlab
