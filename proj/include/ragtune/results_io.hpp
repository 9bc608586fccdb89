#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ragtune/harness.hpp"
#include "ragtune/text.hpp"

namespace ragtune {

inline void write_oracle_csv(const std::string& path, const OracleTable& oracle) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write oracle file: " + path);
  f << "rank,config_id,mean_reward\n";
  for (std::size_t r = 0; r < oracle.ranking.size(); ++r)
    f << r + 1 << ',' << oracle.ranking[r].config_index << ',' << fmt_double(oracle.ranking[r].score) << '\n';
}

// One row per (method, seed, checkpoint).
inline void write_results_csv(const std::string& path, const std::vector<Trajectory>& trajectories) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write results file: " + path);
  f << "method,seed,budget,recall,mean_reward_best_arm\n";
  for (const auto& t : trajectories)
    for (const auto& cp : t.recall_curve)
      f << method_to_string(t.method) << ',' << t.seed << ',' << cp.budget << ',' << fmt_double(cp.recall) << ','
        << fmt_double(cp.best_arm_mean) << '\n';
}

inline void write_aggregate_csv(const std::string& path, Method method, const AggregateCurve& agg) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write aggregate file: " + path);
  f << "method,budget,recall_mean,recall_std\n";
  for (std::size_t i = 0; i < agg.budgets.size(); ++i)
    f << method_to_string(method) << ',' << agg.budgets[i] << ',' << fmt_double(agg.recall_mean[i]) << ','
      << fmt_double(agg.recall_std[i]) << '\n';
}

// Append-only trial log; enough to recompute every arm statistic offline.
inline void write_trial_log(const std::string& path, const Trajectory& trajectory) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write trial log: " + path);
  f << "trial,config_id,pulled_dimension,reward\n";
  for (const auto& rec : trajectory.trials)
    f << rec.trial << ',' << rec.config_index << ',' << rec.pulled_dimension << ',' << fmt_double(rec.reward) << '\n';
}

struct TrialLogRow {
  std::uint64_t trial = 0;
  std::size_t config_id = 0;
  int pulled_dimension = -1;
  double reward = 0.0;
};

inline std::vector<TrialLogRow> read_trial_log(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read trial log: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "trial,config_id,pulled_dimension,reward")
    throw std::runtime_error("trial log header mismatch in " + path);
  std::vector<TrialLogRow> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    std::vector<std::string> fields;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (fields.size() != 4) throw std::runtime_error(where + ": expected 4 fields");
    TrialLogRow row;
    row.trial = parse_u64(fields[0], where + " trial");
    row.config_id = static_cast<std::size_t>(parse_u64(fields[1], where + " config_id"));
    if (fields[2] == "-1")
      row.pulled_dimension = -1;
    else
      row.pulled_dimension = static_cast<int>(parse_u64(fields[2], where + " pulled_dimension"));
    row.reward = parse_double(fields[3], where + " reward");
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ragtune
