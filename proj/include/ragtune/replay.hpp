#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragtune/environment.hpp"
#include "ragtune/serialize.hpp"

namespace ragtune {

// Precomputed (config, query) -> outcome table; exactly what an exhaustive
// grid evaluation consumed. Total: every pair present exactly once.
class ReplayTable {
 public:
  ReplayTable(HyperParamSpace space, std::vector<std::string> queries, std::vector<QueryOutcome> records,
              DatasetProfile profile)
      : space_(std::move(space)), queries_(std::move(queries)), records_(std::move(records)), profile_(std::move(profile)) {
    if (queries_.empty()) throw std::invalid_argument("ReplayTable: query set must not be empty");
    if (records_.size() != space_.cardinality() * queries_.size())
      throw std::invalid_argument("ReplayTable: record count does not cover configs x queries");
    for (const auto& o : records_)
      if (!(o.accuracy >= 0.0 && o.accuracy <= 1.0)) throw std::invalid_argument("ReplayTable: accuracy out of [0,1]");
  }

  const HyperParamSpace& space() const { return space_; }
  const std::vector<std::string>& queries() const { return queries_; }
  std::size_t n_queries() const { return queries_.size(); }
  const DatasetProfile& profile() const { return profile_; }

  const QueryOutcome& outcome(std::size_t config_index, std::size_t query_index) const {
    return records_.at(config_index * queries_.size() + query_index);
  }

  // Full-table mean reward of one config, summed in ascending query order.
  double exact_mean_reward(std::size_t config_index, const RewardParams& params) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < queries_.size(); ++q) sum += compute_reward(outcome(config_index, q), params);
    return sum / static_cast<double>(queries_.size());
  }

  bool operator==(const ReplayTable& other) const {
    return space_ == other.space_ && queries_ == other.queries_ && records_ == other.records_ &&
           profile_ == other.profile_;
  }

 private:
  HyperParamSpace space_;
  std::vector<std::string> queries_;   // ascending id order
  std::vector<QueryOutcome> records_;  // config-major, query order matching queries_
  DatasetProfile profile_;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

inline std::string default_manifest_path(const std::string& csv_path) {
  const auto pos = csv_path.rfind(".csv");
  if (pos != std::string::npos && pos == csv_path.size() - 4) return csv_path.substr(0, pos) + ".manifest.json";
  return csv_path + ".manifest.json";
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

struct ReplayParse {
  HyperParamSpace space;
  DatasetProfile profile;
  std::vector<std::string> queries;
  std::vector<QueryOutcome> records;
  ValidationReport report;
};

inline ReplayParse parse_replay_files(const std::string& csv_path, const std::string& manifest_path) {
  ReplayParse out;
  auto& rep = out.report;

  std::ifstream mf(manifest_path);
  if (!mf) {
    rep.errors.push_back("manifest not readable: " + manifest_path);
    return out;
  }
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const std::exception& e) {
    rep.errors.push_back(std::string("manifest is not valid JSON: ") + e.what());
    return out;
  }
  try {
    out.space = space_from_json(manifest.at("space"));
    out.profile.name = manifest.at("profile").get<std::string>();
    out.profile.t_max = manifest.at("t_max").get<std::uint64_t>();
  } catch (const std::exception& e) {
    rep.errors.push_back(std::string("manifest schema: ") + e.what());
    return out;
  }
  const std::size_t card = out.space.cardinality();
  if (!manifest.contains("configs") || !manifest["configs"].is_object()) {
    rep.errors.push_back("manifest lacks a configs object");
    return out;
  }
  for (std::size_t idx = 0; idx < card; ++idx) {
    const std::string key = std::to_string(idx);
    if (!manifest["configs"].contains(key)) {
      rep.errors.push_back("manifest missing entry for config_id " + key);
      continue;
    }
    try {
      const Config named = config_from_named_json(out.space, manifest["configs"][key]);
      if (out.space.flat_index(named) != idx)
        rep.errors.push_back("manifest entry for config_id " + key + " does not match its flat index");
    } catch (const std::exception& e) {
      rep.errors.push_back("manifest entry for config_id " + key + ": " + e.what());
    }
  }

  std::ifstream cf(csv_path);
  if (!cf) {
    rep.errors.push_back("replay file not readable: " + csv_path);
    return out;
  }
  std::string line;
  if (!std::getline(cf, line)) {
    rep.errors.push_back("replay file is empty");
    return out;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "config_id,query_id,accuracy,tokens") {
    rep.errors.push_back("replay header must be exactly 'config_id,query_id,accuracy,tokens', got '" + line + "'");
    return out;
  }

  struct Row {
    std::size_t config = 0;
    std::string query;
    QueryOutcome outcome;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(cf, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != 4) {
      rep.errors.push_back(where + ": expected 4 fields, got " + std::to_string(fields.size()));
      continue;
    }
    try {
      Row r;
      r.config = static_cast<std::size_t>(parse_u64(fields[0], where + " config_id"));
      r.query = fields[1];
      r.outcome.accuracy = parse_double(fields[2], where + " accuracy");
      r.outcome.tokens = parse_u64(fields[3], where + " tokens");
      if (r.config >= card) {
        rep.errors.push_back(where + ": config_id " + fields[0] + " outside the space (cardinality " +
                             std::to_string(card) + ")");
        continue;
      }
      if (!(r.outcome.accuracy >= 0.0 && r.outcome.accuracy <= 1.0)) {
        rep.errors.push_back(where + ": accuracy " + fields[2] + " outside [0,1]");
        continue;
      }
      if (r.outcome.tokens > out.profile.t_max)
        rep.warnings.push_back(where + ": tokens " + fields[3] + " exceed t_max " +
                               std::to_string(out.profile.t_max) + " (clamped at reward time)");
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      rep.errors.push_back(e.what());
    }
  }

  // query universe, ascending id order
  std::vector<std::string> queries;
  for (const auto& r : rows) queries.push_back(r.query);
  std::sort(queries.begin(), queries.end());
  queries.erase(std::unique(queries.begin(), queries.end()), queries.end());
  if (queries.empty()) {
    rep.errors.push_back("replay file has no data rows");
    return out;
  }
  std::map<std::string, std::size_t> qindex;
  for (std::size_t q = 0; q < queries.size(); ++q) qindex[queries[q]] = q;

  std::vector<int> seen(card * queries.size(), 0);
  std::vector<QueryOutcome> records(card * queries.size());
  for (const auto& r : rows) {
    const std::size_t slot = r.config * queries.size() + qindex[r.query];
    if (seen[slot]++) {
      rep.errors.push_back("duplicate record for (config_id " + std::to_string(r.config) + ", query_id " + r.query + ")");
      continue;
    }
    records[slot] = r.outcome;
  }
  std::size_t missing = 0;
  for (std::size_t c = 0; c < card && missing < 10; ++c)
    for (std::size_t q = 0; q < queries.size() && missing < 10; ++q)
      if (!seen[c * queries.size() + q]) {
        rep.errors.push_back("missing record for (config_id " + std::to_string(c) + ", query_id " + queries[q] + ")");
        ++missing;
      }
  if (missing == 10) rep.errors.push_back("...(further missing pairs elided)");

  out.queries = std::move(queries);
  out.records = std::move(records);
  return out;
}

}  // namespace detail

inline ValidationReport validate_replay_files(const std::string& csv_path, std::string manifest_path = "") {
  if (manifest_path.empty()) manifest_path = default_manifest_path(csv_path);
  return detail::parse_replay_files(csv_path, manifest_path).report;
}

inline ReplayTable load_replay(const std::string& csv_path, std::string manifest_path = "") {
  if (manifest_path.empty()) manifest_path = default_manifest_path(csv_path);
  auto parsed = detail::parse_replay_files(csv_path, manifest_path);
  if (!parsed.report.ok()) {
    std::string msg = "load_replay failed:";
    for (const auto& e : parsed.report.errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return ReplayTable(std::move(parsed.space), std::move(parsed.queries), std::move(parsed.records),
                     std::move(parsed.profile));
}

inline void save_replay(const ReplayTable& table, const std::string& csv_path, std::string manifest_path = "") {
  if (manifest_path.empty()) manifest_path = default_manifest_path(csv_path);

  std::ofstream cf(csv_path, std::ios::trunc);
  if (!cf) throw std::runtime_error("cannot write replay file: " + csv_path);
  cf << "config_id,query_id,accuracy,tokens\n";
  for (std::size_t c = 0; c < table.space().cardinality(); ++c)
    for (std::size_t q = 0; q < table.n_queries(); ++q) {
      const auto& o = table.outcome(c, q);
      cf << c << ',' << table.queries()[q] << ',' << fmt_double(o.accuracy) << ',' << o.tokens << '\n';
    }

  nlohmann::json manifest;
  manifest["profile"] = table.profile().name;
  manifest["t_max"] = table.profile().t_max;
  manifest["space"] = space_to_json(table.space());
  nlohmann::json configs = nlohmann::json::object();
  for (std::size_t c = 0; c < table.space().cardinality(); ++c)
    configs[std::to_string(c)] = config_to_named_json(table.space(), table.space().config_at(c));
  manifest["configs"] = std::move(configs);

  std::ofstream mf(manifest_path, std::ios::trunc);
  if (!mf) throw std::runtime_error("cannot write manifest file: " + manifest_path);
  mf << manifest.dump(2) << '\n';
}

// Replays recorded outcomes: each trial samples batch_size query ids
// uniformly without replacement (with replacement across trials).
class ReplayEnvironment : public Environment {
 public:
  explicit ReplayEnvironment(ReplayTable table) : table_(std::move(table)) {
    desc_ = {"replay:" + table_.profile().name, table_.space(), table_.profile().t_max};
  }

  const EnvDescriptor& descriptor() const override { return desc_; }
  const ReplayTable& table() const { return table_; }

  std::vector<QueryOutcome> evaluate(const Config& config, std::size_t batch_size, RngStream& rng) const override {
    const std::size_t c = table_.space().flat_index(config);
    const std::size_t nq = table_.n_queries();
    if (batch_size == 0) throw std::invalid_argument("evaluate: batch_size must be positive");
    if (batch_size > nq)
      throw std::invalid_argument("evaluate: batch_size " + std::to_string(batch_size) + " exceeds query count " +
                                  std::to_string(nq));
    // partial Fisher-Yates
    std::vector<std::size_t> idx(nq);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<QueryOutcome> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
      const std::size_t j = i + rng.uniform_index(nq - i);
      std::swap(idx[i], idx[j]);
      out.push_back(table_.outcome(c, idx[i]));
    }
    return out;
  }

  bool exhaustive() const override { return true; }

  std::vector<double> exhaustive_mean_rewards(const RewardParams& params) const override {
    std::vector<double> means(table_.space().cardinality());
    for (std::size_t c = 0; c < means.size(); ++c) means[c] = table_.exact_mean_reward(c, params);
    return means;
  }

  std::uint64_t exhaustive_eval_count() const override {
    return static_cast<std::uint64_t>(table_.space().cardinality()) * table_.n_queries();
  }

 private:
  ReplayTable table_;
  EnvDescriptor desc_;
};

}  // namespace ragtune
