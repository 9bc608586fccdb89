#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ragtune/harness.hpp"
#include "ragtune/serialize.hpp"

namespace ragtune {

struct ServiceError {
  enum class Code { NotFound, Conflict, Validation, Internal };
  Code code;
  std::string message;
};

inline std::string service_error_code(ServiceError::Code c) {
  switch (c) {
    case ServiceError::Code::NotFound: return "not_found";
    case ServiceError::Code::Conflict: return "conflict";
    case ServiceError::Code::Validation: return "validation";
    case ServiceError::Code::Internal: return "internal";
  }
  return "internal";
}

// Tuner sidecar core: suggest/report sessions over in-memory learner state.
// Requests for one session are serialized by a per-session mutex; distinct
// sessions proceed concurrently. All methods speak JSON so the HTTP adapter
// stays a thin shell and tests can drive the logic directly.
class TunerService {
 public:
  struct Options {
    std::uint64_t default_ttl_seconds = 3600;  // pending-suggestion expiry
  };

  TunerService() : TunerService(Options{}) {}
  explicit TunerService(Options options) : options_(options) {}

  nlohmann::json create_session(const nlohmann::json& request) {
    static const std::vector<std::string> known{"space",          "method",       "reward",
                                                "alpha",          "alpha_h",      "alpha_l",
                                                "obs_variance",   "update_scope", "seed",
                                                "strict_sequential", "suggestion_ttl_seconds", "initial_config"};
    if (!request.is_object()) throw ServiceError{ServiceError::Code::Validation, "request body must be an object"};
    for (const auto& [key, _] : request.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ServiceError{ServiceError::Code::Validation, "unknown field '" + key + "'"};

    auto session = std::make_shared<Session>();
    try {
      if (!request.contains("space")) throw std::invalid_argument("field 'space' is required");
      session->space = space_from_json(request.at("space"));
      if (!request.contains("method")) throw std::invalid_argument("field 'method' is required");
      session->method = method_from_string(request.at("method").get<std::string>());
      session->reward = request.contains("reward") ? reward_params_from_json(request.at("reward")) : RewardParams{};

      RunConfig knobs;
      if (request.contains("alpha")) knobs.alpha = request.at("alpha").get<double>();
      if (request.contains("alpha_h")) knobs.alpha_high = request.at("alpha_h").get<double>();
      if (request.contains("alpha_l")) knobs.alpha_low = request.at("alpha_l").get<double>();
      if (request.contains("obs_variance")) knobs.obs_variance = request.at("obs_variance").get<double>();
      if (request.contains("update_scope")) {
        const std::string s = request.at("update_scope").get<std::string>();
        if (s == "all_active")
          knobs.update_scope = UpdateScope::AllActive;
        else if (s == "pulled_only")
          knobs.update_scope = UpdateScope::PulledOnly;
        else
          throw std::invalid_argument("field 'update_scope': unknown value '" + s + "'");
      }
      knobs.method = session->method;
      if (request.contains("initial_config"))
        knobs.initial_config = config_from_named_json(session->space, request.at("initial_config"));
      session->learner = make_learner(knobs, session->space);
      session->rng = RngStream(request.contains("seed") ? request.at("seed").get<std::uint64_t>() : 0);
      session->strict_sequential = request.contains("strict_sequential") && request.at("strict_sequential").get<bool>();
      session->ttl_seconds = request.contains("suggestion_ttl_seconds")
                                 ? request.at("suggestion_ttl_seconds").get<std::uint64_t>()
                                 : options_.default_ttl_seconds;
    } catch (const std::exception& e) {
      throw ServiceError{ServiceError::Code::Validation, e.what()};
    }

    session->id = "s" + std::to_string(next_id_.fetch_add(1));
    {
      std::unique_lock lock(map_mu_);
      sessions_[session->id] = session;
    }
    return {{"session_id", session->id}};
  }

  nlohmann::json suggest(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    expire_pending(*session);
    if (session->strict_sequential && !session->pending.empty())
      throw ServiceError{ServiceError::Code::Conflict, "a suggestion is already pending (strict_sequential session)"};

    Pending pending;
    nlohmann::json config_json;
    if (auto* flat = std::get_if<FlatBandit>(&session->learner)) {
      const std::size_t idx = flat->select(session->rng);
      pending.config = session->space.config_at(idx);
      config_json = config_to_named_json(session->space, pending.config);
    } else {
      auto& hier = std::get<HierBandit>(session->learner);
      const auto sel = hier.select(session->rng);
      pending.dim = static_cast<int>(sel.dim);
      pending.level = sel.level;
      pending.config = sel.proposed;
      config_json = config_to_named_json(session->space, pending.config);
    }
    pending.created = std::chrono::steady_clock::now();
    const std::string sid = "g" + std::to_string(session->next_suggestion++);
    session->pending.emplace(sid, std::move(pending));
    ++session->suggest_count;
    return {{"suggestion_id", sid}, {"config", std::move(config_json)}};
  }

  nlohmann::json report(const std::string& session_id, const nlohmann::json& request) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    expire_pending(*session);

    if (!request.is_object() || !request.contains("suggestion_id") || !request.contains("outcomes"))
      throw ServiceError{ServiceError::Code::Validation, "report requires 'suggestion_id' and 'outcomes'"};
    const std::string sid = request.at("suggestion_id").get<std::string>();
    const auto it = session->pending.find(sid);
    if (it == session->pending.end())
      throw ServiceError{ServiceError::Code::Conflict,
                         "suggestion '" + sid + "' is unknown, expired or already reported"};

    std::vector<QueryOutcome> outcomes;
    try {
      if (!request.at("outcomes").is_array() || request.at("outcomes").empty())
        throw std::invalid_argument("'outcomes' must be a non-empty array");
      for (const auto& oj : request.at("outcomes")) {
        QueryOutcome o;
        o.accuracy = oj.at("accuracy").get<double>();
        if (!(o.accuracy >= 0.0 && o.accuracy <= 1.0))
          throw std::invalid_argument("outcome accuracy " + fmt_double(o.accuracy) + " outside [0,1]");
        if (!oj.at("tokens").is_number_unsigned() && !(oj.at("tokens").is_number_integer() && oj.at("tokens").get<std::int64_t>() >= 0))
          throw std::invalid_argument("outcome tokens must be a nonnegative integer");
        o.tokens = oj.at("tokens").get<std::uint64_t>();
        outcomes.push_back(o);
      }
    } catch (const ServiceError&) {
      throw;
    } catch (const std::exception& e) {
      throw ServiceError{ServiceError::Code::Validation, e.what()};  // no state change
    }

    const double reward = batch_reward(outcomes, session->reward);
    if (auto* flat = std::get_if<FlatBandit>(&session->learner)) {
      flat->update(session->space.flat_index(it->second.config), reward);
    } else {
      auto& hier = std::get<HierBandit>(session->learner);
      hier.update(static_cast<std::size_t>(it->second.dim), it->second.level, it->second.config, reward);
    }
    session->pending.erase(it);
    ++session->accepted_reports;
    return {{"trials", learner_trials(*session)}};
  }

  nlohmann::json ranking(const std::string& session_id, std::size_t x) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    if (x < 1 || x > session->space.cardinality())
      throw ServiceError{ServiceError::Code::Validation, "x must be in [1, cardinality]"};
    Ranking full = learner_ranking(session->learner);
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < x; ++i) {
      const auto& e = full[i];
      nlohmann::json row{{"config_id", e.config_index},
                         {"config", config_to_named_json(session->space, session->space.config_at(e.config_index))}};
      if (std::isfinite(e.score))
        row["score"] = e.score;
      else
        row["score"] = nullptr;  // unvisited, no evidence yet
      entries.push_back(std::move(row));
    }
    return {{"entries", std::move(entries)}};
  }

  nlohmann::json snapshot(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    nlohmann::json learner_json;
    if (const auto* flat = std::get_if<FlatBandit>(&session->learner))
      learner_json = {{"kind", "flat"}, {"state", flat_bandit_to_json(*flat)}};
    else
      learner_json = {{"kind", "hier"}, {"state", hier_bandit_to_json(std::get<HierBandit>(session->learner))}};

    nlohmann::json pending = nlohmann::json::array();
    for (const auto& [sid, p] : session->pending)
      pending.push_back({{"id", sid}, {"dim", p.dim}, {"level", p.level}, {"config", p.config.level_indices}});

    return {{"version", 1},
            {"method", method_to_string(session->method)},
            {"space", space_to_json(session->space)},
            {"reward", reward_params_to_json(session->reward)},
            {"learner", std::move(learner_json)},
            {"rng", session->rng.save_state()},
            {"strict_sequential", session->strict_sequential},
            {"ttl_seconds", session->ttl_seconds},
            {"next_suggestion", session->next_suggestion},
            {"pending", std::move(pending)}};
  }

  nlohmann::json restore(const nlohmann::json& blob) {
    auto session = std::make_shared<Session>();
    try {
      if (!blob.is_object() || blob.at("version").get<int>() != 1)
        throw std::invalid_argument("unsupported snapshot version");
      session->method = method_from_string(blob.at("method").get<std::string>());
      session->space = space_from_json(blob.at("space"));
      session->reward = reward_params_from_json(blob.at("reward"));
      const auto& lj = blob.at("learner");
      if (lj.at("kind").get<std::string>() == "flat")
        session->learner = flat_bandit_from_json(lj.at("state"));
      else
        session->learner = hier_bandit_from_json(lj.at("state"));
      session->rng.load_state(blob.at("rng").get<std::string>());
      session->strict_sequential = blob.at("strict_sequential").get<bool>();
      session->ttl_seconds = blob.at("ttl_seconds").get<std::uint64_t>();
      session->next_suggestion = blob.at("next_suggestion").get<std::uint64_t>();
      for (const auto& pj : blob.at("pending")) {
        Pending p;
        p.dim = pj.at("dim").get<int>();
        p.level = pj.at("level").get<std::size_t>();
        p.config.level_indices = pj.at("config").get<std::vector<std::size_t>>();
        session->space.require_config(p.config);
        p.created = std::chrono::steady_clock::now();  // fresh ttl after restore
        session->pending.emplace(pj.at("id").get<std::string>(), std::move(p));
      }
    } catch (const std::exception& e) {
      throw ServiceError{ServiceError::Code::Validation, std::string("corrupt snapshot: ") + e.what()};
    }
    session->id = "s" + std::to_string(next_id_.fetch_add(1));
    {
      std::unique_lock lock(map_mu_);
      sessions_[session->id] = session;
    }
    return {{"session_id", session->id}};
  }

  nlohmann::json reset(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    if (auto* flat = std::get_if<FlatBandit>(&session->learner))
      flat->reset();
    else
      std::get<HierBandit>(session->learner).reset();
    session->pending.clear();
    return {{"trials", learner_trials(*session)}};
  }

  // test/ops introspection
  std::uint64_t update_count(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    return learner_trials(*session);
  }

  std::uint64_t accepted_reports(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    return session->accepted_reports;
  }

  nlohmann::json pending_counters(const std::string& session_id) {
    auto session = find(session_id);
    std::lock_guard lock(session->mu);
    return {{"pending", session->pending.size()},
            {"suggests", session->suggest_count},
            {"accepted", session->accepted_reports},
            {"expired", session->expired_count}};
  }

 private:
  struct Pending {
    int dim = -1;  // -1 for flat learners
    std::size_t level = 0;
    Config config;
    std::chrono::steady_clock::time_point created;
  };

  struct Session {
    std::mutex mu;
    std::string id;
    Method method = Method::Ucb;
    HyperParamSpace space;
    RewardParams reward;
    Learner learner = FlatBandit(1, RandomPolicy{});
    RngStream rng;
    std::map<std::string, Pending> pending;
    std::uint64_t next_suggestion = 1;
    bool strict_sequential = false;
    std::uint64_t ttl_seconds = 3600;
    std::uint64_t suggest_count = 0;
    std::uint64_t accepted_reports = 0;
    std::uint64_t expired_count = 0;
  };

  std::shared_ptr<Session> find(const std::string& id) {
    std::shared_lock lock(map_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError{ServiceError::Code::NotFound, "no session '" + id + "'"};
    return it->second;
  }

  void expire_pending(Session& session) {
    const auto now = std::chrono::steady_clock::now();
    for (auto it = session.pending.begin(); it != session.pending.end();) {
      const auto age = std::chrono::duration_cast<std::chrono::seconds>(now - it->second.created).count();
      const bool expired = session.ttl_seconds == 0 || static_cast<std::uint64_t>(age) >= session.ttl_seconds;
      if (expired) {
        it = session.pending.erase(it);
        ++session.expired_count;
      } else {
        ++it;
      }
    }
  }

  static std::uint64_t learner_trials(Session& session) {
    if (const auto* flat = std::get_if<FlatBandit>(&session.learner)) return flat->total_trials();
    return std::get<HierBandit>(session.learner).total_trials();
  }

  Options options_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::shared_mutex map_mu_;
  std::atomic<std::uint64_t> next_id_{1};
};

}  // namespace ragtune
