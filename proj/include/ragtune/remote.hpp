#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ragtune/environment.hpp"
#include "ragtune/serialize.hpp"

namespace ragtune {

// Transport-level failure after all retries; callers may try again later.
struct RemoteTransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Protocol violation (bad payload shape or out-of-range values); fatal.
struct RemoteSchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RemoteOptions {
  std::string path = "/evaluate";
  int max_retries = 2;       // additional attempts after the first
  int retry_backoff_ms = 50;
  int timeout_sec = 10;
};

// Client for a live evaluation endpoint. One request per evaluate call:
// {config: {dimension: level, ...}, batch_size} -> {outcomes: [{accuracy,
// tokens}, ...]}. Requests on one instance are serialized.
class RemoteEnvironment : public Environment {
 public:
  RemoteEnvironment(std::string host, int port, HyperParamSpace space, std::uint64_t t_max,
                    RemoteOptions options = {})
      : options_(std::move(options)), client_(host, port) {
    desc_ = {"remote:" + host + ":" + std::to_string(port), std::move(space), t_max};
    client_.set_connection_timeout(options_.timeout_sec);
    client_.set_read_timeout(options_.timeout_sec);
  }

  const EnvDescriptor& descriptor() const override { return desc_; }

  std::vector<QueryOutcome> evaluate(const Config& config, std::size_t batch_size, RngStream&) const override {
    if (batch_size == 0) throw std::invalid_argument("evaluate: batch_size must be positive");
    desc_.space.require_config(config);
    const std::string body =
        nlohmann::json{{"config", config_to_named_json(desc_.space, config)}, {"batch_size", batch_size}}.dump();

    std::lock_guard lock(mu_);
    std::string last_failure;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.retry_backoff_ms));
      httplib::Result res = client_.Post(options_.path, body, "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {  // server-side hiccup, retryable
        last_failure = "server returned status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw RemoteSchemaError("endpoint rejected the request with status " + std::to_string(res->status) + ": " +
                                excerpt(res->body));
      return parse_outcomes(res->body, batch_size);
    }
    throw RemoteTransportError("evaluation endpoint unreachable after " +
                               std::to_string(options_.max_retries + 1) + " attempts (" + last_failure + ")");
  }

 private:
  static std::string excerpt(const std::string& body) {
    return body.size() <= 200 ? body : body.substr(0, 200) + "...";
  }

  std::vector<QueryOutcome> parse_outcomes(const std::string& body, std::size_t batch_size) const {
    nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_discarded()) throw RemoteSchemaError("response is not valid JSON: " + excerpt(body));
    if (!parsed.contains("outcomes") || !parsed["outcomes"].is_array())
      throw RemoteSchemaError("response lacks an 'outcomes' array: " + excerpt(body));
    const auto& arr = parsed["outcomes"];
    if (arr.size() != batch_size)
      throw RemoteSchemaError("expected " + std::to_string(batch_size) + " outcomes, got " +
                              std::to_string(arr.size()) + ": " + excerpt(body));
    std::vector<QueryOutcome> out;
    out.reserve(arr.size());
    for (const auto& oj : arr) {
      QueryOutcome o;
      try {
        o.accuracy = oj.at("accuracy").get<double>();
        o.tokens = oj.at("tokens").get<std::uint64_t>();
      } catch (const std::exception& e) {
        throw RemoteSchemaError(std::string("malformed outcome: ") + e.what() + ": " + excerpt(body));
      }
      if (!(o.accuracy >= 0.0 && o.accuracy <= 1.0))
        throw RemoteSchemaError("outcome accuracy " + fmt_double(o.accuracy) + " outside [0,1]: " + excerpt(body));
      out.push_back(o);
    }
    return out;
  }

  RemoteOptions options_;
  mutable httplib::Client client_;
  mutable std::mutex mu_;
  EnvDescriptor desc_;
};

}  // namespace ragtune
