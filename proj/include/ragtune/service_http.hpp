#pragma once

#include <functional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "ragtune/service.hpp"

namespace ragtune {

namespace detail {

inline int http_status(ServiceError::Code code) {
  switch (code) {
    case ServiceError::Code::NotFound: return 404;
    case ServiceError::Code::Conflict: return 409;
    case ServiceError::Code::Validation: return 400;
    case ServiceError::Code::Internal: return 500;
  }
  return 500;
}

inline void reply_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    reply_json(res, fn());
  } catch (const ServiceError& e) {
    reply_json(res, {{"error", {{"code", service_error_code(e.code)}, {"message", e.message}}}},
               http_status(e.code));
  } catch (const std::exception& e) {
    reply_json(res, {{"error", {{"code", "internal"}, {"message", e.what()}}}}, 500);
  }
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  nlohmann::json parsed = nlohmann::json::parse(req.body, nullptr, false);
  if (parsed.is_discarded()) throw ServiceError{ServiceError::Code::Validation, "request body is not valid JSON"};
  return parsed;
}

}  // namespace detail

// Wires the suggest/report API onto an httplib server.
inline void register_routes(httplib::Server& server, TunerService& service) {
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.create_session(detail::parse_body(req)); });
  });
  server.Post(R"(/sessions/([^/]+)/suggest)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.suggest(req.matches[1]); });
  });
  server.Post(R"(/sessions/([^/]+)/report)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.report(req.matches[1], detail::parse_body(req)); });
  });
  server.Get(R"(/sessions/([^/]+)/ranking)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      if (!req.has_param("x")) throw ServiceError{ServiceError::Code::Validation, "query parameter 'x' is required"};
      std::size_t x = 0;
      try {
        x = static_cast<std::size_t>(std::stoull(req.get_param_value("x")));
      } catch (const std::exception&) {
        throw ServiceError{ServiceError::Code::Validation, "query parameter 'x' must be a positive integer"};
      }
      return service.ranking(req.matches[1], x);
    });
  });
  server.Post(R"(/sessions/([^/]+)/snapshot)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.snapshot(req.matches[1]); });
  });
  server.Post("/sessions/restore", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.restore(detail::parse_body(req)); });
  });
  server.Post(R"(/sessions/([^/]+)/reset)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { return service.reset(req.matches[1]); });
  });
}

}  // namespace ragtune
