#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "critique/error.hpp"
#include "critique/session.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace critique {

/// Wire error codes. Every library error maps onto exactly one.
enum class ApiErrorCode {
  NoSignal,
  UnknownDestination,
  UnknownKeyphrase,
  PositiveNotSupported,
  WrongStatus,
  NotFound,
  BadRequest,
};

std::string_view to_string(ApiErrorCode code);
ApiErrorCode api_error_code(ErrorCode code);
int http_status(ApiErrorCode code);

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Transport-independent request handlers; the HTTP server only parses
/// paths and bodies and forwards here.
class Api {
 public:
  explicit Api(const System& system) : system_(system) {}

  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse choose_destination(std::string_view id, const nlohmann::json& body);
  ApiResponse recommendations(std::string_view id) const;
  ApiResponse critique(std::string_view id, const nlohmann::json& body);
  ApiResponse retract(std::string_view id, std::string_view keyphrase);
  ApiResponse finish(std::string_view id);
  ApiResponse session(std::string_view id) const;
  ApiResponse session_catalog(std::string_view id) const;
  ApiResponse keyphrases(std::string_view prefix) const;
  ApiResponse catalog(std::optional<std::string> destination,
                      std::vector<std::string> keyphrases) const;
  ApiResponse destinations() const;
  ApiResponse categories() const;

  SessionStore& store() { return store_; }
  const System& system() const { return system_; }

  /// Recommendation payload for a session, as returned after every loop step.
  nlohmann::json recommendations_payload(const Session& session) const;

  nlohmann::json snapshot() const;
  void restore(const nlohmann::json& snapshot);

 private:
  const System& system_;
  SessionStore store_;
};

ApiResponse error_response(const Error& e);

/// HTTP binding of Api, with optional static file serving under "/".
class Server {
 public:
  Server(Api& api, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; call listen_after_bind() next.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  void install_routes();

  Api& api_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace critique
