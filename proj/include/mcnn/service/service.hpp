#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcnn/nn/network.hpp"

namespace httplib {
class Server;
}

namespace mcnn::service {

inline constexpr std::string_view kTicTacToeModel = "tictactoe";
inline constexpr std::string_view kTextModel = "text";

struct ServiceConfig {
  std::string bind = "127.0.0.1:8080";
  std::map<std::string, std::filesystem::path> models;
  std::optional<std::filesystem::path> static_dir;
  bool allow_cross_origin = false;

  std::string host() const;
  int port() const;

  /// {"bind": "host:port", "models": {"tictactoe": path, "text": path},
  ///  "static_dir": path, "allow_cross_origin": bool}. Relative paths are
  /// resolved against `base_dir`. Throws ParseError.
  static ServiceConfig parse(std::string_view json, const std::filesystem::path& base_dir = {});
  static ServiceConfig load_file(const std::filesystem::path& path);
};

struct Response {
  int status = 200;
  std::string body;
};

/// Transport-independent request handlers. Models are loaded once and only
/// read afterwards, so handlers may run concurrently.
class InferenceService {
 public:
  InferenceService(std::optional<nn::Network> tictactoe, std::optional<nn::Network> text);
  /// Loads every configured model; throws on unknown names or bad files.
  explicit InferenceService(const ServiceConfig& config);

  std::vector<std::string> model_names() const;

  Response health() const;
  Response tictactoe_move(std::string_view body) const;
  Response tictactoe_distribution(std::string_view body) const;
  Response text_synthesize(std::string_view body) const;

 private:
  std::optional<nn::Network> tictactoe_;
  std::optional<nn::Network> text_;
};

/// `{"error":{"code":...,"message":...}}`
std::string error_body(std::string_view code, std::string_view message);

class HttpServer {
 public:
  HttpServer(std::shared_ptr<const InferenceService> service, const ServiceConfig& config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds the configured address; port 0 picks a free port. Returns the
  /// bound port. Throws std::runtime_error on failure.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  std::shared_ptr<const InferenceService> service_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace mcnn::service
