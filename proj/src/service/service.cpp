#include "mcnn/service/service.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "mcnn/errors.hpp"
#include "mcnn/nn/model_io.hpp"
#include "mcnn/random.hpp"
#include "mcnn/textsynth/textsynth.hpp"
#include "mcnn/tictactoe/board.hpp"
#include "mcnn/tictactoe/game.hpp"

namespace mcnn::service {

using nlohmann::json;

namespace {

constexpr int kMaxTrials = 100000;
constexpr int kMaxLength = 5000;

struct RequestError {
  int status;
  std::string code;
  std::string message;
};

Response ok(const json& j) { return {200, j.dump()}; }

json parse_body(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw RequestError{400, "invalid_json", "request body is not valid JSON"};
  if (!j.is_object()) throw RequestError{400, "invalid_json", "request body must be a JSON object"};
  return j;
}

ttt::Board board_field(const json& j) {
  if (!j.contains("board") || !j["board"].is_array() || j["board"].size() != 9) {
    throw RequestError{400, "invalid_board", "board must be an array of 9 integers"};
  }
  std::array<int, 9> cells{};
  for (std::size_t i = 0; i < 9; ++i) {
    const json& v = j["board"][i];
    if (!v.is_number_integer() || v.get<long long>() < -1 || v.get<long long>() > 1) {
      throw RequestError{400, "invalid_board", "board cells must be -1, 0 or 1"};
    }
    cells[i] = v.get<int>();
  }
  ttt::Board board(cells);
  if (!board.is_valid()) throw RequestError{400, "invalid_board", "board is not reachable in a legal game"};
  return board;
}

int player_field(const json& j) {
  if (!j.contains("player") || !j["player"].is_number_integer() ||
      (j["player"].get<long long>() != -1 && j["player"].get<long long>() != 1)) {
    throw RequestError{400, "invalid_player", "player must be -1 or 1"};
  }
  return j["player"].get<int>();
}

std::uint64_t seed_field(const json& j) {
  if (!j.contains("seed") || j["seed"].is_null()) return entropy_seed();
  if (!j["seed"].is_number_unsigned()) throw RequestError{400, "invalid_seed", "seed must be a non-negative integer"};
  return j["seed"].get<std::uint64_t>();
}

int bounded_int(const json& j, const char* key, int lo, int hi) {
  const std::string code = std::string("invalid_") + key;
  const std::string range = std::string(key) + " must be an integer in " + std::to_string(lo) + ".." + std::to_string(hi);
  if (!j.contains(key) || !j[key].is_number_integer()) throw RequestError{400, code, range};
  const long long v = j[key].get<long long>();
  if (v < lo || v > hi) throw RequestError{400, code, range};
  return static_cast<int>(v);
}

void require_ongoing(const ttt::Board& board, int player) {
  if (ttt::winner(board) != ttt::Outcome::kOngoing) throw RequestError{400, "game_over", "the game is already decided"};
  if (!ttt::is_turn_of(board, player)) {
    throw RequestError{400, "wrong_turn", "it is not player " + std::to_string(player) + "'s turn"};
  }
}

const nn::Network& require_model(const std::optional<nn::Network>& model, std::string_view name) {
  if (!model) throw RequestError{404, "model_not_loaded", "no " + std::string(name) + " model is loaded"};
  return *model;
}

template <typename F>
Response guarded(F&& handler) {
  try {
    return handler();
  } catch (const RequestError& e) {
    return {e.status, error_body(e.code, e.message)};
  } catch (const std::invalid_argument& e) {
    return {400, error_body("invalid_request", e.what())};
  }
}

void check_tictactoe_net(const nn::Network& net) {
  if (net.input_dim() != 10 || net.output_dim() != 9) throw ShapeError("tic-tac-toe model must map 10 inputs to 9 outputs");
}

void check_text_net(const nn::Network& net) {
  if (net.input_dim() != text::kContextLen + 1 || net.output_dim() != text::kAlphabet) {
    throw ShapeError("text model must be a character model with 8 inputs and 256 outputs");
  }
}

}  // namespace

std::string error_body(std::string_view code, std::string_view message) {
  return json{{"error", {{"code", code}, {"message", message}}}}.dump();
}

std::string ServiceConfig::host() const {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw InputError("bind address must be host:port");
  return bind.substr(0, colon);
}

int ServiceConfig::port() const {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw InputError("bind address must be host:port");
  int port = -1;
  const char* first = bind.data() + colon + 1;
  const char* last = bind.data() + bind.size();
  const auto res = std::from_chars(first, last, port);
  if (res.ec != std::errc{} || res.ptr != last || port < 0 || port > 65535) {
    throw InputError("invalid port in bind address '" + bind + "'");
  }
  return port;
}

ServiceConfig ServiceConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("service config must be a JSON object");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  ServiceConfig c;
  try {
    if (j.contains("bind")) c.bind = j.at("bind").get<std::string>();
    if (j.contains("models")) {
      for (const auto& [name, path] : j.at("models").items()) c.models[name] = resolve(path.get<std::string>());
    }
    if (j.contains("static_dir") && !j.at("static_dir").is_null()) c.static_dir = resolve(j.at("static_dir").get<std::string>());
    if (j.contains("allow_cross_origin")) c.allow_cross_origin = j.at("allow_cross_origin").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad service config: ") + e.what());
  }
  try {
    c.port();
  } catch (const InputError& e) {
    throw ParseError(e.what());
  }
  return c;
}

ServiceConfig ServiceConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open service config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

InferenceService::InferenceService(std::optional<nn::Network> tictactoe, std::optional<nn::Network> text)
    : tictactoe_(std::move(tictactoe)), text_(std::move(text)) {
  if (tictactoe_) check_tictactoe_net(*tictactoe_);
  if (text_) check_text_net(*text_);
}

InferenceService::InferenceService(const ServiceConfig& config) {
  for (const auto& [name, path] : config.models) {
    if (name == kTicTacToeModel) {
      tictactoe_ = nn::load_model_file(path);
      check_tictactoe_net(*tictactoe_);
    } else if (name == kTextModel) {
      text_ = nn::load_model_file(path);
      check_text_net(*text_);
    } else {
      throw InputError("unknown model name '" + name + "' (expected tictactoe or text)");
    }
  }
}

std::vector<std::string> InferenceService::model_names() const {
  std::vector<std::string> names;
  if (tictactoe_) names.emplace_back(kTicTacToeModel);
  if (text_) names.emplace_back(kTextModel);
  return names;
}

Response InferenceService::health() const { return ok({{"status", "ok"}, {"models", model_names()}}); }

Response InferenceService::tictactoe_move(std::string_view body) const {
  return guarded([&] {
    const json j = parse_body(body);
    const ttt::Board board = board_field(j);
    const int player = player_field(j);
    require_ongoing(board, player);
    const std::uint64_t seed = seed_field(j);
    const nn::Network& net = require_model(tictactoe_, kTicTacToeModel);
    Rng rng(seed);
    const std::size_t cell = ttt::network_move(net, board, player, rng.uniform01());
    const ttt::Board after = board.with_move(cell, player);
    return ok({{"cell", cell}, {"board_after", after.cells()}, {"outcome", ttt::outcome_name(ttt::winner(after))}});
  });
}

Response InferenceService::tictactoe_distribution(std::string_view body) const {
  return guarded([&] {
    const json j = parse_body(body);
    const ttt::Board board = board_field(j);
    const int player = player_field(j);
    const int trials = bounded_int(j, "trials", 1, kMaxTrials);
    require_ongoing(board, player);
    const std::uint64_t seed = seed_field(j);
    const nn::Network& net = require_model(tictactoe_, kTicTacToeModel);
    const auto dist = ttt::reaction_distribution(net, board, player, static_cast<std::size_t>(trials), seed);
    return ok({{"probs", dist.probs()}});
  });
}

Response InferenceService::text_synthesize(std::string_view body) const {
  return guarded([&] {
    const json j = parse_body(body);
    if (!j.contains("seed_text") || !j["seed_text"].is_string()) {
      throw RequestError{400, "invalid_seed_text", "seed_text must be a string"};
    }
    const std::string seed_text = text::to_latin1(j["seed_text"].get<std::string>());
    if (seed_text.size() < text::kContextLen) {
      throw RequestError{400, "seed_text_too_short",
                         "seed_text needs at least " + std::to_string(text::kContextLen) + " characters"};
    }
    const int length = bounded_int(j, "length", 1, kMaxLength);
    const std::uint64_t seed = seed_field(j);
    const nn::Network& net = require_model(text_, kTextModel);
    const std::string out = text::synthesize_chars(net, seed_text, static_cast<std::size_t>(length), seed);
    return ok({{"text", text::to_utf8(out)}});
  });
}

HttpServer::HttpServer(std::shared_ptr<const InferenceService> service, const ServiceConfig& config)
    : service_(std::move(service)), config_(config), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto& s = *server_;
  s.Get("/api/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, service_->health()); });
  s.Post("/api/tictactoe/move", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_->tictactoe_move(req.body));
  });
  s.Post("/api/tictactoe/distribution", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_->tictactoe_distribution(req.body));
  });
  s.Post("/api/text/synthesize", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_->text_synthesize(req.body));
  });
  if (config_.allow_cross_origin) {
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
    s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
  if (config_.static_dir && !s.set_mount_point("/", config_.static_dir->string())) {
    throw std::runtime_error("static_dir " + config_.static_dir->string() + " is not a directory");
  }
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      res.set_content(error_body("not_found", "no route for " + req.path), "application/json");
    } else if (res.status == 405) {
      res.set_content(error_body("method_not_allowed", req.method + " is not allowed on " + req.path), "application/json");
    }
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  const std::string host = config_.host();
  const int port = config_.port();
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("cannot bind " + config_.bind);
  return bound;
}

void HttpServer::listen() {
  if (!server_->listen_after_bind()) throw std::runtime_error("server stopped with an error");
}

void HttpServer::stop() {
  if (server_) server_->stop();
}

}  // namespace mcnn::service
