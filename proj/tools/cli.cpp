#include "cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcnn/errors.hpp"
#include "mcnn/nn/model_io.hpp"
#include "mcnn/random.hpp"
#include "mcnn/service/service.hpp"
#include "mcnn/textsynth/textsynth.hpp"
#include "mcnn/tictactoe/game.hpp"
#include "mcnn/walker/walker.hpp"

namespace mcnn::cli {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

// Everything a run needs to be repeated: the resolved value of every flag,
// the seeds actually used and hashes of the files written.
class Metadata {
 public:
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void artifact(const std::string& path) { artifacts_.push_back(path); }

  void write(const CLI::App& sub, const std::string& path) const {
    json flags = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      const std::string name = opt->get_single_name();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        flags[name] = res.size() == 1 ? json(res.front()) : json(res);
      } else if (!opt->get_default_str().empty()) {
        flags[name] = opt->get_default_str();
      }
    }
    json hashes = json::object();
    for (const std::string& a : artifacts_) hashes[a] = sha256_file(a);
    const json meta{{"command", std::string(sub.get_parent()->get_name().empty() ? "" : sub.get_parent()->get_name() + " ") +
                                    sub.get_name()},
                    {"flags", flags},
                    {"seeds", seeds_},
                    {"timestamp", utc_timestamp()},
                    {"artifact_hashes", hashes}};
    open_out(path) << meta.dump(2) << '\n';
  }

 private:
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<std::string> artifacts_;
};

// Optional --seed flags fall back to OS entropy; the value used is recorded.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) { return seed ? *seed : entropy_seed(); }

std::string meta_path(const std::string& artifact) { return artifact + ".meta.json"; }

void add_train_flags(CLI::App* sub, nn::TrainConfig& cfg) {
  sub->add_option("--epochs", cfg.epochs, "training epochs")->check(CLI::PositiveNumber);
  sub->add_option("--lr", cfg.learning_rate, "SGD learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--batch", cfg.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
}

struct WalkerTrainArgs {
  int dim = 2;
  std::string out;
  walker::WalkerTrainOptions opts;
  std::optional<std::uint64_t> seed;
};

void walker_train(const WalkerTrainArgs& a, const CLI::App& sub, std::ostream& out) {
  walker::WalkerTrainOptions opts = a.opts;
  opts.seed = resolve_seed(a.seed);
  opts.train.rng_seed = derive_seed(opts.seed, 2);
  const auto model = walker::build_walker_chain(a.dim);
  const auto result = walker::train_walker_net(model, opts);
  nn::save_model_file(result.net, a.out);
  Metadata meta;
  meta.seed("seed", opts.seed);
  meta.artifact(a.out);
  meta.write(sub, meta_path(a.out));
  out << "trained on " << result.pair_count << " pairs, final loss " << result.loss_history.back() << '\n';
}

struct WalkerRunArgs {
  std::string model;
  std::size_t steps = 20000;
  std::size_t start = 0;
  std::optional<std::uint64_t> seed;
  std::string traj;
  std::string stats;
};

void walker_run(const WalkerRunArgs& a, const CLI::App& sub, std::ostream& out) {
  const nn::Network net = nn::load_model_file(a.model);
  if (net.output_dim() != 4 && net.output_dim() != 6) throw InputError("model is not a 2D or 3D walker network");
  const auto model = walker::build_walker_chain(static_cast<int>(net.output_dim() / 2));
  const std::uint64_t seed = resolve_seed(a.seed);
  const auto walk = walker::run_net_walk(net, a.start, a.steps, seed);
  const std::vector<std::size_t> steps(walk.begin() + 1, walk.end());
  Metadata meta;
  meta.seed("seed", seed);
  if (!a.traj.empty()) {
    auto f = open_out(a.traj);
    walker::write_trajectory_csv(f, walker::states_to_trajectory(steps, model));
    f.close();
    meta.artifact(a.traj);
  }
  if (!a.stats.empty()) {
    auto f = open_out(a.stats);
    walker::write_frequency_csv(f, steps, model);
    f.close();
    meta.artifact(a.stats);
  }
  if (a.traj.empty() && a.stats.empty()) {
    walker::write_frequency_csv(out, steps, model);
  } else {
    meta.write(sub, meta_path(!a.stats.empty() ? a.stats : a.traj));
  }
}

struct TttSimulateArgs {
  std::size_t games = 10000;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void ttt_simulate(const TttSimulateArgs& a, const CLI::App& sub, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.seed);
  const auto sim = ttt::simulate_training_games(a.games, seed);
  {
    auto f = open_out(a.out);
    ttt::write_reaction_dataset(f, sim.pairs);
  }
  Metadata meta;
  meta.seed("seed", seed);
  meta.artifact(a.out);
  meta.write(sub, meta_path(a.out));
  out << sim.games.size() << " games, " << sim.pairs.size() << " winner reaction pairs\n";
}

std::vector<ttt::ReactionPair> read_dataset_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return ttt::read_reaction_dataset(f);
}

struct TttTrainArgs {
  std::string data;
  std::string out;
  ttt::TttTrainOptions opts;
  std::optional<std::uint64_t> seed;
  std::string eval_csv;
  std::size_t eval_games = 1000;
  std::size_t eval_every = 1;
  std::uint64_t eval_seed = 1;
  std::string loss_csv;
};

void ttt_train(const TttTrainArgs& a, const CLI::App& sub, std::ostream& out) {
  const auto pairs = read_dataset_file(a.data);
  ttt::TttTrainOptions opts = a.opts;
  opts.seed = resolve_seed(a.seed);
  opts.train.rng_seed = derive_seed(opts.seed, 2);

  std::unique_ptr<std::ofstream> eval_file;
  if (!a.eval_csv.empty()) {
    eval_file = std::make_unique<std::ofstream>(open_out(a.eval_csv));
    *eval_file << "epoch,wins,draws,losses\n";
  }
  auto on_epoch = [&](std::size_t epoch, const nn::Network& net, double) {
    if (!eval_file || (epoch % a.eval_every != 0 && epoch != opts.train.epochs)) return;
    const auto e = ttt::evaluate(net, a.eval_games, a.eval_seed);
    *eval_file << epoch << ',' << e.wins << ',' << e.draws << ',' << e.losses << '\n';
  };
  const auto result = ttt::train_tictactoe_net(pairs, opts, on_epoch);
  nn::save_model_file(result.net, a.out);

  Metadata meta;
  meta.seed("seed", opts.seed);
  meta.seed("eval_seed", a.eval_seed);
  meta.artifact(a.out);
  if (eval_file) {
    eval_file->close();
    meta.artifact(a.eval_csv);
  }
  if (!a.loss_csv.empty()) {
    const auto classical = ttt::train_classical_tictactoe_net(pairs, opts);
    auto f = open_out(a.loss_csv);
    f << "epoch,mc_loss,classical_loss\n" << std::setprecision(10);
    for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
      f << i + 1 << ',' << result.loss_history[i] << ',' << classical.loss_history[i] << '\n';
    }
    f.close();
    meta.artifact(a.loss_csv);
  }
  meta.write(sub, meta_path(a.out));
  out << "trained on " << result.pair_count << " pairs, final loss " << result.loss_history.back() << '\n';
}

struct TttEvalArgs {
  std::string model;
  std::size_t games = 1000;
  std::optional<std::uint64_t> seed;
  std::string epoch = "final";
};

void ttt_eval(const TttEvalArgs& a, std::ostream& out) {
  const nn::Network net = nn::load_model_file(a.model);
  const auto e = ttt::evaluate(net, a.games, resolve_seed(a.seed));
  out << "epoch,wins,draws,losses\n" << a.epoch << ',' << e.wins << ',' << e.draws << ',' << e.losses << '\n';
}

struct TttProbeArgs {
  std::string model;
  std::string board;
  std::optional<int> player;
  std::size_t trials = 1000;
  std::optional<std::uint64_t> seed;
};

void ttt_probe(const TttProbeArgs& a, std::ostream& out) {
  const nn::Network net = nn::load_model_file(a.model);
  const ttt::Board board = ttt::Board::parse(a.board);
  // The network's seat is O; fall back to X when it is not O's turn.
  const int player = a.player ? *a.player : (ttt::is_turn_of(board, ttt::kO) ? ttt::kO : ttt::kX);
  const auto dist = ttt::reaction_distribution(net, board, player, a.trials, resolve_seed(a.seed));
  out << "cell,frequency\n";
  for (std::size_t c = 0; c < 9; ++c) out << c << ',' << dist[c] << '\n';
}

std::string vocab_path(const std::string& model) { return model + ".vocab.json"; }

struct TextTrainArgs {
  std::string corpus;
  std::string mode = "char";
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> hidden;
  std::optional<std::size_t> pairs_per_input;
  std::optional<std::size_t> multi_pairs;
  std::size_t context = text::kContextLen;
  nn::TrainConfig train;
};

void text_train(TextTrainArgs a, const CLI::App& sub, std::ostream& out) {
  const std::uint64_t seed = resolve_seed(a.seed);
  const std::string raw = read_file(a.corpus);
  Metadata meta;
  meta.seed("seed", seed);
  auto apply = [&](auto& opts) {
    opts.seed = seed;
    if (!a.hidden.empty()) opts.hidden = a.hidden;
    if (a.pairs_per_input) opts.pairs_per_input = *a.pairs_per_input;
    if (a.multi_pairs) opts.multi_outcome_pairs_per_input = *a.multi_pairs;
    if (sub.count("--epochs")) opts.train.epochs = a.train.epochs;
    if (sub.count("--lr")) opts.train.learning_rate = a.train.learning_rate;
    if (sub.count("--batch")) opts.train.batch_size = a.train.batch_size;
    opts.train.rng_seed = derive_seed(seed, 2);
  };
  if (a.mode == "char") {
    text::CharTrainOptions opts;
    opts.context_len = a.context;
    apply(opts);
    const auto result = text::train_char_net(text::to_latin1(raw), opts);
    nn::save_model_file(result.net, a.out);
    meta.artifact(a.out);
    out << "trained on " << result.pair_count << " pairs, final loss " << result.loss_history.back() << '\n';
  } else {
    text::WordTrainOptions opts;
    opts.window = a.context == text::kContextLen ? text::kWordWindow : a.context;
    apply(opts);
    const auto model = text::train_word_net(text::tokenize(raw), opts);
    nn::save_model_file(model.net, a.out);
    text::save_dictionary_file(model.dict, vocab_path(a.out));
    meta.artifact(a.out);
    meta.artifact(vocab_path(a.out));
    out << "dictionary of " << model.dict.size() << " words, final loss " << model.loss_history.back() << '\n';
  }
  meta.write(sub, meta_path(a.out));
}

struct TextSynthArgs {
  std::string model;
  std::string seed_text;
  std::size_t length = 500;
  std::size_t window = text::kWordWindow;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void text_synth(const TextSynthArgs& a, const CLI::App& sub, std::ostream& out) {
  const nn::Network net = nn::load_model_file(a.model);
  const std::uint64_t seed = resolve_seed(a.seed);
  std::string result;
  if (std::filesystem::exists(vocab_path(a.model))) {
    const auto dict = text::load_dictionary_file(vocab_path(a.model));
    const auto words = text::synthesize_words(net, dict, text::tokenize(a.seed_text), a.length, seed, a.window);
    for (std::size_t i = 0; i < words.size(); ++i) result += (i ? " " : "") + words[i];
  } else {
    result = text::to_utf8(
        text::synthesize_chars(net, text::to_latin1(a.seed_text), a.length, seed, net.input_dim() - 1));
  }
  if (a.out.empty()) {
    out << result << '\n';
    return;
  }
  {
    auto f = open_out(a.out);
    f << result << '\n';
  }
  Metadata meta;
  meta.seed("seed", seed);
  meta.artifact(a.out);
  meta.write(sub, meta_path(a.out));
}

service::HttpServer* g_server = nullptr;

void serve(const std::string& config_path, std::ostream& out) {
  const auto config = service::ServiceConfig::load_file(config_path);
  auto svc = std::make_shared<const service::InferenceService>(config);
  service::HttpServer server(svc, config);
  const int port = server.bind();
  out << "listening on " << config.host() << ':' << port << '\n' << std::flush;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov chain neural networks: walkers, tic-tac-toe and text synthesis", "mcnn"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::function<void()> action;

  auto* walker_cmd = app.add_subcommand("walker", "random walker on a lattice")->require_subcommand(1);
  WalkerTrainArgs wt;
  auto* wt_cmd = walker_cmd->add_subcommand("train", "train a walker network");
  wt_cmd->add_option("--dim", wt.dim, "lattice dimension")->check(CLI::IsMember({2, 3}));
  wt_cmd->add_option("--out", wt.out, "model file")->required();
  add_train_flags(wt_cmd, wt.opts.train);
  wt_cmd->add_option("--hidden", wt.opts.hidden, "hidden widths, comma separated")->delimiter(',');
  wt_cmd->add_option("--pairs-per-state", wt.opts.pairs_per_state)->check(CLI::PositiveNumber);
  wt_cmd->add_option("--seed", wt.seed);
  wt_cmd->add_option("--from-simulation", wt.opts.from_simulation,
                     "estimate transitions from a chain run of N steps (0: exact matrix)");
  wt_cmd->callback([&] { action = [&] { walker_train(wt, *wt_cmd, out); }; });

  WalkerRunArgs wr;
  auto* wr_cmd = walker_cmd->add_subcommand("run", "walk with a trained network");
  wr_cmd->add_option("--model", wr.model)->required()->check(CLI::ExistingFile);
  wr_cmd->add_option("--steps", wr.steps);
  wr_cmd->add_option("--start", wr.start, "start state");
  wr_cmd->add_option("--seed", wr.seed);
  wr_cmd->add_option("--traj", wr.traj, "trajectory CSV");
  wr_cmd->add_option("--stats", wr.stats, "visit frequency CSV");
  wr_cmd->callback([&] { action = [&] { walker_run(wr, *wr_cmd, out); }; });

  auto* ttt_cmd = app.add_subcommand("ttt", "tic-tac-toe")->require_subcommand(1);
  TttSimulateArgs ts;
  auto* ts_cmd = ttt_cmd->add_subcommand("simulate", "rule-based games to a reaction dataset");
  ts_cmd->add_option("--games", ts.games)->check(CLI::PositiveNumber);
  ts_cmd->add_option("--seed", ts.seed);
  ts_cmd->add_option("--out", ts.out, "dataset file")->required();
  ts_cmd->callback([&] { action = [&] { ttt_simulate(ts, *ts_cmd, out); }; });

  TttTrainArgs tt;
  auto* tt_cmd = ttt_cmd->add_subcommand("train", "train the tic-tac-toe network");
  tt_cmd->add_option("--data", tt.data, "reaction dataset")->required()->check(CLI::ExistingFile);
  tt_cmd->add_option("--out", tt.out, "model file")->required();
  add_train_flags(tt_cmd, tt.opts.train);
  tt_cmd->add_option("--hidden", tt.opts.hidden)->delimiter(',');
  tt_cmd->add_option("--pairs-per-input", tt.opts.pairs_per_input)->check(CLI::PositiveNumber);
  tt_cmd->add_option("--multi-pairs", tt.opts.multi_outcome_pairs_per_input,
                     "pairs per board with several observed replies (0: same as --pairs-per-input)");
  tt_cmd->add_option("--seed", tt.seed);
  tt_cmd->add_option("--eval-csv", tt.eval_csv, "per-epoch evaluation CSV");
  tt_cmd->add_option("--eval-games", tt.eval_games)->check(CLI::PositiveNumber);
  tt_cmd->add_option("--eval-every", tt.eval_every)->check(CLI::PositiveNumber);
  tt_cmd->add_option("--eval-seed", tt.eval_seed);
  tt_cmd->add_option("--loss-csv", tt.loss_csv, "also train without r and write both loss curves");
  tt_cmd->callback([&] { action = [&] { ttt_train(tt, *tt_cmd, out); }; });

  TttEvalArgs te;
  auto* te_cmd = ttt_cmd->add_subcommand("eval", "play the network against the rule-based player");
  te_cmd->add_option("--model", te.model)->required()->check(CLI::ExistingFile);
  te_cmd->add_option("--games", te.games)->check(CLI::PositiveNumber);
  te_cmd->add_option("--seed", te.seed);
  te_cmd->add_option("--epoch", te.epoch, "label for the epoch column");
  te_cmd->callback([&] { action = [&] { ttt_eval(te, out); }; });

  TttProbeArgs tp;
  auto* tp_cmd = ttt_cmd->add_subcommand("probe", "reply distribution on a board");
  tp_cmd->add_option("--model", tp.model)->required()->check(CLI::ExistingFile);
  tp_cmd->add_option("--board", tp.board, "nine comma-separated cells in -1,0,1")->required();
  tp_cmd->add_option("--player", tp.player)->check(CLI::IsMember({-1, 1}));
  tp_cmd->add_option("--trials", tp.trials)->check(CLI::Range(1, 100000));
  tp_cmd->add_option("--seed", tp.seed);
  tp_cmd->callback([&] { action = [&] { ttt_probe(tp, out); }; });

  auto* text_cmd = app.add_subcommand("text", "text synthesis")->require_subcommand(1);
  TextTrainArgs xt;
  auto* xt_cmd = text_cmd->add_subcommand("train", "train a character or word model");
  xt_cmd->add_option("--corpus", xt.corpus)->required()->check(CLI::ExistingFile);
  xt_cmd->add_option("--mode", xt.mode)->check(CLI::IsMember({"char", "word"}));
  xt_cmd->add_option("--out", xt.out, "model file")->required();
  xt_cmd->add_option("--context", xt.context, "context length (characters or words)")->check(CLI::PositiveNumber);
  xt_cmd->add_option("--hidden", xt.hidden)->delimiter(',');
  xt_cmd->add_option("--pairs-per-input", xt.pairs_per_input);
  xt_cmd->add_option("--multi-pairs", xt.multi_pairs);
  add_train_flags(xt_cmd, xt.train);
  xt_cmd->add_option("--seed", xt.seed);
  xt_cmd->callback([&] { action = [&] { text_train(xt, *xt_cmd, out); }; });

  TextSynthArgs xs;
  auto* xs_cmd = text_cmd->add_subcommand("synth", "continue a text fragment");
  xs_cmd->add_option("--model", xs.model)->required()->check(CLI::ExistingFile);
  xs_cmd->add_option("--seed-text", xs.seed_text)->required();
  xs_cmd->add_option("--length", xs.length);
  xs_cmd->add_option("--window", xs.window, "word context length of a word model")->check(CLI::PositiveNumber);
  xs_cmd->add_option("--seed", xs.seed);
  xs_cmd->add_option("--out", xs.out);
  xs_cmd->callback([&] { action = [&] { text_synth(xs, *xs_cmd, out); }; });

  std::string config;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP inference service");
  serve_cmd->add_option("--config", config)->required()->check(CLI::ExistingFile);
  serve_cmd->callback([&] { action = [&] { serve(config, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace mcnn::cli
