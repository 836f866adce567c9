// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Usage: acceptance [name-substring ...] ; with no arguments all criteria run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcnn/markov/chain.hpp"
#include "mcnn/markov/distribution.hpp"
#include "mcnn/markov/empirical.hpp"
#include "mcnn/markov/pipeline.hpp"
#include "mcnn/nn/model_io.hpp"
#include "mcnn/nn/network.hpp"
#include "mcnn/random.hpp"
#include "mcnn/service/service.hpp"
#include "mcnn/textsynth/textsynth.hpp"
#include "mcnn/tictactoe/board.hpp"
#include "mcnn/tictactoe/game.hpp"
#include "mcnn/walker/walker.hpp"

using namespace mcnn;
using nlohmann::json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::filesystem::path g_out_dir = "acceptance_out";

// ---------------------------------------------------------------- gradients

Verdict gradient_check() {
  Rng rng(7001);
  const double h = 1e-5;
  double worst = 0.0;
  const nn::Activation acts[] = {nn::Activation::kSigmoid, nn::Activation::kLinear};
  for (int n = 0; n < 200; ++n) {
    const std::size_t layers = 1 + rng.below(3);
    std::vector<std::size_t> dims;
    for (std::size_t l = 0; l <= layers; ++l) dims.push_back(1 + rng.below(5));
    auto specs = nn::mlp_specs(dims);
    for (auto& s : specs) s.activation = acts[rng.below(2)];
    nn::Network net = nn::init_network(specs, rng.next());
    Vector x(static_cast<Eigen::Index>(dims.front()));
    Vector t(static_cast<Eigen::Index>(dims.back()));
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : t) v = rng.uniform(-1, 1);
    const auto analytic = nn::backprop(net, x, t);
    auto numeric = [&](double& p) {
      const double saved = p;
      p = saved + h;
      const double up = nn::mse_loss(nn::forward(net, x), t);
      p = saved - h;
      const double down = nn::mse_loss(nn::forward(net, x), t);
      p = saved;
      return (up - down) / (2 * h);
    };
    // Gradients below 1e-6 are compared absolutely; there the difference
    // quotient's rounding noise is as large as the value itself.
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
    auto& ls = net.mutable_layers();
    for (std::size_t l = 0; l < ls.size(); ++l) {
      for (Eigen::Index i = 0; i < ls[l].weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < ls[l].weights.cols(); ++j) {
          worst = std::max(worst, rel(analytic.grads[l].d_weights(i, j), numeric(ls[l].weights(i, j))));
        }
        worst = std::max(worst, rel(analytic.grads[l].d_bias(i), numeric(ls[l].bias(i))));
      }
    }
  }
  return {worst <= 1e-4, "max relative error " + fmt("%.3g", worst) + " over 200 nets (limit 1e-4)"};
}

// ------------------------------------------------------------------ sampler

Verdict sampler_exactness() {
  Rng rng(7002);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(2 + rng.below(9));
    double sum = 0;
    for (auto& v : w) sum += (v = rng.below(4) == 0 ? 0.0 : rng.uniform01());
    if (sum == 0) w[0] = sum = 1;
    for (auto& v : w) v /= sum;
    const markov::DiscreteDistribution dist(w);
    const auto intervals = markov::cumulative(dist);
    std::vector<double> freq(w.size(), 0.0);
    for (int k = 0; k < 10000; ++k) freq[markov::sample_index(intervals, k / 10000.0)] += 1e-4;
    for (std::size_t i = 0; i < w.size(); ++i) worst = std::max(worst, std::abs(freq[i] - w[i]));
  }
  std::vector<nn::Sample> obs;
  for (std::size_t k = 0; k < 3; ++k) obs.push_back({nn::one_hot(0, 1), nn::one_hot(k, 3)});
  const auto emp = markov::estimate_empirical(obs);
  Rng draws(7003);
  const auto pairs = markov::generate_pairs(emp, 100000, [&] { return draws.uniform01(); });
  std::vector<double> thirds(3, 0.0);
  for (const auto& p : pairs) thirds[nn::argmax_decode(p.target)] += 1.0 / static_cast<double>(pairs.size());
  double third_err = 0;
  for (double f : thirds) third_err = std::max(third_err, std::abs(f - 1.0 / 3));
  return {worst <= 1e-3 && third_err <= 0.01,
          "grid mass error " + fmt("%.2g", worst) + " (limit 1e-3); thirds " + fmt("%.4f", thirds[0]) + "/" +
              fmt("%.4f", thirds[1]) + "/" + fmt("%.4f", thirds[2]) + " (limit +-0.01)"};
}

// ------------------------------------------------------------------- walker

struct TrainedWalker {
  walker::WalkerModel model;
  nn::Network net;
};

const TrainedWalker& trained_walker(int dim) {
  static std::map<int, TrainedWalker> cache;
  if (auto it = cache.find(dim); it != cache.end()) return it->second;
  walker::WalkerTrainOptions opts;
  opts.seed = 100 + static_cast<std::uint64_t>(dim);
  opts.train.rng_seed = derive_seed(opts.seed, 2);
  auto model = walker::build_walker_chain(dim);
  auto result = walker::train_walker_net(model, opts);
  return cache.emplace(dim, TrainedWalker{std::move(model), std::move(result.net)}).first->second;
}

Verdict training_table() {
  const auto& w = trained_walker(2);
  const double rs[] = {0.5, 0.2, 0.8, 0.9, 0.1};
  const std::size_t expected[] = {2, 1, 3, 3, 1};
  std::string got;
  bool ok = true;
  for (int i = 0; i < 5; ++i) {
    const std::size_t s = markov::decode_at(w.net, nn::one_hot(0, 4), rs[i]);
    ok = ok && s == expected[i];
    got += (i ? "," : "") + std::to_string(s);
  }
  return {ok, "decoded outcomes " + got + " (expected 2,1,3,3,1)"};
}

Verdict walker_statistics(int dim) {
  const auto& w = trained_walker(dim);
  const std::size_t n = w.model.state_count();
  const auto walk = walker::run_net_walk(w.net, 0, 20000, 11);
  const std::vector<std::size_t> steps(walk.begin() + 1, walk.end());
  const auto freq = walker::visit_frequencies(steps, n);
  double freq_err = 0;
  for (std::size_t s = 0; s < n; ++s) freq_err = std::max(freq_err, std::abs(freq[s] - 1.0 / static_cast<double>(n)));
  const std::size_t repeats = walker::count_repeats(steps);
  const auto emp = walker::empirical_transition(steps, n);
  double col_l1 = 0;
  for (std::size_t j = 0; j < n; ++j) {
    col_l1 = std::max(col_l1, (emp.transition.col(static_cast<Eigen::Index>(j)) -
                               w.model.chain.transition().col(static_cast<Eigen::Index>(j)))
                                  .cwiseAbs()
                                  .sum());
  }
  return {freq_err <= 0.03 && repeats == 0 && col_l1 <= 0.05,
          "max |freq-1/" + std::to_string(n) + "| " + fmt("%.4f", freq_err) + " (limit 0.03), repeats " +
              std::to_string(repeats) + ", max column L1 " + fmt("%.4f", col_l1) + " (limit 0.05)"};
}

Verdict r_grid() {
  std::string detail;
  bool ok = true;
  for (int dim : {2, 3}) {
    const auto& w = trained_walker(dim);
    double worst = 1.0;
    for (std::size_t s = 0; s < w.model.state_count(); ++s) {
      int hits = 0;
      for (int k = 0; k < 100; ++k) {
        const double r = (k + 0.5) / 100;
        hits += markov::decode_at(w.net, nn::one_hot(s, w.model.state_count()), r) == markov::chain_step(w.model.chain, s, r);
      }
      worst = std::min(worst, hits / 100.0);
    }
    ok = ok && worst >= 0.95;
    detail += (dim == 2 ? "" : ", ") + std::to_string(dim) + "D worst state agreement " + fmt("%.2f", worst);
  }
  return {ok, detail + " (limit 0.95)"};
}

// --------------------------------------------------------------- multimodal

Verdict multimodal_separation() {
  const Vector x = nn::one_hot(0, 2);
  const Vector a = nn::one_hot(0, 2);
  const Vector b = nn::one_hot(1, 2);
  nn::Dataset classical;
  for (int k = 0; k < 200; ++k) classical.add({x, k % 2 ? b : a});
  const auto plain = nn::train(nn::init_network(nn::mlp_specs({2, 8, 2}), 11), classical,
                               {.learning_rate = 0.5, .epochs = 200, .batch_size = 8, .rng_seed = 12, .shuffle = true});
  const Vector mix = nn::forward(plain.net, x);
  const double linf = (mix - 0.5 * (a + b)).cwiseAbs().maxCoeff();

  markov::McTrainOptions mc;
  mc.hidden = {16};
  mc.pairs_per_input = 2000;
  mc.train = {.learning_rate = 0.5, .epochs = 400, .batch_size = 8, .rng_seed = 13, .shuffle = true};
  mc.seed = 14;
  const auto emp = markov::estimate_empirical({{x, a}, {x, b}});
  const auto result = markov::train_markov_network(emp, mc);
  Rng rng(15);
  int to_a = 0;
  int sharp = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vector y = nn::forward(result.net, markov::augment(x, rng.uniform01()));
    to_a += nn::argmax_decode(y) == 0;
    sharp += y.maxCoeff() >= 0.8;
  }
  const double fa = to_a / 1000.0;
  const double fs = sharp / 1000.0;
  return {linf <= 0.15 && std::abs(fa - 0.5) <= 0.05 && fs >= 0.9,
          "classical L-inf to mixture " + fmt("%.3f", linf) + " (limit 0.15); MC freq(A) " + fmt("%.3f", fa) +
              " (0.5+-0.05), max component >= 0.8 on " + fmt("%.3f", fs) + " (limit 0.9)"};
}

// --------------------------------------------------------------- tictactoe

struct TrainedTtt {
  ttt::TrainingGames sim;
  ttt::TttTrainOptions opts;
  nn::Network net;
  std::vector<double> mc_loss;
};

const TrainedTtt& trained_ttt() {
  static std::optional<TrainedTtt> cache;
  if (cache) return *cache;
  TrainedTtt t;
  t.sim = ttt::simulate_training_games(10000, 1);
  t.opts.seed = 21;
  t.opts.train.rng_seed = derive_seed(t.opts.seed, 2);
  auto result = ttt::train_tictactoe_net(t.sim.pairs, t.opts);
  t.net = std::move(result.net);
  t.mc_loss = std::move(result.loss_history);
  cache = std::move(t);
  return *cache;
}

const ttt::Board& center_opening() {
  static const ttt::Board b = ttt::Board::parse("0,0,0,0,-1,0,0,0,0");
  return b;
}

Verdict ttt_loss_rate() {
  const auto& t = trained_ttt();
  const auto net_eval = ttt::evaluate(t.net, 1000, 31);
  const auto base = ttt::evaluate_rules_baseline(1000, 31);
  return {t.sim.pairs.size() >= 20000 && net_eval.loss_rate() <= base.loss_rate() + 0.05,
          std::to_string(t.sim.pairs.size()) + " training pairs; net W/D/L " + std::to_string(net_eval.wins) + "/" +
              std::to_string(net_eval.draws) + "/" + std::to_string(net_eval.losses) + ", loss rate " +
              fmt("%.3f", net_eval.loss_rate()) + " vs baseline " + fmt("%.3f", base.loss_rate()) + " + 0.05"};
}

markov::DiscreteDistribution center_reaction() {
  return ttt::reaction_distribution(trained_ttt().net, center_opening(), ttt::kO, 1000, 32);
}

Verdict ttt_corners() {
  const auto d = center_reaction();
  const double corners = d[0] + d[2] + d[6] + d[8];
  const double edges = d[1] + d[3] + d[5] + d[7];
  return {corners > edges && d[4] == 0.0,
          "corner mass " + fmt("%.3f", corners) + ", edge mass " + fmt("%.3f", edges) + ", occupied " + fmt("%.3f", d[4])};
}

Verdict ttt_matches_training() {
  const auto net = center_reaction();
  const auto data = ttt::training_reaction_distribution(trained_ttt().sim.pairs, center_opening());
  double l1 = 0;
  std::string cells;
  for (std::size_t c = 0; c < 9; ++c) {
    l1 += std::abs(net[c] - data[c]);
    cells += (c ? " " : "") + fmt("%.2f", net[c]) + "/" + fmt("%.2f", data[c]);
  }
  return {l1 <= 0.15, "L1 " + fmt("%.3f", l1) + " (limit 0.15); net/data per cell: " + cells};
}

Verdict ttt_openings() {
  std::set<std::size_t> openings;
  for (std::uint64_t g = 0; g < 1000; ++g) {
    openings.insert(ttt::play_game(trained_ttt().net, ttt::Seat::kNetwork, 4000 + g).moves.front().cell);
  }
  std::string list;
  for (auto c : openings) list += (list.empty() ? "" : ",") + std::to_string(c);
  return {openings.size() >= 2, std::to_string(openings.size()) + " distinct opening cells {" + list + "}"};
}

Verdict ttt_convergence_diagnostic() {
  const auto& t = trained_ttt();
  const auto classical = ttt::train_classical_tictactoe_net(t.sim.pairs, t.opts);
  std::filesystem::create_directories(g_out_dir);
  const auto path = g_out_dir / "ttt_loss_curves.csv";
  std::ofstream f(path);
  f << "epoch,mc_loss,classical_loss\n";
  for (std::size_t e = 0; e < t.mc_loss.size(); ++e) {
    f << e + 1 << ',' << nn::format_real(t.mc_loss[e]) << ',' << nn::format_real(classical.loss_history[e]) << '\n';
  }
  return {static_cast<bool>(f), "non-gating; curves written to " + path.string() + " (final losses " +
                                    fmt("%.4g", t.mc_loss.back()) + " with r, " +
                                    fmt("%.4g", classical.loss_history.back()) + " without)"};
}

// --------------------------------------------------------------------- text

std::string read_corpus() {
  std::ifstream in(std::filesystem::path(MCNN_DATA_DIR) / "rhymes.txt", std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return text::to_latin1(s.str());
}

struct TrainedText {
  std::string corpus;
  markov::EmpiricalConditional emp;
  nn::Network net;
};

const TrainedText& trained_text() {
  static std::optional<TrainedText> cache;
  if (cache) return *cache;
  TrainedText t;
  t.corpus = read_corpus();
  t.emp = text::char_conditionals(t.corpus);
  text::CharTrainOptions opts;
  opts.seed = 41;
  opts.train.rng_seed = derive_seed(opts.seed, 2);
  t.net = text::train_char_net(t.corpus, opts).net;
  cache = std::move(t);
  return *cache;
}

Verdict text_unique() {
  const auto& t = trained_text();
  std::size_t unique = 0;
  std::size_t forced = 0;
  for (const auto& e : t.emp.entries()) {
    if (e.outcomes.size() != 1) continue;
    ++unique;
    const std::size_t want = nn::argmax_decode(e.outcomes.front());
    int hits = 0;
    for (int k = 0; k < 100; ++k) hits += markov::decode_at(t.net, e.input, (k + 0.5) / 100) == want;
    forced += hits >= 99;
  }
  return {forced == unique, std::to_string(forced) + " of " + std::to_string(unique) +
                                " unique-continuation contexts forced on >= 99% of the r grid (corpus " +
                                std::to_string(t.corpus.size()) + " chars)"};
}

Verdict text_ambiguous() {
  const auto& t = trained_text();
  std::vector<const markov::ConditionalEntry*> amb;
  auto total = [](const markov::ConditionalEntry* e) {
    std::size_t s = 0;
    for (auto c : e->counts) s += c;
    return s;
  };
  for (const auto& e : t.emp.entries()) {
    if (e.outcomes.size() > 1) amb.push_back(&e);
  }
  std::stable_sort(amb.begin(), amb.end(), [&](auto* a, auto* b) { return total(a) > total(b); });
  amb.resize(std::min<std::size_t>(5, amb.size()));
  Rng rng(42);
  bool ok = amb.size() == 5;
  std::string detail;
  for (const auto* e : amb) {
    std::vector<double> freq(text::kAlphabet, 0.0);
    for (int k = 0; k < 1000; ++k) freq[markov::decode_at(t.net, e->input, rng.uniform01())] += 1e-3;
    for (std::size_t k = 0; k < e->outcomes.size(); ++k) freq[nn::argmax_decode(e->outcomes[k])] -= e->distribution[k];
    double l1 = 0;
    for (double f : freq) l1 += std::abs(f);
    ok = ok && l1 <= 0.1;
    std::string ctx;
    for (Eigen::Index i = 0; i < e->input.size(); ++i) ctx.push_back(static_cast<char>(std::lround(e->input(i) * 255)));
    detail += (detail.empty() ? "" : ", ") + json(text::to_utf8(ctx)).dump() + " " + fmt("%.3f", l1);
  }
  return {ok, "L1 per context (limit 0.1): " + detail};
}

Verdict word_weights() {
  const std::vector<std::string> ctx{"one", "two", "three", "four", "five", "six"};
  const text::WordDictionary dict(ctx);
  const Vector v = text::word_context_vector(ctx, dict);
  std::multiset<double> got(v.begin(), v.end());
  const std::multiset<double> want{1.0, 1.0 / 2, 1.0 / 3, 1.0 / 4, 1.0 / 5, 1.0 / 6};
  std::string list;
  for (double w : v) list += (list.empty() ? "" : ",") + fmt("%.6g", w);
  return {got == want, "weights " + list};
}

// -------------------------------------------------------- serialization/service

Verdict serialization_and_service() {
  const auto& t = trained_ttt();
  const std::string text_form = nn::save_model(t.net);
  const nn::Network back = nn::load_model(text_form);
  bool exact = back.layers().size() == t.net.layers().size();
  for (std::size_t l = 0; exact && l < back.layers().size(); ++l) {
    exact = back.layers()[l].weights == t.net.layers()[l].weights && back.layers()[l].bias == t.net.layers()[l].bias &&
            back.layers()[l].activation == t.net.layers()[l].activation;
  }
  exact = exact && nn::save_model(back) == text_form;

  const service::InferenceService svc(back, std::nullopt);
  const char* move = R"({"board":[0,0,0,0,-1,0,0,0,0],"player":1,"seed":77})";
  const auto first = svc.tictactoe_move(move);
  bool idempotent = first.status == 200;
  for (int k = 0; k < 20; ++k) idempotent = idempotent && svc.tictactoe_move(move).body == first.body;

  const auto dist = svc.tictactoe_distribution(R"({"board":[1,0,-1,0,-1,0,0,0,0],"player":1,"trials":1000,"seed":5})");
  const std::vector<double> probs = json::parse(dist.body).at("probs");
  double sum = 0;
  for (double p : probs) sum += p;
  const bool zeros = probs[0] == 0 && probs[2] == 0 && probs[4] == 0;
  const bool sums = std::abs(sum - 1.0) <= 1e-9;
  return {exact && idempotent && zeros && sums,
          std::string("round trip ") + (exact ? "exact" : "NOT exact") + ", seeded move " +
              (idempotent ? "idempotent" : "NOT idempotent") + ", distribution sum " + fmt("%.12f", sum) +
              (zeros ? ", occupied cells zero" : ", occupied cells NONZERO")};
}

struct Criterion {
  std::string name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"gradient-check", gradient_check},
      {"sampler-exactness", sampler_exactness},
      {"walker-training-table", training_table},
      {"walker-statistics-2d", [] { return walker_statistics(2); }},
      {"walker-statistics-3d", [] { return walker_statistics(3); }},
      {"walker-r-grid", r_grid},
      {"multimodal-separation", multimodal_separation},
      {"ttt-loss-rate", ttt_loss_rate},
      {"ttt-corner-preference", ttt_corners},
      {"ttt-matches-training", ttt_matches_training},
      {"ttt-distinct-openings", ttt_openings},
      {"ttt-convergence-diagnostic", ttt_convergence_diagnostic},
      {"text-unique-continuation", text_unique},
      {"text-ambiguous-contexts", text_ambiguous},
      {"text-word-weights", word_weights},
      {"serialization-and-service", serialization_and_service},
  };
  std::vector<std::string> filters(argv + 1, argv + argc);
  int failed = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (!filters.empty() && std::none_of(filters.begin(), filters.end(),
                                         [&](const std::string& f) { return c.name.find(f) != std::string::npos; })) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << " [" << fmt("%.1f", secs) << "s] " << v.detail << std::endl;
    ++ran;
    failed += v.pass ? 0 : 1;
  }
  std::cout << ran - failed << "/" << ran << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
