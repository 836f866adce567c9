#include "mcnn/markov/chain.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcnn/errors.hpp"
#include "mcnn/nn/model_io.hpp"
#include "mcnn/random.hpp"

namespace mcnn::markov {

MarkovChain::MarkovChain(std::vector<std::string> labels, Matrix transition, double tolerance)
    : labels_(std::move(labels)), transition_(std::move(transition)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (n == 0) throw InputError("chain has no states");
  if (transition_.rows() != n || transition_.cols() != n) {
    throw ShapeError("transition matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = transition_(i, j);
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("transition entries must lie in [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw InputError("column " + std::to_string(j) + " of the transition matrix sums to " + std::to_string(sum));
    }
  }
}

DiscreteDistribution MarkovChain::column(std::size_t state) const {
  if (state >= state_count()) throw InputError("state index " + std::to_string(state) + " out of range");
  const auto col = transition_.col(static_cast<Eigen::Index>(state));
  std::vector<double> probs(col.data(), col.data() + col.size());
  double sum = 0.0;
  for (double p : probs) sum += p;
  // Renormalize columns accepted under a looser file tolerance.
  for (double& p : probs) p /= sum;
  return DiscreteDistribution(std::move(probs));
}

std::size_t chain_step(const MarkovChain& chain, std::size_t state, double r) {
  return sample_index(cumulative(chain.column(state)), r);
}

std::vector<std::size_t> simulate_chain(const MarkovChain& chain, std::size_t start, std::size_t n_steps,
                                        std::uint64_t seed) {
  if (start >= chain.state_count()) throw InputError("start state out of range");
  std::vector<CumulativeIntervals> columns;
  columns.reserve(chain.state_count());
  for (std::size_t j = 0; j < chain.state_count(); ++j) columns.push_back(cumulative(chain.column(j)));

  Rng rng(seed);
  std::vector<std::size_t> states;
  states.reserve(n_steps + 1);
  states.push_back(start);
  for (std::size_t t = 0; t < n_steps; ++t) states.push_back(sample_index(columns[states.back()], rng.uniform01()));
  return states;
}

std::string save_chain(const MarkovChain& chain) {
  std::ostringstream out;
  out << "{\"format\":\"" << kChainFormat << "\",\"states\":" << nlohmann::json(chain.labels()).dump()
      << ",\"transition\":[";
  const Matrix& t = chain.transition();
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    out << (i ? ",[" : "[");
    for (Eigen::Index j = 0; j < t.cols(); ++j) out << (j ? "," : "") << nn::format_real(t(i, j));
    out << ']';
  }
  out << "]}\n";
  return out.str();
}

MarkovChain load_chain(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("chain is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", std::string{}) != kChainFormat) {
    throw ParseError("chain document must carry format \"mcnn-chain-v1\"");
  }
  if (!doc.contains("states") || !doc["states"].is_array()) throw ParseError("chain lacks a states array");
  std::vector<std::string> labels;
  for (const auto& s : doc["states"]) {
    if (!s.is_string()) throw ParseError("state labels must be strings");
    labels.push_back(s.get<std::string>());
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto& rows = doc.contains("transition") ? doc["transition"] : nlohmann::json();
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
    throw ParseError("transition must have one row per state");
  }
  Matrix t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ParseError("transition must be square");
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw ParseError("transition entries must be numbers");
      t(i, j) = v.get<double>();
    }
  }
  try {
    return MarkovChain(std::move(labels), std::move(t), 1e-6);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid chain: ") + e.what());
  }
}

MarkovChain load_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open chain file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_chain(buf.str());
}

}  // namespace mcnn::markov
