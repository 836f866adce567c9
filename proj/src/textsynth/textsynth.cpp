#include "mcnn/textsynth/textsynth.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mcnn/errors.hpp"
#include "mcnn/random.hpp"

namespace mcnn::text {

std::string to_latin1(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto lead = static_cast<unsigned char>(utf8[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (lead < 0x80) {
      len = 1;
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
      len = 4;
      cp = lead & 0x07;
    }
    bool ok = len > 0 && i + len <= utf8.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(utf8[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back('?');
      ++i;
      continue;
    }
    out.push_back(cp < kAlphabet ? static_cast<char>(cp) : '?');
    i += len;
  }
  return out;
}

std::string to_utf8(std::string_view latin1) {
  std::string out;
  out.reserve(latin1.size());
  for (char ch : latin1) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out.push_back(ch);
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

Vector encode_context(std::string_view context) {
  Vector v(static_cast<Eigen::Index>(context.size()));
  for (std::size_t i = 0; i < context.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = static_cast<double>(static_cast<unsigned char>(context[i])) / 255.0;
  }
  return v;
}

nn::Dataset build_char_dataset(std::string_view corpus, std::size_t context_len) {
  if (context_len == 0) throw InputError("context length must be positive");
  if (corpus.size() <= context_len) {
    throw InputError("corpus has " + std::to_string(corpus.size()) + " characters, need more than " +
                     std::to_string(context_len));
  }
  nn::Dataset data;
  for (std::size_t p = context_len; p < corpus.size(); ++p) {
    data.add({encode_context(corpus.substr(p - context_len, context_len)),
              nn::one_hot(static_cast<unsigned char>(corpus[p]), kAlphabet)});
  }
  return data;
}

markov::EmpiricalConditional char_conditionals(std::string_view corpus, std::size_t context_len) {
  return markov::estimate_empirical(build_char_dataset(corpus, context_len).samples());
}

markov::McTrainResult train_char_net(std::string_view corpus, const CharTrainOptions& options,
                                     const nn::EpochCallback& on_epoch) {
  markov::McTrainOptions mc;
  mc.hidden = options.hidden;
  mc.pairs_per_input = options.pairs_per_input;
  mc.multi_outcome_pairs_per_input = options.multi_outcome_pairs_per_input;
  mc.train = options.train;
  mc.seed = options.seed;
  return markov::train_markov_network(char_conditionals(corpus, options.context_len), mc, on_epoch);
}

char next_char(const nn::Network& net, std::string_view context, double r) {
  if (net.output_dim() != kAlphabet) throw ShapeError("character network must have 256 outputs");
  return static_cast<char>(markov::decode_at(net, encode_context(context), r));
}

std::string synthesize_chars(const nn::Network& net, std::string_view seed_text, std::size_t length,
                             std::uint64_t rng_seed, std::size_t context_len) {
  if (context_len == 0 || seed_text.size() < context_len) {
    throw InputError("seed text needs at least " + std::to_string(context_len) + " characters");
  }
  if (net.input_dim() != context_len + 1) throw ShapeError("network input does not match the context length");
  Rng rng(rng_seed);
  std::string out(seed_text);
  for (std::size_t n = 0; n < length; ++n) {
    const double r = rng.uniform01();
    out.push_back(next_char(net, std::string_view(out).substr(out.size() - context_len), r));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

WordDictionary::WordDictionary(const std::vector<std::string>& tokens) {
  for (const std::string& t : tokens) {
    if (t.empty()) throw InputError("dictionary words must be non-empty");
    if (index_.emplace(t, words_.size()).second) words_.push_back(t);
  }
}

std::size_t WordDictionary::index(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) throw InputError("unknown word '" + token + "'");
  return it->second;
}

Vector word_context_vector(std::span<const std::string> context, const WordDictionary& dict) {
  if (context.empty()) throw InputError("word context is empty");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dict.size()));
  const std::size_t n = context.size();
  for (std::size_t i = 1; i <= n; ++i) {
    const auto k = static_cast<Eigen::Index>(dict.index(context[i - 1]));
    v(k) = std::max(v(k), 1.0 / static_cast<double>(n + 1 - i));
  }
  return v;
}

nn::Dataset build_word_dataset(const std::vector<std::string>& tokens, const WordDictionary& dict,
                               std::size_t window) {
  if (window == 0) throw InputError("window must be positive");
  if (tokens.size() <= window) {
    throw InputError("corpus has " + std::to_string(tokens.size()) + " tokens, need more than " +
                     std::to_string(window));
  }
  nn::Dataset data;
  const std::span<const std::string> all(tokens);
  for (std::size_t p = window; p < tokens.size(); ++p) {
    data.add({word_context_vector(all.subspan(p - window, window), dict), nn::one_hot(dict.index(tokens[p]), dict.size())});
  }
  return data;
}

WordModel train_word_net(const std::vector<std::string>& tokens, const WordTrainOptions& options,
                         const nn::EpochCallback& on_epoch) {
  WordModel model;
  model.dict = WordDictionary(tokens);
  markov::McTrainOptions mc;
  mc.hidden = options.hidden;
  mc.pairs_per_input = options.pairs_per_input;
  mc.multi_outcome_pairs_per_input = options.multi_outcome_pairs_per_input;
  mc.train = options.train;
  mc.seed = options.seed;
  auto result = markov::train_markov_network(
      markov::estimate_empirical(build_word_dataset(tokens, model.dict, options.window).samples()), mc, on_epoch);
  model.net = std::move(result.net);
  model.loss_history = std::move(result.loss_history);
  return model;
}

std::vector<std::string> synthesize_words(const nn::Network& net, const WordDictionary& dict,
                                          const std::vector<std::string>& seed_tokens, std::size_t length,
                                          std::uint64_t rng_seed, std::size_t window) {
  if (window == 0 || seed_tokens.size() < window) {
    throw InputError("seed needs at least " + std::to_string(window) + " words");
  }
  if (net.input_dim() != dict.size() + 1 || net.output_dim() != dict.size()) {
    throw ShapeError("word network does not match the dictionary");
  }
  Rng rng(rng_seed);
  std::vector<std::string> out = seed_tokens;
  for (std::size_t n = 0; n < length; ++n) {
    const double r = rng.uniform01();
    const Vector x = word_context_vector(std::span<const std::string>(out).last(window), dict);
    out.push_back(dict.words()[markov::decode_at(net, x, r)]);
  }
  return out;
}

std::string save_dictionary(const WordDictionary& dict) {
  nlohmann::json j;
  j["format"] = kVocabFormat;
  j["words"] = dict.words();
  return j.dump() + "\n";
}

void save_dictionary_file(const WordDictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << save_dictionary(dict);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

WordDictionary load_dictionary(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("vocabulary is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || j["format"] != kVocabFormat) {
    throw ParseError("not a vocabulary file (expected format " + std::string(kVocabFormat) + ")");
  }
  if (!j.contains("words") || !j["words"].is_array()) throw ParseError("vocabulary has no word list");
  std::vector<std::string> words;
  for (const auto& w : j["words"]) {
    if (!w.is_string() || w.get<std::string>().empty()) throw ParseError("vocabulary words must be non-empty strings");
    words.push_back(w.get<std::string>());
  }
  WordDictionary dict(words);
  if (dict.size() != words.size()) throw ParseError("vocabulary contains duplicate words");
  return dict;
}

WordDictionary load_dictionary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_dictionary(buf.str());
}

}  // namespace mcnn::text
