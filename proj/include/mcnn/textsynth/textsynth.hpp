#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcnn/markov/empirical.hpp"
#include "mcnn/markov/pipeline.hpp"
#include "mcnn/nn/network.hpp"

namespace mcnn::text {

inline constexpr std::size_t kContextLen = 7;
inline constexpr std::size_t kAlphabet = 256;
inline constexpr std::size_t kWordWindow = 6;

/// Decodes UTF-8 into one byte per character. Code points below 256 keep
/// their value, everything else (and malformed bytes) becomes '?'.
std::string to_latin1(std::string_view utf8);
std::string to_utf8(std::string_view latin1);

/// Character codes scaled by 1/255.
Vector encode_context(std::string_view context);

/// One pair per corpus position p >= context_len: the preceding characters
/// encoded, and a 256-way one-hot of the character at p. `corpus` is Latin-1.
nn::Dataset build_char_dataset(std::string_view corpus, std::size_t context_len = kContextLen);

struct CharTrainOptions {
  std::size_t context_len = kContextLen;
  std::vector<std::size_t> hidden{64};
  std::size_t pairs_per_input = 4;
  std::size_t multi_outcome_pairs_per_input = 100;
  // The loss averages over 256 outputs, which shrinks every gradient; hence
  // the large step with single-sample batches.
  nn::TrainConfig train{.learning_rate = 4, .epochs = 30, .batch_size = 1, .rng_seed = 0, .shuffle = true};
  std::uint64_t seed = 0;
};

/// Empirical next-character conditionals of the corpus.
markov::EmpiricalConditional char_conditionals(std::string_view corpus, std::size_t context_len = kContextLen);

markov::McTrainResult train_char_net(std::string_view corpus, const CharTrainOptions& options,
                                     const nn::EpochCallback& on_epoch = {});

/// Character the network emits after `context` for switch value r.
char next_char(const nn::Network& net, std::string_view context, double r);

/// Appends `length` characters to `seed_text`, each from the last
/// `context_len` characters and a fresh r. Throws InputError if the seed is
/// shorter than the context.
std::string synthesize_chars(const nn::Network& net, std::string_view seed_text, std::size_t length,
                             std::uint64_t rng_seed, std::size_t context_len = kContextLen);

/// Whitespace-separated tokens; punctuation stays attached.
std::vector<std::string> tokenize(std::string_view text);

class WordDictionary {
 public:
  WordDictionary() = default;
  /// Distinct tokens in first-appearance order.
  explicit WordDictionary(const std::vector<std::string>& tokens);

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  /// Throws InputError for unknown tokens.
  std::size_t index(const std::string& token) const;

  bool operator==(const WordDictionary& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Dictionary-sized vector with weight 1/(n+1-i) at the entry of the i-th
/// context token (i = 1 oldest, n nearest). A repeated token keeps the larger
/// weight.
Vector word_context_vector(std::span<const std::string> context, const WordDictionary& dict);

nn::Dataset build_word_dataset(const std::vector<std::string>& tokens, const WordDictionary& dict,
                               std::size_t window = kWordWindow);

struct WordTrainOptions {
  std::size_t window = kWordWindow;
  std::vector<std::size_t> hidden{64, 64, 64};
  std::size_t pairs_per_input = 8;
  std::size_t multi_outcome_pairs_per_input = 200;
  nn::TrainConfig train{.learning_rate = 0.5, .epochs = 60, .batch_size = 16, .rng_seed = 0, .shuffle = true};
  std::uint64_t seed = 0;
};

struct WordModel {
  nn::Network net;
  WordDictionary dict;
  std::vector<double> loss_history;
};

WordModel train_word_net(const std::vector<std::string>& tokens, const WordTrainOptions& options,
                         const nn::EpochCallback& on_epoch = {});

std::vector<std::string> synthesize_words(const nn::Network& net, const WordDictionary& dict,
                                          const std::vector<std::string>& seed_tokens, std::size_t length,
                                          std::uint64_t rng_seed, std::size_t window = kWordWindow);

inline constexpr std::string_view kVocabFormat = "mcnn-vocab-v1";

/// Vocabulary sidecar of a word model: {"format": ..., "words": [...]}.
std::string save_dictionary(const WordDictionary& dict);
void save_dictionary_file(const WordDictionary& dict, const std::filesystem::path& path);
/// Throws ParseError on malformed input or duplicate words.
WordDictionary load_dictionary(std::string_view text);
WordDictionary load_dictionary_file(const std::filesystem::path& path);

}  // namespace mcnn::text
