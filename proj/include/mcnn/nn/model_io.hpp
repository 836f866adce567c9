#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "mcnn/nn/network.hpp"

namespace mcnn::nn {

inline constexpr std::string_view kModelFormat = "mcnn-model-v1";

// Model document:
//   {"format":"mcnn-model-v1","layers":[{"in":N,"out":M,
//     "activation":"sigmoid"|"linear","weights":[[...N reals] x M],
//     "bias":[...M reals]}, ...]}
// Reals are written with 17 significant digits, so load(save(net)) == net.
std::string save_model(const Network& net);
void save_model(const Network& net, std::ostream& out);
void save_model_file(const Network& net, const std::filesystem::path& path);

/// Throws ParseError on malformed JSON, an unknown format tag or
/// inconsistent shapes.
Network load_model(std::string_view text);
Network load_model_file(const std::filesystem::path& path);

/// %.17g rendering shared by every text artifact that stores reals.
std::string format_real(double v);

}  // namespace mcnn::nn
