#include "mcnn/nn/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "mcnn/errors.hpp"

namespace mcnn::nn {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void save_model(const Network& net, std::ostream& out) {
  out << "{\"format\":\"" << kModelFormat << "\",\"layers\":[";
  const auto& layers = net.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (k > 0) out << ',';
    out << "\n{\"in\":" << l.in_dim() << ",\"out\":" << l.out_dim() << ",\"activation\":\""
        << activation_name(l.activation) << "\",\"weights\":[";
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      if (i > 0) out << ',';
      out << '[';
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) {
        if (j > 0) out << ',';
        out << format_real(l.weights(i, j));
      }
      out << ']';
    }
    out << "],\"bias\":[";
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
      if (i > 0) out << ',';
      out << format_real(l.bias(i));
    }
    out << "]}";
  }
  out << "\n]}\n";
}

std::string save_model(const Network& net) {
  std::ostringstream out;
  save_model(net, out);
  return out.str();
}

void save_model_file(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_model(net, out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

double real_at(const nlohmann::json& v, const char* what) {
  if (!v.is_number()) throw ParseError(std::string(what) + " entry is not a number");
  return v.get<double>();
}

std::size_t dim_at(const nlohmann::json& layer, const char* key) {
  if (!layer.contains(key) || !layer[key].is_number_unsigned() || layer[key].get<std::size_t>() == 0) {
    throw ParseError(std::string("layer field '") + key + "' must be a positive integer");
  }
  return layer[key].get<std::size_t>();
}

}  // namespace

Network load_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format") || !doc["format"].is_string()) {
    throw ParseError("model document lacks a format tag");
  }
  if (doc["format"].get<std::string>() != kModelFormat) {
    throw ParseError("unsupported model format '" + doc["format"].get<std::string>() + "'");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty()) {
    throw ParseError("model document has no layers");
  }

  std::vector<Layer> layers;
  for (const auto& jl : doc["layers"]) {
    if (!jl.is_object()) throw ParseError("layer entry is not an object");
    const std::size_t in = dim_at(jl, "in");
    const std::size_t out = dim_at(jl, "out");
    if (!jl.contains("activation") || !jl["activation"].is_string()) throw ParseError("layer lacks an activation");
    Layer l;
    l.activation = activation_from_name(jl["activation"].get<std::string>());

    if (!jl.contains("weights") || !jl["weights"].is_array() || jl["weights"].size() != out) {
      throw ParseError("weights must have " + std::to_string(out) + " rows");
    }
    l.weights.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (std::size_t i = 0; i < out; ++i) {
      const auto& row = jl["weights"][i];
      if (!row.is_array() || row.size() != in) {
        throw ParseError("weight row " + std::to_string(i) + " must have " + std::to_string(in) + " entries");
      }
      for (std::size_t j = 0; j < in; ++j) {
        l.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = real_at(row[j], "weight");
      }
    }
    if (!jl.contains("bias") || !jl["bias"].is_array() || jl["bias"].size() != out) {
      throw ParseError("bias must have " + std::to_string(out) + " entries");
    }
    l.bias.resize(static_cast<Eigen::Index>(out));
    for (std::size_t i = 0; i < out; ++i) l.bias(static_cast<Eigen::Index>(i)) = real_at(jl["bias"][i], "bias");
    layers.push_back(std::move(l));
  }
  try {
    return Network(std::move(layers));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("inconsistent model: ") + e.what());
  }
}

Network load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

}  // namespace mcnn::nn
