#include "ddl/deep.hpp"

#include "ddl/error.hpp"

#include <chrono>
#include <string>

namespace ddl::deep {
namespace {

std::string chain_string(const std::vector<Index>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) out += "-";
    out += std::to_string(sizes[i]);
  }
  return out;
}

}  // namespace

Index DeepDictModel::output_dim() const {
  return layers.empty() ? 0 : layers.back().dictionary.cols();
}

std::vector<Index> DeepDictModel::layer_sizes() const {
  std::vector<Index> sizes;
  for (const auto& layer : layers) sizes.push_back(layer.dictionary.cols());
  return sizes;
}

std::vector<LayerKind> DeepDictModel::layer_kinds() const {
  std::vector<LayerKind> kinds;
  for (const auto& layer : layers) kinds.push_back(layer.kind);
  return kinds;
}

void DeepDictModel::validate() const {
  if (layers.empty()) throw DimensionError("model has no layers");
  if (layers.front().dictionary.rows() != input_dim) {
    throw DimensionError("first dictionary has " + std::to_string(layers.front().dictionary.rows()) +
                         " rows but the model input dimension is " + std::to_string(input_dim));
  }
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (layers[i].dictionary.cols() != layers[i + 1].dictionary.rows()) {
      throw DimensionError("layer " + std::to_string(i + 1) + " has " +
                           std::to_string(layers[i].dictionary.cols()) + " atoms but layer " +
                           std::to_string(i + 2) + " expects " +
                           std::to_string(layers[i + 1].dictionary.rows()) + " inputs");
    }
  }
  for (const auto& layer : layers) {
    if (layer.dictionary.cols() < 1) throw DimensionError("layer with no atoms");
    if (!layer.dictionary.allFinite()) throw DimensionError("dictionary holds non-finite values");
  }
}

std::vector<LayerKind> DeepTrainConfig::effective_kinds() const {
  if (kinds) {
    if (kinds->size() != layer_sizes.size()) {
      throw ConfigError("layer kind list has " + std::to_string(kinds->size()) + " entries for " +
                        std::to_string(layer_sizes.size()) + " layers");
    }
    return *kinds;
  }
  std::vector<LayerKind> out(layer_sizes.size(), LayerKind::Dense);
  if (!out.empty()) out.back() = LayerKind::Sparse;
  return out;
}

shallow::LayerTrainConfig DeepTrainConfig::layer_config(std::size_t index) const {
  shallow::LayerTrainConfig config;
  if (index < per_layer.size() && per_layer[index]) {
    config = *per_layer[index];
  } else {
    config = effective_kinds().at(index) == LayerKind::Dense ? dense : sparse;
  }
  config.n_atoms = layer_sizes.at(index);
  return config;
}

void check_layer_chain(const SampleMatrix& samples, const std::vector<Index>& layer_sizes) {
  if (layer_sizes.empty()) throw ConfigError("at least one layer size is required");
  Index input = samples.rows();
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    const Index atoms = layer_sizes[i];
    if (atoms < 1) throw ConfigError("layer sizes must be positive");
    if (atoms > input || atoms > samples.cols()) {
      std::string message = "layer " + std::to_string(i + 1) + " of " + chain_string(layer_sizes) +
                            " asks for " + std::to_string(atoms) + " atoms but QR initialization "
                            "can provide at most min(input dim " + std::to_string(input) +
                            ", samples " + std::to_string(samples.cols()) + ")";
      if (i > 0 && atoms > input) {
        message += "; a layer cannot be wider than the one feeding it (a chain such as 300-15-50 "
                   "is likely meant as 300-150-50)";
      }
      throw DimensionError(message);
    }
    input = atoms;
  }
}

TrainResult train_deep(const SampleMatrix& samples, const DeepTrainConfig& config) {
  check_layer_chain(samples, config.layer_sizes);
  const auto kinds = config.effective_kinds();

  TrainResult result;
  result.model.input_dim = samples.rows();

  // Each layer reads only the previous layer's coefficients.
  SampleMatrix input = samples;
  for (std::size_t i = 0; i < config.layer_sizes.size(); ++i) {
    const auto layer_config = config.layer_config(i);
    const auto start = std::chrono::steady_clock::now();
    shallow::LayerResult trained = kinds[i] == LayerKind::Dense
                                       ? shallow::train_layer_dense(input, layer_config)
                                       : shallow::train_layer_sparse(input, layer_config);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    result.reports.push_back({layer_config.n_atoms, kinds[i], trained.objective, trained.rounds,
                              elapsed.count()});
    result.model.layers.push_back({std::move(trained.dictionary), kinds[i]});
    result.model.train_configs.push_back(layer_config);
    if (kinds[i] == LayerKind::Sparse) {
      result.model.lambda = layer_config.lambda;
      result.model.ista_iters = layer_config.ista_iters;
      result.model.step_safety = layer_config.step_safety;
    }
    input = std::move(trained.codes);
  }
  result.features = std::move(input);
  result.model.validate();
  return result;
}

Coefficients encode(const DeepDictModel& model, const SampleMatrix& samples) {
  if (samples.rows() != model.input_dim) {
    throw DimensionError("samples have " + std::to_string(samples.rows()) +
                         " dimensions but the model expects " + std::to_string(model.input_dim));
  }
  shallow::IstaOptions ista;
  ista.lambda = model.lambda;
  ista.iters = model.ista_iters;
  ista.step_safety = model.step_safety;

  Coefficients current = samples;
  for (const auto& layer : model.layers) {
    current = layer.kind == LayerKind::Dense
                  ? shallow::solve_coefficients_dense(layer.dictionary, current)
                  : shallow::ista_sparse_code(layer.dictionary, current, ista);
  }
  return current;
}

SampleMatrix reconstruct(const DeepDictModel& model, const Coefficients& codes) {
  if (model.layers.empty()) throw DimensionError("model has no layers");
  if (codes.rows() != model.output_dim()) {
    throw DimensionError("coefficients have " + std::to_string(codes.rows()) +
                         " rows but the last layer has " + std::to_string(model.output_dim()) +
                         " atoms");
  }
  SampleMatrix out = codes;
  for (auto it = model.layers.rbegin(); it != model.layers.rend(); ++it) {
    out = it->dictionary * out;
  }
  return out;
}

double collapse_check(const DeepDictModel& model, const SampleMatrix& samples) {
  if (samples.rows() != model.input_dim) {
    throw DimensionError("samples have " + std::to_string(samples.rows()) +
                         " dimensions but the model expects " + std::to_string(model.input_dim));
  }
  if (model.layers.size() < 2) return 0.0;

  const Coefficients layered = encode(model, samples);
  Dictionary product = model.layers.front().dictionary;
  for (std::size_t i = 1; i < model.layers.size(); ++i) product = product * model.layers[i].dictionary;
  const Coefficients collapsed = shallow::solve_coefficients_dense(product, samples);

  const double scale = layered.norm();
  if (!(scale > 0.0)) return collapsed.norm() > 0.0 ? 1.0 : 0.0;
  return (layered - collapsed).norm() / scale;
}

}  // namespace ddl::deep
