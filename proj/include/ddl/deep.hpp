#pragma once

// Greedy layer-wise deep dictionary learning: X ~ D1 D2 ... DL Z.
//
// Layer 1 factors the data, each following layer factors the coefficients
// of the layer before it. Every layer except the last is dense, the last
// one is sparse, unless an explicit kind list overrides that policy.

#include "ddl/shallow.hpp"
#include "ddl/types.hpp"

#include <optional>
#include <vector>

namespace ddl::deep {

struct Layer {
  Dictionary dictionary;
  LayerKind kind = LayerKind::Dense;
};

struct DeepDictModel {
  Index input_dim = 0;
  std::vector<Layer> layers;
  // Sparse penalty and ISTA settings reused when encoding new samples.
  double lambda = 0.1;
  int ista_iters = 50;
  double step_safety = 1.01;
  // Per-layer training settings, kept for provenance.
  std::vector<shallow::LayerTrainConfig> train_configs;

  Index output_dim() const;
  std::vector<Index> layer_sizes() const;
  std::vector<LayerKind> layer_kinds() const;

  // Throws DimensionError when the chain D1 D2 ... DL is not well formed.
  void validate() const;
};

struct DeepTrainConfig {
  std::vector<Index> layer_sizes;
  shallow::LayerTrainConfig dense = shallow::LayerTrainConfig::dense_defaults(1);
  shallow::LayerTrainConfig sparse = shallow::LayerTrainConfig::sparse_defaults(1);
  // Optional per-layer replacement for the shared defaults above.
  std::vector<std::optional<shallow::LayerTrainConfig>> per_layer;
  // Overrides the dense-then-sparse policy when set; must match layer count.
  std::optional<std::vector<LayerKind>> kinds;

  std::vector<LayerKind> effective_kinds() const;
  // Settings used to train layer `index`, with n_atoms filled in.
  shallow::LayerTrainConfig layer_config(std::size_t index) const;
};

struct LayerReport {
  Index atoms = 0;
  LayerKind kind = LayerKind::Dense;
  double objective = 0.0;
  int rounds = 0;
  double seconds = 0.0;
};

struct TrainResult {
  DeepDictModel model;
  // Coefficients of the final layer on the training data.
  Coefficients features;
  std::vector<LayerReport> reports;
};

// Checks the requested chain against the data shape before any training.
void check_layer_chain(const SampleMatrix& samples, const std::vector<Index>& layer_sizes);

TrainResult train_deep(const SampleMatrix& samples, const DeepTrainConfig& config);

// Pushes new samples through the frozen stack: least squares for dense
// layers, ISTA from zero for the sparse one.
Coefficients encode(const DeepDictModel& model, const SampleMatrix& samples);

// D1 D2 ... DL Z
SampleMatrix reconstruct(const DeepDictModel& model, const Coefficients& codes);

// ||Z_deep - Z_collapsed||_F / ||Z_deep||_F, where Z_deep is the layered
// encoding and Z_collapsed the least-squares coding against the product of
// all dictionaries. Zero for single-layer models.
double collapse_check(const DeepDictModel& model, const SampleMatrix& samples);

}  // namespace ddl::deep
