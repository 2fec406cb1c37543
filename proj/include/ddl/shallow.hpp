#pragma once

// Single-layer dictionary learning: X ~ D Z with atoms as columns of D.
//
// Dense layers alternate two exact least-squares solves (method of optimal
// directions). Sparse layers replace the coefficient solve with ISTA on
// ||X - DZ||_F^2 + lambda ||Z||_1 and renormalize atoms after each
// dictionary update.

#include "ddl/types.hpp"

#include <optional>
#include <vector>

namespace ddl::shallow {

struct LayerTrainConfig {
  Index n_atoms = 1;
  int outer_iters = 10;
  int ista_iters = 50;
  double lambda = 0.1;
  double rel_tol = 1e-4;
  // Multiplier on sigma_max(D)^2 when choosing the ISTA step.
  double step_safety = 1.01;
  // Record the exact objective after every half-step in LayerResult::trace.
  bool trace_objective = false;

  static LayerTrainConfig dense_defaults(Index n_atoms);
  static LayerTrainConfig sparse_defaults(Index n_atoms);

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

struct Factorization {
  Dictionary dictionary;
  Coefficients codes;
};

struct LayerResult {
  Dictionary dictionary;
  Coefficients codes;
  // Final objective: ||X - DZ||_F^2, plus lambda ||Z||_1 for sparse layers.
  double objective = 0.0;
  int rounds = 0;
  Index dead_atoms = 0;
  // Objective after each half-step, starting from the initial coding step.
  // Only filled when LayerTrainConfig::trace_objective is set.
  std::vector<double> trace;
};

// ||X - DZ||_F^2
double reconstruction_error(const Dictionary& dictionary, const Coefficients& codes,
                            const SampleMatrix& samples);

// ||X - DZ||_F^2 + lambda ||Z||_1
double sparse_objective(const Dictionary& dictionary, const Coefficients& codes,
                        const SampleMatrix& samples, double lambda);

// First n_atoms columns of Q from the thin QR of the samples, with signs
// chosen so that diag(R) >= 0.
Dictionary qr_init(const SampleMatrix& samples, Index n_atoms);

// argmin_Z ||X - DZ||_F^2 through the normal equations. A ridge of
// 1e-8 * trace(G) / n is added to G = D^T D when its condition number
// exceeds 1e12.
Coefficients solve_coefficients_dense(const Dictionary& dictionary, const SampleMatrix& samples);

// argmin_D ||X - DZ||_F^2. Atoms whose coefficient row is identically zero
// are copied from `incumbent` unchanged.
Dictionary update_dictionary(const Coefficients& codes, const SampleMatrix& samples,
                             const Dictionary& incumbent);
// Same, with zero columns standing in for dead atoms.
Dictionary update_dictionary(const Coefficients& codes, const SampleMatrix& samples);

// Element-wise sign(b) * max(0, |b| - threshold).
Matrix soft_threshold(const Matrix& values, double threshold);

// safety * sigma_max(D)^2 by power iteration on D^T D.
double estimate_step(const Dictionary& dictionary, double safety);

struct IstaOptions {
  double lambda = 0.1;
  int iters = 50;
  double step_safety = 1.01;
  // Starting point; zero when absent.
  const Coefficients* warm_start = nullptr;
  // When non-null, receives the composite objective after every sweep.
  std::vector<double>* objective_trace = nullptr;
};

Coefficients ista_sparse_code(const Dictionary& dictionary, const SampleMatrix& samples,
                              const IstaOptions& options);
Coefficients ista_sparse_code(const Dictionary& dictionary, const SampleMatrix& samples,
                              double lambda, int iters);

// Scales every nonzero atom to unit norm and the matching coefficient row by
// the removed norm, so DZ is unchanged. Zero atoms are left alone.
Factorization normalize_columns(const Dictionary& dictionary, const Coefficients& codes);

LayerResult train_layer_dense(const SampleMatrix& samples, const LayerTrainConfig& config);
LayerResult train_layer_sparse(const SampleMatrix& samples, const LayerTrainConfig& config);

}  // namespace ddl::shallow
