#include "ddl/shallow.hpp"

#include "ddl/error.hpp"
#include "ddl/log.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace ddl::shallow {
namespace {

constexpr double kMaxGramCondition = 1e12;
constexpr double kRidgeScale = 1e-8;
constexpr double kPowerIterTol = 1e-9;
constexpr int kPowerIterMax = 1000;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Solves G Y = rhs for a symmetric positive semi-definite Gram matrix G.
Matrix solve_gram(Matrix gram, const Matrix& rhs) {
  const Index n = gram.rows();
  const double trace = gram.trace();
  if (!(trace > 0.0)) throw DegenerateDataError("least-squares system has an all-zero Gram matrix");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    gram.diagonal().array() += kRidgeScale * trace / static_cast<double>(n);
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  return gram.ldlt().solve(rhs);
}

bool all_zero(const Matrix& m) { return (m.array() == 0.0).all(); }

// Returned for all-zero data: the factorization 0 = D * 0 with D the
// leading canonical basis vectors.
LayerResult zero_data_result(const SampleMatrix& samples, const LayerTrainConfig& config) {
  LayerResult result;
  result.dictionary = Dictionary::Identity(samples.rows(), config.n_atoms);
  result.codes = Coefficients::Zero(config.n_atoms, samples.cols());
  if (config.trace_objective) result.trace.push_back(0.0);
  return result;
}

void check_atom_count(const SampleMatrix& samples, Index n_atoms) {
  if (n_atoms < 1 || n_atoms > std::min(samples.rows(), samples.cols())) {
    throw DimensionError("cannot take " + std::to_string(n_atoms) + " atoms from " +
                         shape(samples) + " data (need 1 <= atoms <= min(rows, cols))");
  }
}

}  // namespace

LayerTrainConfig LayerTrainConfig::dense_defaults(Index n_atoms) {
  LayerTrainConfig config;
  config.n_atoms = n_atoms;
  config.outer_iters = 10;
  return config;
}

LayerTrainConfig LayerTrainConfig::sparse_defaults(Index n_atoms) {
  LayerTrainConfig config;
  config.n_atoms = n_atoms;
  config.outer_iters = 15;
  return config;
}

void LayerTrainConfig::validate() const {
  if (n_atoms < 1) throw ConfigError("atom count must be at least 1");
  if (outer_iters < 1) throw ConfigError("outer iterations must be at least 1");
  if (ista_iters < 1) throw ConfigError("ISTA iterations must be at least 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite value >= 0");
  if (!(rel_tol >= 0.0)) throw ConfigError("relative tolerance must be >= 0");
  if (!(step_safety > 1.0) || !std::isfinite(step_safety)) {
    throw ConfigError("step safety factor must be > 1");
  }
}

double reconstruction_error(const Dictionary& dictionary, const Coefficients& codes,
                            const SampleMatrix& samples) {
  return (samples - dictionary * codes).squaredNorm();
}

double sparse_objective(const Dictionary& dictionary, const Coefficients& codes,
                        const SampleMatrix& samples, double lambda) {
  return reconstruction_error(dictionary, codes, samples) + lambda * codes.cwiseAbs().sum();
}

Dictionary qr_init(const SampleMatrix& samples, Index n_atoms) {
  check_atom_count(samples, n_atoms);

  // Column k of Q depends only on the first k+1 columns of X, so the
  // leading block gives the same atoms as factoring all of X.
  const Matrix leading = samples.leftCols(n_atoms);
  Eigen::HouseholderQR<Matrix> qr(leading);
  const Vector diag = qr.matrixQR().diagonal();

  const double scale = std::max(1.0, leading.colwise().norm().maxCoeff());
  for (Index k = 0; k < n_atoms; ++k) {
    if (!(std::abs(diag(k)) > 1e-12 * scale)) {
      throw DegenerateDataError("data is rank deficient within its first " +
                                std::to_string(n_atoms) + " samples (|R(" + std::to_string(k) +
                                "," + std::to_string(k) + ")| = " + std::to_string(std::abs(diag(k))) +
                                ")");
    }
  }

  Dictionary q = qr.householderQ() * Matrix::Identity(samples.rows(), n_atoms);
  for (Index k = 0; k < n_atoms; ++k) {
    if (diag(k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

Coefficients solve_coefficients_dense(const Dictionary& dictionary, const SampleMatrix& samples) {
  if (dictionary.rows() != samples.rows()) {
    throw DimensionError("dictionary " + shape(dictionary) + " does not match data " + shape(samples));
  }
  const Matrix gram = dictionary.transpose() * dictionary;
  const Matrix rhs = dictionary.transpose() * samples;
  return solve_gram(gram, rhs);
}

Dictionary update_dictionary(const Coefficients& codes, const SampleMatrix& samples,
                             const Dictionary& incumbent) {
  if (codes.cols() != samples.cols()) {
    throw DimensionError("coefficients " + shape(codes) + " do not match data " + shape(samples));
  }
  if (incumbent.rows() != samples.rows() || incumbent.cols() != codes.rows()) {
    throw DimensionError("incumbent dictionary " + shape(incumbent) + " does not match " +
                         shape(samples) + " data with " + std::to_string(codes.rows()) + " atoms");
  }

  std::vector<Index> active;
  for (Index k = 0; k < codes.rows(); ++k) {
    if (!(codes.row(k).array() == 0.0).all()) active.push_back(k);
  }

  Dictionary updated = incumbent;
  if (active.empty()) return updated;

  if (static_cast<Index>(active.size()) == codes.rows()) {
    // D^T = (Z Z^T)^{-1} Z X^T
    updated = solve_gram(codes * codes.transpose(), codes * samples.transpose()).transpose();
    return updated;
  }

  const Matrix live = codes(active, Eigen::all);
  const Matrix solved = solve_gram(live * live.transpose(), live * samples.transpose()).transpose();
  for (std::size_t a = 0; a < active.size(); ++a) updated.col(active[a]) = solved.col(static_cast<Index>(a));
  return updated;
}

Dictionary update_dictionary(const Coefficients& codes, const SampleMatrix& samples) {
  return update_dictionary(codes, samples, Dictionary::Zero(samples.rows(), codes.rows()));
}

Matrix soft_threshold(const Matrix& values, double threshold) {
  if (!(threshold >= 0.0)) throw ConfigError("soft threshold must be >= 0");
  return values.unaryExpr([threshold](double b) {
    const double shrunk = std::abs(b) - threshold;
    if (shrunk <= 0.0) return 0.0;
    return b < 0.0 ? -shrunk : shrunk;
  });
}

double estimate_step(const Dictionary& dictionary, double safety) {
  if (dictionary.size() == 0 || all_zero(dictionary)) {
    throw DegenerateDataError("cannot estimate the ISTA step of an all-zero dictionary");
  }
  const Matrix gram = dictionary.transpose() * dictionary;
  const Index n = gram.rows();

  // Fixed seed keeps the estimate reproducible.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = unit(rng);
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < kPowerIterMax; ++it) {
    Vector w = gram * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0)) break;
    v = w / norm;
    const bool converged = std::abs(next - estimate) <= kPowerIterTol * std::abs(next);
    estimate = next;
    if (converged) break;
  }
  if (!(estimate > 0.0)) {
    // Start vector fell in the null space; the Frobenius norm bounds sigma_max^2.
    estimate = gram.trace();
  }
  return safety * estimate;
}

Coefficients ista_sparse_code(const Dictionary& dictionary, const SampleMatrix& samples,
                              const IstaOptions& options) {
  if (dictionary.rows() != samples.rows()) {
    throw DimensionError("dictionary " + shape(dictionary) + " does not match data " + shape(samples));
  }
  if (!(options.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (options.iters < 0) throw ConfigError("ISTA iteration count must be >= 0");

  const Index n = dictionary.cols();
  Coefficients codes;
  if (options.warm_start != nullptr) {
    if (options.warm_start->rows() != n || options.warm_start->cols() != samples.cols()) {
      throw DimensionError("ISTA warm start " + shape(*options.warm_start) + " does not match " +
                           std::to_string(n) + " atoms and " + std::to_string(samples.cols()) +
                           " samples");
    }
    codes = *options.warm_start;
  } else {
    codes = Coefficients::Zero(n, samples.cols());
  }

  const double alpha = estimate_step(dictionary, options.step_safety);
  const Matrix gram = dictionary.transpose() * dictionary;
  const Matrix correlation = dictionary.transpose() * samples;
  const double threshold = options.lambda / (2.0 * alpha);

  for (int it = 0; it < options.iters; ++it) {
    // B = Z + D^T (X - DZ) / alpha
    Matrix step = codes + (correlation - gram * codes) / alpha;
    codes = soft_threshold(step, threshold);
    if (options.objective_trace != nullptr) {
      options.objective_trace->push_back(sparse_objective(dictionary, codes, samples, options.lambda));
    }
  }
  return codes;
}

Coefficients ista_sparse_code(const Dictionary& dictionary, const SampleMatrix& samples,
                              double lambda, int iters) {
  IstaOptions options;
  options.lambda = lambda;
  options.iters = iters;
  return ista_sparse_code(dictionary, samples, options);
}

Factorization normalize_columns(const Dictionary& dictionary, const Coefficients& codes) {
  if (dictionary.cols() != codes.rows()) {
    throw DimensionError("dictionary " + shape(dictionary) + " does not match coefficients " +
                         shape(codes));
  }
  Factorization out{dictionary, codes};
  for (Index k = 0; k < dictionary.cols(); ++k) {
    const double norm = dictionary.col(k).norm();
    if (norm > 0.0 && norm != 1.0) {
      out.dictionary.col(k) /= norm;
      out.codes.row(k) *= norm;
    }
  }
  return out;
}

LayerResult train_layer_dense(const SampleMatrix& samples, const LayerTrainConfig& config) {
  config.validate();
  check_atom_count(samples, config.n_atoms);
  if (all_zero(samples)) return zero_data_result(samples, config);

  LayerResult result;
  Dictionary dictionary = qr_init(samples, config.n_atoms);
  Coefficients codes = solve_coefficients_dense(dictionary, samples);
  double previous = reconstruction_error(dictionary, codes, samples);
  if (config.trace_objective) result.trace.push_back(previous);

  for (int round = 0; round < config.outer_iters; ++round) {
    dictionary = update_dictionary(codes, samples, dictionary);
    if (config.trace_objective) result.trace.push_back(reconstruction_error(dictionary, codes, samples));
    codes = solve_coefficients_dense(dictionary, samples);
    const double current = reconstruction_error(dictionary, codes, samples);
    if (config.trace_objective) result.trace.push_back(current);
    ++result.rounds;

    const bool stalled = previous - current < config.rel_tol * previous;
    previous = current;
    if (stalled) break;
  }

  result.dictionary = std::move(dictionary);
  result.codes = std::move(codes);
  result.objective = previous;
  return result;
}

LayerResult train_layer_sparse(const SampleMatrix& samples, const LayerTrainConfig& config) {
  config.validate();
  if (!(config.lambda > 0.0)) throw ConfigError("sparse layers need lambda > 0");
  check_atom_count(samples, config.n_atoms);
  if (all_zero(samples)) return zero_data_result(samples, config);

  LayerResult result;
  Dictionary dictionary = qr_init(samples, config.n_atoms);
  Coefficients codes = Coefficients::Zero(config.n_atoms, samples.cols());
  double previous = samples.squaredNorm();
  if (config.trace_objective) result.trace.push_back(previous);

  IstaOptions ista;
  ista.lambda = config.lambda;
  ista.iters = config.ista_iters;
  ista.step_safety = config.step_safety;

  for (int round = 0; round < config.outer_iters; ++round) {
    ista.warm_start = &codes;
    codes = ista_sparse_code(dictionary, samples, ista);
    if (config.trace_objective) {
      result.trace.push_back(sparse_objective(dictionary, codes, samples, config.lambda));
    }

    Index dead = 0;
    for (Index k = 0; k < codes.rows(); ++k) {
      if ((codes.row(k).array() == 0.0).all()) ++dead;
    }
    if (dead > 0) {
      log::warning(std::to_string(dead) + " dead atom(s) in round " + std::to_string(round + 1) +
                   "; carried over unchanged");
    }
    result.dead_atoms = dead;

    dictionary = update_dictionary(codes, samples, dictionary);
    if (config.trace_objective) {
      result.trace.push_back(sparse_objective(dictionary, codes, samples, config.lambda));
    }
    auto normalized = normalize_columns(dictionary, codes);
    dictionary = std::move(normalized.dictionary);
    codes = std::move(normalized.codes);

    const double current = sparse_objective(dictionary, codes, samples, config.lambda);
    if (config.trace_objective) result.trace.push_back(current);
    ++result.rounds;

    const bool stalled = previous - current < config.rel_tol * previous;
    previous = current;
    if (stalled) break;
  }

  result.dictionary = std::move(dictionary);
  result.codes = std::move(codes);
  result.objective = previous;
  return result;
}

}  // namespace ddl::shallow
