#pragma once

// Independent reference computations used to check the library. None of
// these call into ddl's solvers; they are slow, explicit and small-scale.

#include "ddl/types.hpp"

namespace ddl::oracle {

// Gauss-Jordan elimination with partial pivoting.
Matrix inverse(const Matrix& a);

// (D^T D)^{-1} D^T X with every product written out as explicit loops.
Matrix normal_equation_solve(const Matrix& dictionary, const Matrix& samples);

// argmin_z (z - b)^2 / 2 + t |z| by scanning a uniform grid of spacing `step`.
double prox_grid(double b, double t, double step = 1e-4);

// Minimiser of (x - d z)^2 + lambda |z| over scalar z.
double scalar_lasso(double d, double x, double lambda);

// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double largest_eigenvalue(const Matrix& symmetric);

// Moore-Penrose pseudo-inverse through the SVD.
Matrix pseudo_inverse(const Matrix& a);

// First n columns of Q from modified Gram-Schmidt (diag(R) > 0).
Matrix gram_schmidt_q(const Matrix& samples, Index n);

// Exhaustive nearest neighbour with exact ties broken by lowest index.
LabelVector nearest_neighbour(const Matrix& train, const LabelVector& labels, const Matrix& test);

}  // namespace ddl::oracle
