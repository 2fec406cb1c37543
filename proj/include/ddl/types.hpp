#pragma once

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace ddl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Samples are stored as columns: rows are feature dimensions.
using SampleMatrix = Matrix;
// Atoms are columns.
using Dictionary = Matrix;
// One column of coefficients per sample.
using Coefficients = Matrix;

using LabelVector = std::vector<int>;

enum class LayerKind { Dense, Sparse };

std::string_view to_string(LayerKind kind);
LayerKind layer_kind_from_string(std::string_view name);

}  // namespace ddl
