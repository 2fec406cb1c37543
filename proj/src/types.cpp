#include "ddl/types.hpp"

#include "ddl/error.hpp"

#include <string>

namespace ddl {

std::string_view to_string(LayerKind kind) {
  return kind == LayerKind::Dense ? "dense" : "sparse";
}

LayerKind layer_kind_from_string(std::string_view name) {
  if (name == "dense") return LayerKind::Dense;
  if (name == "sparse") return LayerKind::Sparse;
  throw FormatError("unknown layer kind '" + std::string(name) + "'");
}

}  // namespace ddl
