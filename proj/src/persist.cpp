#include "ddl/persist.hpp"

#include "ddl/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

namespace ddl::persist {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "DDL1";
constexpr std::size_t kPreamble = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 0; shift < 64; shift += 8) out.push_back(static_cast<std::uint8_t>(bits >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

void put_matrix(std::vector<std::uint8_t>& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

Matrix get_matrix(const std::uint8_t*& p, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = get_f64(p);
      p += 8;
    }
  }
  return m;
}

std::vector<std::uint8_t> start_container(const json& header) {
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

struct Container {
  json header;
  std::span<const std::uint8_t> payload;
};

Container open_container(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPreamble) throw LengthError("file too short for a DDL header");
  const std::string_view magic(reinterpret_cast<const char*>(bytes.data()), 4);
  if (magic != kMagic) {
    if (magic.substr(0, 3) == "DDL") {
      throw VersionError("unsupported container version '" + std::string(magic) + "', expected DDL1");
    }
    throw FormatError("not a DDL file (bad magic)");
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 4);
  if (bytes.size() - kPreamble < header_len) throw LengthError("header extends past end of file");

  Container c;
  const auto* text = reinterpret_cast<const char*>(bytes.data() + kPreamble);
  try {
    c.header = json::parse(text, text + header_len);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed JSON header: ") + e.what());
  }
  if (!c.header.is_object()) throw FormatError("header is not a JSON object");
  if (c.header.value("format_version", -1) != kFormatVersion) {
    throw VersionError("unsupported format_version in header");
  }
  c.payload = bytes.subspan(kPreamble + header_len);
  return c;
}

void expect_type(const json& header, std::string_view type) {
  const std::string actual = header.value("type", std::string());
  if (actual != type) {
    throw FormatError("file holds '" + actual + "' data, expected '" + std::string(type) + "'");
  }
}

void expect_payload(std::span<const std::uint8_t> payload, std::uint64_t expected) {
  if (payload.size() != expected) {
    throw LengthError("payload is " + std::to_string(payload.size()) + " bytes, header declares " +
                      std::to_string(expected));
  }
}

json config_to_json(const shallow::LayerTrainConfig& c) {
  return {{"n_atoms", c.n_atoms},         {"outer_iters", c.outer_iters}, {"ista_iters", c.ista_iters},
          {"lambda", c.lambda},           {"rel_tol", c.rel_tol},         {"step_safety", c.step_safety}};
}

shallow::LayerTrainConfig config_from_json(const json& j) {
  shallow::LayerTrainConfig c;
  c.n_atoms = j.at("n_atoms").get<Index>();
  c.outer_iters = j.at("outer_iters").get<int>();
  c.ista_iters = j.at("ista_iters").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.rel_tol = j.at("rel_tol").get<double>();
  c.step_safety = j.at("step_safety").get<double>();
  return c;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_model(const deep::DeepDictModel& model) {
  model.validate();
  json shapes = json::array();
  json kinds = json::array();
  for (const auto& layer : model.layers) {
    shapes.push_back({layer.dictionary.rows(), layer.dictionary.cols()});
    kinds.push_back(std::string(to_string(layer.kind)));
  }
  json configs = json::array();
  for (const auto& c : model.train_configs) configs.push_back(config_to_json(c));

  const json header = {{"type", "model"},
                       {"format_version", kFormatVersion},
                       {"input_dim", model.input_dim},
                       {"layer_sizes", model.layer_sizes()},
                       {"layer_shapes", shapes},
                       {"layer_kinds", kinds},
                       {"lambda", model.lambda},
                       {"ista_iters", model.ista_iters},
                       {"step_safety", model.step_safety},
                       {"train_config", configs}};
  auto out = start_container(header);
  for (const auto& layer : model.layers) put_matrix(out, layer.dictionary);
  return out;
}

deep::DeepDictModel decode_model(std::span<const std::uint8_t> bytes) {
  const Container c = open_container(bytes);
  expect_type(c.header, "model");

  deep::DeepDictModel model;
  std::vector<Index> sizes;
  std::vector<std::string> kinds;
  json shapes;
  try {
    model.input_dim = c.header.at("input_dim").get<Index>();
    sizes = c.header.at("layer_sizes").get<std::vector<Index>>();
    kinds = c.header.at("layer_kinds").get<std::vector<std::string>>();
    shapes = c.header.at("layer_shapes");
    model.lambda = c.header.at("lambda").get<double>();
    model.ista_iters = c.header.at("ista_iters").get<int>();
    model.step_safety = c.header.at("step_safety").get<double>();
    for (const auto& j : c.header.value("train_config", json::array())) {
      model.train_configs.push_back(config_from_json(j));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("incomplete model header: ") + e.what());
  }

  if (sizes.empty()) throw FormatError("model header declares zero layers");
  if (kinds.size() != sizes.size()) {
    throw FormatError("model header lists " + std::to_string(kinds.size()) + " layer kinds for " +
                      std::to_string(sizes.size()) + " layers");
  }
  if (!shapes.is_array() || shapes.size() != sizes.size()) {
    throw FormatError("model header layer shapes do not match the layer count");
  }

  std::uint64_t expected = 0;
  std::vector<std::pair<Index, Index>> dims;
  Index rows_expected = model.input_dim;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto rows = shapes[i].at(0).get<Index>();
    const auto cols = shapes[i].at(1).get<Index>();
    if (rows < 1 || cols < 1 || cols != sizes[i] || rows != rows_expected) {
      throw DimensionError("model header layer " + std::to_string(i + 1) + " shape " +
                           std::to_string(rows) + "x" + std::to_string(cols) +
                           " breaks the dictionary chain");
    }
    dims.emplace_back(rows, cols);
    expected += static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8;
    rows_expected = cols;
  }
  expect_payload(c.payload, expected);

  const std::uint8_t* p = c.payload.data();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    model.layers.push_back({get_matrix(p, dims[i].first, dims[i].second), layer_kind_from_string(kinds[i])});
  }
  model.validate();
  return model;
}

void save_model(const deep::DeepDictModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}

deep::DeepDictModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file(path));
}

std::vector<std::uint8_t> encode_features(const SampleMatrix& features,
                                          const std::optional<LabelVector>& labels) {
  if (labels && static_cast<Index>(labels->size()) != features.cols()) {
    throw DimensionError("feature matrix has " + std::to_string(features.cols()) + " columns but " +
                         std::to_string(labels->size()) + " labels");
  }
  const json header = {{"type", "features"},
                       {"format_version", kFormatVersion},
                       {"rows", features.rows()},
                       {"cols", features.cols()},
                       {"has_labels", labels.has_value()},
                       {"label_count", labels ? labels->size() : 0}};
  auto out = start_container(header);
  put_matrix(out, features);
  if (labels) {
    for (const int label : *labels) put_u32(out, static_cast<std::uint32_t>(label));
  }
  return out;
}

FeatureSet decode_features(std::span<const std::uint8_t> bytes) {
  const Container c = open_container(bytes);
  expect_type(c.header, "features");

  Index rows = 0;
  Index cols = 0;
  bool has_labels = false;
  std::uint64_t label_count = 0;
  try {
    rows = c.header.at("rows").get<Index>();
    cols = c.header.at("cols").get<Index>();
    has_labels = c.header.at("has_labels").get<bool>();
    label_count = c.header.at("label_count").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("incomplete features header: ") + e.what());
  }
  if (rows < 0 || cols < 0) throw FormatError("negative feature dimensions");
  if (has_labels && label_count != static_cast<std::uint64_t>(cols)) {
    throw FormatError("label block holds " + std::to_string(label_count) + " labels for " +
                      std::to_string(cols) + " samples");
  }
  if (!has_labels && label_count != 0) throw FormatError("label count given without a label block");

  const auto matrix_bytes = static_cast<std::uint64_t>(rows) * static_cast<std::uint64_t>(cols) * 8;
  expect_payload(c.payload, matrix_bytes + label_count * 4);

  const std::uint8_t* p = c.payload.data();
  FeatureSet set;
  set.features = get_matrix(p, rows, cols);
  if (has_labels) {
    LabelVector labels(label_count);
    for (auto& label : labels) {
      label = static_cast<int>(get_u32(p));
      p += 4;
    }
    set.labels = std::move(labels);
  }
  return set;
}

void save_features(const SampleMatrix& features, const std::optional<LabelVector>& labels,
                   const std::filesystem::path& path) {
  write_file(path, encode_features(features, labels));
}

FeatureSet load_features(const std::filesystem::path& path) {
  return decode_features(read_file(path));
}

nlohmann::json read_header(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return open_container(bytes).header;
}

}  // namespace ddl::persist
