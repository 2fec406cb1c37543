#include "ddl/deep.hpp"
#include "ddl/error.hpp"
#include "ddl/log.hpp"
#include "ddl/persist.hpp"

#include "test_data.hpp"

#include <gtest/gtest.h>

#include <cstring>

namespace ddl {
namespace {

using testing::random_matrix;

class Quiet : public ::testing::Environment {
 public:
  void SetUp() override { log::set_warning_sink({}); }
};
const auto* const kQuiet = ::testing::AddGlobalTestEnvironment(new Quiet);

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

deep::DeepDictModel trained_model() {
  deep::DeepTrainConfig config;
  config.layer_sizes = {6, 3};
  return deep::train_deep(random_matrix(10, 50, 1, 0.0, 1.0), config).model;
}

// Rebuilds a container around a replacement JSON header.
std::vector<std::uint8_t> with_header(const std::vector<std::uint8_t>& bytes, const std::string& text) {
  std::uint32_t old_len = 0;
  for (int i = 3; i >= 0; --i) old_len = (old_len << 8) | bytes[4 + static_cast<std::size_t>(i)];
  std::vector<std::uint8_t> out(bytes.begin(), bytes.begin() + 4);
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(len >> shift));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), bytes.begin() + 8 + old_len, bytes.end());
  return out;
}

nlohmann::json header_of(const std::vector<std::uint8_t>& bytes) {
  std::uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | bytes[4 + static_cast<std::size_t>(i)];
  return nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
}

TEST(ModelFile, RoundTripIsBitExact) {
  const auto model = trained_model();
  const auto dir = testing::scratch_dir("model_roundtrip");
  persist::save_model(model, dir / "m.ddl");
  const auto loaded = persist::load_model(dir / "m.ddl");
  ASSERT_EQ(loaded.layers.size(), model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    EXPECT_TRUE(bitwise_equal(loaded.layers[i].dictionary, model.layers[i].dictionary));
    EXPECT_EQ(loaded.layers[i].kind, model.layers[i].kind);
  }
  EXPECT_EQ(loaded.input_dim, model.input_dim);
  EXPECT_EQ(loaded.lambda, model.lambda);
  EXPECT_EQ(loaded.ista_iters, model.ista_iters);
  EXPECT_EQ(loaded.step_safety, model.step_safety);
  ASSERT_EQ(loaded.train_configs.size(), model.train_configs.size());
  EXPECT_EQ(loaded.train_configs[1].lambda, model.train_configs[1].lambda);
  EXPECT_EQ(persist::encode_model(loaded), persist::encode_model(model));
}

TEST(ModelFile, LoadedModelEncodesIdentically) {
  const auto model = trained_model();
  const auto loaded = persist::decode_model(persist::encode_model(model));
  const Matrix probe = random_matrix(10, 25, 2, 0.0, 1.0);
  EXPECT_TRUE(bitwise_equal(deep::encode(model, probe), deep::encode(loaded, probe)));
}

TEST(ModelFile, HeaderDescribesTheModel) {
  const auto model = trained_model();
  const auto dir = testing::scratch_dir("model_header");
  persist::save_model(model, dir / "m.ddl");
  const auto header = persist::read_header(dir / "m.ddl");
  EXPECT_EQ(header.at("type"), "model");
  EXPECT_EQ(header.at("format_version"), 1);
  EXPECT_EQ(header.at("input_dim"), 10);
  EXPECT_EQ(header.at("layer_sizes"), (std::vector<int>{6, 3}));
  EXPECT_EQ(header.at("layer_kinds"), (std::vector<std::string>{"dense", "sparse"}));
}

TEST(ModelFile, PayloadIsLittleEndianRowMajor) {
  deep::DeepDictModel model;
  model.input_dim = 2;
  Matrix d(2, 2);
  d << 1.0, 2.0,
       3.0, 4.0;
  model.layers = {{d, LayerKind::Sparse}};
  const auto bytes = persist::encode_model(model);
  ASSERT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DDL1");
  const std::size_t payload = bytes.size() - 32;
  const double expected[] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | bytes[payload + static_cast<std::size_t>(8 * i + b)];
    double v = 0.0;
    std::memcpy(&v, &bits, 8);
    EXPECT_EQ(v, expected[i]);
  }
}

TEST(ModelFile, TruncationIsALengthError) {
  auto bytes = persist::encode_model(trained_model());
  bytes.resize(bytes.size() - 8);
  EXPECT_THROW(persist::decode_model(bytes), LengthError);
  bytes.push_back(0);
  EXPECT_THROW(persist::decode_model(bytes), LengthError);
  EXPECT_THROW(persist::decode_model(std::vector<std::uint8_t>{'D', 'D', 'L'}), LengthError);
  auto extra = persist::encode_model(trained_model());
  extra.insert(extra.end(), 8, 0);
  EXPECT_THROW(persist::decode_model(extra), LengthError);
}

TEST(ModelFile, BadMagicAndVersion) {
  auto bytes = persist::encode_model(trained_model());
  bytes[3] = '2';
  EXPECT_THROW(persist::decode_model(bytes), VersionError);
  bytes[0] = 'X';
  bytes[3] = '1';
  EXPECT_THROW(persist::decode_model(bytes), FormatError);

  bytes = persist::encode_model(trained_model());
  auto header = header_of(bytes);
  header["format_version"] = 2;
  EXPECT_THROW(persist::decode_model(with_header(bytes, header.dump())), VersionError);
}

TEST(ModelFile, InconsistentHeadersRejected) {
  const auto bytes = persist::encode_model(trained_model());
  auto header = header_of(bytes);

  auto kinds = header;
  kinds["layer_kinds"] = {"dense"};
  EXPECT_THROW(persist::decode_model(with_header(bytes, kinds.dump())), FormatError);

  auto empty = header;
  empty["layer_sizes"] = nlohmann::json::array();
  empty["layer_kinds"] = nlohmann::json::array();
  empty["layer_shapes"] = nlohmann::json::array();
  EXPECT_THROW(persist::decode_model(with_header(bytes, empty.dump())), FormatError);

  auto chain = header;
  chain["layer_shapes"][1][0] = 5;
  EXPECT_THROW(persist::decode_model(with_header(bytes, chain.dump())), DimensionError);

  auto bad_kind = header;
  bad_kind["layer_kinds"][0] = "convolutional";
  EXPECT_THROW(persist::decode_model(with_header(bytes, bad_kind.dump())), FormatError);

  auto missing = header;
  missing.erase("lambda");
  EXPECT_THROW(persist::decode_model(with_header(bytes, missing.dump())), FormatError);

  EXPECT_THROW(persist::decode_model(with_header(bytes, "{\"type\": \"model\",")), FormatError);
  EXPECT_THROW(persist::decode_model(with_header(bytes, "[1, 2]")), FormatError);
}

TEST(ModelFile, MissingFileIsAnIoError) {
  EXPECT_THROW(persist::load_model(testing::scratch_dir("missing") / "nope.ddl"), IoError);
}

TEST(FeatureFile, RoundTripIsBitExact) {
  const Matrix features = random_matrix(50, 10000, 3);
  LabelVector labels(10000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto dir = testing::scratch_dir("features");
  persist::save_features(features, labels, dir / "f.ddf");
  const auto loaded = persist::load_features(dir / "f.ddf");
  EXPECT_TRUE(bitwise_equal(loaded.features, features));
  ASSERT_TRUE(loaded.labels.has_value());
  EXPECT_EQ(*loaded.labels, labels);

  persist::save_features(features.leftCols(7), std::nullopt, dir / "plain.ddf");
  const auto plain = persist::load_features(dir / "plain.ddf");
  EXPECT_TRUE(bitwise_equal(plain.features, features.leftCols(7)));
  EXPECT_FALSE(plain.labels.has_value());
}

TEST(FeatureFile, NegativeLabelsSurvive) {
  const auto set = persist::decode_features(persist::encode_features(Matrix::Ones(1, 2), LabelVector{-1, 7}));
  EXPECT_EQ(*set.labels, (LabelVector{-1, 7}));
}

TEST(FeatureFile, TypeConfusionRejected) {
  const auto features = persist::encode_features(Matrix::Ones(3, 4), std::nullopt);
  EXPECT_THROW(persist::decode_model(features), FormatError);
  EXPECT_THROW(persist::decode_features(persist::encode_model(trained_model())), FormatError);
}

TEST(FeatureFile, LabelBlockMismatchRejected) {
  const auto bytes = persist::encode_features(Matrix::Ones(3, 4), LabelVector{1, 2, 3, 4});
  auto header = header_of(bytes);
  header["label_count"] = 3;
  EXPECT_THROW(persist::decode_features(with_header(bytes, header.dump())), FormatError);
  header = header_of(bytes);
  header["has_labels"] = false;
  EXPECT_THROW(persist::decode_features(with_header(bytes, header.dump())), FormatError);
  EXPECT_THROW(persist::encode_features(Matrix::Ones(3, 4), LabelVector{1}), DimensionError);

  auto short_labels = bytes;
  short_labels.resize(short_labels.size() - 4);
  EXPECT_THROW(persist::decode_features(short_labels), LengthError);
}

}  // namespace
}  // namespace ddl
