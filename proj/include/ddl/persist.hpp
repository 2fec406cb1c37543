#pragma once

// Binary container shared by model and feature files:
//
//   bytes 0..3   magic "DDL1"
//   bytes 4..7   header length L, uint32 little-endian
//   next L bytes UTF-8 JSON header; "type" is "model" or "features"
//   payload      float64 little-endian, row-major matrices
//                (features may append int32 little-endian labels)
//
// The payload length must match the header exactly.

#include "ddl/deep.hpp"
#include "ddl/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace ddl::persist {

inline constexpr int kFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const deep::DeepDictModel& model);
deep::DeepDictModel decode_model(std::span<const std::uint8_t> bytes);

void save_model(const deep::DeepDictModel& model, const std::filesystem::path& path);
deep::DeepDictModel load_model(const std::filesystem::path& path);

struct FeatureSet {
  SampleMatrix features;
  std::optional<LabelVector> labels;
};

std::vector<std::uint8_t> encode_features(const SampleMatrix& features,
                                          const std::optional<LabelVector>& labels);
FeatureSet decode_features(std::span<const std::uint8_t> bytes);

void save_features(const SampleMatrix& features, const std::optional<LabelVector>& labels,
                   const std::filesystem::path& path);
FeatureSet load_features(const std::filesystem::path& path);

// Validated magic and parsed JSON header of either file type.
nlohmann::json read_header(const std::filesystem::path& path);

}  // namespace ddl::persist
