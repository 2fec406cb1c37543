#pragma once

#include "ddl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>

namespace ddl::dataio {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// IDX image file -> (height*width) x count matrix, pixels scaled by 1/255.
// Each image is flattened row-major into one column.
SampleMatrix read_idx_images(const std::filesystem::path& path);

// IDX label file -> one label per byte.
LabelVector read_idx_labels(const std::filesystem::path& path);

// Decoders over an in-memory byte buffer; the file readers call these.
SampleMatrix decode_idx_images(std::span<const std::uint8_t> bytes);
LabelVector decode_idx_labels(std::span<const std::uint8_t> bytes);

struct LabeledSamples {
  SampleMatrix samples;
  LabelVector labels;
};

// Whitespace separated text, one sample per line, label in the last field.
// Pixel values within 1e-9 of [0,1] are clamped into it, anything further
// out is rejected.
LabeledSamples read_amat(const std::filesystem::path& path);

// Writes values with round-trip precision.
void write_amat(const std::filesystem::path& path, const SampleMatrix& samples,
                const LabelVector& labels);

// Reads images and labels and checks the counts agree.
LabeledSamples read_idx_pair(const std::filesystem::path& images,
                             const std::filesystem::path& labels);

// Throws if labels.size() != samples.cols().
void check_paired(const SampleMatrix& samples, const LabelVector& labels);

// Throws if any label is outside [0, num_classes).
void check_label_range(const LabelVector& labels, int num_classes);

// First `count` samples (and labels); count is clipped to the available size.
LabeledSamples take_first(const LabeledSamples& data, Index count);

// Last `count` samples (and labels).
LabeledSamples take_last(const LabeledSamples& data, Index count);

}  // namespace ddl::dataio
