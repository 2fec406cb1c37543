#include "ddl/dataio.hpp"

#include "ddl/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace ddl::dataio {
namespace {

constexpr double kPixelClampSlack = 1e-9;

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08X", v);
  return buf;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

double parse_double(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  // from_chars rejects a leading '+', strtod-style files may carry one.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw FormatError("line " + std::to_string(line_no) + ": non-numeric token '" +
                      std::string(token) + "'");
  }
  return value;
}

}  // namespace

SampleMatrix decode_idx_images(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw LengthError("IDX image file shorter than its header");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    throw FormatError("bad IDX image magic " + hex32(magic) + ", expected " +
                      hex32(kIdxImageMagic));
  }
  const std::uint64_t count = read_be32(bytes, 4);
  const std::uint64_t height = read_be32(bytes, 8);
  const std::uint64_t width = read_be32(bytes, 12);
  if (count == 0 || height == 0 || width == 0) {
    throw DegenerateDataError("IDX image file declares an empty dataset");
  }
  const std::uint64_t pixels = height * width;
  if (bytes.size() - 16 != count * pixels) {
    throw LengthError("IDX image payload is " + std::to_string(bytes.size() - 16) +
                      " bytes, header declares " + std::to_string(count * pixels));
  }

  // Image-major bytes land directly in column-major storage: one image per column.
  SampleMatrix samples(static_cast<Index>(pixels), static_cast<Index>(count));
  const std::uint8_t* src = bytes.data() + 16;
  double* dst = samples.data();
  for (std::uint64_t i = 0; i < count * pixels; ++i) dst[i] = src[i] / 255.0;
  return samples;
}

LabelVector decode_idx_labels(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8) throw LengthError("IDX label file shorter than its header");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxLabelMagic) {
    throw FormatError("bad IDX label magic " + hex32(magic) + ", expected " +
                      hex32(kIdxLabelMagic));
  }
  const std::uint64_t count = read_be32(bytes, 4);
  if (count == 0) throw DegenerateDataError("IDX label file declares an empty dataset");
  if (bytes.size() - 8 != count) {
    throw LengthError("IDX label payload is " + std::to_string(bytes.size() - 8) +
                      " bytes, header declares " + std::to_string(count));
  }
  return LabelVector(bytes.begin() + 8, bytes.end());
}

SampleMatrix read_idx_images(const std::filesystem::path& path) {
  return decode_idx_images(read_bytes(path));
}

LabelVector read_idx_labels(const std::filesystem::path& path) {
  return decode_idx_labels(read_bytes(path));
}

LabeledSamples read_idx_pair(const std::filesystem::path& images,
                             const std::filesystem::path& labels) {
  LabeledSamples data{read_idx_images(images), read_idx_labels(labels)};
  check_paired(data.samples, data.labels);
  return data;
}

LabeledSamples read_amat(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<double> values;
  LabelVector labels;
  std::size_t fields_per_line = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields_per_line == 0) {
      if (fields.size() < 2) {
        throw FormatError("line " + std::to_string(line_no) + ": need at least one value and a label");
      }
      fields_per_line = fields.size();
    } else if (fields.size() != fields_per_line) {
      throw FormatError("ragged amat file: line " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(fields_per_line));
    }
    for (std::size_t f = 0; f + 1 < fields.size(); ++f) {
      double v = parse_double(fields[f], line_no);
      if (v < 0.0) {
        if (v < -kPixelClampSlack) {
          throw FormatError("line " + std::to_string(line_no) + ": pixel value " +
                            std::string(fields[f]) + " outside [0,1]");
        }
        v = 0.0;
      } else if (v > 1.0) {
        if (v > 1.0 + kPixelClampSlack) {
          throw FormatError("line " + std::to_string(line_no) + ": pixel value " +
                            std::string(fields[f]) + " outside [0,1]");
        }
        v = 1.0;
      }
      values.push_back(v);
    }
    const double label = std::round(parse_double(fields.back(), line_no));
    if (label < 0.0 || label > 1e9) {
      throw FormatError("line " + std::to_string(line_no) + ": invalid label " +
                        std::string(fields.back()));
    }
    labels.push_back(static_cast<int>(label));
  }
  if (labels.empty()) throw DegenerateDataError("amat file " + path.string() + " has no samples");

  const auto rows = static_cast<Index>(fields_per_line - 1);
  const auto cols = static_cast<Index>(labels.size());
  return {Eigen::Map<const Matrix>(values.data(), rows, cols), std::move(labels)};
}

void write_amat(const std::filesystem::path& path, const SampleMatrix& samples,
                const LabelVector& labels) {
  check_paired(samples, labels);
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw IoError("cannot write " + path.string());
  for (Index j = 0; j < samples.cols(); ++j) {
    for (Index i = 0; i < samples.rows(); ++i) std::fprintf(out, "%.17g ", samples(i, j));
    std::fprintf(out, "%d\n", labels[static_cast<std::size_t>(j)]);
  }
  if (std::fclose(out) != 0) throw IoError("error writing " + path.string());
}

void check_paired(const SampleMatrix& samples, const LabelVector& labels) {
  if (static_cast<Index>(labels.size()) != samples.cols()) {
    throw DimensionError("sample count " + std::to_string(samples.cols()) +
                         " does not match label count " + std::to_string(labels.size()));
  }
}

void check_label_range(const LabelVector& labels, int num_classes) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      throw FormatError("label " + std::to_string(labels[i]) + " at position " +
                        std::to_string(i) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

LabeledSamples take_first(const LabeledSamples& data, Index count) {
  count = std::min(count, data.samples.cols());
  return {data.samples.leftCols(count),
          LabelVector(data.labels.begin(), data.labels.begin() + count)};
}

LabeledSamples take_last(const LabeledSamples& data, Index count) {
  count = std::min(count, data.samples.cols());
  return {data.samples.rightCols(count),
          LabelVector(data.labels.end() - count, data.labels.end())};
}

}  // namespace ddl::dataio
