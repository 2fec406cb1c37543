#pragma once

#include "ddl/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddl::testing {

// Uniform entries in [lo, hi) from a seeded mt19937_64.
Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0);

// Q factor of a seeded random square matrix.
Matrix random_orthogonal(Index n, std::uint64_t seed);

// Low-rank product D0 Z0 with D0 m x r and Z0 r x n, entries in [0,1).
Matrix factorable(Index m, Index n, Index rank, std::uint64_t seed);

// Fresh scratch directory (under $DDL_TEST_TMP when set).
std::filesystem::path scratch_dir(const std::string& name);

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

std::vector<std::uint8_t> idx_images(std::uint32_t magic, std::uint32_t count, std::uint32_t height,
                                     std::uint32_t width, const std::vector<std::uint8_t>& pixels);
std::vector<std::uint8_t> idx_labels(std::uint32_t magic, std::uint32_t count,
                                     const std::vector<std::uint8_t>& labels);

}  // namespace ddl::testing
