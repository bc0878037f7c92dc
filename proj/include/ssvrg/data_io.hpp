#pragma once

// File formats:
//   MC observations: text, one "i j value" triple per line, 1-based indices,
//                    '#' starts a comment.
//   Dense matrices:  CSV (one matrix row per line) or binary: int64 rows,
//                    int64 cols, then rows*cols little-endian doubles in
//                    column-major order.

#include <filesystem>
#include <vector>

#include "ssvrg/mc.hpp"

namespace ssvrg {

std::vector<Observation> read_mc_triples(const std::filesystem::path& path);
void write_mc_triples(const std::filesystem::path& path, const std::vector<Observation>& obs);

/// Loads triples and sizes the instance from the largest indices unless d, n > 0.
McInstance load_mc_instance(const std::filesystem::path& path, Index r, Index d = 0, Index n = 0);

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& A);

Matrix read_matrix_binary(const std::filesystem::path& path);
void write_matrix_binary(const std::filesystem::path& path, const Matrix& A);

/// Dispatches on extension: ".csv" is text, anything else binary.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace ssvrg
