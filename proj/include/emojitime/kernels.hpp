#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. Each kernel has a serial reference and an
// OpenMP version; both must produce identical results, which the unit tests
// and the benchmark check.

namespace emojitime::kernels {

/// m x m cosine matrix (row-major) of the given rows, all of length `dim`.
/// Diagonal is exactly 1, the matrix exactly symmetric.
std::vector<double> cosine_matrix_serial(const std::vector<std::span<const float>>& rows);
std::vector<double> cosine_matrix_parallel(const std::vector<std::span<const float>>& rows);

/// Cosine of `query` against every row.
std::vector<double> cosine_scores_serial(std::span<const float> query,
                                         const std::vector<std::span<const float>>& rows);
std::vector<double> cosine_scores_parallel(std::span<const float> query,
                                           const std::vector<std::span<const float>>& rows);

/// Per row of an N x C score matrix: position of the gold class in the
/// ranking (0-based, ties broken by lower class index first).
std::vector<std::size_t> gold_positions_serial(std::span<const double> scores, std::size_t classes,
                                               std::span<const int> gold);
std::vector<std::size_t> gold_positions_parallel(std::span<const double> scores, std::size_t classes,
                                                 std::span<const int> gold);

/// Per row: number of classes scoring >= the gold score (gold included).
std::vector<std::size_t> coverage_ranks_serial(std::span<const double> scores, std::size_t classes,
                                               std::span<const int> gold);
std::vector<std::size_t> coverage_ranks_parallel(std::span<const double> scores, std::size_t classes,
                                                 std::span<const int> gold);

}  // namespace emojitime::kernels
