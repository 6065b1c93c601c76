#include "emojitime/kernels.hpp"

#include <cmath>

#include "emojitime/error.hpp"

namespace emojitime::kernels {

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t d = 0; d < a.size(); ++d) s += static_cast<double>(a[d]) * b[d];
  return s;
}

std::vector<double> norms_of(const std::vector<std::span<const float>>& rows) {
  std::vector<double> norms(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows.empty() && rows[i].size() != rows[0].size()) throw Error("cosine: dimension mismatch");
    norms[i] = std::sqrt(dot(rows[i], rows[i]));
    if (norms[i] == 0) throw Error("cosine: zero vector at row " + std::to_string(i));
  }
  return norms;
}

double clamp_unit(double c) { return c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c); }

}  // namespace

std::vector<double> cosine_matrix_serial(const std::vector<std::span<const float>>& rows) {
  const auto norms = norms_of(rows);
  const std::size_t m = rows.size();
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    out[i * m + i] = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      double c = clamp_unit(dot(rows[i], rows[j]) / (norms[i] * norms[j]));
      out[i * m + j] = c;
      out[j * m + i] = c;
    }
  }
  return out;
}

std::vector<double> cosine_matrix_parallel(const std::vector<std::span<const float>>& rows) {
  const auto norms = norms_of(rows);
  const auto m = static_cast<std::ptrdiff_t>(rows.size());
  std::vector<double> out(rows.size() * rows.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    out[i * m + i] = 1.0;
    for (std::ptrdiff_t j = i + 1; j < m; ++j) {
      double c = clamp_unit(dot(rows[i], rows[j]) / (norms[i] * norms[j]));
      out[i * m + j] = c;
      out[j * m + i] = c;
    }
  }
  return out;
}

std::vector<double> cosine_scores_serial(std::span<const float> query,
                                         const std::vector<std::span<const float>>& rows) {
  const double qn = std::sqrt(dot(query, query));
  if (qn == 0) throw Error("cosine: zero query vector");
  const auto norms = norms_of(rows);
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != query.size()) throw Error("cosine: dimension mismatch");
    out[i] = clamp_unit(dot(query, rows[i]) / (qn * norms[i]));
  }
  return out;
}

std::vector<double> cosine_scores_parallel(std::span<const float> query,
                                           const std::vector<std::span<const float>>& rows) {
  const double qn = std::sqrt(dot(query, query));
  if (qn == 0) throw Error("cosine: zero query vector");
  const auto norms = norms_of(rows);
  for (const auto& r : rows)
    if (r.size() != query.size()) throw Error("cosine: dimension mismatch");
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  std::vector<double> out(rows.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = clamp_unit(dot(query, rows[i]) / (qn * norms[i]));
  return out;
}

namespace {

void check_shape(std::span<const double> scores, std::size_t classes, std::span<const int> gold) {
  if (classes == 0 || scores.size() != gold.size() * classes)
    throw Error("score matrix shape does not match gold labels");
  for (int g : gold)
    if (g < 0 || static_cast<std::size_t>(g) >= classes) throw Error("gold index out of range");
}

std::size_t gold_position(const double* row, std::size_t classes, int gold) {
  const double gs = row[gold];
  std::size_t before = 0;
  for (std::size_t j = 0; j < classes; ++j)
    if (row[j] > gs || (row[j] == gs && j < static_cast<std::size_t>(gold))) ++before;
  return before;
}

std::size_t coverage_rank(const double* row, std::size_t classes, int gold) {
  const double gs = row[gold];
  std::size_t n = 0;
  for (std::size_t j = 0; j < classes; ++j)
    if (row[j] >= gs) ++n;
  return n;
}

}  // namespace

std::vector<std::size_t> gold_positions_serial(std::span<const double> scores, std::size_t classes,
                                               std::span<const int> gold) {
  check_shape(scores, classes, gold);
  std::vector<std::size_t> out(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i)
    out[i] = gold_position(scores.data() + i * classes, classes, gold[i]);
  return out;
}

std::vector<std::size_t> gold_positions_parallel(std::span<const double> scores, std::size_t classes,
                                                 std::span<const int> gold) {
  check_shape(scores, classes, gold);
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  std::vector<std::size_t> out(gold.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = gold_position(scores.data() + i * classes, classes, gold[i]);
  return out;
}

std::vector<std::size_t> coverage_ranks_serial(std::span<const double> scores, std::size_t classes,
                                               std::span<const int> gold) {
  check_shape(scores, classes, gold);
  std::vector<std::size_t> out(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i)
    out[i] = coverage_rank(scores.data() + i * classes, classes, gold[i]);
  return out;
}

std::vector<std::size_t> coverage_ranks_parallel(std::span<const double> scores, std::size_t classes,
                                                 std::span<const int> gold) {
  check_shape(scores, classes, gold);
  const auto n = static_cast<std::ptrdiff_t>(gold.size());
  std::vector<std::size_t> out(gold.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = coverage_rank(scores.data() + i * classes, classes, gold[i]);
  return out;
}

}  // namespace emojitime::kernels
