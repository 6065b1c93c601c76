#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace emojitime {

/// N x C post-softmax scores (row-major) and the gold class of every row.
struct EvalInput {
  std::size_t classes = 0;
  std::vector<double> scores;
  std::vector<int> gold;

  std::size_t rows() const { return gold.size(); }
  /// Throws Error when shapes, gold indices or row sums are off.
  void validate() const;
};

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;    // gold count
  std::size_t predicted = 0;  // argmax count
};

struct PrfResult {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::vector<ClassMetrics> per_class;
};

/// Argmax predictions (ties to the lowest class index); macro averages run
/// over classes with non-zero gold support.
PrfResult macro_prf(const EvalInput& input);
/// Fraction of rows whose gold is among the top k (ties: lower index first).
double accuracy_at_k(const EvalInput& input, std::size_t k);
/// Mean number of classes scoring >= the gold score.
double coverage_error(const EvalInput& input);

inline constexpr std::array<std::size_t, 4> kReportedK = {1, 3, 5, 10};

struct EvalReport {
  std::string system;
  std::size_t n = 0;
  std::size_t classes = 0;
  std::vector<ClassMetrics> per_class;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  /// accuracy at 1, 3, 5, 10; k is capped at the class count.
  std::array<double, 4> accuracy{};
  double coverage_error = 0;
};

EvalReport build_report(const EvalInput& input, std::string system);

struct F1Delta {
  std::size_t cls = 0;
  double f1_a = 0;
  double f1_b = 0;
  double delta = 0;  // f1_b - f1_a
};

/// Classes by descending F1 gain from `a` to `b`, ties by class index.
std::vector<F1Delta> f1_delta_table(const EvalReport& a, const EvalReport& b, std::size_t top_n);

}  // namespace emojitime
