#include "emojitime/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emojitime/error.hpp"
#include "emojitime/kernels.hpp"

namespace emojitime {

void EvalInput::validate() const {
  if (gold.empty()) throw Error("evaluation input is empty");
  if (classes == 0 || scores.size() != gold.size() * classes)
    throw Error("evaluation input: score matrix shape does not match gold labels");
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || static_cast<std::size_t>(gold[i]) >= classes)
      throw Error("evaluation input: gold index out of range at row " + std::to_string(i));
    double s = 0;
    for (std::size_t c = 0; c < classes; ++c) s += scores[i * classes + c];
    if (std::abs(s - 1.0) > 1e-6) throw Error("evaluation input: row " + std::to_string(i) + " does not sum to 1");
  }
}

PrfResult macro_prf(const EvalInput& input) {
  input.validate();
  const std::size_t c = input.classes;
  std::vector<std::size_t> tp(c, 0), predicted(c, 0), support(c, 0);
  for (std::size_t i = 0; i < input.rows(); ++i) {
    const double* row = input.scores.data() + i * c;
    const auto pred = static_cast<std::size_t>(std::max_element(row, row + c) - row);
    ++predicted[pred];
    ++support[static_cast<std::size_t>(input.gold[i])];
    if (pred == static_cast<std::size_t>(input.gold[i])) ++tp[pred];
  }
  PrfResult r;
  r.per_class.resize(c);
  std::size_t active = 0;
  for (std::size_t k = 0; k < c; ++k) {
    auto& m = r.per_class[k];
    m.support = support[k];
    m.predicted = predicted[k];
    m.precision = predicted[k] ? static_cast<double>(tp[k]) / static_cast<double>(predicted[k]) : 0.0;
    m.recall = support[k] ? static_cast<double>(tp[k]) / static_cast<double>(support[k]) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (support[k] == 0) continue;
    ++active;
    r.precision += m.precision;
    r.recall += m.recall;
    r.f1 += m.f1;
  }
  r.precision /= static_cast<double>(active);
  r.recall /= static_cast<double>(active);
  r.f1 /= static_cast<double>(active);
  return r;
}

double accuracy_at_k(const EvalInput& input, std::size_t k) {
  if (input.classes == 0 || k < 1 || k > input.classes)
    throw Error("accuracy_at_k: k=" + std::to_string(k) + " outside [1, " + std::to_string(input.classes) + "]");
  input.validate();
  auto pos = kernels::gold_positions_parallel(input.scores, input.classes, input.gold);
  auto hits = std::count_if(pos.begin(), pos.end(), [k](std::size_t p) { return p < k; });
  return static_cast<double>(hits) / static_cast<double>(input.rows());
}

double coverage_error(const EvalInput& input) {
  input.validate();
  auto ranks = kernels::coverage_ranks_parallel(input.scores, input.classes, input.gold);
  const double total = std::accumulate(ranks.begin(), ranks.end(), 0.0);
  return total / static_cast<double>(input.rows());
}

EvalReport build_report(const EvalInput& input, std::string system) {
  auto prf = macro_prf(input);
  EvalReport r;
  r.system = std::move(system);
  r.n = input.rows();
  r.classes = input.classes;
  r.per_class = std::move(prf.per_class);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  for (std::size_t i = 0; i < kReportedK.size(); ++i)
    r.accuracy[i] = accuracy_at_k(input, std::min(kReportedK[i], input.classes));
  r.coverage_error = coverage_error(input);
  return r;
}

std::vector<F1Delta> f1_delta_table(const EvalReport& a, const EvalReport& b, std::size_t top_n) {
  if (a.classes != b.classes || a.per_class.size() != b.per_class.size())
    throw Error("f1_delta_table: reports cover different class sets");
  std::vector<F1Delta> rows;
  for (std::size_t c = 0; c < a.per_class.size(); ++c) {
    const double fa = a.per_class[c].f1, fb = b.per_class[c].f1;
    rows.push_back({c, fa, fb, fb - fa});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const F1Delta& x, const F1Delta& y) { return x.delta > y.delta; });
  if (rows.size() > top_n) rows.resize(top_n);
  return rows;
}

}  // namespace emojitime
