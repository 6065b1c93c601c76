// Serial reference vs OpenMP kernels. Results are compared once before
// timing; a mismatch aborts the run.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <cstdio>
#include <cstdlib>

#include "emojitime/embeddings.hpp"
#include "emojitime/kernels.hpp"
#include "emojitime/random.hpp"

using namespace emojitime;

namespace {

struct Rows {
  std::vector<float> data;
  std::vector<std::span<const float>> rows;
};

Rows make_rows(std::size_t m, std::size_t dim, std::uint64_t seed) {
  Rows r;
  Rng rng(seed);
  r.data.resize(m * dim);
  for (auto& x : r.data) x = static_cast<float>(uniform01(rng) - 0.5);
  for (std::size_t i = 0; i < m; ++i) r.rows.emplace_back(r.data.data() + i * dim, dim);
  return r;
}

struct Scores {
  std::size_t classes;
  std::vector<double> values;
  std::vector<int> gold;
};

Scores make_scores(std::size_t n, std::size_t c, std::uint64_t seed) {
  Scores s{c, {}, {}};
  Rng rng(seed);
  s.values.resize(n * c);
  for (auto& x : s.values) x = uniform01(rng);
  for (std::size_t i = 0; i < n; ++i) s.gold.push_back(static_cast<int>(uniform_index(rng, c)));
  return s;
}

const Rows& emoji_rows() {
  static const Rows r = make_rows(300, 300, 1);
  return r;
}

const Rows& vocab_rows() {
  static const Rows r = make_rows(50000, 300, 2);
  return r;
}

const Scores& test_scores() {
  static const Scores s = make_scores(30000, 300, 3);
  return s;
}

void check(bool same, const char* what) {
  if (!same) {
    std::fprintf(stderr, "serial and parallel %s differ\n", what);
    std::exit(1);
  }
}

void verify() {
  const auto& e = emoji_rows();
  check(kernels::cosine_matrix_serial(e.rows) == kernels::cosine_matrix_parallel(e.rows), "cosine_matrix");
  const auto& v = vocab_rows();
  check(kernels::cosine_scores_serial(v.rows[0], v.rows) == kernels::cosine_scores_parallel(v.rows[0], v.rows),
        "cosine_scores");
  const auto& s = test_scores();
  check(kernels::gold_positions_serial(s.values, s.classes, s.gold) ==
            kernels::gold_positions_parallel(s.values, s.classes, s.gold),
        "gold_positions");
  check(kernels::coverage_ranks_serial(s.values, s.classes, s.gold) ==
            kernels::coverage_ranks_parallel(s.values, s.classes, s.gold),
        "coverage_ranks");
}

template <auto Fn>
void BM_CosineMatrix(benchmark::State& state) {
  const auto& e = emoji_rows();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(e.rows));
}

template <auto Fn>
void BM_CosineScores(benchmark::State& state) {
  const auto& v = vocab_rows();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(v.rows[0], v.rows));
}

template <auto Fn>
void BM_Ranks(benchmark::State& state) {
  const auto& s = test_scores();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(s.values, s.classes, s.gold));
}

// Whole SGNS epoch: single deterministic worker vs lock-free workers.
void BM_SgnsEpoch(benchmark::State& state) {
  static const auto sentences = [] {
    std::vector<std::vector<std::string>> out;
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
      std::vector<std::string> s;
      for (int j = 0; j < 20; ++j) s.push_back("w" + std::to_string(uniform_index(rng, 2000)));
      out.push_back(std::move(s));
    }
    return out;
  }();
  SgnsConfig cfg;
  cfg.dim = 100;
  cfg.epochs = 1;
  cfg.min_count = 1;
  cfg.deterministic = state.range(0) == 0;
  cfg.threads = cfg.deterministic ? 1 : omp_get_max_threads();
  for (auto _ : state) benchmark::DoNotOptimize(train_sgns(sentences, cfg));
  state.SetLabel(cfg.deterministic ? "deterministic" : std::to_string(cfg.threads) + " workers");
}

}  // namespace

BENCHMARK(BM_CosineMatrix<kernels::cosine_matrix_serial>)->Name("cosine_matrix/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CosineMatrix<kernels::cosine_matrix_parallel>)->Name("cosine_matrix/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CosineScores<kernels::cosine_scores_serial>)->Name("cosine_scores/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CosineScores<kernels::cosine_scores_parallel>)->Name("cosine_scores/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ranks<kernels::gold_positions_serial>)->Name("gold_positions/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ranks<kernels::gold_positions_parallel>)->Name("gold_positions/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ranks<kernels::coverage_ranks_serial>)->Name("coverage_ranks/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ranks<kernels::coverage_ranks_parallel>)->Name("coverage_ranks/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SgnsEpoch)->Arg(0)->Arg(1)->Name("sgns_epoch")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  verify();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
