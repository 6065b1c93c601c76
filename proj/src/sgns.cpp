#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <omp.h>

#include "emojitime/embeddings.hpp"
#include "emojitime/error.hpp"
#include "emojitime/random.hpp"
#include "emojitime/sgns_kernel.hpp"

namespace emojitime {

void SgnsConfig::validate() const {
  if (dim < 1) throw Error("dim must be >= 1");
  if (max_window < 1) throw Error("max_window must be >= 1");
  if (negatives < 1) throw Error("negatives must be >= 1");
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (min_count < 1) throw Error("min_count must be >= 1");
  if (!(initial_lr >= 0)) throw Error("initial_lr must be >= 0");
  if (!(min_lr >= 0)) throw Error("min_lr must be >= 0");
  if (threads < 1) throw Error("threads must be >= 1");
}

namespace {

struct Corpus {
  std::vector<std::vector<std::int32_t>> sentences;
  std::uint64_t tokens = 0;
};

Corpus to_ids(const std::vector<std::vector<std::string>>& sentences, const Vocab& vocab) {
  Corpus c;
  c.sentences.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<std::int32_t> ids;
    ids.reserve(s.size());
    for (const auto& t : s)
      if (auto id = vocab.find(t)) ids.push_back(*id);
    c.tokens += ids.size();
    if (!ids.empty()) c.sentences.push_back(std::move(ids));
  }
  return c;
}

// Unigram^0.75 sampler over cumulative weights.
class NegativeSampler {
 public:
  explicit NegativeSampler(const Vocab& vocab) {
    cdf_.reserve(vocab.size());
    double acc = 0;
    for (auto c : vocab.counts()) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cdf_.push_back(acc);
    }
  }
  std::int32_t operator()(Rng& rng) const {
    double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::int32_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

std::vector<double> keep_probabilities(const Vocab& vocab, std::uint64_t total, double threshold) {
  std::vector<double> keep(vocab.size(), 1.0);
  if (!(threshold > 0) || std::isinf(threshold)) return keep;
  const double tn = threshold * static_cast<double>(total);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f = static_cast<double>(vocab.counts()[i]);
    keep[i] = std::min(1.0, (std::sqrt(f / tn) + 1.0) * tn / f);
  }
  return keep;
}

struct EpochStats {
  double loss = 0;
  std::uint64_t updates = 0;
  std::uint64_t centers = 0;
};

class Trainer {
 public:
  Trainer(EmbeddingSpace& space, const SgnsConfig& cfg, const Corpus& corpus)
      : space_(space), cfg_(cfg), corpus_(corpus), sampler_(space.vocab),
        keep_(keep_probabilities(space.vocab, corpus.tokens, cfg.subsample_threshold)),
        total_work_(static_cast<double>(corpus.tokens) * cfg.epochs + 1.0) {}

  float learning_rate(std::uint64_t processed) const {
    double lr = cfg_.initial_lr * (1.0 - static_cast<double>(processed) / total_work_);
    return static_cast<float>(std::max(lr, std::min(cfg_.min_lr, cfg_.initial_lr)));
  }

  // Trains on one sentence; returns false on a non-finite loss.
  bool sentence(const std::vector<std::int32_t>& ids, Rng& rng, float lr, EpochStats& st,
                std::vector<std::int32_t>& kept, std::vector<float>& scratch,
                std::vector<std::span<float>>& negs) {
    const std::size_t dim = static_cast<std::size_t>(space_.dim);
    kept.clear();
    for (auto id : ids)
      if (keep_[id] >= 1.0 || uniform01(rng) < keep_[id]) kept.push_back(id);
    const auto n = static_cast<std::ptrdiff_t>(kept.size());
    for (std::ptrdiff_t pos = 0; pos < n; ++pos) {
      ++st.centers;
      const int window = cfg_.deterministic
                             ? cfg_.max_window
                             : 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cfg_.max_window)));
      const std::int32_t center = kept[pos];
      std::span<float> v(space_.input.data() + center * dim, dim);
      for (std::ptrdiff_t c = pos - window; c <= pos + window; ++c) {
        if (c < 0 || c >= n || c == pos) continue;
        const std::int32_t ctx = kept[c];
        negs.clear();
        for (int k = 0; k < cfg_.negatives; ++k) {
          auto neg = sampler_(rng);
          if (neg == ctx) continue;
          negs.emplace_back(space_.output.data() + neg * dim, dim);
        }
        std::span<float> u(space_.output.data() + ctx * dim, dim);
        float loss = sgns_step<float>(v, u, negs, lr, scratch);
        if (!std::isfinite(loss)) return false;
        st.loss += loss;
        ++st.updates;
      }
    }
    return true;
  }

  EpochStats epoch_serial(int epoch, std::uint64_t& processed) {
    Rng rng(derive_seed(cfg_.seed, "sgns.epoch." + std::to_string(epoch)));
    EpochStats st;
    std::vector<std::int32_t> kept;
    std::vector<float> scratch(space_.dim);
    std::vector<std::span<float>> negs;
    for (const auto& s : corpus_.sentences) {
      if (!sentence(s, rng, learning_rate(processed), st, kept, scratch, negs)) throw DivergenceError();
      processed += s.size();
    }
    return st;
  }

  // Lock-free multi-worker epoch: workers update shared rows without
  // synchronisation, as in the original word2vec trainer.
  EpochStats epoch_parallel(int epoch, std::uint64_t& processed) {
    std::atomic<std::uint64_t> progress{processed};
    std::atomic<bool> diverged{false};
    EpochStats total;
    const auto n = static_cast<std::ptrdiff_t>(corpus_.sentences.size());
#pragma omp parallel num_threads(cfg_.threads)
    {
      Rng rng(derive_seed(cfg_.seed, "sgns.epoch." + std::to_string(epoch) + ".worker." +
                                         std::to_string(omp_get_thread_num())));
      EpochStats st;
      std::vector<std::int32_t> kept;
      std::vector<float> scratch(space_.dim);
      std::vector<std::span<float>> negs;
#pragma omp for schedule(dynamic, 64)
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (diverged.load(std::memory_order_relaxed)) continue;
        const auto& s = corpus_.sentences[i];
        float lr = learning_rate(progress.load(std::memory_order_relaxed));
        if (!sentence(s, rng, lr, st, kept, scratch, negs)) diverged = true;
        progress.fetch_add(s.size(), std::memory_order_relaxed);
      }
#pragma omp critical
      {
        total.loss += st.loss;
        total.updates += st.updates;
        total.centers += st.centers;
      }
    }
    if (diverged) throw DivergenceError();
    processed = progress.load();
    return total;
  }

 private:
  EmbeddingSpace& space_;
  const SgnsConfig& cfg_;
  const Corpus& corpus_;
  NegativeSampler sampler_;
  std::vector<double> keep_;
  double total_work_;
};

}  // namespace

EmbeddingSpace train_sgns(const std::vector<std::vector<std::string>>& sentences,
                          const SgnsConfig& cfg, std::string tag, SgnsLog* log) {
  cfg.validate();
  bool any = std::any_of(sentences.begin(), sentences.end(), [](const auto& s) { return !s.empty(); });
  if (!any) throw Error("cannot train embeddings on an empty slice");

  EmbeddingSpace space;
  space.vocab = build_vocab(sentences, cfg.min_count);
  space.dim = cfg.dim;
  space.tag = std::move(tag);
  const auto rows = space.vocab.size() * static_cast<std::size_t>(cfg.dim);
  space.input.resize(rows);
  space.output.assign(rows, 0.0f);
  Rng init(derive_seed(cfg.seed, "sgns.init"));
  for (auto& x : space.input) x = static_cast<float>((uniform01(init) - 0.5) / cfg.dim);

  const Corpus corpus = to_ids(sentences, space.vocab);
  Trainer trainer(space, cfg, corpus);
  std::uint64_t processed = 0;
  const bool parallel = !cfg.deterministic && cfg.threads > 1;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochStats st = parallel ? trainer.epoch_parallel(epoch, processed)
                             : trainer.epoch_serial(epoch, processed);
    if (log) {
      log->epoch_loss.push_back(st.updates ? st.loss / static_cast<double>(st.updates) : 0.0);
      log->epoch_centers.push_back(st.centers);
      log->epoch_updates.push_back(st.updates);
    }
  }
  for (float x : space.input)
    if (!std::isfinite(x)) throw DivergenceError();
  return space;
}

double sgns_gradient_check(const SgnsConfig& cfg, const std::vector<std::vector<std::string>>& sentences) {
  cfg.validate();
  Vocab vocab = build_vocab(sentences, 1);
  const std::size_t v = vocab.size();
  if (v < static_cast<std::size_t>(cfg.negatives) + 2)
    throw Error("gradient check needs a vocabulary of at least negatives + 2 tokens");
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  Rng rng(derive_seed(cfg.seed, "sgns.gradcheck"));
  std::vector<double> input(v * dim), output(v * dim);
  for (auto& x : input) x = uniform01(rng) - 0.5;
  for (auto& x : output) x = uniform01(rng) - 0.5;

  // Distinct rows: center input row, positive output row, negative output rows.
  std::vector<std::int32_t> order(v);
  for (std::size_t i = 0; i < v; ++i) order[i] = static_cast<std::int32_t>(i);
  shuffle(order.begin(), order.end(), rng);
  const std::int32_t center = order[0];
  const std::int32_t positive = order[1];
  std::vector<std::int32_t> negatives(order.begin() + 2, order.begin() + 2 + cfg.negatives);

  auto in_row = [&](std::vector<double>& m, std::int32_t r) { return std::span<double>(m.data() + r * dim, dim); };
  auto loss_at = [&](const std::vector<double>& in, const std::vector<double>& out) {
    std::vector<std::span<const double>> negs;
    for (auto n : negatives) negs.emplace_back(out.data() + n * dim, dim);
    return sgns_loss<double>({in.data() + center * dim, dim}, {out.data() + positive * dim, dim}, negs);
  };

  // Analytic gradient = parameter change of a unit-rate training step.
  auto in_after = input;
  auto out_after = output;
  std::vector<std::span<double>> negs;
  for (auto n : negatives) negs.push_back(in_row(out_after, n));
  std::vector<double> scratch(dim);
  sgns_step<double>(in_row(in_after, center), in_row(out_after, positive), negs, 1.0, scratch);

  constexpr double eps = 1e-6;
  double max_rel = 0;
  auto check_row = [&](std::vector<double>& params, const std::vector<double>& after, std::int32_t row,
                       bool is_input) {
    for (std::size_t d = 0; d < dim; ++d) {
      const std::size_t idx = row * dim + d;
      const double analytic = params[idx] - after[idx];
      const double saved = params[idx];
      params[idx] = saved + eps;
      double lp = is_input ? loss_at(params, output) : loss_at(input, params);
      params[idx] = saved - eps;
      double lm = is_input ? loss_at(params, output) : loss_at(input, params);
      params[idx] = saved;
      const double numeric = (lp - lm) / (2 * eps);
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    }
  };
  check_row(input, in_after, center, true);
  check_row(output, out_after, positive, false);
  for (auto n : negatives) check_row(output, out_after, n, false);
  return max_rel;
}

}  // namespace emojitime
