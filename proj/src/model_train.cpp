#include <algorithm>
#include <cmath>
#include <numeric>

#include "emojitime/embeddings.hpp"
#include "emojitime/error.hpp"
#include "emojitime/model.hpp"
#include "emojitime/random.hpp"

namespace emojitime {

Adam::Adam(const ModelConfig& cfg)
    : opt_(cfg.optimizer), m_(ModelParameters::zeros(cfg)), v_(ModelParameters::zeros(cfg)) {}

void Adam::update(ModelParameters& p, const ModelParameters& grads, double lr) {
  ++step_;
  const double b1 = opt_.beta1, b2 = opt_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  std::vector<Matrix*> params, ms, vs;
  std::vector<const Matrix*> gs;
  p.visit([&](std::string_view, Matrix& m) { params.push_back(&m); });
  m_.visit([&](std::string_view, Matrix& m) { ms.push_back(&m); });
  v_.visit([&](std::string_view, Matrix& m) { vs.push_back(&m); });
  grads.visit([&](std::string_view, const Matrix& m) { gs.push_back(&m); });
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto g = gs[t]->array();
    ms[t]->array() = b1 * ms[t]->array() + (1 - b1) * g;
    vs[t]->array() = b2 * vs[t]->array() + (1 - b2) * g.square();
    params[t]->array() -= lr * (ms[t]->array() / c1) / ((vs[t]->array() / c2).sqrt() + opt_.epsilon);
  }
}

double train_step(std::span<const TrainingExample* const> batch, ModelParameters& p, const ModelConfig& cfg,
                  Adam& opt, ModelParameters& grads) {
  if (batch.empty()) throw Error("train_step: empty batch");
  grads.set_zero();
  double total = 0;
  ForwardTrace tr;
  for (const auto* ex : batch) {
    forward(p, cfg, ex->input, &tr);
    total += backward(p, cfg, ex->input, tr, ex->label, grads);
  }
  const double mean = total / static_cast<double>(batch.size());
  if (!std::isfinite(mean)) throw DivergenceError();
  const double scale = 1.0 / static_cast<double>(batch.size());
  double sq = 0;
  grads.visit([&](std::string_view, Matrix& m) {
    m *= scale;
    sq += m.squaredNorm();
  });
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw DivergenceError();
  if (norm > cfg.optimizer.clip_norm) {
    const double clip = cfg.optimizer.clip_norm / norm;
    grads.visit([&](std::string_view, Matrix& m) { m *= clip; });
  }
  opt.update(p, grads, cfg.optimizer.lr);
  return mean;
}

EvalInput score_examples(const ModelParameters& p, const ModelConfig& cfg,
                         const std::vector<TrainingExample>& examples) {
  EvalInput out;
  out.classes = static_cast<std::size_t>(cfg.class_count);
  out.scores.resize(examples.size() * out.classes);
  out.gold.resize(examples.size());
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::vector<std::string> errors(examples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      auto pred = forward(p, cfg, examples[i].input);
      std::copy(pred.probabilities.begin(), pred.probabilities.end(), out.scores.begin() + i * cfg.class_count);
      out.gold[i] = examples[i].label;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);
  return out;
}

TrainResult train(const std::vector<TrainingExample>& train_set, const std::vector<TrainingExample>& val_set,
                  const ModelConfig& cfg, const ModelParameters* initial) {
  cfg.validate();
  if (train_set.empty()) throw Error("training split is empty");
  if (val_set.empty()) throw Error("validation split is empty");
  TrainResult result;
  result.params = initial ? *initial : init_parameters(cfg, cfg.seed);
  const auto& opt = cfg.optimizer;
  if (opt.max_epochs == 0) return result;

  ModelParameters current = result.params;
  ModelParameters grads = ModelParameters::zeros(cfg);
  Adam adam(cfg);
  Rng rng(derive_seed(cfg.seed, "model.shuffle"));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const TrainingExample*> batch;
  double best_f1 = -1;
  int since_best = 0;
  for (int epoch = 0; epoch < opt.max_epochs; ++epoch) {
    shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch_size)) {
      batch.clear();
      const auto end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_set[order[i]]);
      loss_sum += train_step(batch, current, cfg, adam, grads) * static_cast<double>(batch.size());
    }
    EpochLog entry;
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.val_macro_f1 = macro_prf(score_examples(current, cfg, val_set)).f1;
    result.log.push_back(entry);
    if (entry.val_macro_f1 > best_f1) {
      best_f1 = entry.val_macro_f1;
      result.params = current;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
  }
  return result;
}

std::vector<std::pair<std::string, double>> Classifier::predict(const std::vector<std::string>& tokens,
                                                                const DateFeatures& date, std::size_t k) const {
  auto top = predict_topk(params, config, encode(vocab, tokens, date), k);
  std::vector<std::pair<std::string, double>> out;
  for (auto [cls, prob] : top) out.emplace_back(classes.at(static_cast<std::size_t>(cls)), prob);
  return out;
}

std::vector<TrainingExample> encode_split(const ModelVocab& vocab, const PredictionDataset& ds, Split split) {
  std::vector<TrainingExample> out;
  for (const auto& e : ds.examples)
    if (e.split == split) out.push_back({encode(vocab, e.tokens, e.date), e.label});
  return out;
}

std::size_t warm_start_word_embeddings(ModelParameters& p, const ModelVocab& vocab, const EmbeddingSpace& space) {
  if (space.dim != p.word_emb.cols())
    throw Error("warm start: embedding dimension " + std::to_string(space.dim) + " differs from word_emb_dim " +
                std::to_string(p.word_emb.cols()));
  std::size_t copied = 0;
  for (std::size_t w = 1; w < vocab.word_count(); ++w) {
    auto id = space.vocab.find(vocab.words()[w]);
    if (!id) continue;
    auto v = space.vector(*id);
    for (int d = 0; d < space.dim; ++d) p.word_emb(static_cast<Eigen::Index>(w), d) = v[static_cast<std::size_t>(d)];
    ++copied;
  }
  return copied;
}

ClassifierTraining train_classifier(const PredictionDataset& ds, ModelConfig cfg, const EmbeddingSpace* warm_start) {
  ClassifierTraining out;
  auto& c = out.classifier;
  c.vocab = ModelVocab::build(ds);
  c.classes = ds.classes;
  cfg.word_vocab = static_cast<int>(c.vocab.word_count());
  cfg.char_vocab = static_cast<int>(c.vocab.char_count());
  cfg.class_count = static_cast<int>(ds.classes.size());
  c.config = cfg;
  auto train_set = encode_split(c.vocab, ds, Split::Train);
  auto val_set = encode_split(c.vocab, ds, Split::Val);
  ModelParameters init = init_parameters(cfg, cfg.seed);
  if (warm_start) warm_start_word_embeddings(init, c.vocab, *warm_start);
  auto result = train(train_set, val_set, cfg, &init);
  c.params = std::move(result.params);
  out.log = std::move(result.log);
  out.best_epoch = result.best_epoch;
  return out;
}

}  // namespace emojitime
