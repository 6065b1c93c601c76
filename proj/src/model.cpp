#include "emojitime/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emojitime/error.hpp"
#include "emojitime/random.hpp"
#include "emojitime/unicode.hpp"

namespace emojitime {

std::string_view fusion_name(FusionMode m) {
  switch (m) {
    case FusionMode::None: return "none";
    case FusionMode::Early: return "early";
    case FusionMode::Late: return "late";
  }
  return "?";
}

FusionMode parse_fusion(std::string_view name) {
  if (name == "none") return FusionMode::None;
  if (name == "early") return FusionMode::Early;
  if (name == "late") return FusionMode::Late;
  throw Error("unknown fusion mode '" + std::string(name) + "' (expected none, early or late)");
}

void ModelConfig::validate() const {
  auto at_least = [](int v, int lo, const char* name) {
    if (v < lo) throw Error(std::string(name) + " must be >= " + std::to_string(lo));
  };
  at_least(char_vocab, 1, "char_vocab");
  at_least(word_vocab, 1, "word_vocab");
  at_least(char_emb_dim, 1, "char_emb_dim");
  at_least(char_hidden, 1, "char_hidden");
  at_least(word_emb_dim, 1, "word_emb_dim");
  at_least(word_hidden, 1, "word_hidden");
  at_least(attention_dim, 0, "attention_dim");
  at_least(fc_hidden, 1, "fc_hidden");
  at_least(class_count, 1, "class_count");
  if (class_count > 300) throw Error("class_count must be <= 300");
  at_least(optimizer.batch_size, 1, "batch_size");
  at_least(optimizer.max_epochs, 0, "max_epochs");
  at_least(optimizer.patience, 1, "patience");
  if (!(optimizer.lr >= 0)) throw Error("lr must be >= 0");
  if (!(optimizer.clip_norm > 0)) throw Error("clip_norm must be > 0");
  if (!(init_scale >= 0)) throw Error("init_scale must be >= 0");
}

ModelParameters ModelParameters::zeros(const ModelConfig& cfg) {
  cfg.validate();
  ModelParameters p;
  const int ch = cfg.char_hidden, wh = cfg.word_hidden;
  p.char_emb = Matrix::Zero(cfg.char_vocab, cfg.char_emb_dim);
  p.char_fwd_w = Matrix::Zero(4 * ch, cfg.char_emb_dim + ch);
  p.char_fwd_b = Matrix::Zero(4 * ch, 1);
  p.char_bwd_w = Matrix::Zero(4 * ch, cfg.char_emb_dim + ch);
  p.char_bwd_b = Matrix::Zero(4 * ch, 1);
  p.word_emb = Matrix::Zero(cfg.word_vocab, cfg.word_emb_dim);
  p.word_fwd_w = Matrix::Zero(4 * wh, cfg.word_input_dim() + wh);
  p.word_fwd_b = Matrix::Zero(4 * wh, 1);
  if (cfg.word_bidirectional) {
    p.word_bwd_w = Matrix::Zero(4 * wh, cfg.word_input_dim() + wh);
    p.word_bwd_b = Matrix::Zero(4 * wh, 1);
  }
  const int a = cfg.attention_width();
  p.att_w = Matrix::Zero(a, cfg.word_output_dim());
  p.att_b = Matrix::Zero(a, 1);
  p.att_context = Matrix::Zero(a, 1);
  p.month = Matrix::Zero(ModelConfig::kMonths, ModelConfig::kDateFieldDim);
  p.day = Matrix::Zero(ModelConfig::kDays, ModelConfig::kDateFieldDim);
  p.hour = Matrix::Zero(ModelConfig::kHours, ModelConfig::kDateFieldDim);
  p.fc_w = Matrix::Zero(cfg.fc_hidden, cfg.classifier_input_dim());
  p.fc_b = Matrix::Zero(cfg.fc_hidden, 1);
  p.out_w = Matrix::Zero(cfg.class_count, cfg.fc_hidden);
  p.out_b = Matrix::Zero(cfg.class_count, 1);
  return p;
}

void ModelParameters::set_zero() {
  visit([](std::string_view, Matrix& m) { m.setZero(); });
}

std::size_t ModelParameters::scalar_count() const {
  std::size_t n = 0;
  visit([&](std::string_view, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool ModelParameters::operator==(const ModelParameters& o) const {
  std::vector<const Matrix*> mine, theirs;
  visit([&](std::string_view, const Matrix& m) { mine.push_back(&m); });
  o.visit([&](std::string_view, const Matrix& m) { theirs.push_back(&m); });
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (mine[i]->rows() != theirs[i]->rows() || mine[i]->cols() != theirs[i]->cols()) return false;
    if (*mine[i] != *theirs[i]) return false;
  }
  return true;
}

ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  auto p = ModelParameters::zeros(cfg);
  Rng rng(derive_seed(seed, "model.init"));
  p.visit([&](std::string_view name, Matrix& m) {
    const bool bias = name.size() >= 2 && name.substr(name.size() - 2) == "_b";
    if (bias) return;
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = (2 * uniform01(rng) - 1) * cfg.init_scale;
  });
  auto forget = [&](Matrix& b) {
    if (b.size() == 0) return;
    const Eigen::Index h = b.rows() / 4;
    b.block(h, 0, h, 1).setConstant(cfg.forget_bias);
  };
  forget(p.char_fwd_b);
  forget(p.char_bwd_b);
  forget(p.word_fwd_b);
  forget(p.word_bwd_b);
  return p;
}

std::size_t parameter_count(const ModelConfig& cfg) {
  auto p = ModelParameters::zeros(cfg);
  std::size_t n = p.scalar_count();
  if (cfg.fusion == FusionMode::None)
    n -= static_cast<std::size_t>(p.month.size() + p.day.size() + p.hour.size());
  return n;
}

ModelVocab::ModelVocab() : ModelVocab({}, {}) {}

ModelVocab::ModelVocab(std::vector<std::string> words, std::vector<char32_t> chars) {
  words_.push_back("<unk>");
  chars_.push_back(0xFFFD);
  for (auto& w : words)
    if (w != "<unk>") words_.push_back(std::move(w));
  for (auto c : chars)
    if (c != 0xFFFD) chars_.push_back(c);
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (!word_index_.emplace(words_[i], static_cast<int>(i)).second) throw Error("model vocab: duplicate word");
  for (std::size_t i = 0; i < chars_.size(); ++i)
    if (!char_index_.emplace(chars_[i], static_cast<int>(i)).second) throw Error("model vocab: duplicate char");
}

ModelVocab ModelVocab::build(const PredictionDataset& ds) {
  std::vector<std::string> words;
  std::vector<char32_t> chars;
  std::unordered_map<std::string, bool> seen_w;
  std::unordered_map<char32_t, bool> seen_c;
  for (const auto& e : ds.examples) {
    if (e.split != Split::Train) continue;
    for (const auto& t : e.tokens) {
      if (seen_w.emplace(t, true).second) words.push_back(t);
      for (char32_t c : unicode::decode(t))
        if (seen_c.emplace(c, true).second) chars.push_back(c);
    }
  }
  std::sort(words.begin(), words.end());
  std::sort(chars.begin(), chars.end());
  return ModelVocab(std::move(words), std::move(chars));
}

int ModelVocab::word_id(const std::string& word) const {
  auto it = word_index_.find(word);
  return it == word_index_.end() ? kUnknown : it->second;
}

int ModelVocab::char_id(char32_t c) const {
  auto it = char_index_.find(c);
  return it == char_index_.end() ? kUnknown : it->second;
}

EncodedInput encode(const ModelVocab& vocab, const std::vector<std::string>& tokens, const DateFeatures& date) {
  EncodedInput in;
  in.date = date;
  for (const auto& t : tokens) {
    in.words.push_back(vocab.word_id(t));
    std::vector<int> cs;
    for (char32_t c : unicode::decode(t)) cs.push_back(vocab.char_id(c));
    in.chars.push_back(std::move(cs));
  }
  return in;
}

Vector date_embedding(const DateFeatures& f, const ModelParameters& p) {
  auto row = [](const Matrix& table, int index, const char* field) -> Vector {
    if (index < 1 || index > table.rows())
      throw Error(std::string("date feature '") + field + "' out of range: " + std::to_string(index));
    return table.row(index - 1).transpose();
  };
  Vector out(ModelConfig::kDateDim);
  out << row(p.month, f.month, "month"), row(p.day, f.day_of_week, "day_of_week"), row(p.hour, f.hour, "hour");
  return out;
}

namespace {

void char_encode(std::span<const int> chars, const ModelParameters& p, LstmTrace& fwd, LstmTrace& bwd,
                 Vector& out) {
  if (chars.empty()) throw Error("cannot encode an empty word");
  std::vector<Vector> xs;
  xs.reserve(chars.size());
  for (int c : chars) {
    if (c < 0 || c >= p.char_emb.rows()) throw Error("character id out of range");
    xs.push_back(p.char_emb.row(c).transpose());
  }
  lstm_forward(p.char_fwd_w, p.char_fwd_b, xs, fwd);
  std::reverse(xs.begin(), xs.end());
  lstm_forward(p.char_bwd_w, p.char_bwd_b, xs, bwd);
  const auto h = fwd.last_h().size();
  out.resize(2 * h);
  out << fwd.last_h(), bwd.last_h();
}

void softmax(const Vector& logits, Vector& out) {
  const double mx = logits.maxCoeff();
  out = (logits.array() - mx).exp();
  out /= out.sum();
}

double log_softmax_loss(const Vector& logits, int gold) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  return lse - logits[gold];
}

std::vector<int> rank_classes(const std::vector<double>& probs) {
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return probs[a] > probs[b]; });
  return order;
}

}  // namespace

Vector encode_word_chars(std::span<const int> chars, const ModelParameters& p, const ModelConfig&) {
  LstmTrace f, b;
  Vector out;
  char_encode(chars, p, f, b, out);
  return out;
}

Prediction forward(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in, ForwardTrace* trace) {
  const std::size_t n = in.words.size();
  if (n == 0) throw Error("cannot classify an empty token sequence");
  if (in.chars.size() != n) throw Error("encoded input: word and character sequences differ in length");
  ForwardTrace local;
  ForwardTrace& tr = trace ? *trace : local;

  if (cfg.fusion != FusionMode::None) tr.date = date_embedding(in.date, p);
  else tr.date.resize(0);

  tr.char_fwd.resize(n);
  tr.char_bwd.resize(n);
  tr.word_inputs.resize(n);
  const int cdim = cfg.char_output_dim();
  Vector chars_out;
  for (std::size_t t = 0; t < n; ++t) {
    char_encode(in.chars[t], p, tr.char_fwd[t], tr.char_bwd[t], chars_out);
    const int w = in.words[t];
    if (w < 0 || w >= p.word_emb.rows()) throw Error("word id out of range");
    Vector& x = tr.word_inputs[t];
    x.resize(cfg.word_input_dim());
    x.head(cdim) = chars_out;
    x.segment(cdim, cfg.word_emb_dim) = p.word_emb.row(w).transpose();
    if (cfg.fusion == FusionMode::Early) x.tail(ModelConfig::kDateDim) = tr.date;
  }

  lstm_forward(p.word_fwd_w, p.word_fwd_b, tr.word_inputs, tr.word_fwd);
  tr.hidden.resize(n);
  if (cfg.word_bidirectional) {
    std::vector<Vector> rev(tr.word_inputs.rbegin(), tr.word_inputs.rend());
    lstm_forward(p.word_bwd_w, p.word_bwd_b, rev, tr.word_bwd);
    const int h = cfg.word_hidden;
    for (std::size_t t = 0; t < n; ++t) {
      tr.hidden[t].resize(2 * h);
      tr.hidden[t] << tr.word_fwd.steps[t].h, tr.word_bwd.steps[n - 1 - t].h;
    }
  } else {
    for (std::size_t t = 0; t < n; ++t) tr.hidden[t] = tr.word_fwd.steps[t].h;
  }

  tr.att_u.resize(n);
  Vector scores(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    tr.att_u[t] = (p.att_w * tr.hidden[t] + p.att_b.col(0)).array().tanh();
    scores[static_cast<Eigen::Index>(t)] = tr.att_u[t].dot(p.att_context.col(0));
  }
  softmax(scores, tr.alpha);
  tr.summary = Vector::Zero(cfg.word_output_dim());
  for (std::size_t t = 0; t < n; ++t) tr.summary += tr.alpha[static_cast<Eigen::Index>(t)] * tr.hidden[t];

  if (cfg.fusion == FusionMode::Late) {
    tr.classifier_in.resize(cfg.classifier_input_dim());
    tr.classifier_in << tr.summary, tr.date;
  } else {
    tr.classifier_in = tr.summary;
  }
  tr.fc_pre = p.fc_w * tr.classifier_in + p.fc_b.col(0);
  tr.fc_act = tr.fc_pre.cwiseMax(0.0);
  tr.logits = p.out_w * tr.fc_act + p.out_b.col(0);
  softmax(tr.logits, tr.probabilities);

  Prediction pred;
  pred.probabilities.assign(tr.probabilities.data(), tr.probabilities.data() + tr.probabilities.size());
  pred.ranked = rank_classes(pred.probabilities);
  return pred;
}

double loss(const Prediction& pred, int gold) {
  if (gold < 0 || static_cast<std::size_t>(gold) >= pred.probabilities.size())
    throw Error("gold class out of range");
  return -std::log(std::max(pred.probabilities[static_cast<std::size_t>(gold)], std::numeric_limits<double>::min()));
}

double example_loss(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in, int gold) {
  ForwardTrace tr;
  forward(p, cfg, in, &tr);
  if (gold < 0 || gold >= tr.logits.size()) throw Error("gold class out of range");
  return log_softmax_loss(tr.logits, gold);
}

double backward(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in, const ForwardTrace& tr,
                int gold, ModelParameters& g) {
  if (gold < 0 || gold >= tr.logits.size()) throw Error("gold class out of range");
  const std::size_t n = in.words.size();
  const double value = log_softmax_loss(tr.logits, gold);

  Vector dlogits = tr.probabilities;
  dlogits[gold] -= 1.0;
  g.out_w.noalias() += dlogits * tr.fc_act.transpose();
  g.out_b.col(0) += dlogits;
  Vector dpre = p.out_w.transpose() * dlogits;
  for (Eigen::Index i = 0; i < dpre.size(); ++i)
    if (tr.fc_pre[i] <= 0) dpre[i] = 0;
  g.fc_w.noalias() += dpre * tr.classifier_in.transpose();
  g.fc_b.col(0) += dpre;
  const Vector dcin = p.fc_w.transpose() * dpre;
  const int out_dim = cfg.word_output_dim();
  const Vector dsummary = dcin.head(out_dim);
  Vector ddate = Vector::Zero(ModelConfig::kDateDim);
  if (cfg.fusion == FusionMode::Late) ddate += dcin.tail(ModelConfig::kDateDim);

  // Attention: summary = sum_t alpha_t h_t, alpha = softmax(u_t . context).
  std::vector<Vector> dh(n);
  Vector dalpha(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    dh[t] = tr.alpha[ti] * dsummary;
    dalpha[ti] = tr.hidden[t].dot(dsummary);
  }
  const double mean = tr.alpha.dot(dalpha);
  const Vector dscore = tr.alpha.cwiseProduct((dalpha.array() - mean).matrix());
  for (std::size_t t = 0; t < n; ++t) {
    const double ds = dscore[static_cast<Eigen::Index>(t)];
    g.att_context.col(0) += ds * tr.att_u[t];
    const Vector du = ds * p.att_context.col(0);
    const Vector dpre_att = du.cwiseProduct((1.0 - tr.att_u[t].array().square()).matrix());
    g.att_w.noalias() += dpre_att * tr.hidden[t].transpose();
    g.att_b.col(0) += dpre_att;
    dh[t].noalias() += p.att_w.transpose() * dpre_att;
  }

  std::vector<Vector> dx;
  const int wh = cfg.word_hidden;
  if (cfg.word_bidirectional) {
    std::vector<Vector> dh_f(n), dh_b(n);
    for (std::size_t t = 0; t < n; ++t) {
      dh_f[t] = dh[t].head(wh);
      dh_b[n - 1 - t] = dh[t].tail(wh);
    }
    dx = lstm_backward(p.word_fwd_w, tr.word_fwd, dh_f, g.word_fwd_w, g.word_fwd_b);
    auto dx_b = lstm_backward(p.word_bwd_w, tr.word_bwd, dh_b, g.word_bwd_w, g.word_bwd_b);
    for (std::size_t t = 0; t < n; ++t) dx[t] += dx_b[n - 1 - t];
  } else {
    dx = lstm_backward(p.word_fwd_w, tr.word_fwd, dh, g.word_fwd_w, g.word_fwd_b);
  }

  const int ch = cfg.char_hidden;
  const int cdim = cfg.char_output_dim();
  for (std::size_t t = 0; t < n; ++t) {
    g.word_emb.row(in.words[t]) += dx[t].segment(cdim, cfg.word_emb_dim).transpose();
    if (cfg.fusion == FusionMode::Early) ddate += dx[t].tail(ModelConfig::kDateDim);

    const auto& chars = in.chars[t];
    const std::size_t len = chars.size();
    std::vector<Vector> dhc(len, Vector::Zero(ch));
    dhc[len - 1] = dx[t].head(ch);
    auto dxf = lstm_backward(p.char_fwd_w, tr.char_fwd[t], dhc, g.char_fwd_w, g.char_fwd_b);
    dhc[len - 1] = dx[t].segment(ch, ch);
    auto dxb = lstm_backward(p.char_bwd_w, tr.char_bwd[t], dhc, g.char_bwd_w, g.char_bwd_b);
    for (std::size_t k = 0; k < len; ++k) {
      g.char_emb.row(chars[k]) += dxf[k].transpose();
      g.char_emb.row(chars[len - 1 - k]) += dxb[k].transpose();
    }
  }

  if (cfg.fusion != FusionMode::None) {
    constexpr int d = ModelConfig::kDateFieldDim;
    g.month.row(in.date.month - 1) += ddate.segment(0, d).transpose();
    g.day.row(in.date.day_of_week - 1) += ddate.segment(d, d).transpose();
    g.hour.row(in.date.hour - 1) += ddate.segment(2 * d, d).transpose();
  }
  return value;
}

std::vector<std::pair<int, double>> predict_topk(const ModelParameters& p, const ModelConfig& cfg,
                                                 const EncodedInput& in, std::size_t k) {
  if (k == 0) throw Error("predict_topk: k must be >= 1");
  auto pred = forward(p, cfg, in);
  k = std::min(k, pred.ranked.size());
  std::vector<std::pair<int, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.emplace_back(pred.ranked[i], pred.probabilities[static_cast<std::size_t>(pred.ranked[i])]);
  return out;
}

GradientCheckResult gradient_check(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in,
                                   int gold, std::uint64_t seed, std::size_t samples) {
  ModelParameters grads = ModelParameters::zeros(cfg);
  ForwardTrace tr;
  forward(p, cfg, in, &tr);
  backward(p, cfg, in, tr, gold, grads);

  ModelParameters probe = p;
  std::vector<std::pair<std::string_view, Matrix*>> probe_tensors;
  std::vector<const Matrix*> grad_tensors;
  probe.visit([&](std::string_view name, Matrix& m) { probe_tensors.emplace_back(name, &m); });
  grads.visit([&](std::string_view, const Matrix& m) { grad_tensors.push_back(&m); });

  constexpr double eps = 1e-4;
  Rng rng(derive_seed(seed, "model.gradcheck"));
  GradientCheckResult result;
  for (std::size_t ti = 0; ti < probe_tensors.size(); ++ti) {
    auto [name, tensor] = probe_tensors[ti];
    const auto size = static_cast<std::size_t>(tensor->size());
    if (size == 0) continue;
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), 0);
    if (size > samples) {
      shuffle(coords.begin(), coords.end(), rng);
      coords.resize(samples);
    }
    const bool date_table = name.substr(0, 5) == "date_";
    double worst = 0;
    for (auto c : coords) {
      double& x = tensor->data()[c];
      const double saved = x;
      x = saved + eps;
      const double lp = example_loss(probe, cfg, in, gold);
      x = saved - eps;
      const double lm = example_loss(probe, cfg, in, gold);
      x = saved;
      const double numeric = (lp - lm) / (2 * eps);
      const double analytic = grad_tensors[ti]->data()[c];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
      if (date_table) {
        result.date_table_max_analytic = std::max(result.date_table_max_analytic, std::abs(analytic));
        result.date_table_max_numeric = std::max(result.date_table_max_numeric, std::abs(numeric));
      }
    }
    result.per_tensor.emplace_back(std::string(name), worst);
    result.max_relative_error = std::max(result.max_relative_error, worst);
  }
  return result;
}

}  // namespace emojitime
