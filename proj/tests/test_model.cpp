#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "emojitime/error.hpp"
#include "emojitime/model.hpp"
#include "emojitime/random.hpp"
#include "oracles.hpp"

using namespace emojitime;

namespace {

ModelConfig tiny(FusionMode mode, bool bidi = false) {
  ModelConfig c;
  c.fusion = mode;
  c.char_vocab = 6;
  c.word_vocab = 5;
  c.char_emb_dim = 4;
  c.char_hidden = 3;
  c.word_emb_dim = 5;
  c.word_hidden = 6;
  c.word_bidirectional = bidi;
  c.fc_hidden = 7;
  c.class_count = 4;
  c.init_scale = 0.5;
  return c;
}

EncodedInput two_tokens(int month = 3, int dow = 5, int hour = 10) {
  EncodedInput in;
  in.words = {1, 3};
  in.chars = {{1, 2, 3}, {4, 5}};
  in.date.month = month;
  in.date.day_of_week = dow;
  in.date.hour = hour;
  return in;
}

void randomize(ModelParameters& p, std::uint64_t seed) {
  Rng rng(seed);
  p.visit([&](std::string_view, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform01(rng) - 0.5;
  });
}

}  // namespace

TEST(DateEmbedding, ConcatenatesSelectedRows) {
  auto cfg = tiny(FusionMode::Early);
  auto p = init_parameters(cfg, 3);
  DateFeatures f;
  f.month = 3;
  f.day_of_week = 5;
  f.hour = 10;
  Vector v = date_embedding(f, p);
  ASSERT_EQ(v.size(), 30);
  for (int i = 0; i < 10; ++i) {
    EXPECT_EQ(v[i], p.month(2, i));
    EXPECT_EQ(v[10 + i], p.day(4, i));
    EXPECT_EQ(v[20 + i], p.hour(9, i));
  }
  EXPECT_EQ(date_embedding(f, p), v);
  p.month.setZero();
  p.day.setZero();
  p.hour.setZero();
  EXPECT_EQ(date_embedding(f, p), Vector::Zero(30));
}

TEST(CharEncoder, ShapesAndZeroParameters) {
  auto cfg = tiny(FusionMode::None);
  auto p = init_parameters(cfg, 3);
  std::vector<int> one = {2};
  std::vector<int> three = {1, 2, 3};
  EXPECT_EQ(encode_word_chars(one, p, cfg).size(), 2 * cfg.char_hidden);
  EXPECT_EQ(encode_word_chars(three, p, cfg).size(), 2 * cfg.char_hidden);
  // i = f = o = 0.5, g = tanh(0) = 0, so c and h stay exactly zero.
  auto z = ModelParameters::zeros(cfg);
  EXPECT_EQ(encode_word_chars(three, z, cfg), Vector::Zero(2 * cfg.char_hidden));
}

TEST(Forward, ZeroOutputLayerIsUniform) {
  auto cfg = tiny(FusionMode::Late);
  auto p = init_parameters(cfg, 5);
  p.out_w.setZero();
  p.out_b.setZero();
  auto pred = forward(p, cfg, two_tokens());
  for (double q : pred.probabilities) EXPECT_DOUBLE_EQ(q, 0.25);
  // Ties rank by class index.
  EXPECT_EQ(pred.ranked, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Forward, SingleTokenAttentionIsOne) {
  for (auto mode : {FusionMode::None, FusionMode::Early, FusionMode::Late}) {
    auto cfg = tiny(mode);
    auto p = init_parameters(cfg, 7);
    randomize(p, 11);
    EncodedInput in = two_tokens();
    in.words = {2};
    in.chars = {{1, 4}};
    ForwardTrace tr;
    forward(p, cfg, in, &tr);
    ASSERT_EQ(tr.alpha.size(), 1);
    EXPECT_EQ(tr.alpha[0], 1.0);
  }
}

TEST(Forward, NoneModeIgnoresDate) {
  auto cfg = tiny(FusionMode::None);
  auto p = init_parameters(cfg, 9);
  randomize(p, 12);
  auto a = forward(p, cfg, two_tokens(1, 1, 1));
  auto b = forward(p, cfg, two_tokens(12, 7, 24));
  EXPECT_EQ(a.probabilities, b.probabilities);
  EXPECT_EQ(a.ranked, b.ranked);
}

TEST(Forward, DateMattersWithFusion) {
  for (auto mode : {FusionMode::Early, FusionMode::Late}) {
    auto cfg = tiny(mode);
    auto p = init_parameters(cfg, 9);
    randomize(p, 12);
    auto a = forward(p, cfg, two_tokens(1, 1, 1));
    auto b = forward(p, cfg, two_tokens(12, 7, 24));
    EXPECT_NE(a.probabilities, b.probabilities) << fusion_name(mode);
  }
}

TEST(Forward, DistributionsSumToOne) {
  for (auto mode : {FusionMode::None, FusionMode::Early, FusionMode::Late}) {
    for (bool bidi : {false, true}) {
      auto cfg = tiny(mode, bidi);
      auto p = init_parameters(cfg, 21);
      for (std::uint64_t s = 0; s < 20; ++s) {
        randomize(p, s);
        ForwardTrace tr;
        auto pred = forward(p, cfg, two_tokens(1 + s % 12, 1 + s % 7, 1 + s % 24), &tr);
        double sum = 0;
        for (double q : pred.probabilities) sum += q;
        EXPECT_NEAR(sum, 1.0, 1e-6);
        EXPECT_NEAR(tr.alpha.sum(), 1.0, 1e-6);
      }
    }
  }
}

TEST(Loss, UniformOverThreeHundredClasses) {
  Prediction pred;
  pred.probabilities.assign(300, 1.0 / 300);
  EXPECT_NEAR(loss(pred, 17), 5.7038, 1e-4);
  EXPECT_NEAR(loss(pred, 17), std::log(300.0), 1e-12);
  EXPECT_EQ(loss(pred, 0), loss(pred, 299));
  pred.probabilities.assign(300, 0.0);
  pred.probabilities[4] = 1.0;
  EXPECT_EQ(loss(pred, 4), 0.0);
  EXPECT_TRUE(std::isfinite(loss(pred, 5)));
}

TEST(Loss, BackwardMatchesForwardLoss) {
  auto cfg = tiny(FusionMode::Early);
  auto p = init_parameters(cfg, 2);
  randomize(p, 4);
  auto in = two_tokens();
  ForwardTrace tr;
  auto pred = forward(p, cfg, in, &tr);
  auto g = ModelParameters::zeros(cfg);
  EXPECT_NEAR(backward(p, cfg, in, tr, 2, g), loss(pred, 2), 1e-12);
  EXPECT_NEAR(example_loss(p, cfg, in, 2), loss(pred, 2), 1e-12);
}

class GradientCheck : public ::testing::TestWithParam<std::tuple<FusionMode, bool>> {};

TEST_P(GradientCheck, MatchesFiniteDifferences) {
  auto [mode, bidi] = GetParam();
  auto cfg = tiny(mode, bidi);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto p = init_parameters(cfg, seed);
    randomize(p, seed * 31);
    auto r = gradient_check(p, cfg, two_tokens(), static_cast<int>(seed % 4), seed, 40);
    EXPECT_LT(r.max_relative_error, 1e-4) << fusion_name(mode) << " bidi=" << bidi << " seed=" << seed;
    for (const auto& [name, err] : r.per_tensor)
      EXPECT_LT(err, 1e-4) << name;
    if (mode == FusionMode::None) {
      EXPECT_EQ(r.date_table_max_analytic, 0.0);
      EXPECT_LT(r.date_table_max_numeric, 1e-8);
    } else {
      EXPECT_GT(r.date_table_max_analytic, 0.0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Modes, GradientCheck,
                         ::testing::Combine(::testing::Values(FusionMode::None, FusionMode::Early,
                                                              FusionMode::Late),
                                            ::testing::Bool()));

TEST(GradientCheck, Deterministic) {
  auto cfg = tiny(FusionMode::Late);
  auto p = init_parameters(cfg, 8);
  auto a = gradient_check(p, cfg, two_tokens(), 1, 99);
  auto b = gradient_check(p, cfg, two_tokens(), 1, 99);
  EXPECT_EQ(a.max_relative_error, b.max_relative_error);
  EXPECT_EQ(a.per_tensor, b.per_tensor);
}

TEST(GradientCheck, AttentionProjectionWidth) {
  auto cfg = tiny(FusionMode::Early);
  cfg.attention_dim = 5;
  auto p = init_parameters(cfg, 4);
  randomize(p, 40);
  EXPECT_LT(gradient_check(p, cfg, two_tokens(), 3, 4, 40).max_relative_error, 1e-4);
}

TEST(Backward, NoneModeLeavesDateGradientsZero) {
  auto cfg = tiny(FusionMode::None);
  auto p = init_parameters(cfg, 2);
  auto in = two_tokens();
  ForwardTrace tr;
  forward(p, cfg, in, &tr);
  auto g = ModelParameters::zeros(cfg);
  backward(p, cfg, in, tr, 1, g);
  EXPECT_EQ(g.month.squaredNorm(), 0.0);
  EXPECT_EQ(g.day.squaredNorm(), 0.0);
  EXPECT_EQ(g.hour.squaredNorm(), 0.0);
}

TEST(ParameterCount, FusionAccounting) {
  auto none = tiny(FusionMode::None);
  auto early = tiny(FusionMode::Early);
  auto late = tiny(FusionMode::Late);
  const std::size_t tables = (12 + 7 + 24) * 10;
  // Early: 30 more inputs to each of the 4 word-LSTM gates.
  EXPECT_EQ(parameter_count(early), parameter_count(none) + 30 * 4 * none.word_hidden + tables);
  // Late: 30 more inputs to the fully connected layer.
  EXPECT_EQ(parameter_count(late), parameter_count(none) + 30 * none.fc_hidden + tables);
  auto early_bi = tiny(FusionMode::Early, true);
  auto none_bi = tiny(FusionMode::None, true);
  EXPECT_EQ(parameter_count(early_bi), parameter_count(none_bi) + 2 * 30 * 4 * none.word_hidden + tables);
}

TEST(Forward, LabelPermutationPermutesPrediction) {
  auto cfg = tiny(FusionMode::Early);
  auto p = init_parameters(cfg, 13);
  randomize(p, 14);
  const std::vector<int> perm = {2, 0, 3, 1};  // new class perm[k] = old class k
  auto q = p;
  for (int k = 0; k < 4; ++k) {
    q.out_w.row(perm[k]) = p.out_w.row(k);
    q.out_b(perm[k], 0) = p.out_b(k, 0);
  }
  auto a = forward(p, cfg, two_tokens());
  auto b = forward(q, cfg, two_tokens());
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(a.probabilities[k], b.probabilities[perm[k]]);
  EXPECT_EQ(perm[a.ranked[0]], b.ranked[0]);
}

TEST(PredictTopK, MatchesFullSort) {
  auto cfg = tiny(FusionMode::Late);
  auto p = init_parameters(cfg, 13);
  for (std::uint64_t s = 0; s < 10; ++s) {
    randomize(p, s + 100);
    auto in = two_tokens();
    auto pred = forward(p, cfg, in);
    auto order = oracle::ranking(pred.probabilities.data(), 4);
    auto all = predict_topk(p, cfg, in, 4);
    ASSERT_EQ(all.size(), 4u);
    std::vector<int> seen;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_EQ(all[j].first, static_cast<int>(order[j]));
      EXPECT_EQ(all[j].second, pred.probabilities[order[j]]);
      if (j) EXPECT_GE(all[j - 1].second, all[j].second);
      seen.push_back(all[j].first);
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(predict_topk(p, cfg, in, 2).size(), 2u);
  }
}

TEST(TrainStep, ZeroLearningRateKeepsParameters) {
  auto cfg = tiny(FusionMode::Early);
  cfg.optimizer.lr = 0;
  auto p = init_parameters(cfg, 3);
  auto before = p;
  TrainingExample ex{two_tokens(), 2};
  std::vector<const TrainingExample*> batch = {&ex};
  Adam adam(cfg);
  auto grads = ModelParameters::zeros(cfg);
  train_step(batch, p, cfg, adam, grads);
  EXPECT_TRUE(p == before);
}

TEST(TrainStep, OneStepDecreasesLoss) {
  for (auto mode : {FusionMode::None, FusionMode::Early, FusionMode::Late}) {
    auto cfg = tiny(mode);
    cfg.optimizer.lr = 1e-3;
    auto p = init_parameters(cfg, 3);
    TrainingExample ex{two_tokens(), 1};
    std::vector<const TrainingExample*> batch = {&ex};
    Adam adam(cfg);
    auto grads = ModelParameters::zeros(cfg);
    double before = example_loss(p, cfg, ex.input, ex.label);
    double reported = train_step(batch, p, cfg, adam, grads);
    EXPECT_NEAR(reported, before, 1e-12);
    EXPECT_LT(example_loss(p, cfg, ex.input, ex.label), before) << fusion_name(mode);
  }
}

namespace {

// Class = which of three marker words appears; two filler words per example.
std::vector<TrainingExample> separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample ex;
    ex.label = static_cast<int>(i % 3);
    int filler = 4 + static_cast<int>(uniform_index(rng, 2));
    ex.input.words = {1 + ex.label, filler};
    ex.input.chars = {{1 + ex.label}, {4, 5}};
    ex.input.date.month = 1 + static_cast<int>(uniform_index(rng, 12));
    out.push_back(ex);
  }
  return out;
}

}  // namespace

TEST(Train, SeparableDatasetLossDecreases) {
  auto cfg = tiny(FusionMode::Early);
  cfg.word_vocab = 6;
  cfg.class_count = 3;
  cfg.optimizer.lr = 1e-2;
  cfg.optimizer.max_epochs = 8;
  cfg.optimizer.patience = 8;
  cfg.optimizer.batch_size = 8;
  auto train_set = separable(120, 1);
  auto val_set = separable(30, 2);
  auto r = train(train_set, val_set, cfg);
  ASSERT_EQ(r.log.size(), 8u);
  EXPECT_LT(r.log.back().train_loss, r.log.front().train_loss);
  EXPECT_GT(r.log[r.best_epoch].val_macro_f1, 0.9);

  auto again = train(train_set, val_set, cfg);
  ASSERT_EQ(again.log.size(), r.log.size());
  for (std::size_t e = 0; e < r.log.size(); ++e) {
    EXPECT_EQ(again.log[e].train_loss, r.log[e].train_loss);
    EXPECT_EQ(again.log[e].val_macro_f1, r.log[e].val_macro_f1);
  }
  EXPECT_TRUE(again.params == r.params);
}

TEST(Train, ZeroEpochsReturnsInitialisation) {
  auto cfg = tiny(FusionMode::Late);
  cfg.word_vocab = 6;
  cfg.class_count = 3;
  cfg.optimizer.max_epochs = 0;
  auto r = train(separable(12, 1), separable(6, 2), cfg);
  EXPECT_TRUE(r.log.empty());
  EXPECT_EQ(r.best_epoch, -1);
  EXPECT_TRUE(r.params == init_parameters(cfg, cfg.seed));
}

TEST(Train, WarmStartReplacesInitialisation) {
  auto cfg = tiny(FusionMode::None);
  cfg.word_vocab = 6;
  cfg.class_count = 3;
  cfg.optimizer.max_epochs = 0;
  auto start = init_parameters(cfg, 77);
  auto r = train(separable(12, 1), separable(6, 2), cfg, &start);
  EXPECT_TRUE(r.params == start);
}

namespace {

Classifier tiny_classifier(FusionMode mode) {
  Classifier c;
  c.config = tiny(mode, mode == FusionMode::Late);
  c.vocab = ModelVocab({"alpha", "beta", "gamma", "delta"}, {U'a', U'b', U'e', U'g', U'l'});
  c.classes = {"\xF0\x9F\x98\x82", "\xF0\x9F\x8C\x85", "x", "y"};
  c.params = init_parameters(c.config, 5);
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "emojitime_test_model";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitIdentical) {
  for (auto mode : {FusionMode::None, FusionMode::Early, FusionMode::Late}) {
    auto c = tiny_classifier(mode);
    auto path = temp_path(std::string("rt_") + std::string(fusion_name(mode)) + ".ckpt");
    save_checkpoint(c, path);
    auto d = load_checkpoint(path);
    EXPECT_TRUE(d.params == c.params);
    EXPECT_EQ(d.classes, c.classes);
    EXPECT_EQ(d.vocab.words(), c.vocab.words());
    EXPECT_EQ(d.vocab.chars(), c.vocab.chars());
    EXPECT_EQ(d.config.fusion, c.config.fusion);
    EXPECT_EQ(d.config.word_bidirectional, c.config.word_bidirectional);
    DateFeatures f;
    f.month = 7;
    f.day_of_week = 2;
    f.hour = 13;
    auto in_c = encode(c.vocab, {"alpha", "zeta", "beta"}, f);
    auto in_d = encode(d.vocab, {"alpha", "zeta", "beta"}, f);
    EXPECT_EQ(forward(c.params, c.config, in_c).probabilities, forward(d.params, d.config, in_d).probabilities);
    EXPECT_EQ(c.predict({"gamma"}, f, 2), d.predict({"gamma"}, f, 2));
  }
}

TEST(Checkpoint, TruncatedFileIsRejected) {
  auto c = tiny_classifier(FusionMode::Early);
  auto path = temp_path("trunc.ckpt");
  save_checkpoint(c, path);
  auto size = std::filesystem::file_size(path);
  for (auto keep : {std::uintmax_t{0}, std::uintmax_t{6}, size / 2, size - 1}) {
    std::filesystem::resize_file(path, keep);
    EXPECT_THROW(load_checkpoint(path), Error) << keep;
    save_checkpoint(c, path);
  }
}

TEST(Checkpoint, VersionMismatchNamesBoth) {
  auto c = tiny_classifier(FusionMode::None);
  auto path = temp_path("version.ckpt");
  save_checkpoint(c, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const unsigned char v[4] = {7, 0, 0, 0};
    f.write(reinterpret_cast<const char*>(v), 4);
  }
  try {
    load_checkpoint(path);
    FAIL() << "expected a version error";
  } catch (const ParseError& e) {
    std::string what = e.what();
    EXPECT_NE(what.find("expected 1"), std::string::npos) << what;
    EXPECT_NE(what.find("found 7"), std::string::npos) << what;
  }
}

TEST(Checkpoint, BadMagicIsRejected) {
  auto path = temp_path("magic.ckpt");
  std::ofstream(path) << "NOTAMODEL and then some more bytes";
  EXPECT_THROW(load_checkpoint(path), ParseError);
}
