#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emojitime/corpus.hpp"
#include "emojitime/dataset.hpp"
#include "emojitime/eval.hpp"
#include "emojitime/lstm.hpp"

namespace emojitime {

struct EmbeddingSpace;

enum class FusionMode { None, Early, Late };
std::string_view fusion_name(FusionMode m);
FusionMode parse_fusion(std::string_view name);

struct OptimizerConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  double clip_norm = 5.0;
  int max_epochs = 20;
  int patience = 3;
};

struct ModelConfig {
  static constexpr int kDateFieldDim = 10;
  static constexpr int kDateDim = 3 * kDateFieldDim;
  static constexpr int kMonths = 12;
  static constexpr int kDays = 7;
  static constexpr int kHours = 24;

  FusionMode fusion = FusionMode::Early;
  int char_vocab = 0;
  int word_vocab = 0;
  int char_emb_dim = 32;
  int char_hidden = 64;  // per direction
  int word_emb_dim = 128;
  int word_hidden = 256;
  bool word_bidirectional = false;
  int attention_dim = 0;  // 0: width of the word-layer output
  int fc_hidden = 256;
  int class_count = 0;
  double init_scale = 0.05;
  double forget_bias = 1.0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;

  /// Throws Error naming the first out-of-range field.
  void validate() const;

  int char_output_dim() const { return 2 * char_hidden; }
  int word_input_dim() const {
    return char_output_dim() + word_emb_dim + (fusion == FusionMode::Early ? kDateDim : 0);
  }
  int word_output_dim() const { return word_bidirectional ? 2 * word_hidden : word_hidden; }
  int attention_width() const { return attention_dim > 0 ? attention_dim : word_output_dim(); }
  int classifier_input_dim() const { return word_output_dim() + (fusion == FusionMode::Late ? kDateDim : 0); }
};

/// Every trainable tensor of the classifier. Date tables exist in every mode
/// but are only read when a fusion mode is active.
struct ModelParameters {
  Matrix char_emb;  // char_vocab x char_emb_dim
  Matrix char_fwd_w, char_fwd_b, char_bwd_w, char_bwd_b;
  Matrix word_emb;  // word_vocab x word_emb_dim
  Matrix word_fwd_w, word_fwd_b;
  Matrix word_bwd_w, word_bwd_b;  // 0 x 0 unless bidirectional
  Matrix att_w, att_b, att_context;
  Matrix month, day, hour;  // 12 / 7 / 24 x 10
  Matrix fc_w, fc_b;
  Matrix out_w, out_b;

  template <class F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  static ModelParameters zeros(const ModelConfig& cfg);
  void set_zero();
  std::size_t scalar_count() const;
  bool operator==(const ModelParameters& o) const;

 private:
  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    f("char_emb", s.char_emb);
    f("char_fwd_w", s.char_fwd_w);
    f("char_fwd_b", s.char_fwd_b);
    f("char_bwd_w", s.char_bwd_w);
    f("char_bwd_b", s.char_bwd_b);
    f("word_emb", s.word_emb);
    f("word_fwd_w", s.word_fwd_w);
    f("word_fwd_b", s.word_fwd_b);
    f("word_bwd_w", s.word_bwd_w);
    f("word_bwd_b", s.word_bwd_b);
    f("att_w", s.att_w);
    f("att_b", s.att_b);
    f("att_context", s.att_context);
    f("date_month", s.month);
    f("date_day", s.day);
    f("date_hour", s.hour);
    f("fc_w", s.fc_w);
    f("fc_b", s.fc_b);
    f("out_w", s.out_w);
    f("out_b", s.out_b);
  }
};

/// Uniform +-init_scale for tables and weights, zero biases, forget-gate
/// biases at forget_bias.
ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed);

/// Scalars the forward pass actually reads: date tables count only with an
/// active fusion mode.
std::size_t parameter_count(const ModelConfig& cfg);

/// Word and character ids; id 0 is the reserved unknown entry in both.
class ModelVocab {
 public:
  static constexpr int kUnknown = 0;
  ModelVocab();
  ModelVocab(std::vector<std::string> words, std::vector<char32_t> chars);
  /// Every token and character seen in the training split.
  static ModelVocab build(const PredictionDataset& ds);

  int word_id(const std::string& word) const;
  int char_id(char32_t c) const;
  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<std::string> words_;
  std::vector<char32_t> chars_;
  std::unordered_map<std::string, int> word_index_;
  std::unordered_map<char32_t, int> char_index_;
};

struct EncodedInput {
  std::vector<std::vector<int>> chars;  // per word
  std::vector<int> words;
  DateFeatures date;
};

EncodedInput encode(const ModelVocab& vocab, const std::vector<std::string>& tokens, const DateFeatures& date);

struct Prediction {
  std::vector<double> probabilities;
  std::vector<int> ranked;  // by probability, ties by class index
};

/// Activations kept for backpropagation.
struct ForwardTrace {
  std::vector<LstmTrace> char_fwd, char_bwd;
  std::vector<Vector> word_inputs;
  LstmTrace word_fwd, word_bwd;
  std::vector<Vector> hidden;  // word-layer outputs
  std::vector<Vector> att_u;
  Vector alpha;
  Vector summary;
  Vector date;
  Vector classifier_in;
  Vector fc_pre, fc_act;
  Vector logits;
  Vector probabilities;
};

/// 30-dim concatenation of the month, weekday and hour rows.
Vector date_embedding(const DateFeatures& f, const ModelParameters& p);

/// Final forward and backward hidden states of the character BiLSTM.
Vector encode_word_chars(std::span<const int> chars, const ModelParameters& p, const ModelConfig& cfg);

Prediction forward(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in,
                   ForwardTrace* trace = nullptr);

/// -log p(gold), floored at the smallest positive double.
double loss(const Prediction& pred, int gold);

/// Cross-entropy from the trace's logits (log-sum-exp form); accumulates
/// parameter gradients into `grads` and returns the loss.
double backward(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in,
                const ForwardTrace& trace, int gold, ModelParameters& grads);

/// Forward + log-softmax loss without gradients.
double example_loss(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in, int gold);

std::vector<std::pair<int, double>> predict_topk(const ModelParameters& p, const ModelConfig& cfg,
                                                 const EncodedInput& in, std::size_t k);

struct GradientCheckResult {
  double max_relative_error = 0;
  std::vector<std::pair<std::string, double>> per_tensor;
  /// Largest |analytic| seen in the date tables (exactly 0 without fusion).
  double date_table_max_analytic = 0;
  double date_table_max_numeric = 0;
};

/// Denominator floor of the relative error, so coordinates whose true
/// gradient is ~0 are judged by absolute difference.
inline constexpr double kGradCheckFloor = 1e-6;

/// Central differences (eps 1e-4) on up to `samples` random coordinates of
/// every non-empty tensor.
GradientCheckResult gradient_check(const ModelParameters& p, const ModelConfig& cfg, const EncodedInput& in,
                                   int gold, std::uint64_t seed, std::size_t samples = 20);

// Training.

struct TrainingExample {
  EncodedInput input;
  int label = 0;
};

class Adam {
 public:
  explicit Adam(const ModelConfig& cfg);
  void update(ModelParameters& p, const ModelParameters& grads, double lr);
  long steps() const { return step_; }

 private:
  OptimizerConfig opt_;
  ModelParameters m_, v_;
  long step_ = 0;
};

/// Mean loss over the batch, full backpropagation, global-norm clipping and
/// one Adam update. Throws DivergenceError on a non-finite loss.
double train_step(std::span<const TrainingExample* const> batch, ModelParameters& p, const ModelConfig& cfg,
                  Adam& opt, ModelParameters& grads);

struct EpochLog {
  double train_loss = 0;
  double val_macro_f1 = 0;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochLog> log;
  int best_epoch = -1;  // 0-based; -1 when no epoch ran
};

/// Early-stops on validation macro-F1 and returns the best-validation
/// parameters. Optional `initial` replaces seeded initialisation.
TrainResult train(const std::vector<TrainingExample>& train_set, const std::vector<TrainingExample>& val_set,
                  const ModelConfig& cfg, const ModelParameters* initial = nullptr);

/// Scores every example (rows in input order); inference runs in parallel.
EvalInput score_examples(const ModelParameters& p, const ModelConfig& cfg,
                         const std::vector<TrainingExample>& examples);

/// Trained model together with its vocabulary and class names.
struct Classifier {
  ModelConfig config;
  ModelVocab vocab;
  std::vector<std::string> classes;
  ModelParameters params;

  std::vector<std::pair<std::string, double>> predict(const std::vector<std::string>& tokens,
                                                      const DateFeatures& date, std::size_t k) const;
};

std::vector<TrainingExample> encode_split(const ModelVocab& vocab, const PredictionDataset& ds, Split split);

struct ClassifierTraining {
  Classifier classifier;
  std::vector<EpochLog> log;
  int best_epoch = -1;
};
/// Builds the vocabulary from the training split, sizes the config to the
/// dataset and trains.
ClassifierTraining train_classifier(const PredictionDataset& ds, ModelConfig cfg,
                                    const EmbeddingSpace* warm_start = nullptr);

/// Copies rows of `space` into the word table for every shared word; returns
/// how many rows were copied. Dimensions must match.
std::size_t warm_start_word_embeddings(ModelParameters& p, const ModelVocab& vocab, const EmbeddingSpace& space);

// Checkpoints: magic bytes, format version, JSON config echo (with vocab and
// classes), then per-tensor name/shape headers and little-endian float64 data.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const Classifier& c, const std::filesystem::path& path);
/// Throws ParseError on truncation, bad magic or a version mismatch.
Classifier load_checkpoint(const std::filesystem::path& path);

}  // namespace emojitime
