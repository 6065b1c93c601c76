#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emojitime/vocab.hpp"

namespace emojitime {

struct SgnsConfig {
  int dim = 300;
  int max_window = 6;
  int negatives = 5;
  int epochs = 5;
  double initial_lr = 0.025;
  double min_lr = 1e-4;
  /// <= 0 or infinity disables frequent-word subsampling.
  double subsample_threshold = 1e-4;
  int min_count = 5;
  std::uint64_t seed = 1;
  /// Single worker, fixed window of max_window; bit-identical output.
  bool deterministic = true;
  /// Worker count for the lock-free multi-worker mode (ignored when
  /// deterministic).
  int threads = 1;

  void validate() const;
};

/// Per-season skip-gram model: input vectors are the embedding, output
/// vectors are the context table.
struct EmbeddingSpace {
  Vocab vocab;
  int dim = 0;
  std::vector<float> input;   // |V| x dim, row-major
  std::vector<float> output;  // |V| x dim, row-major
  std::string tag;

  std::span<const float> vector(std::int32_t id) const {
    return {input.data() + static_cast<std::size_t>(id) * dim, static_cast<std::size_t>(dim)};
  }
  /// Throws Error naming the token when it is not in the vocabulary.
  std::span<const float> vector(const std::string& token) const;
};

struct SgnsLog {
  std::vector<double> epoch_loss;              // mean loss per (center, context) update
  std::vector<std::uint64_t> epoch_centers;    // center positions processed
  std::vector<std::uint64_t> epoch_updates;
};

/// Throws Error on an empty slice or empty vocabulary, DivergenceError when
/// the loss becomes non-finite.
EmbeddingSpace train_sgns(const std::vector<std::vector<std::string>>& sentences,
                          const SgnsConfig& cfg, std::string tag = {}, SgnsLog* log = nullptr);

/// Throws Error on length mismatch or a zero vector.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(std::span<const double> a, std::span<const double> b);

/// Top-k candidates by cosine to `token`, excluding the token itself; ties
/// by codepoint order. Candidates must be in the vocabulary.
std::vector<std::string> knn(const EmbeddingSpace& space, const std::string& token, std::size_t k,
                             const std::vector<std::string>& candidates);
/// Same, with the whole vocabulary as candidate set.
std::vector<std::string> knn(const EmbeddingSpace& space, const std::string& token, std::size_t k);

/// Text interchange file at `path` ("<count> <dim>" then one token per line,
/// shortest round-trip floats) plus a binary sidecar `path + ".bin"` holding
/// the tag, counts and output vectors.
void persist_space(const EmbeddingSpace& space, const std::filesystem::path& path);
/// The sidecar is optional; without it output vectors are empty and counts
/// are zero. Throws ParseError carrying the byte offset of the problem.
EmbeddingSpace load_space(const std::filesystem::path& path);

/// Finite-difference check (central, eps 1e-6, double precision) of one
/// SGNS update on a small seeded instance built from `sentences`; returns
/// the maximum relative error over all touched rows.
double sgns_gradient_check(const SgnsConfig& cfg, const std::vector<std::vector<std::string>>& sentences);

}  // namespace emojitime
