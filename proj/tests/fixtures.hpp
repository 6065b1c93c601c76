#pragma once

// Synthetic data generators shared by unit tests and the acceptance suite.
// Each one is fully determined by its arguments.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "emojitime/corpus.hpp"
#include "emojitime/dataset.hpp"
#include "emojitime/inventory.hpp"

namespace fixtures {

using Sentences = std::vector<std::vector<std::string>>;

/// The i-th fixture emoji (U+1F600 + i) as UTF-8.
std::string emoji(std::size_t i);
/// Inventory holding emoji(0) .. emoji(n - 1).
emojitime::EmojiInventory inventory(std::size_t n = 64);

/// Two clusters of tokens; each sentence draws all its tokens from one
/// cluster, so tokens of a cluster share contexts and never meet the other.
struct PlantedClusters {
  Sentences sentences;
  std::vector<std::string> a, b;
};
PlantedClusters planted_clusters(std::size_t vocab, std::size_t tokens, std::uint64_t seed);

/// Topic model for the drift fixture: every sentence picks a topic, draws
/// words from it and carries one emoji of that topic. In the swapped variant
/// `x` (topic 0) and `y` (topic 1) trade topics.
struct DriftTopics {
  std::vector<std::vector<std::string>> words;
  std::vector<std::vector<std::string>> emojis;
  std::string x, y, control;
  std::vector<std::string> all_emojis() const;
};
DriftTopics drift_topics();
Sentences drift_season(const DriftTopics& t, bool swapped, std::size_t sentences, std::uint64_t seed);

/// Label = f(keyword, month half). Keywords 0..4 map to classes 2i (Jan-Jun)
/// and 2i+1 (Jul-Dec); keyword 5 always maps to class 10. Filler words carry
/// no signal, so without the month the best achievable accuracy is 6/11.
emojitime::PredictionDataset fusion_dataset(std::size_t train_per_class, std::size_t val_per_class,
                                            std::size_t test_per_class, std::uint64_t seed);

/// JSONL corpus of `n` messages over fixture emojis (0-3 per message,
/// Zipf-like frequencies), words from a small lexicon and timestamps spread
/// over one year with mixed offsets.
std::string corpus_jsonl(std::size_t n, std::uint64_t seed, std::size_t emoji_types = 20);

}  // namespace fixtures
