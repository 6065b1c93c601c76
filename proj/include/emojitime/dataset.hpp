#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emojitime/corpus.hpp"

namespace emojitime {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };
std::string_view split_name(Split s);

struct Example {
  std::string source_id;
  std::vector<std::string> tokens;  // target emoji removed
  DateFeatures date;
  int label = 0;
  Split split = Split::Train;
};

struct PredictionDataset {
  std::vector<std::string> classes;  // descending corpus frequency
  std::vector<Example> examples;

  std::vector<const Example*> split(Split s) const;
};

struct DatasetOptions {
  std::size_t top_n = 300;
  std::size_t cap = 3000;
  std::array<double, 3> split_ratios{0.8, 0.1, 0.1};  // train, val, test
  std::uint64_t seed = 0;
};

/// Keeps messages with exactly one emoji occurrence whose emoji is among the
/// corpus-wide top_n, strips that emoji from the tokens, downsamples every
/// class to `cap` (seeded, uniform) and assigns a stratified split.
/// Messages with nothing left after removing the emoji are dropped, as are
/// top_n emojis without any eligible message. Throws Error("empty dataset")
/// when nothing survives.
PredictionDataset build_prediction_dataset(const std::vector<Message>& msgs,
                                           const DatasetOptions& opts);

/// JSON lines: a header object with the class list, then one example per line.
void save_dataset(const PredictionDataset& ds, const std::filesystem::path& path);
PredictionDataset load_dataset(const std::filesystem::path& path);

}  // namespace emojitime
