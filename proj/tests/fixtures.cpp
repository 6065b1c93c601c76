#include "fixtures.hpp"

#include <cmath>

#include <json.hpp>

#include "emojitime/random.hpp"
#include "emojitime/unicode.hpp"

using namespace emojitime;

namespace fixtures {

std::string emoji(std::size_t i) {
  return unicode::encode(std::u32string(1, static_cast<char32_t>(0x1F600 + i)));
}

EmojiInventory inventory(std::size_t n) {
  std::vector<std::u32string> seqs;
  for (std::size_t i = 0; i < n; ++i) seqs.push_back(std::u32string(1, static_cast<char32_t>(0x1F600 + i)));
  return EmojiInventory(seqs, "fixture");
}

PlantedClusters planted_clusters(std::size_t vocab, std::size_t tokens, std::uint64_t seed) {
  PlantedClusters out;
  for (std::size_t i = 0; i < vocab / 2; ++i) {
    out.a.push_back("a" + std::to_string(i));
    out.b.push_back("b" + std::to_string(i));
  }
  Rng rng(seed);
  std::size_t produced = 0;
  while (produced < tokens) {
    const auto& cluster = uniform_index(rng, 2) ? out.b : out.a;
    std::vector<std::string> s;
    for (int j = 0; j < 10; ++j) s.push_back(cluster[uniform_index(rng, cluster.size())]);
    produced += s.size();
    out.sentences.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> DriftTopics::all_emojis() const {
  std::vector<std::string> out;
  for (const auto& t : emojis) out.insert(out.end(), t.begin(), t.end());
  return out;
}

DriftTopics drift_topics() {
  DriftTopics t;
  constexpr std::size_t topics = 4, words = 20, per_topic = 12;
  for (std::size_t k = 0; k < topics; ++k) {
    t.words.emplace_back();
    t.emojis.emplace_back();
    for (std::size_t w = 0; w < words; ++w) t.words[k].push_back("t" + std::to_string(k) + "w" + std::to_string(w));
    for (std::size_t e = 0; e < per_topic; ++e) t.emojis[k].push_back(emoji(k * per_topic + e));
  }
  t.x = t.emojis[0][0];
  t.y = t.emojis[1][0];
  t.control = t.emojis[2][0];
  return t;
}

Sentences drift_season(const DriftTopics& t, bool swapped, std::size_t sentences, std::uint64_t seed) {
  auto emojis = t.emojis;
  if (swapped) std::swap(emojis[0][0], emojis[1][0]);
  Rng rng(seed);
  Sentences out;
  for (std::size_t i = 0; i < sentences; ++i) {
    const std::size_t k = uniform_index(rng, t.words.size());
    std::vector<std::string> s;
    for (int j = 0; j < 8; ++j) s.push_back(t.words[k][uniform_index(rng, t.words[k].size())]);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size() + 1)),
             emojis[k][uniform_index(rng, emojis[k].size())]);
    out.push_back(std::move(s));
  }
  return out;
}

PredictionDataset fusion_dataset(std::size_t train_per_class, std::size_t val_per_class,
                                 std::size_t test_per_class, std::uint64_t seed) {
  static const std::vector<std::string> filler = {"the", "so",   "just", "now",  "really",
                                                  "ok",  "very", "lol",  "omg",  "today"};
  constexpr int classes = 11;
  PredictionDataset ds;
  for (int c = 0; c < classes; ++c) ds.classes.push_back(emoji(static_cast<std::size_t>(c)));
  Rng rng(seed);
  std::size_t id = 0;
  auto make = [&](int label, Split split) {
    Example ex;
    ex.source_id = "F" + std::to_string(id++);
    ex.label = label;
    ex.split = split;
    const int keyword = label == 10 ? 5 : label / 2;
    const bool second_half = label != 10 && label % 2 == 1;
    ex.date.month = (second_half ? 7 : 1) + static_cast<int>(uniform_index(rng, 6));
    if (label == 10) ex.date.month = 1 + static_cast<int>(uniform_index(rng, 12));
    ex.date.day_of_week = 1 + static_cast<int>(uniform_index(rng, 7));
    ex.date.hour = 1 + static_cast<int>(uniform_index(rng, 24));
    ex.date.season = season_of_month(ex.date.month);
    const std::size_t n_fill = 1 + uniform_index(rng, 3);
    for (std::size_t j = 0; j < n_fill; ++j) ex.tokens.push_back(filler[uniform_index(rng, filler.size())]);
    ex.tokens.insert(ex.tokens.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, n_fill + 1)),
                     "keyword" + std::to_string(keyword));
    ds.examples.push_back(std::move(ex));
  };
  for (auto [split, per] : {std::pair{Split::Train, train_per_class}, std::pair{Split::Val, val_per_class},
                            std::pair{Split::Test, test_per_class}})
    for (std::size_t i = 0; i < per; ++i)
      for (int c = 0; c < classes; ++c) make(c, split);
  return ds;
}

std::string corpus_jsonl(std::size_t n, std::uint64_t seed, std::size_t emoji_types) {
  static const std::vector<std::string> lexicon = {
      "good", "luck", "sun",   "beach", "snow",  "tree", "party", "love",  "fire",   "happy",
      "cold", "hot",  "rain",  "game",  "music", "food", "pizza", "coffee", "school", "work",
      "home", "dog",  "cat",   "night", "day",   "week", "fun",   "sad",   "win",    "team"};
  Rng rng(seed);
  // Zipf-like: weight 1 / (rank + 1).
  std::vector<double> cdf;
  double total = 0;
  for (std::size_t i = 0; i < emoji_types; ++i) cdf.push_back(total += 1.0 / static_cast<double>(i + 1));
  auto draw_emoji = [&] {
    const double u = uniform01(rng) * total;
    std::size_t i = 0;
    while (i + 1 < cdf.size() && cdf[i] <= u) ++i;
    return emoji(i);
  };
  static const int offsets[] = {-480, -300, 0, 60, 330};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> parts;
    const std::size_t words = 2 + uniform_index(rng, 8);
    for (std::size_t w = 0; w < words; ++w) parts.push_back(lexicon[uniform_index(rng, lexicon.size())]);
    const std::size_t emojis = uniform_index(rng, 4);
    for (std::size_t e = 0; e < emojis; ++e)
      parts.insert(parts.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, parts.size() + 1)), draw_emoji());
    std::string text;
    for (const auto& p : parts) text += (text.empty() ? "" : " ") + p;
    if (uniform_index(rng, 10) == 0) text += " @friend";
    if (uniform_index(rng, 20) == 0) text += " http://example.com/" + std::to_string(i);
    nlohmann::ordered_json j;
    j["id"] = "m" + std::to_string(i);
    j["text"] = text;
    // 2017-01-01T00:00:00Z plus up to one year.
    j["timestamp"] = 1483228800 + static_cast<std::int64_t>(uniform_index(rng, 365 * 86400));
    j["tz_offset_minutes"] = offsets[uniform_index(rng, 5)];
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace fixtures
