#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "emojitime/dataset.hpp"
#include "emojitime/error.hpp"
#include "emojitime/unicode.hpp"
#include "fixtures.hpp"

using namespace emojitime;

namespace {

const std::string kJoy = "\xF0\x9F\x98\x82";      // 😂
const std::string kSunrise = "\xF0\x9F\x8C\x85";  // 🌅

EmojiInventory inv() {
  return EmojiInventory({unicode::decode(kJoy), unicode::decode(kSunrise)}, "test");
}

std::vector<Message> messages(const std::vector<std::pair<std::string, int>>& texts) {
  std::vector<Message> out;
  int id = 0;
  for (const auto& [text, copies] : texts)
    for (int c = 0; c < copies; ++c) {
      Message m;
      m.id = "m" + std::to_string(id++);
      m.text = text;
      m.timestamp = parse_rfc3339("2017-0" + std::to_string(1 + id % 9) + "-03T08:00:00");
      m.tokens = tokenize(text, inv());
      m.emojis = extract_emojis(text, inv());
      out.push_back(std::move(m));
    }
  return out;
}

std::size_t count_label(const PredictionDataset& ds, int label) {
  std::size_t n = 0;
  for (const auto& e : ds.examples) n += e.label == label;
  return n;
}

}  // namespace

TEST(PredictionDataset, FilterRulesOnHandFixture) {
  auto msgs = messages({{"hi " + kJoy, 4}, {kJoy + " ok " + kJoy, 1}, {"yo " + kSunrise, 2}});
  DatasetOptions opts;
  opts.top_n = 2;
  opts.cap = 3;
  auto ds = build_prediction_dataset(msgs, opts);
  EXPECT_EQ(ds.classes, (std::vector<std::string>{kJoy, kSunrise}));
  EXPECT_EQ(count_label(ds, 0), 3u);
  EXPECT_EQ(count_label(ds, 1), 2u);
  for (const auto& e : ds.examples) {
    EXPECT_NE(e.source_id, "m4");  // the double-😂 message
    EXPECT_EQ(e.tokens.size(), 1u);
  }
}

TEST(PredictionDataset, ZeroEmojiMessagesExcluded) {
  auto msgs = messages({{"plain text", 5}, {"yo " + kSunrise, 4}});
  DatasetOptions opts;
  opts.cap = 10;
  auto ds = build_prediction_dataset(msgs, opts);
  EXPECT_EQ(ds.classes, (std::vector<std::string>{kSunrise}));
  EXPECT_EQ(ds.examples.size(), 4u);  // cap not binding
}

TEST(PredictionDataset, EmojiOnlyMessagesDropped) {
  auto msgs = messages({{kJoy, 3}, {"hey " + kJoy, 1}});
  auto ds = build_prediction_dataset(msgs, {});
  EXPECT_EQ(ds.examples.size(), 1u);
}

TEST(PredictionDataset, EmptyIsAnError) {
  EXPECT_THROW(build_prediction_dataset({}, {}), Error);
  EXPECT_THROW(build_prediction_dataset(messages({{"none", 3}}), {}), Error);
}

TEST(PredictionDataset, InvariantsOnGeneratedCorpus) {
  auto finv = fixtures::inventory();
  std::istringstream in(fixtures::corpus_jsonl(3000, 21));
  auto msgs = parse_corpus(in, finv).messages;
  DatasetOptions opts;
  opts.top_n = 8;
  opts.cap = 60;
  opts.seed = 9;
  auto ds = build_prediction_dataset(msgs, opts);
  ASSERT_LE(ds.classes.size(), 8u);
  std::set<std::string> ids;
  std::map<int, std::size_t> per_class;
  for (const auto& e : ds.examples) {
    EXPECT_TRUE(ids.insert(e.source_id).second);
    for (const auto& t : e.tokens) EXPECT_NE(t, ds.classes[static_cast<std::size_t>(e.label)]);
    EXPECT_FALSE(e.tokens.empty());
    ++per_class[e.label];
  }
  for (const auto& [label, n] : per_class) EXPECT_LE(n, opts.cap);
  // Every split holds every class.
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    std::set<int> labels;
    for (const auto* e : ds.split(s)) labels.insert(e->label);
    EXPECT_EQ(labels.size(), ds.classes.size()) << split_name(s);
  }
  auto again = build_prediction_dataset(msgs, opts);
  ASSERT_EQ(again.examples.size(), ds.examples.size());
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    EXPECT_EQ(again.examples[i].source_id, ds.examples[i].source_id);
    EXPECT_EQ(again.examples[i].split, ds.examples[i].split);
  }
  opts.seed = 10;
  auto other = build_prediction_dataset(msgs, opts);
  bool differs = false;
  for (std::size_t i = 0; i < std::min(other.examples.size(), ds.examples.size()); ++i)
    differs = differs || other.examples[i].source_id != ds.examples[i].source_id ||
              other.examples[i].split != ds.examples[i].split;
  EXPECT_TRUE(differs);
}

TEST(PredictionDataset, SaveLoadRoundTrip) {
  auto finv = fixtures::inventory();
  std::istringstream in(fixtures::corpus_jsonl(800, 2));
  auto ds = build_prediction_dataset(parse_corpus(in, finv).messages, {});
  auto path = std::filesystem::temp_directory_path() / "emojitime_dataset_rt.jsonl";
  save_dataset(ds, path);
  auto back = load_dataset(path);
  EXPECT_EQ(back.classes, ds.classes);
  ASSERT_EQ(back.examples.size(), ds.examples.size());
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    EXPECT_EQ(back.examples[i].source_id, ds.examples[i].source_id);
    EXPECT_EQ(back.examples[i].tokens, ds.examples[i].tokens);
    EXPECT_EQ(back.examples[i].date, ds.examples[i].date);
    EXPECT_EQ(back.examples[i].label, ds.examples[i].label);
    EXPECT_EQ(back.examples[i].split, ds.examples[i].split);
  }
}
