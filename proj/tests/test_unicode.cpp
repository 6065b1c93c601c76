#include <gtest/gtest.h>

#include <sstream>

#include "emojitime/error.hpp"
#include "emojitime/inventory.hpp"
#include "emojitime/unicode.hpp"

using namespace emojitime;

TEST(Utf8, RoundTrip) {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x82";  // a é € 😂
  auto cps = unicode::decode(s);
  EXPECT_EQ(cps, (std::u32string{U'a', 0xE9, 0x20AC, 0x1F602}));
  EXPECT_EQ(unicode::encode(cps), s);
  EXPECT_EQ(unicode::encode(char32_t{0x1F602}), "\xF0\x9F\x98\x82");
}

TEST(Utf8, InvalidBytesBecomeReplacement) {
  EXPECT_EQ(unicode::decode("\xFF"), std::u32string(1, 0xFFFD));
  EXPECT_EQ(unicode::decode("a\xF0\x9F"), (std::u32string{U'a', 0xFFFD}));
  // Overlong encoding of '/' must not decode to '/'.
  for (char32_t c : unicode::decode("\xC0\xAF")) EXPECT_EQ(c, 0xFFFDu);
  // Encoded surrogate: each byte is its own maximal subpart.
  EXPECT_EQ(unicode::decode("\xED\xA0\x80"), std::u32string(3, 0xFFFD));
  EXPECT_EQ(unicode::decode("\xF4\x90\x80\x80").size(), 4u);
  EXPECT_EQ(unicode::decode("").size(), 0u);
}

TEST(Utf8, CharacterClasses) {
  EXPECT_TRUE(unicode::is_space(U' '));
  EXPECT_TRUE(unicode::is_space(U'\t'));
  EXPECT_TRUE(unicode::is_space(0x3000));
  EXPECT_TRUE(unicode::is_punctuation(U'!'));
  EXPECT_TRUE(unicode::is_punctuation(0x200D));
  EXPECT_TRUE(unicode::is_punctuation(0xFE0F));
  EXPECT_FALSE(unicode::is_punctuation(U'a'));
  EXPECT_TRUE(unicode::is_digit(U'7'));
  EXPECT_EQ(unicode::to_lower(U'Q'), U'q');
  EXPECT_EQ(unicode::to_lower(0xC9), 0xE9u);    // É
  EXPECT_EQ(unicode::to_lower(0x0416), 0x0436u);  // Ж
}

namespace {

EmojiInventory family_inventory() {
  std::istringstream in(
      "# test inventory\n"
      "# version: t1\n"
      "1F468 200D 1F469 200D 1F467\n"
      "1F468\n"
      "U+1F469\n"
      "\xF0\x9F\x91\xA7\n"  // literal 👧
      "\n"
      "1F602\n");
  return EmojiInventory::parse(in);
}

}  // namespace

TEST(Inventory, ParsesHexLiteralAndVersion) {
  auto inv = family_inventory();
  EXPECT_EQ(inv.size(), 5u);
  EXPECT_EQ(inv.version(), "t1");
  EXPECT_TRUE(inv.contains(U"\U0001F467"));
  EXPECT_TRUE(inv.contains(U"\U0001F469"));
  EXPECT_TRUE(inv.contains(U"\U0001F468‍\U0001F469‍\U0001F467"));
  EXPECT_FALSE(inv.contains(U"\U0001F468‍\U0001F469"));
}

TEST(Inventory, LongestMatch) {
  auto inv = family_inventory();
  std::u32string text = U"x\U0001F468‍\U0001F469‍\U0001F467!";
  EXPECT_EQ(inv.match_at(text, 0), 0u);
  EXPECT_EQ(inv.match_at(text, 1), 5u);
  // A prefix of a longer sequence falls back to the longest complete entry.
  std::u32string partial = U"\U0001F468‍\U0001F469!";
  EXPECT_EQ(inv.match_at(partial, 0), 1u);
}

TEST(Inventory, EmptyInventoryIsAnError) {
  std::istringstream in("# nothing here\n\n");
  EXPECT_THROW(EmojiInventory::parse(in), ParseError);
}

TEST(Inventory, DefaultVersion) {
  std::istringstream in("1F602\n");
  EXPECT_EQ(EmojiInventory::parse(in, "v0").version(), "v0");
}

TEST(Inventory, BundledFileLoads) {
  auto inv = EmojiInventory::load(std::string(EMOJITIME_DATA_DIR) + "/emoji_inventory.txt");
  EXPECT_GT(inv.size(), 1000u);
  EXPECT_NE(inv.version(), "unversioned");
  EXPECT_TRUE(inv.contains(U"\U0001F602"));
  EXPECT_TRUE(inv.contains(U"❤️"));
  EXPECT_TRUE(inv.contains(U"\U0001F468‍\U0001F469‍\U0001F467"));
  EXPECT_TRUE(inv.contains(U"\U0001F44D\U0001F3FD"));
  EXPECT_TRUE(inv.contains(U"\U0001F1FA\U0001F1F8"));
}

TEST(Inventory, MissingFileIsAnError) {
  EXPECT_THROW(EmojiInventory::load("/nonexistent/inventory.txt"), Error);
}
