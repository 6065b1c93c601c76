#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emojitime/inventory.hpp"

namespace emojitime {

enum class Season { Spring = 0, Summer = 1, Autumn = 2, Winter = 3 };
inline constexpr std::array<Season, 4> kSeasons = {Season::Spring, Season::Summer,
                                                   Season::Autumn, Season::Winter};

std::string_view season_name(Season s);
/// Accepts the full name in any case ("spring") or the short form ("Spr").
Season parse_season(std::string_view name);
/// Meteorological Northern-hemisphere mapping: Mar-May Spring, Jun-Aug
/// Summer, Sep-Nov Autumn, Dec-Feb Winter.
Season season_of_month(int month);

/// An instant plus the offset of the poster's local time.
struct Timestamp {
  std::int64_t epoch_seconds = 0;
  int offset_minutes = 0;
};

/// RFC 3339 ("2017-03-17T09:30:00-05:00", "...Z", or no offset = already
/// local). Throws ParseError.
Timestamp parse_rfc3339(std::string_view text);

struct DateFeatures {
  int month = 1;        // 1-12
  int day_of_week = 1;  // 1-7, Monday = 1
  int hour = 1;         // 1-24, local hour-of-day + 1
  Season season = Season::Winter;

  bool operator==(const DateFeatures&) const = default;
};

/// Throws Error when the timestamp cannot be resolved to a civil time.
DateFeatures date_features(const Timestamp& ts);

/// Codepoint span [begin, end) into the decoded text.
struct EmojiOccurrence {
  std::string emoji;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const EmojiOccurrence&) const = default;
};

struct Message {
  std::string id;
  std::string text;
  Timestamp timestamp;
  std::vector<std::string> tokens;
  std::vector<EmojiOccurrence> emojis;
};

std::vector<EmojiOccurrence> extract_emojis(std::string_view text, const EmojiInventory& inv);

/// Emojis become standalone tokens; other text is lowercased and split on
/// whitespace, URLs map to <url>, @-mentions to <user>, digit runs to
/// <number>, punctuation is dropped.
std::vector<std::string> tokenize(std::string_view text, const EmojiInventory& inv);

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";
inline constexpr std::string_view kNumberToken = "<number>";

struct ParseOptions {
  bool strict = false;
};

struct ParsedCorpus {
  std::vector<Message> messages;
  std::size_t skipped = 0;
};

/// Newline-delimited JSON records with `text`, `timestamp` (RFC 3339 string
/// or integer epoch seconds) and optional `tz_offset_minutes` and `id`.
/// Malformed records are skipped and counted; in strict mode the first one
/// throws ParseError carrying its line number.
ParsedCorpus parse_corpus(std::istream& in, const EmojiInventory& inv, ParseOptions opts = {});

/// Keeps the first message for every distinct text.
std::vector<Message> dedupe_messages(std::vector<Message> msgs);

struct SeasonalSlices {
  std::array<std::vector<Message>, 4> messages;
  std::array<std::size_t, 4> token_counts{};

  const std::vector<Message>& operator[](Season s) const {
    return messages[static_cast<std::size_t>(s)];
  }
};

SeasonalSlices build_seasonal_slices(const std::vector<Message>& msgs);

using EmojiCount = std::pair<std::string, std::size_t>;

/// Emoji occurrence counts, descending, ties by codepoint order.
std::vector<EmojiCount> frequency_table(const std::vector<Message>& msgs, std::size_t top_n);

}  // namespace emojitime
