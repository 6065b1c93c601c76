#include "emojitime/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <unordered_set>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/unicode.hpp"

namespace emojitime {

std::string_view season_name(Season s) {
  switch (s) {
    case Season::Spring: return "Spring";
    case Season::Summer: return "Summer";
    case Season::Autumn: return "Autumn";
    case Season::Winter: return "Winter";
  }
  return "?";
}

Season parse_season(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Season s : kSeasons) {
    std::string full;
    for (char c : season_name(s)) full.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == full || (lower.size() == 3 && full.substr(0, 3) == lower)) return s;
  }
  throw Error("unknown season: " + std::string(name));
}

Season season_of_month(int month) {
  switch (month) {
    case 3: case 4: case 5: return Season::Spring;
    case 6: case 7: case 8: return Season::Summer;
    case 9: case 10: case 11: return Season::Autumn;
    case 12: case 1: case 2: return Season::Winter;
    default: throw Error("month out of range: " + std::to_string(month));
  }
}

namespace {

bool read_digits(std::string_view s, std::size_t& pos, int count, int& out) {
  if (pos + count > s.size()) return false;
  out = 0;
  for (int i = 0; i < count; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  pos += count;
  return true;
}

bool expect(std::string_view s, std::size_t& pos, char c) {
  if (pos >= s.size() || s[pos] != c) return false;
  ++pos;
  return true;
}

}  // namespace

Timestamp parse_rfc3339(std::string_view text) {
  using namespace std::chrono;
  auto fail = [&] { return ParseError("invalid RFC 3339 timestamp: '" + std::string(text) + "'"); };
  std::size_t pos = 0;
  int y, mo, d, h, mi, sec = 0;
  if (!read_digits(text, pos, 4, y) || !expect(text, pos, '-') || !read_digits(text, pos, 2, mo) ||
      !expect(text, pos, '-') || !read_digits(text, pos, 2, d))
    throw fail();
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) throw fail();
  ++pos;
  if (!read_digits(text, pos, 2, h) || !expect(text, pos, ':') || !read_digits(text, pos, 2, mi))
    throw fail();
  if (pos < text.size() && text[pos] == ':') {
    ++pos;
    if (!read_digits(text, pos, 2, sec)) throw fail();
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      std::size_t start = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == start) throw fail();
    }
  }
  int offset = 0;
  if (pos < text.size()) {
    char c = text[pos++];
    if (c == 'Z' || c == 'z') {
      offset = 0;
    } else if (c == '+' || c == '-') {
      int oh, om;
      if (!read_digits(text, pos, 2, oh)) throw fail();
      expect(text, pos, ':');
      if (!read_digits(text, pos, 2, om) || om > 59) throw fail();
      offset = (oh * 60 + om) * (c == '-' ? -1 : 1);
    } else {
      throw fail();
    }
  }
  if (pos != text.size()) throw fail();
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw fail();
  auto local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
  Timestamp ts;
  ts.offset_minutes = offset;
  ts.epoch_seconds = (local - minutes{offset}).time_since_epoch().count();
  return ts;
}

DateFeatures date_features(const Timestamp& ts) {
  using namespace std::chrono;
  if (ts.offset_minutes < -18 * 60 || ts.offset_minutes > 18 * 60)
    throw Error("timestamp offset out of range: " + std::to_string(ts.offset_minutes) + " minutes");
  constexpr std::int64_t kLimit = 253402300799;  // 9999-12-31T23:59:59Z
  if (ts.epoch_seconds < -kLimit || ts.epoch_seconds > kLimit)
    throw Error("timestamp out of supported range");
  sys_seconds local{seconds{ts.epoch_seconds + std::int64_t{ts.offset_minutes} * 60}};
  auto day_start = floor<days>(local);
  year_month_day ymd{day_start};
  weekday wd{day_start};
  auto hour = duration_cast<hours>(local - day_start).count();
  DateFeatures f;
  f.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  f.day_of_week = static_cast<int>(wd.iso_encoding());
  f.hour = static_cast<int>(hour) + 1;
  f.season = season_of_month(f.month);
  return f;
}

std::vector<EmojiOccurrence> extract_emojis(std::string_view text, const EmojiInventory& inv) {
  std::vector<EmojiOccurrence> out;
  if (inv.empty()) return out;
  auto cps = unicode::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    auto len = inv.match_at(cps, i);
    if (len == 0) {
      ++i;
      continue;
    }
    out.push_back({unicode::encode(std::u32string_view(cps).substr(i, len)), i, i + len});
    i += len;
  }
  return out;
}

namespace {

bool starts_with_ci(std::u32string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (unicode::to_lower(s[i]) != static_cast<char32_t>(prefix[i])) return false;
  return true;
}

void emit_word(std::u32string_view chunk, std::vector<std::string>& out) {
  if (chunk.empty()) return;
  if (starts_with_ci(chunk, "http://") || starts_with_ci(chunk, "https://") ||
      starts_with_ci(chunk, "www.")) {
    out.emplace_back(kUrlToken);
    return;
  }
  if (chunk.size() > 1 && chunk[0] == U'@') {
    out.emplace_back(kUserToken);
    return;
  }
  std::string word;
  bool in_digits = false;
  for (char32_t cp : chunk) {
    if (unicode::is_punctuation(cp)) continue;
    if (unicode::is_digit(cp)) {
      if (!in_digits) word += kNumberToken;
      in_digits = true;
      continue;
    }
    in_digits = false;
    word += unicode::encode(unicode::to_lower(cp));
  }
  if (!word.empty()) out.push_back(std::move(word));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const EmojiInventory& inv) {
  std::vector<std::string> out;
  auto cps = unicode::decode(text);
  std::u32string_view view(cps);
  std::size_t chunk_start = 0;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (unicode::is_space(cps[i])) {
      emit_word(view.substr(chunk_start, i - chunk_start), out);
      chunk_start = ++i;
      continue;
    }
    auto len = inv.empty() ? 0 : inv.match_at(cps, i);
    if (len > 0) {
      emit_word(view.substr(chunk_start, i - chunk_start), out);
      out.push_back(unicode::encode(view.substr(i, len)));
      i += len;
      chunk_start = i;
      continue;
    }
    ++i;
  }
  emit_word(view.substr(chunk_start), out);
  return out;
}

namespace {

Message parse_record(const std::string& line, std::size_t lineno, const EmojiInventory& inv) {
  auto j = nlohmann::json::parse(line);
  if (!j.is_object()) throw ParseError("record is not an object", lineno);
  auto text_it = j.find("text");
  if (text_it == j.end() || !text_it->is_string()) throw ParseError("missing string field 'text'", lineno);
  auto ts_it = j.find("timestamp");
  if (ts_it == j.end()) throw ParseError("missing field 'timestamp'", lineno);
  Message m;
  if (ts_it->is_string()) {
    m.timestamp = parse_rfc3339(ts_it->get<std::string>());
  } else if (ts_it->is_number_integer()) {
    m.timestamp.epoch_seconds = ts_it->get<std::int64_t>();
  } else {
    throw ParseError("field 'timestamp' must be a string or integer", lineno);
  }
  if (auto tz = j.find("tz_offset_minutes"); tz != j.end() && !tz->is_null()) {
    if (!tz->is_number_integer()) throw ParseError("field 'tz_offset_minutes' must be an integer", lineno);
    m.timestamp.offset_minutes = tz->get<int>();
  }
  date_features(m.timestamp);  // rejects unresolvable timestamps
  if (auto id = j.find("id"); id != j.end() && (id->is_string() || id->is_number_integer())) {
    m.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<std::int64_t>());
  } else {
    m.id = "L" + std::to_string(lineno);
  }
  m.text = text_it->get<std::string>();
  m.emojis = extract_emojis(m.text, inv);
  m.tokens = tokenize(m.text, inv);
  return m;
}

}  // namespace

ParsedCorpus parse_corpus(std::istream& in, const EmojiInventory& inv, ParseOptions opts) {
  ParsedCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.messages.push_back(parse_record(line, lineno, inv));
    } catch (const std::exception& e) {
      if (opts.strict) {
        throw ParseError("corpus line " + std::to_string(lineno) + ": " + e.what(), lineno);
      }
      ++out.skipped;
    }
  }
  if (in.bad()) throw IoError("error reading corpus stream");
  return out;
}

std::vector<Message> dedupe_messages(std::vector<Message> msgs) {
  std::unordered_set<std::string> seen;
  std::vector<Message> out;
  out.reserve(msgs.size());
  for (auto& m : msgs)
    if (seen.insert(m.text).second) out.push_back(std::move(m));
  return out;
}

SeasonalSlices build_seasonal_slices(const std::vector<Message>& msgs) {
  SeasonalSlices slices;
  for (const auto& m : msgs) {
    auto idx = static_cast<std::size_t>(date_features(m.timestamp).season);
    slices.messages[idx].push_back(m);
    slices.token_counts[idx] += m.tokens.size();
  }
  return slices;
}

std::vector<EmojiCount> frequency_table(const std::vector<Message>& msgs, std::size_t top_n) {
  if (top_n == 0) throw Error("frequency_table: top_n must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& m : msgs)
    for (const auto& e : m.emojis) ++counts[e.emoji];
  std::vector<EmojiCount> ranked(counts.begin(), counts.end());
  // UTF-8 byte order equals codepoint order, and the map is already sorted.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const EmojiCount& a, const EmojiCount& b) { return a.second > b.second; });
  if (ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

}  // namespace emojitime
