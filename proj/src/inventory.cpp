#include "emojitime/inventory.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "emojitime/error.hpp"
#include "emojitime/unicode.hpp"

namespace emojitime {

EmojiInventory::EmojiInventory(const std::vector<std::u32string>& sequences,
                               std::string version)
    : version_(std::move(version)) {
  for (const auto& s : sequences) insert(s);
}

void EmojiInventory::insert(std::u32string_view sequence) {
  if (sequence.empty()) throw Error("emoji inventory: empty sequence");
  std::uint32_t node = 0;
  for (char32_t cp : sequence) {
    auto it = nodes_[node].next.find(cp);
    if (it == nodes_[node].next.end()) {
      auto id = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].next.emplace(cp, id);
      nodes_.emplace_back();
      node = id;
    } else {
      node = it->second;
    }
  }
  if (!nodes_[node].terminal) {
    nodes_[node].terminal = true;
    ++size_;
  }
}

std::size_t EmojiInventory::match_at(std::u32string_view text, std::size_t pos) const {
  std::size_t best = 0;
  std::uint32_t node = 0;
  for (std::size_t i = pos; i < text.size(); ++i) {
    auto it = nodes_[node].next.find(text[i]);
    if (it == nodes_[node].next.end()) break;
    node = it->second;
    if (nodes_[node].terminal) best = i - pos + 1;
  }
  return best;
}

bool EmojiInventory::contains(std::u32string_view sequence) const {
  return !sequence.empty() && match_at(sequence, 0) == sequence.size();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Hex codepoint list such as "1F468 200D 1F469"; nullopt-like empty result
// when the line is not in that form.
bool parse_hex_sequence(std::string_view line, std::u32string& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    auto word = line.substr(i, j - i);
    if (word.size() > 2 && (word.substr(0, 2) == "U+" || word.substr(0, 2) == "u+")) word.remove_prefix(2);
    if (word.size() < 2 || word.size() > 6) return false;
    std::uint32_t cp = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), cp, 16);
    if (ec != std::errc{} || ptr != word.data() + word.size() || cp > 0x10FFFF) return false;
    out.push_back(static_cast<char32_t>(cp));
    i = j;
  }
  return !out.empty();
}

}  // namespace

EmojiInventory EmojiInventory::parse(std::istream& in, std::string default_version) {
  EmojiInventory inv;
  inv.version_ = std::move(default_version);
  std::string line;
  std::size_t lineno = 0;
  std::u32string seq;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = trim(t.substr(1));
      constexpr std::string_view kKey = "version:";
      if (body.substr(0, kKey.size()) == kKey) inv.version_ = std::string(trim(body.substr(kKey.size())));
      continue;
    }
    if (!parse_hex_sequence(t, seq)) {
      seq = unicode::decode(t);
      if (seq.find(U' ') != std::u32string::npos)
        throw ParseError("emoji inventory: line " + std::to_string(lineno) +
                             " is neither hex codepoints nor a single literal sequence",
                         lineno);
    }
    inv.insert(seq);
  }
  if (inv.empty()) throw ParseError("emoji inventory is empty");
  return inv;
}

EmojiInventory EmojiInventory::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open emoji inventory: " + path.string());
  return parse(in, path.filename().string());
}

}  // namespace emojitime
