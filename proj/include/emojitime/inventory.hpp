#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emojitime {

/// The set of codepoint sequences that count as emojis. Matching is
/// longest-match over a codepoint trie, so ZWJ and modifier sequences win
/// over their components.
class EmojiInventory {
 public:
  EmojiInventory() = default;
  EmojiInventory(const std::vector<std::u32string>& sequences, std::string version);

  /// Inventory file: one emoji per line, either the literal sequence or
  /// space-separated hex codepoints. `#` starts a comment line; a
  /// `# version: X` comment sets the version. Empty inventories are rejected.
  static EmojiInventory parse(std::istream& in, std::string default_version = "unversioned");
  static EmojiInventory load(const std::filesystem::path& path);

  /// Length in codepoints of the longest sequence starting at `pos`, 0 if none.
  std::size_t match_at(std::u32string_view text, std::size_t pos) const;
  bool contains(std::u32string_view sequence) const;

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const std::string& version() const { return version_; }

 private:
  void insert(std::u32string_view sequence);

  struct Node {
    std::unordered_map<char32_t, std::uint32_t> next;
    bool terminal = false;
  };
  std::vector<Node> nodes_{Node{}};
  std::size_t size_ = 0;
  std::string version_ = "unversioned";
};

}  // namespace emojitime
