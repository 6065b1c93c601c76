#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace emojitime {

/// Dense token <-> id table; ids are assigned by descending count with ties
/// broken by codepoint order.
class Vocab {
 public:
  Vocab() = default;
  /// Entries must already be in id order; throws on duplicates.
  Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts, int min_count);

  std::optional<std::int32_t> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  const std::string& token(std::int32_t id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::uint64_t count(std::int32_t id) const { return counts_.at(static_cast<std::size_t>(id)); }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  int min_count() const { return min_count_; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  bool operator==(const Vocab& o) const {
    return tokens_ == o.tokens_ && counts_ == o.counts_ && min_count_ == o.min_count_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::int32_t> index_;
  int min_count_ = 1;
};

/// Throws Error when no token reaches min_count.
Vocab build_vocab(const std::vector<std::vector<std::string>>& sentences, int min_count);

}  // namespace emojitime
