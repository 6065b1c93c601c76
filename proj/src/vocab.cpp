#include "emojitime/vocab.hpp"

#include <algorithm>
#include <map>

#include "emojitime/error.hpp"

namespace emojitime {

Vocab::Vocab(std::vector<std::string> tokens, std::vector<std::uint64_t> counts, int min_count)
    : tokens_(std::move(tokens)), counts_(std::move(counts)), min_count_(min_count) {
  if (tokens_.size() != counts_.size()) throw Error("vocab: token/count length mismatch");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second)
      throw Error("vocab: duplicate token '" + tokens_[i] + "'");
  }
}

std::optional<std::int32_t> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& sentences, int min_count) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  std::map<std::string, std::uint64_t> counts;
  for (const auto& s : sentences)
    for (const auto& t : s) ++counts[t];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, c] : counts)
    if (c >= static_cast<std::uint64_t>(min_count)) kept.emplace_back(tok, c);
  if (kept.empty()) throw Error("vocabulary is empty after min_count filtering");
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> cnt;
  for (auto& [t, c] : kept) {
    tokens.push_back(t);
    cnt.push_back(c);
  }
  return Vocab(std::move(tokens), std::move(cnt), min_count);
}

}  // namespace emojitime
