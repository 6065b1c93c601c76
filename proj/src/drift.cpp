#include "emojitime/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "emojitime/error.hpp"
#include "emojitime/kernels.hpp"

namespace emojitime {

SimilarityMatrix similarity_matrix(const EmbeddingSpace& space, const std::vector<std::string>& emojis) {
  std::vector<std::span<const float>> rows;
  rows.reserve(emojis.size());
  for (const auto& e : emojis) {
    if (!space.vocab.contains(e))
      throw Error("emoji '" + e + "' missing from space '" + space.tag + "'");
    rows.push_back(space.vector(e));
  }
  SimilarityMatrix m;
  m.emojis = emojis;
  m.season = space.tag;
  m.values = kernels::cosine_matrix_parallel(rows);
  return m;
}

namespace {
void require_in(const EmbeddingSpace& s, const std::string& emoji) {
  if (!s.vocab.contains(emoji)) throw Error("emoji '" + emoji + "' missing from space '" + s.tag + "'");
}
}  // namespace

std::size_t knn_overlap(const EmbeddingSpace& a, const EmbeddingSpace& b, const std::string& emoji,
                        std::size_t k, const std::vector<std::string>& candidates) {
  return knn_overlap_all({&a, &b}, emoji, k, candidates);
}

std::size_t knn_overlap_all(const std::vector<const EmbeddingSpace*>& spaces, const std::string& emoji,
                            std::size_t k, const std::vector<std::string>& candidates) {
  if (spaces.empty()) throw Error("knn_overlap: no spaces");
  for (const auto* s : spaces) require_in(*s, emoji);
  auto first = knn(*spaces[0], emoji, k, candidates);
  std::set<std::string> common(first.begin(), first.end());
  for (std::size_t i = 1; i < spaces.size(); ++i) {
    auto nn = knn(*spaces[i], emoji, k, candidates);
    std::set<std::string> other(nn.begin(), nn.end());
    std::set<std::string> next;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(),
                          std::inserter(next, next.end()));
    common = std::move(next);
  }
  return common.size();
}

namespace {
void require_aligned(const SimilarityMatrix& a, const SimilarityMatrix& b) {
  if (a.emojis != b.emojis) throw Error("similarity matrices have different emoji sets");
}
}  // namespace

double matrix_pearson(const SimilarityMatrix& a, const SimilarityMatrix& b) {
  require_aligned(a, b);
  const std::size_t m = a.size();
  if (m < 2) throw Error("matrix_pearson: need at least two emojis");
  double sa = 0, sb = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      sa += a.at(i, j);
      sb += b.at(i, j);
      ++n;
    }
  const double ma = sa / static_cast<double>(n), mb = sb / static_cast<double>(n);
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double da = a.at(i, j) - ma, db = b.at(i, j) - mb;
      cov += da * db;
      va += da * da;
      vb += db * db;
    }
  if (va == 0 || vb == 0) throw Error("matrix_pearson: zero variance");
  return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

std::vector<PairDelta> top_pair_deltas(const SimilarityMatrix& a, const SimilarityMatrix& b, std::size_t n) {
  require_aligned(a, b);
  if (n == 0) throw Error("top_pair_deltas: n must be >= 1");
  const std::size_t m = a.size();
  std::vector<PairDelta> all;
  all.reserve(m * (m - (m ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      all.push_back({a.emojis[i], a.emojis[j], a.at(i, j), b.at(i, j), std::abs(a.at(i, j) - b.at(i, j))});
  // all is generated in (i, j) order, so a stable sort keeps that tie order.
  std::stable_sort(all.begin(), all.end(), [](const PairDelta& x, const PairDelta& y) { return x.delta > y.delta; });
  if (all.size() > n) all.resize(n);
  return all;
}

std::string season_pair_label(std::size_t pair_index) {
  const auto& [a, b] = kSeasonPairs.at(pair_index);
  return std::string(season_name(a).substr(0, 3)) + "-" + std::string(season_name(b).substr(0, 3));
}

DriftReport drift_report(const std::vector<const EmbeddingSpace*>& spaces,
                         const std::vector<std::string>& emojis, std::size_t k, std::size_t n) {
  if (spaces.size() != 4) throw Error("drift_report needs exactly four seasonal spaces");
  if (k == 0) throw Error("drift_report: k must be >= 1");
  std::array<const EmbeddingSpace*, 4> by_season{};
  for (const auto* s : spaces) {
    auto season = static_cast<std::size_t>(parse_season(s->tag));
    if (by_season[season]) throw Error("duplicate season tag: " + s->tag);
    by_season[season] = s;
  }

  DriftReport report;
  report.k = k;
  std::vector<std::string> kept;
  std::set<std::string> seen;
  for (const auto& e : emojis) {
    if (!seen.insert(e).second) continue;
    bool everywhere = std::all_of(by_season.begin(), by_season.end(),
                                  [&](const EmbeddingSpace* s) { return s->vocab.contains(e); });
    (everywhere ? kept : report.excluded).push_back(e);
  }
  if (kept.size() < 2) throw Error("drift_report: fewer than two emojis present in all seasons");

  std::array<std::vector<std::vector<std::string>>, 4> neighbours;
  for (std::size_t s = 0; s < 4; ++s)
    for (const auto& e : kept) {
      auto nn = knn(*by_season[s], e, k, kept);
      std::sort(nn.begin(), nn.end());
      neighbours[s].push_back(std::move(nn));
    }
  auto intersect = [](const std::vector<std::string>& x, const std::vector<std::string>& y) {
    std::vector<std::string> out;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    return out;
  };
  for (std::size_t e = 0; e < kept.size(); ++e) {
    OverlapRow row;
    row.emoji = kept[e];
    for (std::size_t p = 0; p < 6; ++p) {
      auto [sa, sb] = kSeasonPairs[p];
      row.pairs[p] = intersect(neighbours[static_cast<std::size_t>(sa)][e],
                               neighbours[static_cast<std::size_t>(sb)][e]).size();
    }
    auto common = neighbours[0][e];
    for (std::size_t s = 1; s < 4; ++s) common = intersect(common, neighbours[s][e]);
    row.all = common.size();
    report.overlaps.push_back(std::move(row));
  }

  std::array<SimilarityMatrix, 4> matrices;
  for (std::size_t s = 0; s < 4; ++s) matrices[s] = similarity_matrix(*by_season[s], kept);
  for (std::size_t p = 0; p < 6; ++p) {
    const auto& ma = matrices[static_cast<std::size_t>(kSeasonPairs[p].first)];
    const auto& mb = matrices[static_cast<std::size_t>(kSeasonPairs[p].second)];
    report.pearson[p] = matrix_pearson(ma, mb);
    report.deltas[p] = top_pair_deltas(ma, mb, n);
  }
  return report;
}

}  // namespace emojitime
