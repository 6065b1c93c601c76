#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "emojitime/corpus.hpp"
#include "emojitime/embeddings.hpp"

namespace emojitime {

struct SimilarityMatrix {
  std::vector<std::string> emojis;
  std::vector<double> values;  // row-major, emojis.size()^2
  std::string season;

  std::size_t size() const { return emojis.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * emojis.size() + j]; }
};

/// Cosine of input vectors; throws Error naming the first missing emoji.
SimilarityMatrix similarity_matrix(const EmbeddingSpace& space, const std::vector<std::string>& emojis);

/// |knn_A(emoji) n knn_B(emoji)| over the shared candidate set.
std::size_t knn_overlap(const EmbeddingSpace& a, const EmbeddingSpace& b, const std::string& emoji,
                        std::size_t k, const std::vector<std::string>& candidates);
/// Size of the intersection of the k-NN sets in every space.
std::size_t knn_overlap_all(const std::vector<const EmbeddingSpace*>& spaces, const std::string& emoji,
                            std::size_t k, const std::vector<std::string>& candidates);

/// Pearson correlation over the strict upper triangles. Throws on
/// mismatched emoji sets or zero variance.
double matrix_pearson(const SimilarityMatrix& a, const SimilarityMatrix& b);

struct PairDelta {
  std::string first;
  std::string second;
  double sim_a = 0;
  double sim_b = 0;
  double delta = 0;  // |sim_a - sim_b|

  bool operator==(const PairDelta&) const = default;
};

/// The n strict-upper-triangle pairs with the largest |sim_a - sim_b|,
/// descending; ties in (i, j) index order.
std::vector<PairDelta> top_pair_deltas(const SimilarityMatrix& a, const SimilarityMatrix& b, std::size_t n);

/// Season pairs in report order: Spr-Sum, Spr-Aut, Spr-Win, Sum-Aut,
/// Sum-Win, Aut-Win.
inline constexpr std::array<std::pair<Season, Season>, 6> kSeasonPairs = {{
    {Season::Spring, Season::Summer},
    {Season::Spring, Season::Autumn},
    {Season::Spring, Season::Winter},
    {Season::Summer, Season::Autumn},
    {Season::Summer, Season::Winter},
    {Season::Autumn, Season::Winter},
}};
std::string season_pair_label(std::size_t pair_index);  // "Spr-Sum"

struct OverlapRow {
  std::string emoji;
  std::array<std::size_t, 6> pairs{};
  std::size_t all = 0;

  bool operator==(const OverlapRow&) const = default;
};

struct DriftReport {
  std::size_t k = 10;
  std::vector<OverlapRow> overlaps;
  std::array<double, 6> pearson{};
  std::array<std::vector<PairDelta>, 6> deltas;
  std::vector<std::string> excluded;

  bool operator==(const DriftReport&) const = default;
};

/// `spaces` must carry the four distinct season names as tags. Emojis missing
/// from any space are excluded and listed; the rest form both the k-NN
/// candidate set and the similarity-matrix axis.
DriftReport drift_report(const std::vector<const EmbeddingSpace*>& spaces,
                         const std::vector<std::string>& emojis, std::size_t k, std::size_t n);

}  // namespace emojitime
