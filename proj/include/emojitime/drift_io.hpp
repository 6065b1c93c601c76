#pragma once

#include <string>
#include <string_view>

#include "emojitime/drift.hpp"

namespace emojitime {

// Tab-separated tables shaped like the published overlap and pair-delta
// tables, and a JSON document with every report field. All numbers use the
// shortest round-trip representation so parsing gives back the same report.

/// "Emoji" header row with one column per emoji, then one row per season
/// pair and an "All" row. Leading "#" lines carry k and the exclusions.
std::string format_overlap_tsv(const DriftReport& r);
/// Fills k, overlaps and excluded of `r`.
void parse_overlap_tsv(std::string_view text, DriftReport& r);

std::string format_pearson_tsv(const DriftReport& r);
void parse_pearson_tsv(std::string_view text, DriftReport& r);

/// Six side-by-side blocks (pair, similarity in the first season, in the
/// second), one row per rank.
std::string format_deltas_tsv(const DriftReport& r);
void parse_deltas_tsv(std::string_view text, DriftReport& r);

std::string format_drift_doc(const DriftReport& r);
DriftReport parse_drift_doc(std::string_view text);

}  // namespace emojitime
