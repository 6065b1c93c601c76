#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "emojitime/eval.hpp"

namespace emojitime {

/// One header line and one row per system: system, P, R, F1, a@1, a@3,
/// a@5, a@10 (percentages, two decimals) and CE.
std::string format_table5(const std::vector<EvalReport>& reports);

struct Table5Row {
  std::string system;
  std::array<double, 8> values{};  // P R F1 a@1 a@3 a@5 a@10 CE
};
std::vector<Table5Row> parse_table5(std::string_view text);

/// Columns: emoji, F1_without, F1_early, delta.
std::string format_table6(const std::vector<F1Delta>& rows, const std::vector<std::string>& class_names);

/// Full-precision JSON with every report field and the optional delta table.
std::string format_eval_doc(const std::vector<EvalReport>& reports, const std::vector<std::string>& class_names,
                            const std::vector<F1Delta>* deltas);

}  // namespace emojitime
