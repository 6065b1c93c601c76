#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emojitime/embeddings.hpp"
#include "emojitime/model.hpp"

namespace emojitime {

enum class ReportFormat { Tsv, Doc };
ReportFormat parse_report_format(std::string_view s);

struct DatasetParams {
  std::size_t top_n = 300;
  std::size_t cap = 3000;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  bool strict = false;
};

struct DriftParams {
  std::size_t k = 10;
  std::size_t top_pairs = 15;
};

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path inventory;
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> warm_start;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool deterministic = false;
  ReportFormat format = ReportFormat::Tsv;
  DatasetParams dataset;
  SgnsConfig sgns;
  ModelConfig model;
  DriftParams drift;
  /// Dotted names of every field left at its default.
  std::vector<std::string> defaulted;

  /// Sub-seeds per stage so each stage is reproducible on its own.
  std::uint64_t stage_seed(std::string_view stage) const;
  /// Re-applies the cross-field rules after command-line overrides.
  void finalize();
};

/// Parses a JSON config. Relative paths resolve against `base_dir`. Throws
/// Error listing unknown keys, or naming the field and bound of a range
/// violation, or naming a referenced input path that does not exist.
RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig validate_config(const std::filesystem::path& file);

}  // namespace emojitime
