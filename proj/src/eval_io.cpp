#include "emojitime/eval_io.hpp"

#include <cstdio>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/tsv.hpp"

namespace emojitime {

namespace {
std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}
}  // namespace

std::string format_table5(const std::vector<EvalReport>& reports) {
  std::string out = "system\tP\tR\tF1\ta@1\ta@3\ta@5\ta@10\tCE\n";
  for (const auto& r : reports) {
    out += r.system;
    for (double v : {r.precision, r.recall, r.f1}) out += "\t" + fixed(100 * v, 2);
    for (double v : r.accuracy) out += "\t" + fixed(100 * v, 2);
    out += "\t" + fixed(r.coverage_error, 2) + "\n";
  }
  return out;
}

std::vector<Table5Row> parse_table5(std::string_view text) {
  auto rows = tsv::lines(text);
  if (rows.empty() || rows[0] != "system\tP\tR\tF1\ta@1\ta@3\ta@5\ta@10\tCE")
    throw ParseError("table 5: bad header", 1);
  std::vector<Table5Row> out;
  for (std::size_t l = 1; l < rows.size(); ++l) {
    auto cells = tsv::split(rows[l]);
    if (cells.size() != 9) throw ParseError("table 5: wrong column count", l + 1);
    Table5Row row;
    row.system = cells[0];
    for (std::size_t i = 0; i < 8; ++i) row.values[i] = tsv::parse_double(cells[i + 1], l + 1);
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_table6(const std::vector<F1Delta>& rows, const std::vector<std::string>& class_names) {
  std::string out = "emoji\tF1_without\tF1_early\tdelta\n";
  for (const auto& r : rows) {
    const auto& name = r.cls < class_names.size() ? class_names[r.cls] : std::to_string(r.cls);
    out += name + "\t" + fixed(r.f1_a, 4) + "\t" + fixed(r.f1_b, 4) + "\t" + fixed(r.delta, 4) + "\n";
  }
  return out;
}

std::string format_eval_doc(const std::vector<EvalReport>& reports, const std::vector<std::string>& class_names,
                            const std::vector<F1Delta>* deltas) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["classes"] = class_names;
  auto& systems = j["systems"] = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json s;
    s["system"] = r.system;
    s["n"] = r.n;
    s["precision"] = r.precision;
    s["recall"] = r.recall;
    s["f1"] = r.f1;
    for (std::size_t i = 0; i < kReportedK.size(); ++i) s["accuracy@" + std::to_string(kReportedK[i])] = r.accuracy[i];
    s["coverage_error"] = r.coverage_error;
    auto& pc = s["per_class"] = ordered_json::array();
    for (const auto& m : r.per_class)
      pc.push_back({{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                    {"support", m.support}, {"predicted", m.predicted}});
    systems.push_back(std::move(s));
  }
  if (deltas) {
    auto& d = j["f1_deltas"] = ordered_json::array();
    for (const auto& r : *deltas)
      d.push_back({{"class", r.cls < class_names.size() ? class_names[r.cls] : std::to_string(r.cls)},
                   {"f1_without", r.f1_a}, {"f1_early", r.f1_b}, {"delta", r.delta}});
  }
  return j.dump(2) + "\n";
}

}  // namespace emojitime
