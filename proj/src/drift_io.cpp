#include "emojitime/drift_io.hpp"

#include <cmath>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/tsv.hpp"

namespace emojitime {

namespace {

std::size_t pair_index(std::string_view label, std::size_t line) {
  for (std::size_t p = 0; p < 6; ++p)
    if (season_pair_label(p) == label) return p;
  throw ParseError("line " + std::to_string(line) + ": unknown season pair '" + std::string(label) + "'", line);
}

}  // namespace

std::string format_overlap_tsv(const DriftReport& r) {
  std::string out = "# k\t" + std::to_string(r.k) + "\n# excluded";
  for (const auto& e : r.excluded) out += "\t" + e;
  out += "\nEmoji";
  for (const auto& row : r.overlaps) out += "\t" + row.emoji;
  out += "\n";
  for (std::size_t p = 0; p < 6; ++p) {
    out += season_pair_label(p);
    for (const auto& row : r.overlaps) out += "\t" + std::to_string(row.pairs[p]);
    out += "\n";
  }
  out += "All";
  for (const auto& row : r.overlaps) out += "\t" + std::to_string(row.all);
  out += "\n";
  return out;
}

void parse_overlap_tsv(std::string_view text, DriftReport& r) {
  auto rows = tsv::lines(text);
  if (rows.size() < 10) throw ParseError("overlap table: expected 10 lines, found " + std::to_string(rows.size()));
  auto k_cells = tsv::split(rows[0]);
  if (k_cells.size() != 2 || k_cells[0] != "# k") throw ParseError("overlap table: missing k line", 1);
  r.k = tsv::parse_count(k_cells[1], 1);
  auto ex = tsv::split(rows[1]);
  if (ex.empty() || ex[0] != "# excluded") throw ParseError("overlap table: missing exclusion line", 2);
  r.excluded.assign(ex.begin() + 1, ex.end());
  auto header = tsv::split(rows[2]);
  if (header.empty() || header[0] != "Emoji") throw ParseError("overlap table: missing Emoji header", 3);
  r.overlaps.assign(header.size() - 1, OverlapRow{});
  for (std::size_t e = 1; e < header.size(); ++e) r.overlaps[e - 1].emoji = header[e];
  for (std::size_t l = 3; l < 10; ++l) {
    auto cells = tsv::split(rows[l]);
    if (cells.size() != header.size())
      throw ParseError("overlap table: line " + std::to_string(l + 1) + " has wrong column count", l + 1);
    const bool all = cells[0] == "All";
    const std::size_t p = all ? 0 : pair_index(cells[0], l + 1);
    for (std::size_t e = 1; e < cells.size(); ++e) {
      auto v = tsv::parse_count(cells[e], l + 1);
      if (all) r.overlaps[e - 1].all = v;
      else r.overlaps[e - 1].pairs[p] = v;
    }
  }
}

std::string format_pearson_tsv(const DriftReport& r) {
  std::string out = "pair\tpearson\n";
  for (std::size_t p = 0; p < 6; ++p) out += season_pair_label(p) + "\t" + tsv::number(r.pearson[p]) + "\n";
  return out;
}

void parse_pearson_tsv(std::string_view text, DriftReport& r) {
  auto rows = tsv::lines(text);
  if (rows.size() != 7 || rows[0] != "pair\tpearson") throw ParseError("pearson table: bad layout");
  for (std::size_t l = 1; l < 7; ++l) {
    auto cells = tsv::split(rows[l]);
    if (cells.size() != 2) throw ParseError("pearson table: bad row", l + 1);
    r.pearson[pair_index(cells[0], l + 1)] = tsv::parse_double(cells[1], l + 1);
  }
}

std::string format_deltas_tsv(const DriftReport& r) {
  std::string out;
  std::size_t depth = 0;
  for (std::size_t p = 0; p < 6; ++p) {
    const auto& [a, b] = kSeasonPairs[p];
    out += (p ? "\t" : "") + season_pair_label(p) + "\t" + std::string(season_name(a)) + "\t" +
           std::string(season_name(b));
    depth = std::max(depth, r.deltas[p].size());
  }
  out += "\n";
  for (std::size_t i = 0; i < depth; ++i) {
    for (std::size_t p = 0; p < 6; ++p) {
      if (p) out += "\t";
      if (i < r.deltas[p].size()) {
        const auto& d = r.deltas[p][i];
        out += d.first + " " + d.second + "\t" + tsv::number(d.sim_a) + "\t" + tsv::number(d.sim_b);
      } else {
        out += "\t\t";
      }
    }
    out += "\n";
  }
  return out;
}

void parse_deltas_tsv(std::string_view text, DriftReport& r) {
  auto rows = tsv::lines(text);
  if (rows.empty()) throw ParseError("delta table: empty");
  auto header = tsv::split(rows[0]);
  if (header.size() != 18) throw ParseError("delta table: expected 18 header columns", 1);
  for (std::size_t p = 0; p < 6; ++p) {
    if (header[3 * p] != season_pair_label(p)) throw ParseError("delta table: unexpected header", 1);
    r.deltas[p].clear();
  }
  for (std::size_t l = 1; l < rows.size(); ++l) {
    auto cells = tsv::split(rows[l]);
    if (cells.size() != 18) throw ParseError("delta table: wrong column count", l + 1);
    for (std::size_t p = 0; p < 6; ++p) {
      const auto& pair = cells[3 * p];
      if (pair.empty()) continue;
      auto sp = pair.find(' ');
      if (sp == std::string::npos) throw ParseError("delta table: bad emoji pair", l + 1);
      PairDelta d;
      d.first = pair.substr(0, sp);
      d.second = pair.substr(sp + 1);
      d.sim_a = tsv::parse_double(cells[3 * p + 1], l + 1);
      d.sim_b = tsv::parse_double(cells[3 * p + 2], l + 1);
      d.delta = std::abs(d.sim_a - d.sim_b);
      r.deltas[p].push_back(std::move(d));
    }
  }
}

std::string format_drift_doc(const DriftReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["k"] = r.k;
  j["excluded"] = r.excluded;
  auto& ov = j["overlap"] = ordered_json::array();
  for (const auto& row : r.overlaps) {
    ordered_json o;
    o["emoji"] = row.emoji;
    for (std::size_t p = 0; p < 6; ++p) o[season_pair_label(p)] = row.pairs[p];
    o["all"] = row.all;
    ov.push_back(std::move(o));
  }
  auto& pe = j["pearson"] = ordered_json::object();
  for (std::size_t p = 0; p < 6; ++p) pe[season_pair_label(p)] = r.pearson[p];
  auto& de = j["deltas"] = ordered_json::object();
  for (std::size_t p = 0; p < 6; ++p) {
    auto& list = de[season_pair_label(p)] = ordered_json::array();
    for (const auto& d : r.deltas[p])
      list.push_back({{"pair", {d.first, d.second}}, {"sim_a", d.sim_a}, {"sim_b", d.sim_b}, {"delta", d.delta}});
  }
  return j.dump(2) + "\n";
}

DriftReport parse_drift_doc(std::string_view text) {
  DriftReport r;
  try {
    auto j = nlohmann::json::parse(text);
    r.k = j.at("k").get<std::size_t>();
    r.excluded = j.at("excluded").get<std::vector<std::string>>();
    for (const auto& o : j.at("overlap")) {
      OverlapRow row;
      row.emoji = o.at("emoji").get<std::string>();
      for (std::size_t p = 0; p < 6; ++p) row.pairs[p] = o.at(season_pair_label(p)).get<std::size_t>();
      row.all = o.at("all").get<std::size_t>();
      r.overlaps.push_back(std::move(row));
    }
    for (std::size_t p = 0; p < 6; ++p) {
      r.pearson[p] = j.at("pearson").at(season_pair_label(p)).get<double>();
      for (const auto& d : j.at("deltas").at(season_pair_label(p))) {
        PairDelta pd;
        pd.first = d.at("pair").at(0).get<std::string>();
        pd.second = d.at("pair").at(1).get<std::string>();
        pd.sim_a = d.at("sim_a").get<double>();
        pd.sim_b = d.at("sim_b").get<double>();
        pd.delta = d.at("delta").get<double>();
        r.deltas[p].push_back(std::move(pd));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("drift document: ") + e.what());
  }
  return r;
}

}  // namespace emojitime
