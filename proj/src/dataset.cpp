#include "emojitime/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/random.hpp"

namespace emojitime {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

namespace {
Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ParseError("unknown split: " + std::string(s));
}
}  // namespace

std::vector<const Example*> PredictionDataset::split(Split s) const {
  std::vector<const Example*> out;
  for (const auto& e : examples)
    if (e.split == s) out.push_back(&e);
  return out;
}

PredictionDataset build_prediction_dataset(const std::vector<Message>& msgs,
                                           const DatasetOptions& opts) {
  if (opts.cap == 0) throw Error("dataset cap must be >= 1");
  if (opts.top_n == 0) throw Error("dataset top_n must be >= 1");
  double ratio_sum = 0;
  for (double r : opts.split_ratios) {
    if (r < 0) throw Error("split ratios must be non-negative");
    ratio_sum += r;
  }
  if (std::abs(ratio_sum - 1.0) > 1e-9) throw Error("split ratios must sum to 1");

  auto top = frequency_table(msgs, opts.top_n);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < top.size(); ++i) rank.emplace(top[i].first, i);

  // Eligible message indices per top-ranked emoji, in input order.
  std::vector<std::vector<std::size_t>> eligible(top.size());
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    const auto& m = msgs[i];
    if (m.emojis.size() != 1) continue;
    auto it = rank.find(m.emojis.front().emoji);
    if (it == rank.end()) continue;
    auto n_target = std::count(m.tokens.begin(), m.tokens.end(), m.emojis.front().emoji);
    if (static_cast<std::size_t>(n_target) == m.tokens.size()) continue;
    eligible[it->second].push_back(i);
  }

  PredictionDataset ds;
  Rng sample_rng(derive_seed(opts.seed, "dataset.cap"));
  Rng split_rng(derive_seed(opts.seed, "dataset.split"));
  for (std::size_t r = 0; r < top.size(); ++r) {
    auto& idx = eligible[r];
    if (idx.empty()) continue;
    if (idx.size() > opts.cap) {
      shuffle(idx.begin(), idx.end(), sample_rng);
      idx.resize(opts.cap);
      std::sort(idx.begin(), idx.end());
    }
    const int label = static_cast<int>(ds.classes.size());
    const auto& emoji = top[r].first;
    ds.classes.push_back(emoji);

    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order.begin(), order.end(), split_rng);
    const auto n = idx.size();
    auto n_train = static_cast<std::size_t>(std::llround(opts.split_ratios[0] * n));
    auto n_val = static_cast<std::size_t>(std::llround(opts.split_ratios[1] * n));
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);
    std::vector<Split> assign(n, Split::Test);
    for (std::size_t k = 0; k < n; ++k) {
      if (k < n_train) assign[order[k]] = Split::Train;
      else if (k < n_train + n_val) assign[order[k]] = Split::Val;
    }

    for (std::size_t k = 0; k < n; ++k) {
      const auto& m = msgs[idx[k]];
      Example ex;
      ex.source_id = m.id;
      for (const auto& t : m.tokens)
        if (t != emoji) ex.tokens.push_back(t);
      ex.date = date_features(m.timestamp);
      ex.label = label;
      ex.split = assign[k];
      ds.examples.push_back(std::move(ex));
    }
  }
  if (ds.examples.empty()) throw Error("empty dataset");
  return ds;
}

void save_dataset(const PredictionDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path.string());
  nlohmann::json header = {{"classes", ds.classes}, {"examples", ds.examples.size()}};
  out << header.dump() << '\n';
  for (const auto& e : ds.examples) {
    nlohmann::json j = {{"id", e.source_id},
                        {"tokens", e.tokens},
                        {"month", e.date.month},
                        {"day_of_week", e.date.day_of_week},
                        {"hour", e.date.hour},
                        {"label", e.label},
                        {"split", split_name(e.split)}};
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("error writing dataset: " + path.string());
}

PredictionDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  PredictionDataset ds;
  std::string line;
  std::size_t lineno = 0;
  std::size_t expected = 0;
  try {
    if (!std::getline(in, line)) throw ParseError("dataset file is empty", 1);
    ++lineno;
    auto header = nlohmann::json::parse(line);
    ds.classes = header.at("classes").get<std::vector<std::string>>();
    expected = header.at("examples").get<std::size_t>();
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      Example e;
      e.source_id = j.at("id").get<std::string>();
      e.tokens = j.at("tokens").get<std::vector<std::string>>();
      e.date.month = j.at("month").get<int>();
      e.date.day_of_week = j.at("day_of_week").get<int>();
      e.date.hour = j.at("hour").get<int>();
      e.date.season = season_of_month(e.date.month);
      e.label = j.at("label").get<int>();
      if (e.label < 0 || e.label >= static_cast<int>(ds.classes.size()))
        throw ParseError("label out of range", lineno);
      e.split = parse_split(j.at("split").get<std::string>());
      ds.examples.push_back(std::move(e));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what(), lineno);
  }
  if (ds.examples.size() != expected)
    throw ParseError("dataset truncated: expected " + std::to_string(expected) + " examples, found " +
                     std::to_string(ds.examples.size()));
  return ds;
}

}  // namespace emojitime
