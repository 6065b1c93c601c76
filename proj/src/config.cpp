#include "emojitime/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/random.hpp"

namespace emojitime {

ReportFormat parse_report_format(std::string_view s) {
  if (s == "tsv") return ReportFormat::Tsv;
  if (s == "doc") return ReportFormat::Doc;
  throw Error("format must be 'tsv' or 'doc', got '" + std::string(s) + "'");
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const { return derive_seed(seed, stage); }

void RunConfig::finalize() {
  if (deterministic && !seed_given) throw Error("deterministic mode requires a seed");
  sgns.seed = stage_seed("sgns");
  sgns.deterministic = deterministic;
  model.seed = stage_seed("model");
}

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& obj, std::string prefix, std::vector<std::string>& defaulted, std::set<std::string>& unknown)
      : obj_(obj), prefix_(std::move(prefix)), defaulted_(defaulted) {
    if (!obj_.is_object()) throw Error("config section '" + prefix_ + "' must be an object");
    for (auto it = obj_.begin(); it != obj_.end(); ++it) seen_.insert(it.key());
    unknown_ = &unknown;
  }
  ~Section() = default;

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  template <class T>
  bool get(const std::string& key, T& out) {
    auto it = obj_.find(key);
    used_.insert(key);
    if (it == obj_.end()) {
      defaulted_.push_back(name(key));
      return false;
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw Error("config field '" + name(key) + "' has the wrong type");
    }
    return true;
  }

  const json* child(const std::string& key) {
    used_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() {
    for (const auto& k : seen_)
      if (!used_.count(k)) unknown_->insert(name(k));
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& defaulted_;
  std::set<std::string> seen_, used_;
  std::set<std::string>* unknown_;
};

template <class T>
void at_least(T v, T lo, const std::string& field) {
  if (v < lo) throw Error(field + " must be >= " + std::to_string(lo));
}

void positive(double v, const std::string& field) {
  if (!(v > 0) || !std::isfinite(v)) throw Error(field + " must be > 0");
}

}  // namespace

RunConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), e.byte);
  }
  RunConfig cfg;
  std::set<std::string> unknown;
  auto& def = cfg.defaulted;
  Section top(root, "", def, unknown);

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  std::string s;
  if (top.get("corpus", s)) cfg.corpus = resolve(s);
  if (top.get("inventory", s)) cfg.inventory = resolve(s);
  if (top.get("out", s)) cfg.out_dir = resolve(s);
  if (top.get("warm_start", s)) cfg.warm_start = resolve(s);
  cfg.seed_given = top.get("seed", cfg.seed);
  top.get("deterministic", cfg.deterministic);
  if (top.get("format", s)) cfg.format = parse_report_format(s);

  static const json kEmpty = json::object();
  auto section = [&](const char* key) {
    const json* j = top.child(key);
    return Section(j ? *j : kEmpty, key, def, unknown);
  };

  {
    auto ds = section("dataset");
    ds.get("top_n", cfg.dataset.top_n);
    ds.get("cap", cfg.dataset.cap);
    std::vector<double> split;
    if (ds.get("split", split)) {
      if (split.size() != 3) throw Error("dataset.split must have three entries (train, val, test)");
      double sum = 0;
      for (std::size_t i = 0; i < 3; ++i) {
        if (split[i] < 0) throw Error("dataset.split entries must be >= 0");
        cfg.dataset.split[i] = split[i];
        sum += split[i];
      }
      if (std::abs(sum - 1.0) > 1e-9) throw Error("dataset.split must sum to 1");
    }
    ds.get("strict", cfg.dataset.strict);
    ds.finish();
    at_least<std::size_t>(cfg.dataset.top_n, 1, "dataset.top_n");
    if (cfg.dataset.top_n > 300) throw Error("dataset.top_n must be <= 300");
    at_least<std::size_t>(cfg.dataset.cap, 1, "dataset.cap");
  }
  {
    auto sg = section("sgns");
    auto& c = cfg.sgns;
    sg.get("dim", c.dim);
    sg.get("window", c.max_window);
    sg.get("negatives", c.negatives);
    sg.get("epochs", c.epochs);
    sg.get("initial_lr", c.initial_lr);
    sg.get("min_lr", c.min_lr);
    sg.get("subsample", c.subsample_threshold);
    sg.get("min_count", c.min_count);
    sg.get("threads", c.threads);
    sg.finish();
    at_least(c.dim, 1, "dim");
    at_least(c.max_window, 1, "window");
    at_least(c.negatives, 1, "negatives");
    at_least(c.epochs, 0, "epochs");
    at_least(c.min_count, 1, "min_count");
    at_least(c.threads, 1, "threads");
    positive(c.initial_lr, "initial_lr");
    if (c.min_lr < 0) throw Error("min_lr must be >= 0");
  }
  {
    auto dr = section("drift");
    dr.get("k", cfg.drift.k);
    dr.get("top_pairs", cfg.drift.top_pairs);
    dr.finish();
    at_least<std::size_t>(cfg.drift.k, 1, "drift.k");
    at_least<std::size_t>(cfg.drift.top_pairs, 1, "drift.top_pairs");
  }
  {
    auto md = section("model");
    auto& m = cfg.model;
    if (md.get("fusion", s)) m.fusion = parse_fusion(s);
    md.get("char_emb_dim", m.char_emb_dim);
    md.get("char_hidden", m.char_hidden);
    md.get("word_emb_dim", m.word_emb_dim);
    md.get("word_hidden", m.word_hidden);
    md.get("word_bidirectional", m.word_bidirectional);
    md.get("attention_dim", m.attention_dim);
    md.get("fc_hidden", m.fc_hidden);
    md.get("init_scale", m.init_scale);
    md.get("forget_bias", m.forget_bias);
    auto& o = m.optimizer;
    md.get("lr", o.lr);
    md.get("beta1", o.beta1);
    md.get("beta2", o.beta2);
    md.get("epsilon", o.epsilon);
    md.get("batch_size", o.batch_size);
    md.get("clip_norm", o.clip_norm);
    md.get("max_epochs", o.max_epochs);
    md.get("patience", o.patience);
    md.finish();
    at_least(m.char_emb_dim, 1, "model.char_emb_dim");
    at_least(m.char_hidden, 1, "model.char_hidden");
    at_least(m.word_emb_dim, 1, "model.word_emb_dim");
    at_least(m.word_hidden, 1, "model.word_hidden");
    at_least(m.attention_dim, 0, "model.attention_dim");
    at_least(m.fc_hidden, 1, "model.fc_hidden");
    at_least(o.batch_size, 1, "model.batch_size");
    at_least(o.max_epochs, 0, "model.max_epochs");
    at_least(o.patience, 1, "model.patience");
    if (!(o.lr >= 0)) throw Error("model.lr must be >= 0");
    positive(o.clip_norm, "model.clip_norm");
    if (!(o.beta1 >= 0 && o.beta1 < 1)) throw Error("model.beta1 must be in [0, 1)");
    if (!(o.beta2 >= 0 && o.beta2 < 1)) throw Error("model.beta2 must be in [0, 1)");
    positive(o.epsilon, "model.epsilon");
  }
  top.finish();
  if (!unknown.empty()) {
    std::string list;
    for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
    throw Error("unknown config key(s): " + list);
  }
  for (const auto* p : {&cfg.corpus, &cfg.inventory})
    if (!p->empty() && !std::filesystem::exists(*p)) throw Error("input path does not exist: " + p->string());
  if (cfg.warm_start && !std::filesystem::exists(*cfg.warm_start))
    throw Error("input path does not exist: " + cfg.warm_start->string());
  cfg.finalize();
  return cfg;
}

RunConfig validate_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

}  // namespace emojitime
