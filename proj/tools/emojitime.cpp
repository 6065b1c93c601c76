// emojitime: seasonal emoji drift and date-aware emoji prediction.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emojitime/config.hpp"
#include "emojitime/corpus.hpp"
#include "emojitime/dataset.hpp"
#include "emojitime/drift.hpp"
#include "emojitime/drift_io.hpp"
#include "emojitime/embeddings.hpp"
#include "emojitime/error.hpp"
#include "emojitime/eval.hpp"
#include "emojitime/eval_io.hpp"
#include "emojitime/inventory.hpp"
#include "emojitime/model.hpp"
#include "emojitime/random.hpp"
#include "emojitime/tsv.hpp"

namespace fs = std::filesystem;
using namespace emojitime;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

Level log_level() {
  const char* env = std::getenv("EMOJITIME_LOG_LEVEL");
  std::string v = env ? env : "info";
  if (v == "error") return Level::Error;
  if (v == "warn") return Level::Warn;
  if (v == "debug") return Level::Debug;
  if (v == "quiet") return static_cast<Level>(-1);
  return Level::Info;
}

// One line per event: level=info event=ingest.done messages=12
class Log {
 public:
  Log(Level lvl, std::string event) : on_(lvl <= log_level()) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (on_) line_ << "level=" << names[static_cast<int>(lvl)] << " event=" << event;
  }
  ~Log() {
    if (on_) std::cerr << line_.str() << '\n';
  }
  template <class T>
  Log& kv(const char* key, const T& value) {
    if (on_) line_ << ' ' << key << '=' << value;
    return *this;
  }
  Log& kv(const char* key, const std::string& value) {
    if (on_) {
      if (value.find_first_of(" \t\"") == std::string::npos && !value.empty())
        line_ << ' ' << key << '=' << value;
      else
        line_ << ' ' << key << '=' << nlohmann::json(value).dump();
    }
    return *this;
  }
  Log& kv(const char* key, const char* value) { return kv(key, std::string(value)); }

 private:
  bool on_;
  std::ostringstream line_;
};

struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + p.string());
  Log(Level::Debug, "write").kv("path", p.string()).kv("bytes", content.size());
}

// Global options, applied on top of the config file.
struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::string format;
  std::string out;
  std::string corpus;
  std::string inventory;
};

RunConfig load_config(const Globals& g) {
  RunConfig cfg;
  if (!g.config.empty()) {
    cfg = validate_config(g.config);
  } else {
    cfg = parse_config("{}");
  }
  if (g.seed) {
    cfg.seed = *g.seed;
    cfg.seed_given = true;
  }
  if (g.deterministic) cfg.deterministic = true;
  if (!g.format.empty()) cfg.format = parse_report_format(g.format);
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (!g.corpus.empty()) cfg.corpus = g.corpus;
  if (!g.inventory.empty()) cfg.inventory = g.inventory;
  cfg.finalize();
  std::string defaulted;
  for (const auto& f : cfg.defaulted) defaulted += (defaulted.empty() ? "" : ",") + f;
  Log(Level::Info, "config.defaults").kv("fields", defaulted);
  Log(Level::Info, "config")
      .kv("seed", cfg.seed)
      .kv("deterministic", cfg.deterministic ? "true" : "false")
      .kv("out", cfg.out_dir.string());
  return cfg;
}

EmojiInventory require_inventory(const RunConfig& cfg) {
  if (cfg.inventory.empty()) throw UsageError("an emoji inventory is required (--inventory or config 'inventory')");
  auto inv = EmojiInventory::load(cfg.inventory);
  Log(Level::Info, "inventory").kv("sequences", inv.size()).kv("version", inv.version());
  return inv;
}

// Normalised messages as written by ingest; re-tokenised on load.
fs::path messages_path(const RunConfig& c) { return c.out_dir / "messages.jsonl"; }
fs::path slice_path(const RunConfig& c, Season s) {
  return c.out_dir / "slices" / (std::string(season_name(s)) + ".txt");
}
fs::path space_path(const RunConfig& c, Season s) {
  return c.out_dir / "embeddings" / (std::string(season_name(s)) + ".vec");
}
fs::path model_path(const RunConfig& c, FusionMode m) {
  return c.out_dir / ("model_" + std::string(fusion_name(m)) + ".ckpt");
}

std::vector<Message> load_messages(const RunConfig& cfg, const EmojiInventory& inv) {
  std::ifstream in(messages_path(cfg));
  if (!in) throw IoError("cannot read " + messages_path(cfg).string() + " (run ingest first)");
  return parse_corpus(in, inv, {.strict = true}).messages;
}

int cmd_ingest(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw UsageError("a corpus is required (--corpus or config 'corpus')");
  auto inv = require_inventory(cfg);
  std::ifstream in(cfg.corpus);
  if (!in) throw IoError("cannot read corpus " + cfg.corpus.string());
  auto parsed = parse_corpus(in, inv, {.strict = cfg.dataset.strict});
  std::size_t raw = parsed.messages.size();
  auto msgs = dedupe_messages(std::move(parsed.messages));
  Log(Level::Info, "ingest.parsed")
      .kv("messages", raw)
      .kv("skipped", parsed.skipped)
      .kv("duplicates", raw - msgs.size());

  std::string jsonl;
  for (const auto& m : msgs) {
    nlohmann::ordered_json j;
    j["id"] = m.id;
    j["text"] = m.text;
    j["timestamp"] = m.timestamp.epoch_seconds;
    j["tz_offset_minutes"] = m.timestamp.offset_minutes;
    jsonl += j.dump() + "\n";
  }
  write_file(messages_path(cfg), jsonl);

  auto slices = build_seasonal_slices(msgs);
  nlohmann::ordered_json summary;
  summary["inventory_version"] = inv.version();
  summary["messages"] = msgs.size();
  summary["skipped"] = parsed.skipped;
  summary["duplicates"] = raw - msgs.size();
  for (Season s : kSeasons) {
    std::string text;
    for (const auto& m : slices[s]) {
      if (m.tokens.empty()) continue;
      for (std::size_t i = 0; i < m.tokens.size(); ++i) text += (i ? " " : "") + m.tokens[i];
      text += '\n';
    }
    write_file(slice_path(cfg, s), text);
    auto idx = static_cast<std::size_t>(s);
    summary["seasons"][std::string(season_name(s))] = {{"messages", slices.messages[idx].size()},
                                                       {"tokens", slices.token_counts[idx]}};
    Log(Level::Info, "ingest.slice")
        .kv("season", std::string(season_name(s)))
        .kv("messages", slices.messages[idx].size())
        .kv("tokens", slices.token_counts[idx]);
  }

  std::string freq = "emoji\tcount\n";
  for (const auto& [e, n] : frequency_table(msgs, std::numeric_limits<std::size_t>::max()))
    freq += e + "\t" + std::to_string(n) + "\n";
  write_file(cfg.out_dir / "frequency.tsv", freq);

  DatasetOptions opts;
  opts.top_n = cfg.dataset.top_n;
  opts.cap = cfg.dataset.cap;
  opts.split_ratios = cfg.dataset.split;
  opts.seed = cfg.stage_seed("corpus");
  try {
    auto ds = build_prediction_dataset(msgs, opts);
    save_dataset(ds, cfg.out_dir / "dataset.jsonl");
    summary["dataset"] = {{"classes", ds.classes.size()},
                          {"train", ds.split(Split::Train).size()},
                          {"val", ds.split(Split::Val).size()},
                          {"test", ds.split(Split::Test).size()}};
    Log(Level::Info, "ingest.dataset").kv("classes", ds.classes.size()).kv("examples", ds.examples.size());
  } catch (const Error& e) {
    Log(Level::Warn, "ingest.dataset").kv("skipped", std::string(e.what()));
  }
  write_file(cfg.out_dir / "ingest_summary.json", summary.dump(2) + "\n");
  return 0;
}

int cmd_stats(const RunConfig& cfg) {
  auto inv = require_inventory(cfg);
  auto msgs = load_messages(cfg, inv);
  auto slices = build_seasonal_slices(msgs);
  std::string seasons = "season\tmessages\ttokens\temoji_occurrences\n";
  for (Season s : kSeasons) {
    auto idx = static_cast<std::size_t>(s);
    std::size_t occ = 0;
    for (const auto& m : slices[s]) occ += m.emojis.size();
    seasons += std::string(season_name(s)) + "\t" + std::to_string(slices.messages[idx].size()) + "\t" +
               std::to_string(slices.token_counts[idx]) + "\t" + std::to_string(occ) + "\n";
    std::string freq = "rank\temoji\tcount\n";
    std::size_t rank = 0;
    for (const auto& [e, n] : frequency_table(slices[s], cfg.dataset.top_n))
      freq += std::to_string(++rank) + "\t" + e + "\t" + std::to_string(n) + "\n";
    write_file(cfg.out_dir / "stats" / ("frequency_" + std::string(season_name(s)) + ".tsv"), freq);
  }
  write_file(cfg.out_dir / "stats" / "seasons.tsv", seasons);
  std::string freq = "rank\temoji\tcount\n";
  std::size_t rank = 0;
  for (const auto& [e, n] : frequency_table(msgs, cfg.dataset.top_n))
    freq += std::to_string(++rank) + "\t" + e + "\t" + std::to_string(n) + "\n";
  write_file(cfg.out_dir / "stats" / "frequency.tsv", freq);
  Log(Level::Info, "stats.done").kv("messages", msgs.size());
  return 0;
}

std::vector<std::vector<std::string>> read_sentences(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string() + " (run ingest first)");
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = tsv::split(line, ' ');
    std::erase(toks, std::string());
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

int cmd_train_embeddings(const RunConfig& cfg, const std::string& only) {
  for (Season s : kSeasons) {
    if (!only.empty() && parse_season(only) != s) continue;
    auto sentences = read_sentences(slice_path(cfg, s));
    SgnsConfig sc = cfg.sgns;
    sc.seed = derive_seed(cfg.sgns.seed, season_name(s));
    SgnsLog log;
    auto space = train_sgns(sentences, sc, std::string(season_name(s)), &log);
    for (std::size_t e = 0; e < log.epoch_loss.size(); ++e)
      Log(Level::Info, "sgns.epoch")
          .kv("season", std::string(season_name(s)))
          .kv("epoch", e + 1)
          .kv("loss", tsv::number(log.epoch_loss[e]));
    fs::create_directories(space_path(cfg, s).parent_path());
    persist_space(space, space_path(cfg, s));
    Log(Level::Info, "sgns.done").kv("season", std::string(season_name(s))).kv("vocab", space.vocab.size());
  }
  return 0;
}

std::vector<std::string> read_frequency(const RunConfig& cfg) {
  auto text = read_file(cfg.out_dir / "frequency.tsv");
  std::vector<std::string> out;
  bool header = true;
  for (const auto& line : tsv::lines(text)) {
    if (std::exchange(header, false) || line.empty()) continue;
    out.push_back(tsv::split(line).at(0));
    if (out.size() == cfg.dataset.top_n) break;
  }
  return out;
}

int cmd_drift(const RunConfig& cfg) {
  std::vector<EmbeddingSpace> spaces;
  for (Season s : kSeasons) spaces.push_back(load_space(space_path(cfg, s)));
  std::vector<const EmbeddingSpace*> ptrs;
  for (const auto& s : spaces) ptrs.push_back(&s);
  auto emojis = read_frequency(cfg);
  auto report = drift_report(ptrs, emojis, cfg.drift.k, cfg.drift.top_pairs);
  Log(Level::Info, "drift.done")
      .kv("emojis", report.overlaps.size())
      .kv("excluded", report.excluded.size())
      .kv("k", report.k);
  auto dir = cfg.out_dir / "drift";
  if (cfg.format == ReportFormat::Doc) {
    write_file(dir / "report.json", format_drift_doc(report));
  } else {
    write_file(dir / "overlap.tsv", format_overlap_tsv(report));
    write_file(dir / "pearson.tsv", format_pearson_tsv(report));
    write_file(dir / "deltas.tsv", format_deltas_tsv(report));
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& fusion) {
  auto ds = load_dataset(cfg.out_dir / "dataset.jsonl");
  ModelConfig mc = cfg.model;
  if (!fusion.empty()) mc.fusion = parse_fusion(fusion);
  std::optional<EmbeddingSpace> warm;
  if (cfg.warm_start) {
    warm = load_space(*cfg.warm_start);
    Log(Level::Info, "train.warm_start").kv("path", cfg.warm_start->string()).kv("vocab", warm->vocab.size());
  }
  Log(Level::Info, "train.start")
      .kv("fusion", std::string(fusion_name(mc.fusion)))
      .kv("classes", ds.classes.size())
      .kv("train", ds.split(Split::Train).size())
      .kv("val", ds.split(Split::Val).size());
  auto result = train_classifier(ds, mc, warm ? &*warm : nullptr);
  std::string log = "epoch\ttrain_loss\tval_macro_f1\n";
  for (std::size_t e = 0; e < result.log.size(); ++e) {
    const auto& l = result.log[e];
    log += std::to_string(e + 1) + "\t" + tsv::number(l.train_loss) + "\t" + tsv::number(l.val_macro_f1) + "\n";
    Log(Level::Info, "train.epoch")
        .kv("epoch", e + 1)
        .kv("loss", tsv::number(l.train_loss))
        .kv("val_macro_f1", tsv::number(l.val_macro_f1));
  }
  auto name = std::string(fusion_name(mc.fusion));
  write_file(cfg.out_dir / ("train_log_" + name + ".tsv"), log);
  fs::create_directories(cfg.out_dir);
  save_checkpoint(result.classifier, model_path(cfg, mc.fusion));
  Log(Level::Info, "train.done")
      .kv("fusion", name)
      .kv("best_epoch", result.best_epoch + 1)
      .kv("parameters", parameter_count(result.classifier.config));
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, std::size_t top) {
  auto ds = load_dataset(cfg.out_dir / "dataset.jsonl");
  std::vector<EvalReport> reports;
  const EvalReport* none = nullptr;
  const EvalReport* early = nullptr;
  reports.reserve(3);
  for (FusionMode m : {FusionMode::None, FusionMode::Early, FusionMode::Late}) {
    auto path = model_path(cfg, m);
    if (!fs::exists(path)) continue;
    auto clf = load_checkpoint(path);
    if (clf.classes != ds.classes) throw Error("checkpoint " + path.string() + " was trained on different classes");
    auto test = encode_split(clf.vocab, ds, Split::Test);
    if (test.empty()) throw Error("test split is empty");
    auto input = score_examples(clf.params, clf.config, test);
    reports.push_back(build_report(input, std::string(fusion_name(m))));
    if (m == FusionMode::None) none = &reports.back();
    if (m == FusionMode::Early) early = &reports.back();
    Log(Level::Info, "evaluate.model")
        .kv("fusion", std::string(fusion_name(m)))
        .kv("n", input.gold.size())
        .kv("macro_f1", tsv::number(reports.back().f1));
  }
  if (reports.empty()) throw Error("no trained model found in " + cfg.out_dir.string() + " (run train first)");
  std::vector<F1Delta> deltas;
  if (none && early) deltas = f1_delta_table(*none, *early, top);
  auto dir = cfg.out_dir / "eval";
  if (cfg.format == ReportFormat::Doc) {
    write_file(dir / "report.json", format_eval_doc(reports, ds.classes, none && early ? &deltas : nullptr));
  } else {
    write_file(dir / "table5.tsv", format_table5(reports));
    if (none && early) write_file(dir / "table6.tsv", format_table6(deltas, ds.classes));
  }
  return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& model, const std::string& text,
                const std::string& timestamp, std::size_t k) {
  auto inv = require_inventory(cfg);
  fs::path path = model.empty() ? model_path(cfg, cfg.model.fusion) : fs::path(model);
  auto clf = load_checkpoint(path);
  auto date = date_features(parse_rfc3339(timestamp));
  auto tokens = tokenize(text, inv);
  std::erase_if(tokens, [&](const std::string& t) { return !extract_emojis(t, inv).empty(); });
  if (tokens.empty()) throw Error("message has no tokens after removing emojis");
  if (k == 0 || k > clf.classes.size()) throw UsageError("--k must be in [1, " + std::to_string(clf.classes.size()) + "]");
  char buf[32];
  for (const auto& [emoji, p] : clf.predict(tokens, date, k)) {
    std::snprintf(buf, sizeof(buf), "%.6f", p);
    std::cout << emoji << '\t' << buf << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal emoji drift analysis and date-aware emoji prediction", "emojitime"};
  Globals g;
  app.option_defaults()->always_capture_default();
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "Master seed; stage seeds derive from it");
  app.add_flag("--deterministic", g.deterministic, "Single-worker training, byte-identical outputs");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"tsv", "doc"}));
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--corpus", g.corpus, "JSONL corpus (overrides config)");
  app.add_option("--inventory", g.inventory, "Emoji inventory file (overrides config)");
  app.require_subcommand(1, 1);

  std::string season, fusion, model, text, timestamp;
  std::size_t top = 10, k = 5;
  auto* ingest = app.add_subcommand("ingest", "Parse, deduplicate and slice the corpus; build the prediction dataset");
  auto* stats = app.add_subcommand("stats", "Per-season counts and emoji frequency tables");
  auto* embed = app.add_subcommand("train-embeddings", "Train one SGNS space per season");
  embed->add_option("--season", season, "Train only this season");
  auto* drift = app.add_subcommand("drift", "k-NN overlap, similarity-matrix Pearson and top pair deltas");
  auto* train = app.add_subcommand("train", "Train the emoji classifier");
  train->add_option("--fusion", fusion, "Date fusion mode")->check(CLI::IsMember({"none", "early", "late"}));
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on the test split");
  evaluate->add_option("--top", top, "Rows in the per-class F1 delta table");
  auto* predict = app.add_subcommand("predict", "Rank emojis for one message");
  predict->add_option("--model", model, "Checkpoint (default: model for the configured fusion)");
  predict->add_option("--text", text, "Message text")->required();
  predict->add_option("--timestamp", timestamp, "RFC 3339 timestamp")->required();
  predict->add_option("--k", k, "Number of predictions");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    auto cfg = load_config(g);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
    if (embed->parsed()) return cmd_train_embeddings(cfg, season);
    if (drift->parsed()) return cmd_drift(cfg);
    if (train->parsed()) return cmd_train(cfg, fusion);
    if (evaluate->parsed()) return cmd_evaluate(cfg, top);
    if (predict->parsed()) return cmd_predict(cfg, model, text, timestamp, k);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
