#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emojitime/error.hpp"
#include "emojitime/model.hpp"

namespace emojitime {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'E', 'M', 'T', 'M', 'O', 'D', 'E', 'L'};
constexpr char kEndMagic[8] = {'E', 'M', 'T', 'M', 'E', 'N', 'D', '.'};
constexpr std::uint8_t kFloat64 = 8;

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  return {{"fusion", fusion_name(c.fusion)},
          {"char_vocab", c.char_vocab},
          {"word_vocab", c.word_vocab},
          {"char_emb_dim", c.char_emb_dim},
          {"char_hidden", c.char_hidden},
          {"word_emb_dim", c.word_emb_dim},
          {"word_hidden", c.word_hidden},
          {"word_bidirectional", c.word_bidirectional},
          {"attention_dim", c.attention_dim},
          {"fc_hidden", c.fc_hidden},
          {"class_count", c.class_count},
          {"date_field_dim", ModelConfig::kDateFieldDim},
          {"init_scale", c.init_scale},
          {"forget_bias", c.forget_bias},
          {"seed", c.seed},
          {"optimizer",
           {{"lr", c.optimizer.lr},
            {"beta1", c.optimizer.beta1},
            {"beta2", c.optimizer.beta2},
            {"epsilon", c.optimizer.epsilon},
            {"batch_size", c.optimizer.batch_size},
            {"clip_norm", c.optimizer.clip_norm},
            {"max_epochs", c.optimizer.max_epochs},
            {"patience", c.optimizer.patience}}}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.fusion = parse_fusion(j.at("fusion").get<std::string>());
  c.char_vocab = j.at("char_vocab").get<int>();
  c.word_vocab = j.at("word_vocab").get<int>();
  c.char_emb_dim = j.at("char_emb_dim").get<int>();
  c.char_hidden = j.at("char_hidden").get<int>();
  c.word_emb_dim = j.at("word_emb_dim").get<int>();
  c.word_hidden = j.at("word_hidden").get<int>();
  c.word_bidirectional = j.at("word_bidirectional").get<bool>();
  c.attention_dim = j.at("attention_dim").get<int>();
  c.fc_hidden = j.at("fc_hidden").get<int>();
  c.class_count = j.at("class_count").get<int>();
  if (j.at("date_field_dim").get<int>() != ModelConfig::kDateFieldDim)
    throw ParseError("checkpoint: unexpected date field width");
  c.init_scale = j.at("init_scale").get<double>();
  c.forget_bias = j.at("forget_bias").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& o = j.at("optimizer");
  c.optimizer.lr = o.at("lr").get<double>();
  c.optimizer.beta1 = o.at("beta1").get<double>();
  c.optimizer.beta2 = o.at("beta2").get<double>();
  c.optimizer.epsilon = o.at("epsilon").get<double>();
  c.optimizer.batch_size = o.at("batch_size").get<int>();
  c.optimizer.clip_norm = o.at("clip_norm").get<double>();
  c.optimizer.max_epochs = o.at("max_epochs").get<int>();
  c.optimizer.patience = o.at("patience").get<int>();
  return c;
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  template <class T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void doubles(double* dst, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(dst, data_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size())
      throw ParseError("checkpoint truncated at byte offset " + std::to_string(data_.size()), data_.size());
  }
  std::string data_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const Classifier& c, const std::filesystem::path& path) {
  nlohmann::ordered_json meta;
  meta["config"] = config_to_json(c.config);
  meta["classes"] = c.classes;
  meta["words"] = std::vector<std::string>(c.vocab.words().begin() + 1, c.vocab.words().end());
  std::vector<std::uint32_t> chars(c.vocab.chars().begin() + 1, c.vocab.chars().end());
  meta["chars"] = chars;
  const std::string meta_text = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, meta_text.size());
  out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
  std::uint32_t count = 0;
  c.params.visit([&](std::string_view, const Matrix&) { ++count; });
  put<std::uint32_t>(out, count);
  c.params.visit([&](std::string_view name, const Matrix& m) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    put<std::uint8_t>(out, kFloat64);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  });
  out.write(kEndMagic, sizeof(kEndMagic));
  if (!out) throw IoError("error writing checkpoint " + path.string());
}

Classifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  Reader r(ss.str());
  if (r.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    throw ParseError("not a model checkpoint (bad magic bytes)", 0);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw ParseError("checkpoint version mismatch: expected " + std::to_string(kCheckpointVersion) + ", found " +
                         std::to_string(version),
                     sizeof(kMagic));
  Classifier c;
  const auto meta_len = r.get<std::uint64_t>();
  try {
    auto meta = nlohmann::json::parse(r.bytes(meta_len));
    c.config = config_from_json(meta.at("config"));
    c.classes = meta.at("classes").get<std::vector<std::string>>();
    std::vector<char32_t> chars;
    for (auto cp : meta.at("chars").get<std::vector<std::uint32_t>>()) chars.push_back(static_cast<char32_t>(cp));
    c.vocab = ModelVocab(meta.at("words").get<std::vector<std::string>>(), std::move(chars));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint metadata: ") + e.what(), r.pos());
  }
  if (static_cast<int>(c.classes.size()) != c.config.class_count ||
      static_cast<int>(c.vocab.word_count()) != c.config.word_vocab ||
      static_cast<int>(c.vocab.char_count()) != c.config.char_vocab)
    throw ParseError("checkpoint metadata disagrees with its config", r.pos());

  c.params = ModelParameters::zeros(c.config);
  const auto count = r.get<std::uint32_t>();
  std::uint32_t expected = 0;
  c.params.visit([&](std::string_view, const Matrix&) { ++expected; });
  if (count != expected)
    throw ParseError("checkpoint has " + std::to_string(count) + " tensors, expected " + std::to_string(expected),
                     r.pos());
  c.params.visit([&](std::string_view name, Matrix& m) {
    const auto offset = r.pos();
    const auto name_len = r.get<std::uint32_t>();
    const auto stored = r.bytes(name_len);
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    const auto dtype = r.get<std::uint8_t>();
    if (stored != name || rows != m.rows() || cols != m.cols() || dtype != kFloat64)
      throw ParseError("checkpoint tensor '" + stored + "' does not match expected '" + std::string(name) + "' " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()),
                       offset);
    r.doubles(m.data(), static_cast<std::size_t>(m.size()));
  });
  if (r.bytes(sizeof(kEndMagic)) != std::string(kEndMagic, sizeof(kEndMagic)))
    throw ParseError("checkpoint trailer missing", r.pos());
  if (!r.done()) throw ParseError("trailing bytes after checkpoint trailer", r.pos());
  return c;
}

}  // namespace emojitime
