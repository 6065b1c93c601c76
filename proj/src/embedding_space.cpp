#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "emojitime/embeddings.hpp"
#include "emojitime/error.hpp"
#include "emojitime/kernels.hpp"

namespace emojitime {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::span<const float> EmbeddingSpace::vector(const std::string& token) const {
  auto id = vocab.find(token);
  if (!id) throw Error("token not in vocabulary: " + token);
  return vector(*id);
}

namespace {
template <class T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0 || bb == 0) throw Error("cosine: zero vector");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}
}  // namespace

double cosine(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }
double cosine(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

std::vector<std::string> knn(const EmbeddingSpace& space, const std::string& token, std::size_t k,
                             const std::vector<std::string>& candidates) {
  if (k == 0) throw Error("knn: k must be >= 1");
  auto query = space.vector(token);
  std::vector<const std::string*> names;
  std::vector<std::span<const float>> rows;
  for (const auto& c : candidates) {
    if (c == token) continue;
    rows.push_back(space.vector(c));
    names.push_back(&c);
  }
  auto scores = kernels::cosine_scores_parallel(query, rows);
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return *names[a] < *names[b];
  };
  const auto take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(*names[order[i]]);
  return out;
}

std::vector<std::string> knn(const EmbeddingSpace& space, const std::string& token, std::size_t k) {
  return knn(space, token, k, space.vocab.tokens());
}

namespace {

constexpr char kSidecarMagic[8] = {'E', 'M', 'T', 'S', 'P', 'A', 'C', 'E'};
constexpr std::uint32_t kSidecarVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}
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
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void floats(float* dst, std::size_t n) {
    need(n * sizeof(float));
    std::memcpy(dst, data_.data() + pos_, n * sizeof(float));
    pos_ += n * sizeof(float);
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(name_ + ": " + what + " at byte offset " + std::to_string(pos_), pos_);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) fail("unexpected end of file");
  }
  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".bin";
  return p;
}

}  // namespace

void persist_space(const EmbeddingSpace& space, const std::filesystem::path& path) {
  const std::size_t dim = static_cast<std::size_t>(space.dim);
  if (space.input.size() != space.vocab.size() * dim) throw Error("persist_space: input matrix shape mismatch");
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << space.vocab.size() << ' ' << space.dim << '\n';
    char buf[64];
    std::string line;
    for (std::size_t i = 0; i < space.vocab.size(); ++i) {
      line = space.vocab.tokens()[i];
      for (std::size_t d = 0; d < dim; ++d) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), space.input[i * dim + d]);
        line.push_back(' ');
        line.append(buf, end);
      }
      line.push_back('\n');
      out << line;
    }
    if (!out) throw IoError("error writing " + path.string());
  }
  std::ofstream bin(sidecar_path(path), std::ios::binary);
  if (!bin) throw IoError("cannot write " + sidecar_path(path).string());
  bin.write(kSidecarMagic, sizeof(kSidecarMagic));
  put(bin, kSidecarVersion);
  put(bin, static_cast<std::uint32_t>(space.tag.size()));
  bin.write(space.tag.data(), static_cast<std::streamsize>(space.tag.size()));
  put(bin, static_cast<std::uint64_t>(space.vocab.size()));
  put(bin, static_cast<std::uint32_t>(space.dim));
  put(bin, static_cast<std::int32_t>(space.vocab.min_count()));
  for (auto c : space.vocab.counts()) put(bin, c);
  const bool has_output = space.output.size() == space.input.size();
  put(bin, static_cast<std::uint8_t>(has_output));
  if (has_output)
    bin.write(reinterpret_cast<const char*>(space.output.data()),
              static_cast<std::streamsize>(space.output.size() * sizeof(float)));
  if (!bin) throw IoError("error writing " + sidecar_path(path).string());
}

EmbeddingSpace load_space(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string name = path.string();
  auto fail = [&](const std::string& what, std::size_t offset) -> ParseError {
    return ParseError(name + ": " + what + " at byte offset " + std::to_string(offset), offset);
  };
  const char* base = text.data();
  const char* end = base + text.size();
  const char* p = base;
  auto skip_spaces = [&] {
    while (p < end && *p == ' ') ++p;
  };
  std::uint64_t count = 0;
  int dim = 0;
  {
    auto r1 = std::from_chars(p, end, count);
    if (r1.ec != std::errc{}) throw fail("bad header count", 0);
    p = r1.ptr;
    skip_spaces();
    auto r2 = std::from_chars(p, end, dim);
    if (r2.ec != std::errc{} || dim < 1) throw fail("bad header dimension", static_cast<std::size_t>(p - base));
    p = r2.ptr;
    skip_spaces();
    if (p < end && *p == '\r') ++p;
    if (p >= end || *p != '\n') throw fail("expected end of header line", static_cast<std::size_t>(p - base));
    ++p;
  }
  std::vector<std::string> tokens;
  std::vector<float> input;
  tokens.reserve(count);
  input.reserve(count * static_cast<std::size_t>(dim));
  while (p < end) {
    if (*p == '\n') {
      ++p;
      continue;
    }
    if (tokens.size() == count)
      throw fail("more rows than the header count " + std::to_string(count), static_cast<std::size_t>(p - base));
    const char* tok_start = p;
    while (p < end && *p != ' ' && *p != '\n') ++p;
    if (p == tok_start) throw fail("empty token", static_cast<std::size_t>(p - base));
    tokens.emplace_back(tok_start, p);
    for (int d = 0; d < dim; ++d) {
      skip_spaces();
      float v;
      auto r = std::from_chars(p, end, v);
      if (r.ec != std::errc{})
        throw fail("expected " + std::to_string(dim) + " values for '" + tokens.back() + "'",
                   static_cast<std::size_t>(p - base));
      input.push_back(v);
      p = r.ptr;
    }
    skip_spaces();
    if (p < end && *p == '\r') ++p;
    if (p < end && *p != '\n')
      throw fail("trailing data after " + std::to_string(dim) + " values", static_cast<std::size_t>(p - base));
  }
  if (tokens.size() != count)
    throw fail("header declares " + std::to_string(count) + " rows, found " + std::to_string(tokens.size()),
               text.size());

  EmbeddingSpace space;
  space.dim = dim;
  space.input = std::move(input);
  std::vector<std::uint64_t> counts(tokens.size(), 0);
  int min_count = 1;
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    Reader r(read_file(side), side.string());
    if (r.bytes(sizeof(kSidecarMagic)) != std::string(kSidecarMagic, sizeof(kSidecarMagic)))
      r.fail("bad magic");
    auto version = r.get<std::uint32_t>();
    if (version != kSidecarVersion)
      r.fail("unsupported sidecar version " + std::to_string(version) + " (expected " +
             std::to_string(kSidecarVersion) + ")");
    auto tag_len = r.get<std::uint32_t>();
    space.tag = r.bytes(tag_len);
    if (r.get<std::uint64_t>() != count) r.fail("row count differs from text file");
    if (r.get<std::uint32_t>() != static_cast<std::uint32_t>(dim)) r.fail("dimension differs from text file");
    min_count = r.get<std::int32_t>();
    for (auto& c : counts) c = r.get<std::uint64_t>();
    if (r.get<std::uint8_t>()) {
      space.output.resize(space.input.size());
      r.floats(space.output.data(), space.output.size());
    }
    if (!r.done()) r.fail("trailing bytes");
  }
  space.vocab = Vocab(std::move(tokens), std::move(counts), min_count);
  return space;
}

}  // namespace emojitime
