#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fixtures.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "emojitime_test_cli";

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with kRoot/work as the working directory.
Result run(const std::string& args) {
  const auto out = kRoot / "stdout.txt", err = kRoot / "stderr.txt";
  std::string cmd = "cd '" + (kRoot / "work").string() + "' && '" + std::string(EMOJITIME_CLI) + "' " + args +
                    " >'" + out.string() + "' 2>'" + err.string() + "'";
  int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::set<fs::path> listing(const fs::path& dir) {
  std::set<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) out.insert(fs::relative(e.path(), dir));
  return out;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot / "work");
    std::ofstream(kRoot / "work" / "corpus.jsonl") << fixtures::corpus_jsonl(2500, 31, 12);
    std::ofstream inv(kRoot / "work" / "inventory.txt");
    inv << "# version: cli-test\n";
    for (std::size_t i = 0; i < 64; ++i) inv << std::hex << std::uppercase << (0x1F600 + i) << "\n";
    inv.close();
    std::ofstream(kRoot / "work" / "config.json") << R"({
      "corpus": "corpus.jsonl", "inventory": "inventory.txt", "out": "out", "seed": 3,
      "dataset": {"top_n": 8, "cap": 200},
      "sgns": {"dim": 8, "epochs": 1, "min_count": 1},
      "drift": {"k": 3, "top_pairs": 4},
      "model": {"char_emb_dim": 4, "char_hidden": 4, "word_emb_dim": 8, "word_hidden": 8,
                "fc_hidden": 8, "max_epochs": 1, "lr": 0.01}
    })";
  }
};

}  // namespace

TEST_F(Cli, UnknownCommandExitsWithUsageError) {
  auto r = run("frobnicate");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run("--config config.json train --fusion sideways").code, 2);
}

TEST_F(Cli, BadConfigIsOneLineError) {
  std::ofstream(kRoot / "work" / "bad.json") << R"({"sgns": {"dim": 0}})";
  auto r = run("--config bad.json ingest");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error: dim must be >= 1"), std::string::npos) << r.err;
  fs::remove(kRoot / "work" / "bad.json");
}

TEST_F(Cli, PipelineWritesOnlyUnderOutDir) {
  const auto work = kRoot / "work";
  auto before = listing(work);

  auto r = run("--config config.json ingest");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(work / "out" / "messages.jsonl"));
  EXPECT_TRUE(fs::exists(work / "out" / "dataset.jsonl"));
  for (const char* season : {"Spring", "Summer", "Autumn", "Winter"})
    EXPECT_TRUE(fs::exists(work / "out" / "slices" / (std::string(season) + ".txt")));
  EXPECT_NE(r.err.find("config.defaults"), std::string::npos);

  ASSERT_EQ(run("--config config.json train-embeddings").code, 0);
  r = run("--config config.json drift");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"overlap.tsv", "pearson.tsv", "deltas.tsv"})
    EXPECT_GT(fs::file_size(work / "out" / "drift" / f), 0u) << f;
  ASSERT_EQ(run("--config config.json --format doc drift").code, 0);
  EXPECT_TRUE(fs::exists(work / "out" / "drift" / "report.json"));

  r = run("--config config.json train --fusion early");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(work / "out" / "model_early.ckpt"));

  r = run("--config config.json predict --text 'hello there' --timestamp 2017-07-04T12:00:00Z --k 4");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::vector<double> probs;
  while (std::getline(lines, line)) {
    auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos) << line;
    probs.push_back(std::stod(line.substr(tab + 1)));
  }
  ASSERT_EQ(probs.size(), 4u);
  for (std::size_t i = 1; i < probs.size(); ++i) EXPECT_GE(probs[i - 1], probs[i]);

  EXPECT_EQ(run("--config config.json predict --text hi --timestamp yesterday").code, 1);

  auto after = listing(work);
  for (const auto& p : after)
    if (!before.count(p)) EXPECT_EQ(*p.begin(), fs::path("out")) << p;
}
