#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neardup/corpus.hpp"
#include "neardup/embedspace.hpp"
#include "neardup/graph.hpp"
#include "support/hashing_vectorizer.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("neardup-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int neardup(const std::string& args) const {
    const std::string cmd = std::string(NEARDUP_CLI_PATH) + " --log-level off " + args + " >" + path("stdout") +
                            " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(path(name), std::ios::binary);
    out << text;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, help_exits_zero) {
  EXPECT_EQ(neardup("--help"), 0);
  EXPECT_NE(read("stdout").find("synth"), std::string::npos);
}

TEST_F(Cli, usage_errors_exit_one) {
  EXPECT_EQ(neardup(""), 1);
  EXPECT_EQ(neardup("frobnicate"), 1);
  EXPECT_EQ(neardup("run --no-such-flag"), 1);
  EXPECT_EQ(neardup("synth --sources 3 --docs 4 -o " + path("c.jsonl")), 1);
}

TEST_F(Cli, config_errors_exit_one) {
  ASSERT_EQ(neardup("synth --sources 20 -o " + path("c.jsonl")), 0);
  EXPECT_EQ(neardup("run --method minhash -i " + path("c.jsonl")), 1);
  write("bad.json", "{\"method\": \"lsh_banded\", \"bogus\": 1}");
  EXPECT_EQ(neardup("run -c " + path("bad.json") + " -i " + path("c.jsonl")), 1);
  EXPECT_EQ(neardup("synth --preset ocr-medium -o " + path("d.jsonl")), 1);
}

TEST_F(Cli, data_errors_exit_two) {
  EXPECT_EQ(neardup("run -i " + path("missing.jsonl")), 2);
  write("dup.jsonl", "{\"id\":\"x\",\"text\":\"a b c\"}\n{\"id\":\"x\",\"text\":\"d e f\"}\n");
  EXPECT_EQ(neardup("run -i " + path("dup.jsonl")), 2);
  EXPECT_NE(read("stderr").find("'x'"), std::string::npos);
  write("plain.jsonl", "{\"id\":\"a\",\"text\":\"a b c\"}\n");
  EXPECT_EQ(neardup("run --evaluate always -i " + path("plain.jsonl")), 2);
  EXPECT_EQ(neardup("run --method embed_cluster -i " + path("plain.jsonl")), 2);
}

TEST_F(Cli, synth_run_rerun_is_identical) {
  ASSERT_EQ(neardup("--seed 5 synth --sources 200 --preset ocr-heavy -o " + path("c.jsonl") + " --noise-report " +
                    path("noise.json")),
            0);
  ASSERT_EQ(neardup("--seed 5 run --method lsh_banded -i " + path("c.jsonl") + " -o " + path("a.tsv") + " --report " +
                    path("a.json") + " --manifest " + path("m.json")),
            0);
  ASSERT_EQ(neardup("run -c " + path("m.json") + " -o " + path("b.tsv") + " --report " + path("b.json")), 0);
  EXPECT_EQ(read("a.tsv"), read("b.tsv"));
  EXPECT_EQ(read("a.json"), read("b.json"));
  EXPECT_NE(read("noise.json").find("zero_shared_fraction"), std::string::npos);
  EXPECT_EQ(neardup("eval -p " + path("a.tsv") + " -g " + path("c.jsonl")), 0);
  EXPECT_NE(read("stdout").find("ARI"), std::string::npos);
}

TEST_F(Cli, stage_by_stage_matches_run) {
  ASSERT_EQ(neardup("synth --sources 150 --preset ocr-heavy -o " + path("c.jsonl")), 0);
  ASSERT_EQ(neardup("minhash -i " + path("c.jsonl") + " -k 30 -o " + path("sigs.bin")), 0);
  ASSERT_EQ(neardup("pairs -s " + path("sigs.bin") + " --lsh banded --bands 15 --rows 2 -o " + path("e.tsv")), 0);
  ASSERT_EQ(neardup("cluster --edges " + path("e.tsv") + " -i " + path("c.jsonl") + " -o " + path("staged.tsv")), 0);
  ASSERT_EQ(neardup("run --method lsh_banded -i " + path("c.jsonl") + " -o " + path("direct.tsv")), 0);
  EXPECT_EQ(read("staged.tsv"), read("direct.tsv"));
}

TEST_F(Cli, embed_search_reads_external_vectors) {
  ASSERT_EQ(neardup("synth --sources 80 --preset ocr-light -o " + path("c.jsonl")), 0);
  const auto docs = neardup::load_corpus(path("c.jsonl"));
  neardup::save_embeddings(path("v.embd"), neardup::testing::embed_corpus(docs));
  ASSERT_EQ(neardup("embed-search -e " + path("v.embd") + " --cosine 0.8 -o " + path("e.tsv")), 0);
  EXPECT_FALSE(read("e.tsv").empty());
  ASSERT_EQ(neardup("run --method embed_cluster --cosine 0.8 -i " + path("c.jsonl") + " -e " + path("v.embd") +
                    " -o " + path("k.tsv")),
            0);
  EXPECT_EQ(neardup::load_clustering(path("k.tsv")).size(), docs.size());
}
