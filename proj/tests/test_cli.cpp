// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wac/embedding.hpp"
#include "wac/io.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wac-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the CLI, returns its exit status; stdout goes to out.
  int run(const std::string& args, std::string* out = nullptr) const {
    const std::string cmd = std::string(WAC_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string text;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
    const int status = pclose(pipe);
    if (out) *out = text;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  json report(const std::string& name) const {
    std::ifstream in(path(name));
    return json::parse(in);
  }

  static std::string slurp(const std::string& p) { return wac::io::read_file(p); }

  fs::path dir_;
};

TEST_F(Cli, GenIsByteIdenticalAcrossRuns) {
  ASSERT_EQ(run("gen --preset left-right --seed 7 --out " + path("a") + " --report " + path("r1.json")), 0);
  ASSERT_EQ(run("gen --preset left-right --seed 7 --out " + path("b") + " --report " + path("r2.json")), 0);
  EXPECT_EQ(slurp(path("a.scenes")), slurp(path("b.scenes")));
  EXPECT_EQ(slurp(path("a.episodes")), slurp(path("b.episodes")));
  const auto r = report("r1.json");
  EXPECT_EQ(r.at("status"), "ok");
  EXPECT_EQ(r.at("command"), "gen");
  EXPECT_EQ(r.at("seed"), 7);
  EXPECT_TRUE(r.contains("wall_time_s"));
  EXPECT_TRUE(r.contains("config"));
  EXPECT_EQ(r.at("metrics").at("dim"), 2);
  ASSERT_EQ(run("gen --preset left-right --seed 8 --out " + path("c")), 0);
  EXPECT_NE(slurp(path("a.scenes")), slurp(path("c.scenes")));
}

TEST_F(Cli, TrainThenEvalReachesTarget) {
  ASSERT_EQ(run("gen --preset color-shape --seed 7 --scenes 500 --episodes-per-scene 0 --out " +
                path("train")), 0);
  ASSERT_EQ(run("gen --preset color-shape --seed 1234 --scenes 500 --out " + path("test")), 0);
  ASSERT_EQ(run("train --data " + path("train") + " --out " + path("lex.txt") + " --report " +
                path("train.json")), 0);
  EXPECT_EQ(report("train.json").at("metrics").at("words"), 14);
  ASSERT_EQ(run("eval --data " + path("test") + " --lexicon " + path("lex.txt") + " --report " +
                path("eval.json")), 0);
  const auto m = report("eval.json").at("metrics");
  EXPECT_GE(m.at("accuracy_at_1").get<double>(), 0.9);
  EXPECT_GE(m.at("mrr").get<double>(), 0.93);
  EXPECT_EQ(m.at("episodes"), 500);

  ASSERT_EQ(run("train --serial --data " + path("train") + " --out " + path("lex-serial.txt")), 0);
  EXPECT_EQ(slurp(path("lex.txt")), slurp(path("lex-serial.txt")));
}

TEST_F(Cli, ResolveAndJudge) {
  ASSERT_EQ(run("gen --preset color-shape --seed 3 --scenes 200 --episodes-per-scene 0 --out " +
                path("d")), 0);
  ASSERT_EQ(run("train --data " + path("d") + " --out " + path("lex.txt")), 0);
  const auto scenes = wac::io::load_dataset(path("d"));
  const auto& scene = scenes.scenes.at(0);
  std::string out;
  ASSERT_EQ(run("resolve --lexicon " + path("lex.txt") + " --data " + path("d") + " --scene-id " +
                scene.id + " --phrase red square", &out), 0);
  const auto r = json::parse(out);
  EXPECT_EQ(r.at("metrics").at("tokens"), json({"red", "square"}));
  EXPECT_EQ(r.at("metrics").at("distribution").size(), scene.objects.size());

  {
    std::ofstream t(path("type.txt"));
    t << "x : Ind\nc0 : wac(" << scenes.episodes[0].tokens[0] << ")\n";
  }
  ASSERT_EQ(run("judge --lexicon " + path("lex.txt") + " --type " + path("type.txt") +
                " --data " + path("d") + " --scene-id " + scenes.episodes[0].scene_id +
                " --object-id " + scenes.episodes[0].gold_id + " --report " + path("j.json")), 0);
  const auto j = report("j.json").at("metrics");
  EXPECT_GT(j.at("judgement").get<double>(), 0.5);
  EXPECT_EQ(j.at("holds"), true);
}

TEST_F(Cli, FuseMultWithOnesIsIdentity) {
  ASSERT_EQ(run("gen --preset color-shape --seed 4 --scenes 100 --episodes-per-scene 0 --out " +
                path("d")), 0);
  ASSERT_EQ(run("train --data " + path("d") + " --out " + path("lex.txt")), 0);
  ASSERT_EQ(run("export-embeddings --lexicon " + path("lex.txt") + " --out " + path("vis.txt")), 0);
  auto ones = wac::io::load_embeddings_file(path("vis.txt"));
  const auto visual = ones;
  for (auto& [w, v] : ones.vectors) std::fill(v.begin(), v.end(), 1.0);
  wac::io::save_embeddings_file(path("ones.txt"), ones);
  ASSERT_EQ(run("fuse --method mult --a " + path("vis.txt") + " --b " + path("ones.txt") +
                " --out " + path("fused.txt")), 0);
  const auto fused = wac::io::load_embeddings_file(path("fused.txt"));
  EXPECT_EQ(fused.vectors, visual.vectors);
  EXPECT_EQ(fused.modality, wac::Modality::Fused);
}

TEST_F(Cli, TextEmbeddingsAndConcat) {
  {
    std::ofstream c(path("corpus.txt"));
    c << "the red ball rolls\nthe blue square sits\n\na red square\n";
  }
  ASSERT_EQ(run("build-text-embeddings --corpus " + path("corpus.txt") +
                " --window 2 --dim 16 --out " + path("text.txt") + " --report " + path("r.json")), 0);
  EXPECT_EQ(report("r.json").at("metrics").at("sentences"), 3);
  const auto t = wac::io::load_embeddings_file(path("text.txt"));
  EXPECT_EQ(t.dim, 16u);
  ASSERT_EQ(run("fuse --method concat --a " + path("text.txt") + " --b " + path("text.txt") +
                " --out " + path("cat.txt")), 0);
  EXPECT_EQ(wac::io::load_embeddings_file(path("cat.txt")).dim, 32u);
}

TEST_F(Cli, ConfigFileOverridesFlags) {
  {
    std::ofstream c(path("run.conf"));
    c << "# overrides\nseed = 9\nscenes = 3\n";
  }
  ASSERT_EQ(run("gen --preset left-right --seed 7 --scenes 50 --config " + path("run.conf") +
                " --out " + path("d") + " --report " + path("r.json")), 0);
  const auto r = report("r.json");
  EXPECT_EQ(r.at("seed"), 9);
  EXPECT_EQ(r.at("metrics").at("scenes"), 3);
}

TEST_F(Cli, ExitCodesAndErrorReports) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("gen --bogus 1"), 2);
  EXPECT_EQ(run("fuse --method average --a x --b y --out z"), 2);
  EXPECT_EQ(run("train --out " + path("lex.txt")), 2);  // missing --data

  EXPECT_EQ(run("train --data " + path("nowhere") + " --out " + path("lex.txt") + " --report " +
                path("r.json")), 3);
  auto r = report("r.json");
  EXPECT_EQ(r.at("status"), "error");
  EXPECT_EQ(r.at("error").at("kind"), "not-found");
  EXPECT_TRUE(r.contains("wall_time_s"));

  {
    std::ofstream bad(path("bad.lex"));
    bad << "wac-lexicon 1\ndim=2 words=1\n";
  }
  EXPECT_EQ(run("export-embeddings --lexicon " + path("bad.lex") + " --out " + path("e.txt") +
                " --report " + path("r2.json")), 3);
  EXPECT_EQ(report("r2.json").at("error").at("kind"), "truncated");
  EXPECT_FALSE(fs::exists(path("e.txt")));

  EXPECT_EQ(run("train --data x --out y --learning-rate -1 --report " + path("r3.json")), 3);
  EXPECT_EQ(report("r3.json").at("error").at("kind"), "invalid-argument");
}

}  // namespace
