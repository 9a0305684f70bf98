// Copyright 2026 The TAC Authors
//
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
#include <fstream>

#include "test_util.hpp"

namespace {

struct Run {
  int status = -1;
  std::string output;
};

// stdout and stderr together.
Run run(const std::string& args) {
  const std::string cmd = std::string(TAC_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int st = ::pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string game(const std::string& name) {
  return "game:" + (tac::testing::games_dir() / (name + ".game")).string();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string tiny_config(const std::filesystem::path& out) {
  return "env = " + game("coin") +
         "\nseed = 2\nparallel_envs = 2\nbatch_size = 4\nlr = 0.001\nvocab_size = 64\nembed = 8\nhidden = 16\n"
         "score_rows = 16\nmax_tokens = 16\nmemory = 500\ntotal_steps = 40\neval_every = 20\neval_episodes = 2\n"
         "max_episode_steps = 5\noutput_dir = " +
         out.string() + "\n";
}

}  // namespace

TEST(Cli, ParamcountPrintsPublishedTotals) {
  const auto r = run("paramcount --config " + std::string(TAC_SOURCE_DIR) + "/configs/zork1.cfg");
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("trainable 1,783,849"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("target 49,665"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("text_encoder_network.embedding.weight"), std::string::npos);
}

TEST(Cli, GradcheckPassesAndNegativeControlFails) {
  const auto ok = run("gradcheck --seed 2");
  EXPECT_EQ(ok.status, 0) << ok.output;
  const auto bad = run("gradcheck --seed 2 --corrupt");
  EXPECT_EQ(bad.status, 1) << bad.output;
  EXPECT_NE(bad.output.find("FAIL"), std::string::npos);
}

TEST(Cli, PlayReplaysTheWalkthrough) {
  const auto r = run("play --env " + game("locked_door"));
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("total reward 15"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("> unlock door with key"), std::string::npos);
}

TEST(Cli, PlayWithScriptThroughStubServer) {
  tac::testing::TempDir dir("cli-play");
  write_file(dir / "moves.txt", "examine wall\ntake coin\n");
  const auto r = run("play --env 'cmd:" + tac::testing::stub_server() + " --game " +
                     (tac::testing::games_dir() / "coin.game").string() + "' --walkthrough " +
                     (dir / "moves.txt").string());
  EXPECT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("total reward 1"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("admissible: [take coin]"), std::string::npos) << r.output;
}

TEST(Cli, GenWritesAPlayableGame) {
  tac::testing::TempDir dir("cli-gen");
  const auto path = dir / "g.game";
  const auto g = run("gen --spec seed=5,rooms=5,chain=4 --out " + path.string());
  ASSERT_EQ(g.status, 0) << g.output;
  const auto p = run("play --env game:" + path.string());
  EXPECT_EQ(p.status, 0) << p.output;
  EXPECT_NE(p.output.find("done: yes"), std::string::npos) << p.output;
  const auto stdout_gen = run("gen --spec seed=5,rooms=5,chain=4");
  EXPECT_NE(stdout_gen.output.find("walkthrough "), std::string::npos);
}

TEST(Cli, TrainThenEvaluate) {
  tac::testing::TempDir dir("cli-train");
  write_file(dir / "tiny.cfg", tiny_config(dir / "out"));
  const auto t = run("train --config " + (dir / "tiny.cfg").string() + " --quiet");
  ASSERT_EQ(t.status, 0) << t.output;
  EXPECT_NE(t.output.find("rounds 40"), std::string::npos) << t.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "metrics.csv"));
  const auto e = run("eval --ckpt " + (dir / "out" / "model.ckpt").string() + " --env " + game("coin") +
                     " --episodes 3 --greedy --max-steps 5");
  EXPECT_EQ(e.status, 0) << e.output;
  EXPECT_NE(e.output.find("episode 2 score"), std::string::npos) << e.output;
  EXPECT_NE(e.output.find("mean "), std::string::npos);
}

TEST(Cli, ConfigErrorsExitNonZero) {
  tac::testing::TempDir dir("cli-bad");
  write_file(dir / "bad.cfg", "learning_rate = 3\n");
  const auto r = run("train --config " + (dir / "bad.cfg").string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.output.find("learning_rate"), std::string::npos) << r.output;
  write_file(dir / "ok.cfg", tiny_config(dir / "out"));
  const auto s = run("train --config " + (dir / "ok.cfg").string() + " --set gamma");
  EXPECT_EQ(s.status, 1);
  EXPECT_NE(s.output.find("key=value"), std::string::npos) << s.output;
}

TEST(Cli, DivergenceAbortsWithCheckpoint) {
  tac::testing::TempDir dir("cli-nan");
  write_file(dir / "t.cfg", tiny_config(dir / "out"));
  const auto r = run("train --config " + (dir / "t.cfg").string() + " --quiet --set lr=1e30 --set clip=1e30");
  EXPECT_EQ(r.status, 2) << r.output;
  EXPECT_NE(r.output.find("checkpoint saved to"), std::string::npos) << r.output;
}

TEST(Cli, MissingSubcommandIsAnError) {
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("frobnicate").status, 0);
}
