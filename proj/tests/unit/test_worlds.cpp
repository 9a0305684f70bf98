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

#include <deque>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tac/worlds/engine.hpp"
#include "tac/worlds/generator.hpp"
#include "test_util.hpp"

using namespace tac;
using actor::ActionIds;
using worlds::Game;
using worlds::WorldState;

namespace {

Game fixture(const std::string& name) { return Game(worlds::load_game(tac::testing::games_dir() / (name + ".game"))); }

std::vector<ActionIds> every_action(const actor::ActionSpace& space) {
  std::vector<ActionIds> out;
  const int n = space.objects.size();
  for (int t = 0; t < space.templates.size(); ++t) {
    const int slots = space.templates.slots(t);
    if (slots == 0) out.push_back({t, -1, -1});
    for (int a = 0; slots >= 1 && a < n; ++a) {
      if (slots == 1) out.push_back({t, a, -1});
      for (int b = 0; slots == 2 && b < n; ++b) out.push_back({t, a, b});
    }
  }
  return out;
}

// Every state reachable from the start through any enumerable action.
std::vector<WorldState> reachable_states(const Game& game, std::size_t limit) {
  const auto actions = every_action(game.action_space());
  std::vector<WorldState> out;
  std::unordered_set<std::string> seen;
  std::deque<WorldState> frontier{game.initial_state()};
  seen.insert(frontier.front().key());
  while (!frontier.empty() && out.size() < limit) {
    WorldState s = frontier.front();
    frontier.pop_front();
    out.push_back(s);
    if (game.quest_complete(s)) continue;
    for (const auto& a : actions) {
      WorldState next = s;
      game.step(next, a);
      if (seen.insert(next.key()).second) frontier.push_back(next);
    }
  }
  return out;
}

double replay_walkthrough(const Game& game) {
  WorldState s = game.initial_state();
  double total = 0;
  for (const auto& cmd : game.definition().walkthrough) total += game.step(s, cmd).reward;
  return total;
}

}  // namespace

TEST(Reset, ScoreZeroLookIsStartRoomAndDeterministic) {
  const auto game = fixture("two_rooms");
  const auto s = game.initial_state();
  const auto obs = game.reset_observation(s);
  EXPECT_EQ(obs.score, 0);
  EXPECT_EQ(obs.game.rfind("You are standing in a small house.", 0), 0u) << obs.game;
  EXPECT_NE(obs.look.find("You are in the kitchen."), std::string::npos);
  EXPECT_EQ(game.reset_observation(game.initial_state()), obs);
}

TEST(Step, MovingWestChangesLocationAndLook) {
  const auto game = fixture("two_rooms");
  auto s = game.initial_state();
  const auto before = game.reset_observation(s);
  const auto r = game.step(s, "west");
  EXPECT_EQ(s.location, 1);
  EXPECT_NE(r.obs.look, before.look);
  EXPECT_NE(r.obs.look.find("hall"), std::string::npos);
  EXPECT_FALSE(r.done);
}

TEST(Step, OpeningAnOpenWindowOnlyChangesFeedback) {
  const auto game = fixture("two_rooms");
  auto s = game.initial_state();
  const auto before_state = s;
  const auto before = game.reset_observation(s);
  const auto r = game.step(s, "open window");
  EXPECT_EQ(s, before_state);
  EXPECT_EQ(r.obs.look, before.look);
  EXPECT_EQ(r.obs.inv, before.inv);
  EXPECT_EQ(r.obs.score, before.score);
  EXPECT_NE(r.obs.game, before.game);
  EXPECT_EQ(r.reward, 0.0);
}

TEST(Step, UnparseableTextIsRefused) {
  const auto game = fixture("two_rooms");
  auto s = game.initial_state();
  const auto before = s;
  const auto a = game.step(s, "dance wildly");
  const auto b = game.step(s, "");
  EXPECT_EQ(s, before);
  EXPECT_EQ(a.obs.game, b.obs.game);
  EXPECT_EQ(s.steps, 2);
}

TEST(Step, MilestoneRewardsExactlyOnce) {
  const auto game = fixture("two_rooms");
  auto s = game.initial_state();
  game.step(s, "west");
  const auto take = game.step(s, "take lamp");
  EXPECT_EQ(take.reward, 1.0);
  EXPECT_EQ(take.obs.score, 1);
  EXPECT_TRUE(take.done);
  auto again = s;
  game.step(again, "drop lamp");
  const auto retake = game.step(again, "take lamp");
  EXPECT_EQ(retake.reward, 0.0);
  EXPECT_EQ(retake.obs.score, 1);
}

TEST(Step, StepLimitEndsTheEpisode) {
  const auto game = fixture("coin");
  auto s = game.initial_state();
  worlds::StepResult r;
  for (int i = 0; i < game.definition().max_steps; ++i) {
    ASSERT_FALSE(r.done) << i;
    r = game.step(s, "wait");
  }
  EXPECT_TRUE(r.done);
}

TEST(Admissible, LockedExitIsAbsent) {
  const auto game = fixture("locked_door");
  const auto s = game.initial_state();
  const auto adm = game.admissible_actions(s);
  const auto& space = game.action_space();
  for (const auto& a : adm) EXPECT_NE(actor::compose(space, a), "north");
  auto t = s;
  game.step(t, "north");
  EXPECT_EQ(t, s);
}

TEST(Admissible, WaitIsNeverAdmissible) {
  for (const char* name : {"two_rooms", "locked_door", "coin"}) {
    const auto game = fixture(name);
    for (const auto& s : reachable_states(game, 500)) {
      for (const auto& a : game.admissible_actions(s)) {
        EXPECT_NE(actor::compose(game.action_space(), a), "wait") << name;
      }
    }
  }
}

TEST(Admissible, MembershipEqualsStateChangeExhaustively) {
  for (const char* name : {"two_rooms", "locked_door", "coin"}) {
    const auto game = fixture(name);
    const auto actions = every_action(game.action_space());
    const auto states = reachable_states(game, 500);
    ASSERT_GT(states.size(), 1u);
    for (const auto& s : states) {
      const auto adm = game.admissible_actions(s);
      const std::set<ActionIds> adm_set(adm.begin(), adm.end());
      const auto obs = game.reset_observation(s);
      for (const auto& a : actions) {
        auto t = s;
        const auto r = game.step(t, a);
        const bool changed = !(t == s);
        if (game.quest_complete(s)) {
          EXPECT_TRUE(adm.empty());
          continue;
        }
        EXPECT_EQ(adm_set.count(a) == 1, changed) << name << " " << s.key() << " " << actor::compose(game.action_space(), a);
        if (!changed) {
          EXPECT_EQ(r.obs.look, obs.look);
          EXPECT_EQ(r.obs.inv, obs.inv);
          EXPECT_EQ(r.obs.score, obs.score);
        }
      }
    }
  }
}

TEST(Admissible, OrderedAndCached) {
  const auto game = std::make_shared<const Game>(fixture("locked_door"));
  const auto adm = game->admissible_actions(game->initial_state());
  EXPECT_TRUE(std::is_sorted(adm.begin(), adm.end()));
  worlds::AdmissibleCache cache;
  EXPECT_EQ(cache.get(*game, game->initial_state()), adm);
  auto s = game->initial_state();
  s.steps = 7;
  cache.get(*game, s);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Session, TracksEpisodeAndAdmissible) {
  worlds::GameSession session(std::make_shared<const Game>(fixture("coin")));
  const auto obs = session.reset();
  EXPECT_EQ(obs.score, 0);
  EXPECT_EQ(session.admissible().size(), 1u);
  const auto r = session.step("take coin");
  EXPECT_EQ(r.reward, 1.0);
  EXPECT_TRUE(session.done());
  EXPECT_TRUE(session.admissible().empty());
  session.reset();
  EXPECT_FALSE(session.done());
}

TEST(Fixtures, WalkthroughsReachOptimalScore) {
  for (const char* name : {"two_rooms", "locked_door", "coin"}) {
    const auto game = fixture(name);
    EXPECT_EQ(replay_walkthrough(game), game.definition().optimal_score()) << name;
  }
  EXPECT_EQ(fixture("locked_door").definition().optimal_score(), 15);
}

TEST(Generator, DeterministicPerSeed) {
  worlds::GenParams p;
  EXPECT_EQ(worlds::generate_game(7, p), worlds::generate_game(7, p));
  EXPECT_NE(worlds::generate_game(7, p), worlds::generate_game(8, p));
}

TEST(Generator, WalkthroughAttainsOptimalScoreForEveryChain) {
  for (int chain = 1; chain <= 6; ++chain) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      worlds::GenParams p;
      p.chain = chain;
      p.rooms = 3 + static_cast<int>(seed);
      p.extra_words = 2;
      const auto def = worlds::generate_game(seed, p);
      EXPECT_NO_THROW(def.validate());
      const Game game(def);
      auto s = game.initial_state();
      double total = 0;
      worlds::StepResult r;
      for (const auto& cmd : def.walkthrough) {
        r = game.step(s, cmd);
        EXPECT_GE(r.reward, 0.0) << cmd;
        total += r.reward;
      }
      EXPECT_EQ(total, def.optimal_score()) << "chain " << chain << " seed " << seed;
      EXPECT_TRUE(r.done);
    }
  }
}

TEST(Generator, ChainOneIsSingleMilestone) {
  worlds::GenParams p;
  p.chain = 1;
  const auto def = worlds::generate_game(3, p);
  ASSERT_EQ(def.milestones.size(), 1u);
  EXPECT_EQ(def.optimal_score(), def.milestones[0].reward);
  EXPECT_GT(def.optimal_score(), 0);
}

TEST(Generator, DegenerateParametersAreErrors) {
  worlds::GenParams p;
  p.rooms = 2;
  EXPECT_THROW(worlds::generate_game(1, p), worlds::GameError);
  p = {};
  p.chain = 7;
  EXPECT_THROW(worlds::generate_game(1, p), worlds::GameError);
  p = {};
  p.chain = 0;
  EXPECT_THROW(worlds::generate_game(1, p), worlds::GameError);
}

TEST(Generator, SpecParsing) {
  const auto [seed, p] = worlds::parse_gen_spec("seed=9,rooms=5,chain=2");
  EXPECT_EQ(seed, 9u);
  EXPECT_EQ(p.rooms, 5);
  EXPECT_EQ(p.chain, 2);
  EXPECT_EQ(p.distractors, worlds::GenParams{}.distractors);
  EXPECT_THROW(worlds::parse_gen_spec("rooms=five"), worlds::GameError);
  EXPECT_THROW(worlds::parse_gen_spec("colour=red"), worlds::GameError);
}

TEST(GameFile, RoundTrip) {
  for (const char* name : {"two_rooms", "locked_door", "coin"}) {
    const auto def = worlds::load_game(tac::testing::games_dir() / (std::string(name) + ".game"));
    std::stringstream buf;
    worlds::write_game(buf, def);
    EXPECT_EQ(worlds::read_game(buf), def) << name;
  }
  worlds::GenParams p;
  p.chain = 6;
  p.extra_words = 3;
  const auto gen = worlds::generate_game(11, p);
  tac::testing::TempDir dir("game");
  worlds::save_game(dir / "g.game", gen);
  EXPECT_EQ(worlds::load_game(dir / "g.game"), gen);
}

TEST(GameFile, ErrorsNameTheProblem) {
  std::istringstream bad("game x\nstart nowhere\nroom a | A | a\ntemplate look\n");
  try {
    worlds::read_game(bad);
    FAIL() << "expected GameError";
  } catch (const worlds::GameError& e) {
    EXPECT_NE(std::string(e.what()).find("nowhere"), std::string::npos) << e.what();
  }
  std::istringstream unknown("game x\nfrobnicate 3\n");
  EXPECT_THROW(worlds::read_game(unknown), worlds::GameError);
}
