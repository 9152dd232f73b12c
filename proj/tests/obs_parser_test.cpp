// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "diffg/obs_parser.hpp"
#include "support.hpp"

namespace diffg::obs {
namespace {

using world::Relation;

TEST(Parse, SeenObjectOnSupporter) {
  auto p = parse_observation("You see a dirty fork on the floor.");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.facts[0], (StateFact{"dirty fork", Relation::on, "floor"}));
  EXPECT_TRUE(p.diagnostics.empty());
}

TEST(Parse, SeenObjectInContainer) {
  auto p = parse_observation("You see an apple in the refrigerator.");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.facts[0], (StateFact{"apple", Relation::in, "refrigerator"}));
}

TEST(Parse, InventoryGivesCarriedFacts) {
  auto p = parse_observation("You are carrying: a dirty fork.");
  ASSERT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.facts[0], (StateFact{"dirty fork", Relation::carried, "You"}));
  p = parse_observation("You are carrying: a dirty fork, an apple.");
  ASSERT_EQ(p.facts.size(), 2u);
  EXPECT_EQ(p.facts[1], (StateFact{"apple", Relation::carried, "You"}));
}

TEST(Parse, RoomAndExitLinesGiveNoFacts) {
  auto p = parse_observation("You are in the kitchen.\nThere is an exit to the east.\nYou are carrying nothing.");
  EXPECT_TRUE(p.facts.empty());
  EXPECT_TRUE(p.diagnostics.empty());
  EXPECT_EQ(p.entities, (std::vector<std::string>{"kitchen"}));
}

TEST(Parse, UnknownSentencesBecomeDiagnostics) {
  auto p = parse_observation("The fork gleams.\nYou see a dirty fork on the floor.\nno period\nYou see a cup.");
  EXPECT_EQ(p.facts.size(), 1u);
  EXPECT_EQ(p.diagnostics, (std::vector<std::string>{"The fork gleams.", "no period", "You see a cup."}));
}

TEST(Parse, Deterministic) {
  const char* text = "You are in the bedroom.\nThere is a wardrobe here.\nYou see a sock on the floor.";
  auto a = parse_observation(text);
  auto b = parse_observation(text);
  EXPECT_EQ(a.facts, b.facts);
  EXPECT_EQ(a.entities, b.entities);
}

TEST(Tracker, ReplacementSemantics) {
  StateTracker t;
  t = update_tracker(t, {{"dirty fork", Relation::on, "floor"}});
  t = update_tracker(t, {{"dirty fork", Relation::carried, "You"}});
  ASSERT_EQ(t.states.at("dirty fork").size(), 1u);
  EXPECT_EQ(*t.states.at("dirty fork").begin(), (StateFact{"dirty fork", Relation::carried, "You"}));
  EXPECT_TRUE(t.seen_entities.count("floor"));
}

TEST(Tracker, OtherObjectsUntouched) {
  StateTracker t;
  t = update_tracker(t, {{"a", Relation::on, "floor"}, {"b", Relation::in, "box"}});
  t = update_tracker(t, {{"a", Relation::carried, "You"}});
  EXPECT_EQ(*t.states.at("b").begin(), (StateFact{"b", Relation::in, "box"}));
  EXPECT_EQ(t.first_seen, (std::vector<std::string>{"a", "b"}));
}

TEST(Tracker, EmptyFactsIsIdentity) {
  StateTracker t;
  t = update_tracker(t, {{"a", Relation::on, "floor"}});
  EXPECT_EQ(update_tracker(t, {}), t);
}

// Ground truth: every visible object's engine position.
std::map<std::string, StateFact> visible_truth(const world::GameState& s) {
  std::map<std::string, StateFact> out;
  for (const auto& [obj, pos] : s.positions) {
    if (world::visible(s, obj)) out[obj] = {obj, pos.relation, pos.anchor};
  }
  return out;
}

TEST(Property, RoundTripOverReachableStates) {
  Rng rng(23);
  int checked = 0;
  for (int episode = 0; episode < 30; ++episode) {
    auto level = static_cast<world::Level>(episode % 3);
    auto spec = std::make_shared<world::GameSpec>(
        world::generate_game(diffg::testing::catalog(), level, rng.next(), world::Partition::in));
    auto [s, obs] = world::reset(spec);
    while (true) {
      auto parsed = parse_observation(obs.text);
      ASSERT_TRUE(parsed.diagnostics.empty()) << obs.text;
      auto fresh = observe(StateTracker{}, parsed);
      auto truth = visible_truth(s);
      ASSERT_EQ(fresh.states.size(), truth.size()) << obs.text;
      for (const auto& [obj, fact] : truth) {
        ASSERT_EQ(fresh.states.at(obj), std::set<StateFact>{fact}) << obj;
      }
      for (const auto& o : fresh.seen_interactive_objects) EXPECT_TRUE(fresh.seen_entities.count(o));
      ++checked;
      if (s.done) break;
      auto r = world::step(s, rng.pick(world::admissible_commands(s)));
      obs = r.observation;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(Property, SeenSetsGrowMonotonically) {
  Rng rng(5);
  auto spec = std::make_shared<world::GameSpec>(
      world::generate_game(diffg::testing::catalog(), world::Level::hard, 3, world::Partition::in));
  auto [s, obs] = world::reset(spec);
  StateTracker t = observe({}, parse_observation(obs.text));
  while (!s.done) {
    auto r = world::step(s, rng.pick(world::admissible_commands(s)));
    auto next = observe(t, parse_observation(r.observation.text));
    EXPECT_TRUE(std::includes(next.seen_entities.begin(), next.seen_entities.end(), t.seen_entities.begin(),
                              t.seen_entities.end()));
    EXPECT_TRUE(std::includes(next.seen_interactive_objects.begin(), next.seen_interactive_objects.end(),
                              t.seen_interactive_objects.begin(), t.seen_interactive_objects.end()));
    for (const auto& o : next.seen_interactive_objects) {
      EXPECT_TRUE(next.seen_entities.count(o));
      EXPECT_FALSE(next.states.at(o).empty());
    }
    t = std::move(next);
  }
}

}  // namespace
}  // namespace diffg::obs
