// SPDX-License-Identifier: Apache-2.0
//
// Deterministic tidy-up text game: catalog loading, game/dataset generation,
// the step/observation engine, and a ground-truth oracle policy.
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "diffg/error.hpp"
#include "diffg/rng.hpp"
#include "diffg/text.hpp"

namespace diffg::world {

enum class Category { portable_object, supporter, container, room, player, other };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::portable_object: return "portable-object";
    case Category::supporter: return "supporter";
    case Category::container: return "container";
    case Category::room: return "room";
    case Category::player: return "player";
    case Category::other: return "other";
  }
  return "other";
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (auto c : {Category::portable_object, Category::supporter, Category::container, Category::room,
                 Category::player, Category::other}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

inline bool is_location(Category c) { return c == Category::supporter || c == Category::container; }

struct EntityDef {
  std::string name;
  Category category = Category::other;
  std::vector<std::string> synonyms;

  bool operator==(const EntityDef&) const = default;
};

enum class Relation { on, in, carried };

inline std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::on: return "on";
    case Relation::in: return "in";
    case Relation::carried: return "carried";
  }
  return "on";
}

inline std::optional<Relation> parse_relation(std::string_view s) {
  if (s == "on") return Relation::on;
  if (s == "in") return Relation::in;
  if (s == "carried") return Relation::carried;
  return std::nullopt;
}

inline Relation placement_relation(Category target) {
  return target == Category::container ? Relation::in : Relation::on;
}

inline constexpr std::string_view kPlayer = "You";
inline constexpr std::string_view kFloor = "floor";
inline constexpr int kMaxSteps = 50;

struct Position {
  std::string anchor;
  Relation relation = Relation::on;

  auto operator<=>(const Position&) const = default;
};

struct GoalEntry {
  std::string object;
  Relation relation = Relation::on;
  std::string target;

  auto operator<=>(const GoalEntry&) const = default;
};

enum class Level { easy, medium, hard };

inline std::string_view to_string(Level l) {
  switch (l) {
    case Level::easy: return "easy";
    case Level::medium: return "medium";
    case Level::hard: return "hard";
  }
  return "easy";
}

inline Level parse_level(std::string_view s) {
  if (s == "easy") return Level::easy;
  if (s == "medium") return Level::medium;
  if (s == "hard") return Level::hard;
  throw ConfigError("unknown level '" + std::string(s) + "'");
}

struct LevelShape {
  std::size_t objects;
  std::size_t rooms;
};

// Interactive objects and rooms per difficulty level.
constexpr LevelShape shape_of(Level l) {
  switch (l) {
    case Level::easy: return {1, 1};
    case Level::medium: return {3, 1};
    case Level::hard: return {7, 2};
  }
  return {1, 1};
}

enum class Partition { in, out };

inline std::string_view to_string(Partition p) { return p == Partition::in ? "in" : "out"; }

inline Partition parse_partition(std::string_view s) {
  if (s == "in") return Partition::in;
  if (s == "out") return Partition::out;
  throw ConfigError("unknown partition '" + std::string(s) + "'");
}

struct RoomLayout {
  std::string name;
  std::vector<std::string> locations;
};

// Entity vocabulary, room layouts and ground-truth placements.
class Catalog {
 public:
  static Catalog parse(std::string_view vocab_text, std::string_view rooms_text, std::string_view goals_text) {
    Catalog c;
    c.parse_vocab(vocab_text);
    c.parse_rooms(rooms_text);
    c.parse_goals(goals_text);
    return c;
  }

  static Catalog load(const std::filesystem::path& vocab, const std::filesystem::path& rooms,
                      const std::filesystem::path& goals) {
    return parse(text::read_file(vocab), text::read_file(rooms), text::read_file(goals));
  }

  static Catalog load_dir(const std::filesystem::path& dir) {
    return load(dir / "vocab.tsv", dir / "rooms.tsv", dir / "goals.tsv");
  }

  const std::vector<EntityDef>& entities() const { return entities_; }
  const std::vector<RoomLayout>& rooms() const { return rooms_; }
  const std::vector<GoalEntry>& goals() const { return goals_; }

  const EntityDef* find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &entities_[it->second];
  }

  // Category of an entity name, or of a listed synonym.
  std::optional<Category> category_of(std::string_view phrase) const {
    if (auto* e = find(phrase)) return e->category;
    auto it = synonym_category_.find(std::string(phrase));
    if (it != synonym_category_.end()) return it->second;
    return std::nullopt;
  }

  const GoalEntry* goal_of(std::string_view object) const {
    for (const auto& g : goals_) {
      if (g.object == object) return &g;
    }
    return nullptr;
  }

  const RoomLayout* room_of_location(std::string_view location) const {
    for (const auto& r : rooms_) {
      if (std::find(r.locations.begin(), r.locations.end(), location) != r.locations.end()) return &r;
    }
    return nullptr;
  }

  // IN is the first half of the portable-object list in file order, OUT the rest.
  std::vector<std::string> pool(Partition p) const {
    std::vector<std::string> objects;
    for (const auto& e : entities_) {
      if (e.category == Category::portable_object) objects.push_back(e.name);
    }
    const std::size_t half = objects.size() / 2;
    if (p == Partition::in) return {objects.begin(), objects.begin() + static_cast<std::ptrdiff_t>(half)};
    return {objects.begin() + static_cast<std::ptrdiff_t>(half), objects.end()};
  }

  std::vector<std::string> entity_names() const {
    std::vector<std::string> out;
    for (const auto& e : entities_) out.push_back(e.name);
    return out;
  }

 private:
  static std::string where(std::string_view file, std::size_t line) {
    return std::string(file) + ":" + std::to_string(line + 1) + ": ";
  }

  static bool valid_name(std::string_view name) {
    auto toks = text::tokens(name);
    if (toks.empty() || text::join(toks, " ") != name) return false;
    return text::lower(name) == name;
  }

  void parse_vocab(std::string_view contents) {
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (text::skippable(ls[i])) continue;
      auto f = text::split(ls[i], '\t');
      if (f.size() < 2 || f.size() > 3) throw DataError(where("vocab", i) + "expected name<TAB>category<TAB>synonyms");
      auto cat = parse_category(f[1]);
      if (!cat || *cat == Category::other) throw DataError(where("vocab", i) + "bad category '" + f[1] + "'");
      if (*cat != Category::player && !valid_name(f[0]))
        throw DataError(where("vocab", i) + "entity name must be lowercase tokens: '" + f[0] + "'");
      if (by_name_.count(f[0])) throw DataError(where("vocab", i) + "duplicate entity '" + f[0] + "'");
      EntityDef e{f[0], *cat, {}};
      if (f.size() == 3 && !f[2].empty()) {
        for (auto& s : text::split(f[2], ',')) {
          auto t = std::string(text::trim(s));
          if (t.empty()) continue;
          synonym_category_.emplace(t, *cat);
          e.synonyms.push_back(std::move(t));
        }
      }
      by_name_[e.name] = entities_.size();
      entities_.push_back(std::move(e));
    }
  }

  void parse_rooms(std::string_view contents) {
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (text::skippable(ls[i])) continue;
      auto f = text::split(ls[i], '\t');
      if (f.size() != 2) throw DataError(where("rooms", i) + "expected room<TAB>locations");
      auto* room = find(f[0]);
      if (!room || room->category != Category::room) throw DataError(where("rooms", i) + "unknown room '" + f[0] + "'");
      RoomLayout layout{f[0], {}};
      for (auto& loc : text::split(f[1], ',')) {
        auto* e = find(loc);
        if (!e || !is_location(e->category))
          throw DataError(where("rooms", i) + "'" + loc + "' is not a supporter or container");
        if (loc == kFloor) throw DataError(where("rooms", i) + "floor is added by the generator");
        layout.locations.push_back(loc);
      }
      rooms_.push_back(std::move(layout));
    }
  }

  void parse_goals(std::string_view contents) {
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (text::skippable(ls[i])) continue;
      auto f = text::split(ls[i], '\t');
      if (f.size() != 3) throw DataError(where("goals", i) + "expected object<TAB>relation<TAB>target");
      auto* obj = find(f[0]);
      auto* target = find(f[2]);
      auto rel = parse_relation(f[1]);
      if (!obj || obj->category != Category::portable_object)
        throw DataError(where("goals", i) + "unknown object '" + f[0] + "'");
      if (!target || !is_location(target->category) || !room_of_location(f[2]))
        throw DataError(where("goals", i) + "target '" + f[2] + "' is not a room location");
      if (!rel || *rel != placement_relation(target->category))
        throw DataError(where("goals", i) + "relation must be 'on' for supporters and 'in' for containers");
      if (goal_of(f[0])) throw DataError(where("goals", i) + "duplicate goal for '" + f[0] + "'");
      goals_.push_back({f[0], *rel, f[2]});
    }
    for (const auto& e : entities_) {
      if (e.category == Category::portable_object && !goal_of(e.name))
        throw DataError("goals: no goal for object '" + e.name + "'");
    }
    if (!find(kFloor)) throw DataError("vocab: missing 'floor' supporter");
  }

  std::vector<EntityDef> entities_;
  std::map<std::string, std::size_t> by_name_;
  std::map<std::string, Category> synonym_category_;
  std::vector<RoomLayout> rooms_;
  std::vector<GoalEntry> goals_;
};

struct Exit {
  std::string direction;
  std::string room;

  bool operator==(const Exit&) const = default;
};

struct Room {
  std::string name;
  std::vector<Exit> exits;
  std::vector<EntityDef> locations;

  bool operator==(const Room&) const = default;
};

struct GameSpec {
  std::string id;
  Level level = Level::easy;
  Partition partition = Partition::in;
  std::vector<Room> rooms;
  std::vector<EntityDef> objects;
  std::map<std::string, Position> initial_positions;
  std::vector<GoalEntry> goals;
  int max_steps = kMaxSteps;
  std::uint64_t seed = 0;

  bool operator==(const GameSpec&) const = default;

  // Room index and category of a location anchor.
  std::optional<std::pair<std::size_t, Category>> locate(std::string_view anchor) const {
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      for (const auto& loc : rooms[r].locations) {
        if (loc.name == anchor) return std::pair{r, loc.category};
      }
    }
    return std::nullopt;
  }

  std::optional<std::size_t> room_index(std::string_view name) const {
    for (std::size_t r = 0; r < rooms.size(); ++r) {
      if (rooms[r].name == name) return r;
    }
    return std::nullopt;
  }

  const GoalEntry* goal_of(std::string_view object) const {
    for (const auto& g : goals) {
      if (g.object == object) return &g;
    }
    return nullptr;
  }
};

struct Observation {
  std::string text;
  std::string feedback;

  bool operator==(const Observation&) const = default;
};

struct GameState {
  std::shared_ptr<const GameSpec> spec;
  std::map<std::string, Position> positions;
  std::size_t player_room = 0;
  int score = 0;
  int steps = 0;
  bool done = false;
  std::set<std::string> rewarded;

  bool operator==(const GameState& o) const {
    return positions == o.positions && player_room == o.player_room && score == o.score && steps == o.steps &&
           done == o.done && rewarded == o.rewarded;
  }
};

inline std::string_view article(std::string_view noun) {
  if (noun.empty()) return "a";
  switch (noun.front()) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
    default: return "a";
  }
}

// Objects visible to the player: carried, or resting in the player's room.
inline bool visible(const GameState& s, std::string_view object) {
  auto it = s.positions.find(std::string(object));
  if (it == s.positions.end()) return false;
  if (it->second.relation == Relation::carried) return true;
  auto loc = s.spec->locate(it->second.anchor);
  return loc && loc->first == s.player_room;
}

inline std::string render(const GameState& s) {
  const auto& spec = *s.spec;
  const auto& room = spec.rooms[s.player_room];
  std::vector<std::string> out;
  out.push_back("You are in the " + room.name + ".");
  for (const auto& loc : room.locations) {
    out.push_back("There is " + std::string(article(loc.name)) + " " + loc.name + " here.");
  }
  std::vector<std::string> carried;
  for (const auto& obj : spec.objects) {
    const auto& pos = s.positions.at(obj.name);
    if (pos.relation == Relation::carried) {
      carried.push_back(std::string(article(obj.name)) + " " + obj.name);
    } else if (visible(s, obj.name)) {
      out.push_back("You see " + std::string(article(obj.name)) + " " + obj.name + " " +
                    std::string(to_string(pos.relation)) + " the " + pos.anchor + ".");
    }
  }
  if (carried.empty()) {
    out.push_back("You are carrying nothing.");
  } else {
    out.push_back("You are carrying: " + text::join(carried, ", ") + ".");
  }
  for (const auto& e : room.exits) out.push_back("There is an exit to the " + e.direction + ".");
  return text::join(out, "\n");
}

struct Action {
  enum class Kind { take, put, insert, go };
  Kind kind = Kind::take;
  std::string object;
  std::string anchor;  // source for take, destination for put/insert
  std::string direction;
};

inline std::string command_text(const Action& a) {
  switch (a.kind) {
    case Action::Kind::take:
      return a.anchor == kFloor ? "take " + a.object : "take " + a.object + " from " + a.anchor;
    case Action::Kind::put: return "put " + a.object + " on " + a.anchor;
    case Action::Kind::insert: return "insert " + a.object + " into " + a.anchor;
    case Action::Kind::go: return "go " + a.direction;
  }
  return {};
}

// Applicable actions keyed and sorted by their command text.
inline std::vector<std::pair<std::string, Action>> admissible_actions(const GameState& s) {
  std::vector<std::pair<std::string, Action>> out;
  if (s.done) return out;
  const auto& spec = *s.spec;
  const auto& room = spec.rooms[s.player_room];
  for (const auto& obj : spec.objects) {
    const auto& pos = s.positions.at(obj.name);
    if (pos.relation == Relation::carried) {
      for (const auto& loc : room.locations) {
        Action a{loc.category == Category::container ? Action::Kind::insert : Action::Kind::put, obj.name,
                 loc.name, {}};
        out.emplace_back(command_text(a), a);
      }
    } else if (visible(s, obj.name)) {
      Action a{Action::Kind::take, obj.name, pos.anchor, {}};
      out.emplace_back(command_text(a), a);
    }
  }
  for (const auto& e : room.exits) {
    Action a{Action::Kind::go, {}, {}, e.direction};
    out.emplace_back(command_text(a), a);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

inline std::vector<std::string> admissible_commands(const GameState& s) {
  std::vector<std::string> out;
  for (auto& [cmd, _] : admissible_actions(s)) out.push_back(cmd);
  return out;
}

inline std::pair<GameState, Observation> reset(std::shared_ptr<const GameSpec> spec) {
  GameState s;
  s.spec = std::move(spec);
  s.positions = s.spec->initial_positions;
  Observation o{render(s), ""};
  return {std::move(s), std::move(o)};
}

inline double normalized_score(const GameState& s) {
  if (s.spec->goals.empty()) throw ConfigError("normalized score needs at least one goal");
  return static_cast<double>(s.score) / static_cast<double>(s.spec->goals.size());
}

struct StepResult {
  bool accepted = false;
  std::string error;
  Observation observation;
  int reward = 0;
  bool done = false;
};

// Applies an admissible command. Anything else is rejected and leaves the
// state untouched.
inline StepResult step(GameState& s, std::string_view command) {
  StepResult r;
  if (s.done) {
    r.error = "the game is over";
    r.done = true;
    return r;
  }
  auto actions = admissible_actions(s);
  auto it = std::find_if(actions.begin(), actions.end(), [&](const auto& p) { return p.first == command; });
  if (it == actions.end()) {
    r.error = "inadmissible command '" + std::string(command) + "'";
    return r;
  }
  const Action& a = it->second;
  const auto& spec = *s.spec;
  std::string feedback;
  switch (a.kind) {
    case Action::Kind::take:
      s.positions[a.object] = {std::string(kPlayer), Relation::carried};
      feedback = a.anchor == kFloor ? "You take the " + a.object + "."
                                    : "You take the " + a.object + " from the " + a.anchor + ".";
      break;
    case Action::Kind::put:
    case Action::Kind::insert: {
      const Relation rel = a.kind == Action::Kind::put ? Relation::on : Relation::in;
      s.positions[a.object] = {a.anchor, rel};
      feedback = a.kind == Action::Kind::put ? "You put the " + a.object + " on the " + a.anchor + "."
                                             : "You insert the " + a.object + " into the " + a.anchor + ".";
      const auto* goal = spec.goal_of(a.object);
      if (goal && goal->target == a.anchor && goal->relation == rel && !s.rewarded.count(a.object)) {
        s.rewarded.insert(a.object);
        ++s.score;
        r.reward = 1;
        feedback += " Your score has gone up by one point.";
      }
      break;
    }
    case Action::Kind::go: {
      for (const auto& e : spec.rooms[s.player_room].exits) {
        if (e.direction == a.direction) s.player_room = *spec.room_index(e.room);
      }
      feedback = "You go " + a.direction + ".";
      break;
    }
  }
  ++s.steps;
  s.done = s.score == static_cast<int>(spec.goals.size()) || s.steps >= spec.max_steps;
  r.accepted = true;
  r.done = s.done;
  r.observation = {render(s), std::move(feedback)};
  return r;
}

// Greedy planner with access to the ground-truth goals: place what can be
// placed here, pick up what is misplaced here, otherwise walk towards work.
inline std::optional<std::string> oracle_policy(const GameState& s) {
  if (s.done) return std::nullopt;
  const auto& spec = *s.spec;
  auto at_goal = [&](const std::string& obj) {
    const auto* g = spec.goal_of(obj);
    const auto& p = s.positions.at(obj);
    return g && p.anchor == g->target && p.relation == g->relation;
  };
  std::set<std::size_t> wanted_rooms;
  for (const auto& obj : spec.objects) {
    const auto& pos = s.positions.at(obj.name);
    const auto* goal = spec.goal_of(obj.name);
    if (!goal) continue;
    auto goal_loc = spec.locate(goal->target);
    if (pos.relation == Relation::carried) {
      if (goal_loc->first == s.player_room) {
        Action a{goal_loc->second == Category::container ? Action::Kind::insert : Action::Kind::put, obj.name,
                 goal->target, {}};
        return command_text(a);
      }
      wanted_rooms.insert(goal_loc->first);
    }
  }
  for (const auto& obj : spec.objects) {
    const auto& pos = s.positions.at(obj.name);
    if (pos.relation == Relation::carried || at_goal(obj.name) || !spec.goal_of(obj.name)) continue;
    auto loc = spec.locate(pos.anchor);
    if (loc->first == s.player_room) return command_text({Action::Kind::take, obj.name, pos.anchor, {}});
    wanted_rooms.insert(loc->first);
  }
  if (wanted_rooms.empty()) return std::nullopt;
  // breadth-first search for the first exit on a shortest path to work
  std::vector<int> first_exit(spec.rooms.size(), -1);
  std::deque<std::size_t> queue;
  std::vector<bool> seen(spec.rooms.size(), false);
  seen[s.player_room] = true;
  const auto& here = spec.rooms[s.player_room];
  for (std::size_t e = 0; e < here.exits.size(); ++e) {
    auto next = *spec.room_index(here.exits[e].room);
    if (seen[next]) continue;
    seen[next] = true;
    first_exit[next] = static_cast<int>(e);
    queue.push_back(next);
  }
  while (!queue.empty()) {
    auto room = queue.front();
    queue.pop_front();
    if (wanted_rooms.count(room)) return "go " + here.exits[static_cast<std::size_t>(first_exit[room])].direction;
    for (const auto& e : spec.rooms[room].exits) {
      auto next = *spec.room_index(e.room);
      if (seen[next]) continue;
      seen[next] = true;
      first_exit[next] = first_exit[room];
      queue.push_back(next);
    }
  }
  return std::nullopt;
}

// Final normalized score of the oracle on a fresh episode.
inline double oracle_score(std::shared_ptr<const GameSpec> spec) {
  auto [s, obs] = reset(std::move(spec));
  while (!s.done) {
    auto cmd = oracle_policy(s);
    if (!cmd) break;
    step(s, *cmd);
  }
  return normalized_score(s);
}

inline GameSpec generate_game(const Catalog& catalog, Level level, std::uint64_t seed, Partition partition,
                              std::optional<std::string> anchor_object = std::nullopt) {
  Rng rng(seed, "world");
  const auto shape = shape_of(level);
  const auto pool = catalog.pool(partition);
  std::map<std::string, std::vector<std::string>> by_room;
  for (const auto& obj : pool) {
    const auto* goal = catalog.goal_of(obj);
    by_room[catalog.room_of_location(goal->target)->name].push_back(obj);
  }
  auto count = [&](const std::string& room) { return by_room.count(room) ? by_room.at(room).size() : 0; };
  auto too_small = [&] {
    return ConfigError("entity pool too small for " + std::string(to_string(level)) + " level (" +
                       std::to_string(shape.objects) + " objects over " + std::to_string(shape.rooms) + " rooms)");
  };

  std::string anchor_room;
  if (anchor_object) {
    if (std::find(pool.begin(), pool.end(), *anchor_object) == pool.end())
      throw ConfigError("'" + *anchor_object + "' is not in the " + std::string(to_string(partition)) + " pool");
    anchor_room = catalog.room_of_location(catalog.goal_of(*anchor_object)->target)->name;
  }

  std::vector<std::string> rooms;
  if (shape.rooms == 1) {
    std::vector<std::string> options;
    for (const auto& r : catalog.rooms()) {
      if (count(r.name) >= shape.objects && (anchor_room.empty() || r.name == anchor_room)) options.push_back(r.name);
    }
    if (options.empty()) throw too_small();
    rooms.push_back(rng.pick(options));
  } else {
    std::vector<std::string> firsts;
    for (const auto& r : catalog.rooms()) {
      if (count(r.name) > 0 && (anchor_room.empty() || r.name == anchor_room)) firsts.push_back(r.name);
    }
    if (firsts.empty()) throw too_small();
    rng.shuffle(firsts);
    for (const auto& first : firsts) {
      std::vector<std::string> seconds;
      for (const auto& r : catalog.rooms()) {
        if (r.name != first && count(first) + count(r.name) >= shape.objects) seconds.push_back(r.name);
      }
      if (!seconds.empty()) {
        rooms = {first, rng.pick(seconds)};
        break;
      }
    }
    if (rooms.empty()) throw too_small();
  }

  std::vector<std::string> candidates;
  for (const auto& r : rooms) {
    for (const auto& o : by_room[r]) {
      if (!anchor_object || o != *anchor_object) candidates.push_back(o);
    }
  }
  rng.shuffle(candidates);
  std::vector<std::string> chosen;
  if (anchor_object) chosen.push_back(*anchor_object);
  for (const auto& c : candidates) {
    if (chosen.size() == shape.objects) break;
    chosen.push_back(c);
  }
  if (chosen.size() < shape.objects) throw too_small();

  GameSpec spec;
  spec.level = level;
  spec.partition = partition;
  spec.seed = seed;
  spec.max_steps = kMaxSteps;
  spec.id = std::string(to_string(level)) + "-" + std::string(to_string(partition)) + "-" + text::hex64(seed);
  for (const auto& name : rooms) {
    Room room{name, {}, {}};
    for (const auto& layout : catalog.rooms()) {
      if (layout.name != name) continue;
      for (const auto& loc : layout.locations) {
        auto e = *catalog.find(loc);
        e.synonyms.clear();
        room.locations.push_back(std::move(e));
      }
    }
    spec.rooms.push_back(std::move(room));
  }
  spec.rooms.front().locations.insert(spec.rooms.front().locations.begin(),
                                       EntityDef{std::string(kFloor), Category::supporter, {}});
  if (spec.rooms.size() == 2) {
    static const std::pair<const char*, const char*> kDirections[] = {
        {"east", "west"}, {"west", "east"}, {"north", "south"}, {"south", "north"}};
    const auto& [there, back] = kDirections[rng.below(4)];
    spec.rooms[0].exits.push_back({there, spec.rooms[1].name});
    spec.rooms[1].exits.push_back({back, spec.rooms[0].name});
  }
  std::vector<EntityDef> all_locations;
  for (const auto& r : spec.rooms) {
    for (const auto& l : r.locations) all_locations.push_back(l);
  }
  for (const auto& name : chosen) {
    auto e = *catalog.find(name);
    e.synonyms.clear();
    spec.objects.push_back(std::move(e));
    const auto* goal = catalog.goal_of(name);
    spec.goals.push_back(*goal);
    std::vector<EntityDef> starts;
    for (const auto& l : all_locations) {
      if (l.name != goal->target) starts.push_back(l);
    }
    const auto& start = rng.pick(starts);
    spec.initial_positions[name] = {start.name, placement_relation(start.category)};
  }
  return spec;
}

struct Dataset {
  Level level = Level::easy;
  std::uint64_t base_seed = 0;
  std::vector<GameSpec> train, test, valid, out;

  bool operator==(const Dataset&) const = default;
};

inline constexpr std::size_t kTrainGames = 50;
inline constexpr std::size_t kTestGames = 40;
inline constexpr std::size_t kValidGames = 10;
inline constexpr std::size_t kOutGames = 40;

// 100 IN games split 50/40/10 plus 40 OUT games. Anchor objects cycle through a
// shuffled deck of each pool so every pool object anchors a training game as
// long as the pool is no larger than the training split.
inline Dataset generate_dataset(const Catalog& catalog, Level level, std::uint64_t base_seed) {
  Dataset d;
  d.level = level;
  d.base_seed = base_seed;
  auto deck_in = catalog.pool(Partition::in);
  auto deck_out = catalog.pool(Partition::out);
  Rng(base_seed, "dataset/in-deck").shuffle(deck_in);
  Rng(base_seed, "dataset/out-deck").shuffle(deck_out);
  if (deck_in.empty() || deck_out.empty()) throw ConfigError("empty entity pool");
  auto name = [&](std::string_view split, std::size_t i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    return std::string(to_string(level)) + "-" + std::string(split) + "-" + buf;
  };
  const std::size_t total = kTrainGames + kTestGames + kValidGames;
  for (std::size_t i = 0; i < total; ++i) {
    auto seed = derive_seed(base_seed, "game/in/" + std::to_string(i));
    auto g = generate_game(catalog, level, seed, Partition::in, deck_in[i % deck_in.size()]);
    if (i < kTrainGames) {
      g.id = name("train", i);
      d.train.push_back(std::move(g));
    } else if (i < kTrainGames + kTestGames) {
      g.id = name("test", i - kTrainGames);
      d.test.push_back(std::move(g));
    } else {
      g.id = name("valid", i - kTrainGames - kTestGames);
      d.valid.push_back(std::move(g));
    }
  }
  for (std::size_t i = 0; i < kOutGames; ++i) {
    auto seed = derive_seed(base_seed, "game/out/" + std::to_string(i));
    auto g = generate_game(catalog, level, seed, Partition::out, deck_out[i % deck_out.size()]);
    g.id = name("out", i);
    d.out.push_back(std::move(g));
  }
  return d;
}

inline std::string write_game(const GameSpec& g) {
  std::string s;
  s += "ROOMS\n";
  for (const auto& r : g.rooms) {
    s += r.name;
    for (const auto& e : r.exits) s += "\t" + e.direction + "=" + e.room;
    s += "\n";
  }
  s += "LOCATIONS\n";
  for (const auto& r : g.rooms) {
    for (const auto& l : r.locations) s += r.name + "\t" + l.name + "\t" + std::string(to_string(l.category)) + "\n";
  }
  s += "OBJECTS\n";
  for (const auto& o : g.objects) s += o.name + "\n";
  s += "INIT\n";
  for (const auto& o : g.objects) {
    const auto& p = g.initial_positions.at(o.name);
    s += o.name + "\t" + std::string(to_string(p.relation)) + "\t" + p.anchor + "\n";
  }
  s += "GOALS\n";
  for (const auto& goal : g.goals) {
    s += goal.object + "\t" + std::string(to_string(goal.relation)) + "\t" + goal.target + "\n";
  }
  s += "META\n";
  s += "id\t" + g.id + "\n";
  s += "level\t" + std::string(to_string(g.level)) + "\n";
  s += "partition\t" + std::string(to_string(g.partition)) + "\n";
  s += "seed\t" + std::to_string(g.seed) + "\n";
  s += "max-steps\t" + std::to_string(g.max_steps) + "\n";
  return s;
}

inline GameSpec parse_game(std::string_view contents, std::string_view source = "game") {
  GameSpec g;
  std::string section;
  auto ls = text::lines(contents);
  auto fail = [&](std::size_t i, const std::string& msg) {
    return DataError(std::string(source) + ":" + std::to_string(i + 1) + ": " + msg);
  };
  std::set<std::string> seen_sections;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto& line = ls[i];
    if (text::skippable(line)) continue;
    if (line == "ROOMS" || line == "LOCATIONS" || line == "OBJECTS" || line == "INIT" || line == "GOALS" ||
        line == "META") {
      section = line;
      seen_sections.insert(line);
      continue;
    }
    auto f = text::split(line, '\t');
    if (section == "ROOMS") {
      Room r{f[0], {}, {}};
      for (std::size_t k = 1; k < f.size(); ++k) {
        auto eq = f[k].find('=');
        if (eq == std::string::npos) throw fail(i, "exit must be DIR=ROOM");
        r.exits.push_back({f[k].substr(0, eq), f[k].substr(eq + 1)});
      }
      g.rooms.push_back(std::move(r));
    } else if (section == "LOCATIONS") {
      if (f.size() != 3) throw fail(i, "expected room<TAB>location<TAB>category");
      auto idx = g.room_index(f[0]);
      auto cat = parse_category(f[2]);
      if (!idx) throw fail(i, "unknown room '" + f[0] + "'");
      if (!cat || !is_location(*cat)) throw fail(i, "bad location category '" + f[2] + "'");
      g.rooms[*idx].locations.push_back({f[1], *cat, {}});
    } else if (section == "OBJECTS") {
      g.objects.push_back({f[0], Category::portable_object, {}});
    } else if (section == "INIT" || section == "GOALS") {
      if (f.size() != 3) throw fail(i, "expected object<TAB>relation<TAB>anchor");
      auto rel = parse_relation(f[1]);
      if (!rel || *rel == Relation::carried) throw fail(i, "bad relation '" + f[1] + "'");
      auto loc = g.locate(f[2]);
      if (!loc || placement_relation(loc->second) != *rel) throw fail(i, "bad anchor '" + f[2] + "'");
      if (section == "INIT") {
        g.initial_positions[f[0]] = {f[2], *rel};
      } else {
        g.goals.push_back({f[0], *rel, f[2]});
      }
    } else if (section == "META") {
      if (f.size() != 2) throw fail(i, "expected key<TAB>value");
      try {
        if (f[0] == "id") g.id = f[1];
        else if (f[0] == "level") g.level = parse_level(f[1]);
        else if (f[0] == "partition") g.partition = parse_partition(f[1]);
        else if (f[0] == "seed") g.seed = std::stoull(f[1]);
        else if (f[0] == "max-steps") g.max_steps = std::stoi(f[1]);
        else throw fail(i, "unknown key '" + f[0] + "'");
      } catch (const ConfigError& e) {
        throw fail(i, e.what());
      } catch (const std::logic_error&) {
        throw fail(i, "bad value '" + f[1] + "'");
      }
    } else {
      throw fail(i, "content outside a section");
    }
  }
  if (seen_sections.size() != 6) throw DataError(std::string(source) + ": missing sections");
  for (const auto& o : g.objects) {
    if (!g.initial_positions.count(o.name)) throw DataError(std::string(source) + ": no INIT for '" + o.name + "'");
  }
  if (g.rooms.empty() || g.goals.empty()) throw DataError(std::string(source) + ": needs rooms and goals");
  return g;
}

inline GameSpec load_game(const std::filesystem::path& path) {
  return parse_game(text::read_file(path), path.string());
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string manifest = "# id\tsplit\n";
  auto emit = [&](const std::vector<GameSpec>& games, std::string_view split) {
    for (const auto& g : games) {
      text::write_file(dir / (g.id + ".game"), write_game(g));
      manifest += g.id + "\t" + std::string(split) + "\n";
    }
  };
  emit(d.train, "train");
  emit(d.test, "test");
  emit(d.valid, "valid");
  emit(d.out, "out");
  text::write_file(dir / "splits.tsv", manifest);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  auto ls = text::lines(text::read_file(dir / "splits.tsv"));
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (text::skippable(ls[i])) continue;
    auto f = text::split(ls[i], '\t');
    if (f.size() != 2) throw DataError("splits.tsv:" + std::to_string(i + 1) + ": expected id<TAB>split");
    auto g = load_game(dir / (f[0] + ".game"));
    d.level = g.level;
    if (f[1] == "train") d.train.push_back(std::move(g));
    else if (f[1] == "test") d.test.push_back(std::move(g));
    else if (f[1] == "valid") d.valid.push_back(std::move(g));
    else if (f[1] == "out") d.out.push_back(std::move(g));
    else throw DataError("splits.tsv:" + std::to_string(i + 1) + ": unknown split '" + f[1] + "'");
  }
  return d;
}

}  // namespace diffg::world
