// SPDX-License-Identifier: Apache-2.0
//
// Environment-state extraction: a rule table over the engine's closed
// observation grammar, and a tracker holding every interactive object's
// last observed state.
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diffg/text.hpp"
#include "diffg/world.hpp"

namespace diffg::obs {

using world::Relation;

struct StateFact {
  std::string object;
  Relation relation = Relation::on;
  std::string anchor;

  auto operator<=>(const StateFact&) const = default;
};

struct ParsedObservation {
  std::vector<StateFact> facts;
  std::vector<std::string> entities;     // every entity mentioned, in order
  std::vector<std::string> diagnostics;  // sentences no rule matched
};

namespace detail {

// "a X" / "an X" -> X
inline std::optional<std::string> strip_article(std::string_view s) {
  if (text::starts_with(s, "a ")) return std::string(s.substr(2));
  if (text::starts_with(s, "an ")) return std::string(s.substr(3));
  return std::nullopt;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

inline ParsedObservation parse_observation(std::string_view text) {
  ParsedObservation out;
  for (auto& raw : text::lines(text)) {
    std::string_view line = text::trim(raw);
    if (line.empty()) continue;
    auto reject = [&] { out.diagnostics.emplace_back(line); };
    if (!detail::ends_with(line, ".")) {
      reject();
      continue;
    }
    std::string_view body = line.substr(0, line.size() - 1);

    if (text::starts_with(body, "You are in the ")) {
      out.entities.emplace_back(body.substr(15));
    } else if (text::starts_with(body, "There is an exit to the ")) {
      // exits carry no object state
    } else if (text::starts_with(body, "There is ") && detail::ends_with(body, " here")) {
      auto e = detail::strip_article(body.substr(9, body.size() - 9 - 5));
      if (!e) {
        reject();
        continue;
      }
      out.entities.push_back(*e);
    } else if (body == "You are carrying nothing") {
    } else if (text::starts_with(body, "You are carrying: ")) {
      bool ok = true;
      std::vector<StateFact> carried;
      for (auto& item : text::split(body.substr(18), ',')) {
        auto obj = detail::strip_article(text::trim(item));
        if (!obj || obj->empty()) {
          ok = false;
          break;
        }
        carried.push_back({*obj, Relation::carried, std::string(world::kPlayer)});
      }
      if (!ok) {
        reject();
        continue;
      }
      for (auto& f : carried) {
        out.entities.push_back(f.object);
        out.facts.push_back(std::move(f));
      }
    } else if (text::starts_with(body, "You see ")) {
      auto rest = body.substr(8);
      // object names never contain " on the " or " in the "
      auto on = rest.find(" on the ");
      auto in = rest.find(" in the ");
      auto pos = std::min(on, in);
      if (pos == std::string_view::npos) {
        reject();
        continue;
      }
      auto obj = detail::strip_article(rest.substr(0, pos));
      std::string anchor(rest.substr(pos + 8));
      if (!obj || obj->empty() || anchor.empty()) {
        reject();
        continue;
      }
      out.entities.push_back(*obj);
      out.entities.push_back(anchor);
      out.facts.push_back({*obj, pos == on ? Relation::on : Relation::in, std::move(anchor)});
    } else {
      reject();
    }
  }
  return out;
}

struct StateTracker {
  std::map<std::string, std::set<StateFact>> states;
  std::set<std::string> seen_entities;
  std::set<std::string> seen_interactive_objects;
  std::vector<std::string> first_seen;  // interactive objects in discovery order

  bool operator==(const StateTracker&) const = default;
};

// Replaces the state set of every object mentioned in `facts`; other objects
// keep their last known state.
inline StateTracker update_tracker(StateTracker tracker, const std::vector<StateFact>& facts) {
  std::map<std::string, std::set<StateFact>> fresh;
  for (const auto& f : facts) fresh[f.object].insert(f);
  for (auto& [obj, set] : fresh) {
    tracker.states[obj] = std::move(set);
    tracker.seen_entities.insert(obj);
    if (tracker.seen_interactive_objects.insert(obj).second) tracker.first_seen.push_back(obj);
  }
  for (const auto& f : facts) tracker.seen_entities.insert(f.anchor);
  return tracker;
}

inline StateTracker observe(StateTracker tracker, const ParsedObservation& parsed) {
  tracker = update_tracker(std::move(tracker), parsed.facts);
  for (const auto& e : parsed.entities) tracker.seen_entities.insert(e);
  return tracker;
}

// Line-oriented dump used by trace files.
inline std::string dump(const StateTracker& t) {
  std::string s;
  for (const auto& obj : t.first_seen) {
    for (const auto& f : t.states.at(obj)) {
      s += "state\t" + f.object + "\t" + std::string(world::to_string(f.relation)) + "\t" + f.anchor + "\n";
    }
  }
  return s;
}

}  // namespace diffg::obs
