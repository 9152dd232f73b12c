// SPDX-License-Identifier: Apache-2.0
//
// Difference graph: one interactive-object node per tracked object, joined
// to its current-state nodes U(p) and its grounded commonsense nodes V(p).
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "diffg/cs_extractor.hpp"
#include "diffg/obs_parser.hpp"

namespace diffg::graph {

enum class NodeType { interactive_object, current_state, commonsense };

inline std::string_view to_string(NodeType t) {
  switch (t) {
    case NodeType::interactive_object: return "io";
    case NodeType::current_state: return "state";
    case NodeType::commonsense: return "commonsense";
  }
  return "io";
}

struct Node {
  int id = 0;
  NodeType type = NodeType::interactive_object;
  std::string label;

  bool operator==(const Node&) const = default;
};

struct ObjectNodes {
  Node io;
  std::vector<Node> states;       // sorted by label
  std::vector<Node> commonsense;  // sorted by label

  bool operator==(const ObjectNodes&) const = default;
};

// object -> grounded destinations
using CommonsenseIndex = std::map<std::string, std::vector<std::string>>;

inline std::shared_ptr<const CommonsenseIndex> index_commonsense(const cs::CommonsenseGraph& g) {
  auto idx = std::make_shared<CommonsenseIndex>();
  for (const auto& t : g.triples) {
    auto& v = (*idx)[t.subject];
    if (std::find(v.begin(), v.end(), t.object) == v.end()) v.push_back(t.object);
  }
  for (auto& [_, v] : *idx) std::sort(v.begin(), v.end());
  return idx;
}

class DiffGraph {
 public:
  DiffGraph() : index_(std::make_shared<CommonsenseIndex>()) {}
  explicit DiffGraph(std::shared_ptr<const CommonsenseIndex> index) : index_(std::move(index)) {}

  static DiffGraph build(const obs::StateTracker& tracker, std::shared_ptr<const CommonsenseIndex> index) {
    DiffGraph g(std::move(index));
    return g.update(tracker);
  }

  static DiffGraph build(const obs::StateTracker& tracker, const cs::CommonsenseGraph& commonsense) {
    return build(tracker, index_commonsense(commonsense));
  }

  // Refreshes U(p) from the tracker. Persisting labels keep their ids, the
  // commonsense side never changes, and newly observed objects are appended.
  DiffGraph update(const obs::StateTracker& tracker) const {
    DiffGraph g = *this;
    for (auto& obj : g.objects_) {
      auto it = tracker.states.find(obj.io.label);
      if (it == tracker.states.end()) continue;
      g.replace_states(obj, anchors(it->second));
    }
    for (const auto& label : tracker.first_seen) {
      if (g.find(label)) continue;
      auto& obj = g.objects_[g.add_object(label)];
      g.replace_states(obj, anchors(tracker.states.at(label)));
      auto cs = g.index_->find(label);
      if (cs != g.index_->end()) {
        for (const auto& target : cs->second) g.add_commonsense(g.objects_.size() - 1, target);
      }
    }
    return g;
  }

  std::size_t add_object(std::string label) {
    objects_.push_back({{next_id_++, NodeType::interactive_object, std::move(label)}, {}, {}});
    return objects_.size() - 1;
  }

  bool add_state(std::size_t object, std::string label) {
    return insert_sorted(objects_.at(object).states, NodeType::current_state, std::move(label));
  }

  bool add_commonsense(std::size_t object, std::string label) {
    return insert_sorted(objects_.at(object).commonsense, NodeType::commonsense, std::move(label));
  }

  const std::vector<ObjectNodes>& objects() const { return objects_; }
  std::vector<ObjectNodes>& mutable_objects() { return objects_; }

  const ObjectNodes* find(std::string_view label) const {
    for (const auto& o : objects_) {
      if (o.io.label == label) return &o;
    }
    return nullptr;
  }

  std::size_t node_count() const {
    std::size_t n = 0;
    for (const auto& o : objects_) n += 1 + o.states.size() + o.commonsense.size();
    return n;
  }

  bool empty() const { return objects_.empty(); }

  // Commonsense exists and no current state agrees with it.
  static bool misplaced(const ObjectNodes& o) {
    if (o.commonsense.empty()) return false;
    for (const auto& s : o.states) {
      for (const auto& c : o.commonsense) {
        if (s.label == c.label) return false;
      }
    }
    return true;
  }

  std::string dump() const {
    std::string s;
    for (const auto& o : objects_) {
      s += o.io.label + "\tio\t" + o.io.label + "\n";
      for (const auto& n : o.states) s += o.io.label + "\tstate\t" + n.label + "\n";
      for (const auto& n : o.commonsense) s += o.io.label + "\tcommonsense\t" + n.label + "\n";
      s += o.io.label + "\tmisplaced\t" + (misplaced(o) ? "yes" : "no") + "\n";
    }
    return s;
  }

  bool operator==(const DiffGraph& o) const { return objects_ == o.objects_ && next_id_ == o.next_id_; }

 private:
  static std::set<std::string> anchors(const std::set<obs::StateFact>& facts) {
    std::set<std::string> out;
    for (const auto& f : facts) out.insert(f.anchor);
    return out;
  }

  bool insert_sorted(std::vector<Node>& nodes, NodeType type, std::string label) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), label,
                               [](const Node& n, const std::string& l) { return n.label < l; });
    if (it != nodes.end() && it->label == label) return false;
    nodes.insert(it, Node{next_id_++, type, std::move(label)});
    return true;
  }

  void replace_states(ObjectNodes& obj, const std::set<std::string>& labels) {
    std::erase_if(obj.states, [&](const Node& n) { return !labels.count(n.label); });
    for (const auto& l : labels) {
      auto it = std::find_if(obj.states.begin(), obj.states.end(), [&](const Node& n) { return n.label == l; });
      if (it == obj.states.end()) insert_sorted(obj.states, NodeType::current_state, l);
    }
  }

  std::vector<ObjectNodes> objects_;
  int next_id_ = 0;
  std::shared_ptr<const CommonsenseIndex> index_;
};

}  // namespace diffg::graph
