// SPDX-License-Identifier: Apache-2.0
//
// Commonsense extraction over a triple corpus in three stages:
//   extract_by_meaning       keep triples whose subject and object are both
//                            similar (cosine >= threshold) or equal to an entity
//   narrow_by_circumstances  keep only portable-object -> supporter/container
//   transform_grounded       rewrite phrases to their matched entity, merge
// plus precision/recall against a goal graph.
#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "diffg/embed.hpp"
#include "diffg/error.hpp"
#include "diffg/text.hpp"
#include "diffg/world.hpp"

namespace diffg::cs {

using world::Category;

struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
  std::optional<Category> subject_category;
  std::optional<Category> object_category;
  std::size_t weight = 1;

  auto key() const { return std::tie(subject, relation, object); }
  bool operator==(const Triple&) const = default;
};

struct Corpus {
  std::vector<Triple> triples;
  std::string hash;

  static Corpus parse(std::string_view contents, std::string_view source = "corpus") {
    Corpus c;
    c.hash = text::hex64(text::fnv1a(contents));
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (text::skippable(ls[i])) continue;
      auto f = text::split(ls[i], '\t');
      const std::string where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
      if (f.size() != 3 && f.size() != 5) throw DataError(where + "expected 3 or 5 tab-separated fields");
      Triple t{f[0], f[1], f[2], std::nullopt, std::nullopt, 1};
      if (t.subject.empty() || t.relation.empty() || t.object.empty()) throw DataError(where + "empty phrase");
      if (f.size() == 5) {
        t.subject_category = world::parse_category(f[3]);
        t.object_category = world::parse_category(f[4]);
        if (!t.subject_category || !t.object_category) throw DataError(where + "unknown category tag");
      }
      c.triples.push_back(std::move(t));
    }
    return c;
  }

  static Corpus load(const std::filesystem::path& path) { return parse(text::read_file(path), path.string()); }
};

struct MatchRecord {
  std::string corpus_phrase;
  std::string entity;
  double similarity = 0.0;
  bool exact = false;

  bool operator==(const MatchRecord&) const = default;
};

// Best-entity lookup for corpus phrases. Exact string equality outranks any
// similarity; among similar entities the higher cosine wins, then the
// lexicographically smaller name.
class Matcher {
 public:
  Matcher(std::span<const std::string> entities, const embed::EmbeddingTable& table) : table_(&table) {
    std::set<std::string> unique(entities.begin(), entities.end());
    for (const auto& e : unique) {
      auto pv = table.phrase_vector(e);
      entities_.push_back({e, std::move(pv.values), pv.oov});
    }
  }

  std::optional<MatchRecord> best(const std::string& phrase, double threshold) const {
    for (const auto& e : entities_) {
      if (e.name == phrase) return MatchRecord{phrase, e.name, 1.0, true};
    }
    auto pv = table_->phrase_vector(phrase);
    if (pv.oov) return std::nullopt;
    std::optional<MatchRecord> best;
    for (const auto& e : entities_) {
      if (e.oov) continue;
      auto sim = embed::cosine(pv.values, e.vector);
      if (!sim || *sim < threshold) continue;
      // entities_ is sorted by name, so strict > keeps the smaller name on ties
      if (!best || *sim > best->similarity) best = MatchRecord{phrase, e.name, *sim, false};
    }
    return best;
  }

  std::size_t size() const { return entities_.size(); }

 private:
  struct Entry {
    std::string name;
    std::vector<double> vector;
    bool oov;
  };
  const embed::EmbeddingTable* table_;
  std::vector<Entry> entities_;
};

struct EbmResult {
  std::vector<Triple> triples;
  std::map<std::string, MatchRecord> matches;  // corpus phrase -> best entity
  std::vector<std::string> warnings;
};

inline void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("similarity threshold must lie in (0, 1]");
}

inline EbmResult extract_by_meaning(std::span<const Triple> corpus, std::span<const std::string> entities,
                                    const embed::EmbeddingTable& table, double threshold) {
  check_threshold(threshold);
  EbmResult out;
  if (entities.empty()) {
    out.warnings.push_back("empty entity set; nothing can match");
    return out;
  }
  Matcher matcher(entities, table);
  std::map<std::string, std::optional<MatchRecord>> cache;
  auto lookup = [&](const std::string& phrase) -> const std::optional<MatchRecord>& {
    auto it = cache.find(phrase);
    if (it == cache.end()) it = cache.emplace(phrase, matcher.best(phrase, threshold)).first;
    return it->second;
  };
  for (const auto& t : corpus) {
    const auto& s = lookup(t.subject);
    if (!s) continue;
    const auto& o = lookup(t.object);
    if (!o) continue;
    out.matches.emplace(t.subject, *s);
    out.matches.emplace(t.object, *o);
    out.triples.push_back(t);
  }
  return out;
}

// Spell-matching baseline: both phrases must equal an entity name.
inline std::vector<Triple> extract_exact(std::span<const Triple> corpus, std::span<const std::string> entities) {
  std::set<std::string> names(entities.begin(), entities.end());
  std::vector<Triple> out;
  for (const auto& t : corpus) {
    if (names.count(t.subject) && names.count(t.object)) out.push_back(t);
  }
  return out;
}

using CategoryLookup = std::function<std::optional<Category>(std::string_view)>;

struct NbcResult {
  std::vector<Triple> triples;  // categories filled in
  std::size_t uncategorized = 0;
  std::size_t removed = 0;
};

// Keeps "interactive object -> object's state" triples. Corpus tags win over
// the lookup; a phrase with neither drops its triple.
inline NbcResult narrow_by_circumstances(std::span<const Triple> triples, const CategoryLookup& category_of) {
  NbcResult out;
  for (const auto& t : triples) {
    auto sc = t.subject_category ? t.subject_category : category_of(t.subject);
    auto oc = t.object_category ? t.object_category : category_of(t.object);
    if (!sc || !oc) {
      ++out.uncategorized;
      continue;
    }
    if (*sc != Category::portable_object || !world::is_location(*oc)) {
      ++out.removed;
      continue;
    }
    Triple kept = t;
    kept.subject_category = sc;
    kept.object_category = oc;
    out.triples.push_back(std::move(kept));
  }
  return out;
}

struct CommonsenseGraph {
  std::vector<Triple> triples;  // sorted by (subject, relation, object), unique
  double threshold = 0.0;
  std::string corpus_hash;

  bool operator==(const CommonsenseGraph&) const = default;

  // Distinct objects of the triples about `subject`, sorted.
  std::vector<std::string> targets_of(std::string_view subject) const {
    std::set<std::string> out;
    for (const auto& t : triples) {
      if (t.subject == subject) out.insert(t.object);
    }
    return {out.begin(), out.end()};
  }

  std::string serialize() const {
    std::string s = "# diffg commonsense graph v1\n";
    s += "# threshold=" + text::format_double(threshold) + "\n";
    s += "# corpus=" + corpus_hash + "\n";
    for (const auto& t : triples) {
      s += t.subject + "\t" + t.relation + "\t" + t.object + "\t" +
           std::string(world::to_string(t.subject_category.value_or(Category::other))) + "\t" +
           std::string(world::to_string(t.object_category.value_or(Category::other))) + "\t" +
           std::to_string(t.weight) + "\n";
    }
    return s;
  }

  static CommonsenseGraph parse(std::string_view contents, std::string_view source = "graph") {
    CommonsenseGraph g;
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const std::string where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
      const auto& l = ls[i];
      if (text::starts_with(l, "# threshold=")) {
        g.threshold = std::strtod(l.c_str() + 12, nullptr);
        continue;
      }
      if (text::starts_with(l, "# corpus=")) {
        g.corpus_hash = l.substr(9);
        continue;
      }
      if (text::skippable(l)) continue;
      auto f = text::split(l, '\t');
      if (f.size() != 6) throw DataError(where + "expected 6 tab-separated fields");
      Triple t{f[0], f[1], f[2], world::parse_category(f[3]), world::parse_category(f[4]), 0};
      char* end = nullptr;
      t.weight = std::strtoull(f[5].c_str(), &end, 10);
      if (*end != '\0' || t.weight == 0) throw DataError(where + "bad weight '" + f[5] + "'");
      g.triples.push_back(std::move(t));
    }
    return g;
  }

  void save(const std::filesystem::path& path) const { text::write_file(path, serialize()); }
  static CommonsenseGraph load(const std::filesystem::path& path) {
    return parse(text::read_file(path), path.string());
  }
};

// Rewrites subject and object to their matched entities and merges
// duplicates, summing weights.
inline CommonsenseGraph transform_grounded(std::span<const Triple> triples,
                                           const std::map<std::string, MatchRecord>& matches) {
  std::map<std::tuple<std::string, std::string, std::string>, Triple> merged;
  for (const auto& t : triples) {
    auto s = matches.find(t.subject);
    auto o = matches.find(t.object);
    if (s == matches.end() || o == matches.end())
      throw ConfigError("no match record for triple (" + t.subject + ", " + t.relation + ", " + t.object + ")");
    Triple g = t;
    g.subject = s->second.entity;
    g.object = o->second.entity;
    auto key = std::make_tuple(g.subject, g.relation, g.object);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(std::move(key), std::move(g));
    } else {
      it->second.weight += g.weight;
    }
  }
  CommonsenseGraph out;
  for (auto& [_, t] : merged) out.triples.push_back(std::move(t));
  return out;
}

struct PipelineResult {
  CommonsenseGraph graph;
  std::size_t corpus_size = 0;
  std::size_t after_ebm = 0;
  std::size_t after_nbc = 0;
  std::size_t uncategorized = 0;
  std::vector<std::string> warnings;
};

inline PipelineResult run_pipeline(const Corpus& corpus, std::span<const std::string> entities,
                                   const embed::EmbeddingTable& table, double threshold,
                                   const CategoryLookup& category_of) {
  PipelineResult r;
  r.corpus_size = corpus.triples.size();
  auto ebm = extract_by_meaning(corpus.triples, entities, table, threshold);
  r.after_ebm = ebm.triples.size();
  r.warnings = std::move(ebm.warnings);
  auto nbc = narrow_by_circumstances(ebm.triples, category_of);
  r.after_nbc = nbc.triples.size();
  r.uncategorized = nbc.uncategorized;
  r.graph = transform_grounded(nbc.triples, ebm.matches);
  r.graph.threshold = threshold;
  r.graph.corpus_hash = corpus.hash;
  return r;
}

inline CategoryLookup catalog_categories(const world::Catalog& catalog) {
  return [&catalog](std::string_view phrase) { return catalog.category_of(phrase); };
}

struct ExtractionReport {
  std::size_t n_candidates = 0;     // N
  std::size_t n_goal_matching = 0;  // |C_g|
  std::size_t l_goals = 0;          // L
  std::size_t l_covered = 0;        // |G_c|
  double precision = 0.0;
  double recall = 0.0;
  bool precision_undefined = false;  // N == 0

  bool operator==(const ExtractionReport&) const = default;
};

inline ExtractionReport make_report(std::size_t n, std::size_t goal_matching, std::size_t l, std::size_t covered) {
  if (l == 0) throw ConfigError("goal graph is empty");
  ExtractionReport r{n, goal_matching, l, covered, 0.0, 0.0, n == 0};
  r.precision = n == 0 ? 0.0 : static_cast<double>(goal_matching) / static_cast<double>(n);
  r.recall = static_cast<double>(covered) / static_cast<double>(l);
  return r;
}

inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", fraction * 100.0);
  return buf;
}

// A triple corresponds to a goal when (subject, relation, object) equals
// (object, relation, target).
inline ExtractionReport eval_extraction(const CommonsenseGraph& graph, std::span<const world::GoalEntry> goals) {
  std::set<std::tuple<std::string, std::string, std::string>> goal_keys;
  for (const auto& g : goals) goal_keys.emplace(g.object, std::string(world::to_string(g.relation)), g.target);
  std::set<std::tuple<std::string, std::string, std::string>> covered;
  std::size_t matching = 0;
  for (const auto& t : graph.triples) {
    auto key = std::make_tuple(t.subject, t.relation, t.object);
    if (goal_keys.count(key)) {
      ++matching;
      covered.insert(key);
    }
  }
  return make_report(graph.triples.size(), matching, goal_keys.size(), covered.size());
}

}  // namespace diffg::cs
