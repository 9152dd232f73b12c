// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference check of the end-to-end gradient: phrase
// encoder -> difference graph encoder -> scorer and value head -> loss.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "diffg/diffgraph.hpp"
#include "diffg/embed.hpp"
#include "diffg/neural/model.hpp"
#include "diffg/rng.hpp"

namespace diffg::nn {

struct GradcheckCase {
  Model model;
  embed::EmbeddingTable table;
  graph::DiffGraph graph;
  std::vector<std::string> commands;
  std::size_t chosen = 0;
  double ret = 0.0;
  double advantage = 0.0;
  std::uint64_t dropout_seed = 0;
};

// A random small problem: 2-3 objects with states and commonsense nodes,
// 2-4 commands of 1-3 tokens over a 10-word vocabulary.
inline GradcheckCase random_case(std::uint64_t seed, std::size_t hidden = 8, std::size_t embed_dim = 8,
                                 Activation activation = Activation::elu) {
  Rng rng(seed, "gradcheck");
  ModelConfig cfg;
  cfg.embed_dim = embed_dim;
  cfg.hidden = hidden;
  cfg.activation = activation;
  GradcheckCase c{Model(cfg, seed), embed::EmbeddingTable(embed_dim), {}, {}, 0, 0.0, 0.0, 0};
  std::vector<std::string> words;
  for (int i = 0; i < 10; ++i) {
    words.push_back("w" + std::to_string(i));
    std::vector<double> v(embed_dim);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    c.table.insert(words.back(), v);
  }
  auto phrase = [&] {
    std::string p = rng.pick(words);
    for (std::size_t k = rng.below(3); k > 0; --k) p += " " + rng.pick(words);
    return p;
  };
  const std::size_t objects = 2 + rng.below(2);
  for (std::size_t o = 0; o < objects; ++o) {
    std::string label = phrase();
    if (c.graph.find(label)) continue;
    auto i = c.graph.add_object(label);
    for (std::size_t k = 1 + rng.below(2); k > 0; --k) c.graph.add_state(i, phrase());
    for (std::size_t k = rng.below(3); k > 0; --k) c.graph.add_commonsense(i, phrase());
  }
  for (std::size_t k = 2 + rng.below(3); k > 0; --k) c.commands.push_back(phrase());
  c.chosen = rng.below(c.commands.size());
  c.ret = rng.uniform(0.0, 1.0);
  c.advantage = rng.uniform(-1.0, 1.0);
  c.dropout_seed = rng.next();
  return c;
}

// Loss of the case under `model` (defaults to the case's own); the dropout
// mask is redrawn from the same seed on every call.
inline double case_loss(const GradcheckCase& c, const Model& model, Gradients* grads = nullptr) {
  Forward f(model, c.table);
  Rng dropout(c.dropout_seed);
  auto enc = f.graph(c.graph);
  Var lp = f.log_probs(enc.d, c.commands, &dropout);
  Var v = f.value(enc.d);
  Var loss = a2c_step_loss(f.tape(), lp, c.chosen, v, c.ret, c.advantage, 0.5, 0.01);
  if (grads) *grads = f.tape().backward(loss);
  return f.tape().scalar(loss);
}

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

struct GroupError {
  std::string group;  // parameter name prefix, e.g. "gru.fwd"
  double max_error = 0.0;
  std::size_t checked = 0;
};

struct GradcheckReport {
  std::vector<GroupError> groups;
  double max_error = 0.0;
  std::string worst;  // "name[index]"
  bool pass = false;
};

inline std::string param_group(const std::string& name) {
  auto last = name.rfind('.');
  return last == std::string::npos ? name : name.substr(0, last);
}

inline GradcheckReport gradcheck(std::uint64_t seed, std::size_t hidden = 8, double step = 1e-5,
                                 double tolerance = 1e-4) {
  GradcheckCase c = random_case(seed, hidden);
  Gradients analytic;
  case_loss(c, c.model, &analytic);
  Model probe = c.model;
  GradcheckReport r;
  for (ParamId p = 0; p < probe.params().size(); ++p) {
    const auto group = param_group(probe.params().name(p));
    auto it = std::find_if(r.groups.begin(), r.groups.end(), [&](auto& g) { return g.group == group; });
    if (it == r.groups.end()) {
      r.groups.push_back({group, 0.0, 0});
      it = r.groups.end() - 1;
    }
    auto& values = probe.params()[p].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = case_loss(c, probe);
      values[i] = saved - step;
      const double down = case_loss(c, probe);
      values[i] = saved;
      const double err = relative_error(analytic[p][i], (up - down) / (2.0 * step));
      ++it->checked;
      it->max_error = std::max(it->max_error, err);
      if (err > r.max_error || r.worst.empty()) {
        r.max_error = std::max(r.max_error, err);
        r.worst = probe.params().name(p) + "[" + std::to_string(i) + "]";
      }
    }
  }
  r.pass = r.max_error <= tolerance;
  return r;
}

}  // namespace diffg::nn
