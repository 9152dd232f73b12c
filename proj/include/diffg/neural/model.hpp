// SPDX-License-Identifier: Apache-2.0
//
// Node/command encoder (bidirectional GRU), difference graph encoder,
// action scorer and value head, all recorded on a Tape.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diffg/diffgraph.hpp"
#include "diffg/embed.hpp"
#include "diffg/error.hpp"
#include "diffg/neural/params.hpp"
#include "diffg/neural/tape.hpp"
#include "diffg/rng.hpp"
#include "diffg/text.hpp"

namespace diffg::nn {

enum class Activation { elu, relu, identity };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::elu: return "elu";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "elu";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "elu") return Activation::elu;
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(s) + "'");
}

inline Var activate(Tape& t, Activation a, Var x) {
  switch (a) {
    case Activation::elu: return t.elu(x);
    case Activation::relu: return t.relu(x);
    case Activation::identity: return x;
  }
  return x;
}

struct ModelConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden = 64;
  Activation activation = Activation::elu;
  bool graph_activation = true;  // phi in the graph encoder; false is the "w/o activation" variant
  bool graph_mlp = true;         // false replaces the encoder MLP by the identity
  double dropout = 0.1;
  bool difference_encoder = true;  // false: mean-pooled nodes through one affine layer
  int hops = 1;

  void validate() const {
    if (embed_dim == 0) throw ConfigError("embedding dimension must be positive");
    if (hidden < 2 || hidden % 2 != 0) throw ConfigError("hidden size must be even and >= 2");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (hops < 1) throw ConfigError("hops must be >= 1");
  }

  bool operator==(const ModelConfig&) const = default;
};

struct GruIds {
  ParamId Wz, Uz, bz, Wr, Ur, br, Wh, Uh, bh;
  std::size_t hidden = 0;
};

class Model {
 public:
  Model(ModelConfig config, std::uint64_t seed) : config_(config) {
    config_.validate();
    declare();
    Rng rng(seed, "init");
    for (ParamId i = 0; i < params_.size(); ++i) init_uniform(params_[i], fan_in_[i], rng);
  }

  // Adopts existing tensors (checkpoint load); shapes must match the config.
  Model(ModelConfig config, const Params& params) : config_(config) {
    config_.validate();
    declare();
    if (params.size() != params_.size()) throw DataError("checkpoint has the wrong number of tensors");
    for (ParamId i = 0; i < params_.size(); ++i) {
      const ParamId j = params.id(params_.name(i));
      if (params[j].shape != params_[i].shape)
        throw DataError("checkpoint tensor '" + params_.name(i) + "' has the wrong shape");
      params_[i] = params[j];
    }
  }

  const ModelConfig& config() const { return config_; }
  const Params& params() const { return params_; }
  Params& params() { return params_; }

  const GruIds& gru_forward() const { return fwd_; }
  const GruIds& gru_backward() const { return bwd_; }

  struct GraphIds {
    ParamId W_I, W_ST, W_CO, mlp1_W, mlp1_b, mlp2_W, mlp2_b;
  };
  const GraphIds& graph_ids() const { return graph_; }
  ParamId pool_W() const { return pool_W_; }
  ParamId pool_b() const { return pool_b_; }
  ParamId scorer1_W() const { return s1_W_; }
  ParamId scorer1_b() const { return s1_b_; }
  ParamId scorer2_W() const { return s2_W_; }
  ParamId scorer2_b() const { return s2_b_; }
  ParamId value_W() const { return v_W_; }
  ParamId value_b() const { return v_b_; }

  bool operator==(const Model& o) const { return config_ == o.config_ && params_ == o.params_; }

 private:
  ParamId add(const std::string& name, std::vector<std::size_t> shape, std::size_t fan_in) {
    fan_in_.push_back(fan_in);
    return params_.add(name, std::move(shape));
  }

  GruIds declare_gru(const std::string& prefix) {
    const std::size_t D = config_.embed_dim, H = config_.hidden / 2;
    GruIds g{};
    g.hidden = H;
    g.Wz = add(prefix + ".W_z", {H, D}, D);
    g.Uz = add(prefix + ".U_z", {H, H}, H);
    g.bz = add(prefix + ".b_z", {H}, H);
    g.Wr = add(prefix + ".W_r", {H, D}, D);
    g.Ur = add(prefix + ".U_r", {H, H}, H);
    g.br = add(prefix + ".b_r", {H}, H);
    g.Wh = add(prefix + ".W_h", {H, D}, D);
    g.Uh = add(prefix + ".U_h", {H, H}, H);
    g.bh = add(prefix + ".b_h", {H}, H);
    return g;
  }

  void declare() {
    const std::size_t H = config_.hidden;
    fwd_ = declare_gru("gru.fwd");
    bwd_ = declare_gru("gru.bwd");
    if (config_.difference_encoder) {
      graph_.W_I = add("graph.W_I", {H, H}, H);
      graph_.W_ST = add("graph.W_ST", {H, H}, H);
      graph_.W_CO = add("graph.W_CO", {H, H}, H);
      graph_.mlp1_W = add("graph.mlp1.W", {H, H}, H);
      graph_.mlp1_b = add("graph.mlp1.b", {H}, H);
      graph_.mlp2_W = add("graph.mlp2.W", {H, H}, H);
      graph_.mlp2_b = add("graph.mlp2.b", {H}, H);
    } else {
      pool_W_ = add("pool.W", {H, H}, H);
      pool_b_ = add("pool.b", {H}, H);
    }
    s1_W_ = add("scorer.l1.W", {H, 2 * H}, 2 * H);
    s1_b_ = add("scorer.l1.b", {H}, 2 * H);
    s2_W_ = add("scorer.l2.W", {1, H}, H);
    s2_b_ = add("scorer.l2.b", {1}, H);
    v_W_ = add("value.W", {1, H}, H);
    v_b_ = add("value.b", {1}, H);
  }

  ModelConfig config_;
  Params params_;
  std::vector<std::size_t> fan_in_;
  GruIds fwd_{}, bwd_{};
  GraphIds graph_{};
  ParamId pool_W_ = 0, pool_b_ = 0;
  ParamId s1_W_ = 0, s1_b_ = 0, s2_W_ = 0, s2_b_ = 0, v_W_ = 0, v_b_ = 0;
};

// z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br),
// c = tanh(Wh x + Uh (r*h) + bh), h' = (1 - z)*h + z*c
inline Var gru_cell(Tape& t, const GruIds& g, Var x, Var h) {
  if (t.value(h).size() != g.hidden) throw ConfigError("gru_cell: hidden state has the wrong size");
  Var z = t.sigmoid(t.add(t.add(t.matvec(g.Wz, x), t.matvec(g.Uz, h)), t.param(g.bz)));
  Var r = t.sigmoid(t.add(t.add(t.matvec(g.Wr, x), t.matvec(g.Ur, h)), t.param(g.br)));
  Var c = t.tanh(t.add(t.add(t.matvec(g.Wh, x), t.matvec(g.Uh, t.mul(r, h))), t.param(g.bh)));
  return t.add(t.mul(t.one_minus(z), h), t.mul(z, c));
}

// Final forward state over the tokens concatenated with the final state of
// the reversed pass.
inline Var encode_tokens(Tape& t, const Model& m, const std::vector<std::vector<double>>& words) {
  if (words.empty()) throw ConfigError("cannot encode an empty phrase");
  std::vector<Var> xs;
  xs.reserve(words.size());
  for (const auto& w : words) xs.push_back(t.constant(w));
  const auto& f = m.gru_forward();
  const auto& b = m.gru_backward();
  Var hf = t.zeros(f.hidden);
  for (auto x : xs) hf = gru_cell(t, f, x, hf);
  Var hb = t.zeros(b.hidden);
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) hb = gru_cell(t, b, *it, hb);
  return t.concat(hf, hb);
}

inline Var encode_phrase(Tape& t, const Model& m, const embed::EmbeddingTable& table, std::string_view phrase) {
  auto toks = text::tokens(phrase);
  if (toks.empty()) throw ConfigError("cannot encode an empty phrase");
  if (table.dim() != m.config().embed_dim)
    throw ConfigError("embedding dimension " + std::to_string(table.dim()) + " does not match model " +
                      std::to_string(m.config().embed_dim));
  std::vector<std::vector<double>> words;
  for (const auto& tok : toks) words.push_back(table.token_vector(tok));
  return encode_tokens(t, m, words);
}

struct GraphEncoding {
  Var d;
  bool empty = false;
};

using NodeFeature = std::function<Var(const graph::Node&)>;

namespace detail {

inline std::vector<const graph::Node*> by_label(const std::vector<graph::Node>& nodes) {
  std::vector<const graph::Node*> out;
  for (const auto& n : nodes) out.push_back(&n);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->label < b->label; });
  return out;
}

inline std::vector<const graph::ObjectNodes*> objects_by_label(const graph::DiffGraph& g) {
  std::vector<const graph::ObjectNodes*> out;
  for (const auto& o : g.objects()) out.push_back(&o);
  std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->io.label < b->io.label; });
  return out;
}

}  // namespace detail

// Sums run in label order, so the result does not depend on the order in
// which nodes were inserted.
inline GraphEncoding encode_diff_graph(Tape& t, const Model& m, const graph::DiffGraph& g,
                                       const NodeFeature& feature) {
  const auto& cfg = m.config();
  const std::size_t H = cfg.hidden;
  if (g.empty()) return {t.zeros(H), true};
  auto phi = [&](Var x) { return cfg.graph_activation ? activate(t, cfg.activation, x) : x; };
  const auto objects = detail::objects_by_label(g);

  if (!cfg.difference_encoder) {
    std::vector<Var> all;
    for (const auto* o : objects) {
      all.push_back(feature(o->io));
      for (const auto* n : detail::by_label(o->states)) all.push_back(feature(*n));
      for (const auto* n : detail::by_label(o->commonsense)) all.push_back(feature(*n));
    }
    Var mean = t.scale(t.add_n(all), 1.0 / static_cast<double>(all.size()));
    return {t.affine(m.pool_W(), m.pool_b(), mean), false};
  }

  const auto& ids = m.graph_ids();
  std::vector<Var> outs;
  for (const auto* o : objects) {
    std::vector<Var> states, commonsense;
    for (const auto* n : detail::by_label(o->states)) states.push_back(phi(t.matvec(ids.W_ST, feature(*n))));
    for (const auto* n : detail::by_label(o->commonsense))
      commonsense.push_back(phi(t.matvec(ids.W_CO, feature(*n))));
    Var h = feature(o->io);
    for (int k = 0; k < cfg.hops; ++k) {
      std::vector<Var> terms{phi(t.add(h, t.matvec(ids.W_I, h)))};
      terms.insert(terms.end(), states.begin(), states.end());
      terms.insert(terms.end(), commonsense.begin(), commonsense.end());
      Var s = t.add_n(terms);
      if (cfg.graph_mlp) {
        s = t.affine(ids.mlp2_W, ids.mlp2_b, activate(t, cfg.activation, t.affine(ids.mlp1_W, ids.mlp1_b, s)));
      }
      h = s;
    }
    outs.push_back(h);
  }
  return {t.scale(t.add_n(outs), 1.0 / static_cast<double>(outs.size())), false};
}

// Inverted dropout mask: kept units are scaled by 1/(1-p).
inline std::vector<double> dropout_mask(std::size_t n, double p, Rng& rng) {
  std::vector<double> m(n);
  const double keep = 1.0 / (1.0 - p);
  for (auto& x : m) x = rng.uniform() < p ? 0.0 : keep;
  return m;
}

// Log-probabilities over the commands. `dropout` non-null means training mode.
inline Var score_actions(Tape& t, const Model& m, Var d, const std::vector<Var>& commands, Rng* dropout) {
  if (commands.empty()) throw ConfigError("no admissible commands to score");
  const auto& cfg = m.config();
  std::vector<Var> logits;
  logits.reserve(commands.size());
  for (auto a : commands) {
    Var h = activate(t, cfg.activation, t.affine(m.scorer1_W(), m.scorer1_b(), t.concat(a, d)));
    if (dropout && cfg.dropout > 0.0) h = t.mask(h, dropout_mask(cfg.hidden, cfg.dropout, *dropout));
    logits.push_back(t.affine(m.scorer2_W(), m.scorer2_b(), h));
  }
  return t.log_softmax(t.stack(logits));
}

inline Var value(Tape& t, const Model& m, Var d) { return t.affine(m.value_W(), m.value_b(), d); }

// One tape plus a phrase cache; phrases repeat across steps of an episode
// and parameters are fixed while a tape is alive.
class Forward {
 public:
  Forward(const Model& model, const embed::EmbeddingTable& table) : model_(&model), table_(&table), tape_(model.params()) {}

  Tape& tape() { return tape_; }
  const Tape& tape() const { return tape_; }
  const Model& model() const { return *model_; }

  Var phrase(const std::string& p) {
    auto it = cache_.find(p);
    if (it != cache_.end()) return it->second;
    Var v = encode_phrase(tape_, *model_, *table_, p);
    cache_.emplace(p, v);
    return v;
  }

  GraphEncoding graph(const graph::DiffGraph& g) {
    return encode_diff_graph(tape_, *model_, g, [this](const graph::Node& n) { return phrase(n.label); });
  }

  Var log_probs(Var d, const std::vector<std::string>& commands, Rng* dropout) {
    std::vector<Var> vs;
    vs.reserve(commands.size());
    for (const auto& c : commands) vs.push_back(phrase(c));
    return score_actions(tape_, *model_, d, vs, dropout);
  }

  Var value(Var d) { return nn::value(tape_, *model_, d); }

 private:
  const Model* model_;
  const embed::EmbeddingTable* table_;
  Tape tape_;
  std::map<std::string, Var> cache_;
};

// Actor-critic loss of one step: -A log pi(a) + c_v (G - V)^2 - c_e H(pi).
// The advantage A enters as a constant (no gradient flows through it).
inline Var a2c_step_loss(Tape& t, Var log_probs, std::size_t chosen, Var v, double ret, double advantage,
                         double value_coef, double entropy_coef) {
  Var policy = t.scale(t.pick(log_probs, chosen), -advantage);
  Var critic = t.scale(t.square(t.sub(t.constant({ret}), v)), value_coef);
  Var neg_entropy = t.scale(t.dot(t.exp(log_probs), log_probs), entropy_coef);
  std::vector<Var> terms{policy, critic, neg_entropy};
  return t.add_n(terms);
}

}  // namespace diffg::nn
