// SPDX-License-Identifier: Apache-2.0
//
// Agent loop, advantage actor-critic training, evaluation and model
// selection.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "diffg/cs_extractor.hpp"
#include "diffg/diffgraph.hpp"
#include "diffg/embed.hpp"
#include "diffg/error.hpp"
#include "diffg/neural/model.hpp"
#include "diffg/obs_parser.hpp"
#include "diffg/rng.hpp"
#include "diffg/text.hpp"
#include "diffg/world.hpp"

namespace diffg::train {

// Inputs shared by every episode: word vectors and the grounded
// commonsense graph (object -> destinations).
struct Resources {
  embed::EmbeddingTable table;
  std::shared_ptr<const graph::CommonsenseIndex> commonsense = std::make_shared<graph::CommonsenseIndex>();
};

enum class Mode { sample, greedy };

struct Choice {
  std::size_t index = 0;
  double log_prob = 0.0;
  double value = 0.0;
};

struct StepRecord {
  std::string observation;
  std::vector<std::string> commands;
  std::size_t chosen = 0;
  double log_prob = 0.0;
  double value = 0.0;
  int reward = 0;
};

struct Trajectory {
  std::string game;
  std::vector<StepRecord> steps;
  double episode_return = 0.0;  // undiscounted
  double score = 0.0;           // normalized
};

// The four-component agent: parse the observation, update the tracker and
// the difference graph, encode, score the admissible commands.
class Agent {
 public:
  Agent(const nn::Model& model, const Resources& res, Mode mode, Rng* sampling = nullptr, Rng* dropout = nullptr)
      : model_(&model), res_(&res), mode_(mode), sampling_(sampling), dropout_(dropout) {
    if (mode == Mode::sample && !sampling) throw ConfigError("sampling mode needs a random stream");
    reset();
  }

  void reset() {
    tracker_ = {};
    graph_ = graph::DiffGraph(res_->commonsense);
    forward_ = std::make_unique<nn::Forward>(*model_, res_->table);
    vars_.clear();
  }

  Choice choose(const world::Observation& obs, const world::GameState&, const std::vector<std::string>& commands) {
    tracker_ = obs::observe(std::move(tracker_), obs::parse_observation(obs.text));
    graph_ = graph_.update(tracker_);
    auto& f = *forward_;
    auto enc = f.graph(graph_);
    nn::Var lp = f.log_probs(enc.d, commands, dropout_);
    nn::Var v = f.value(enc.d);
    const auto& logp = f.tape().value(lp);
    std::size_t pick = 0;
    if (mode_ == Mode::greedy) {
      for (std::size_t i = 1; i < logp.size(); ++i) {
        if (logp[i] > logp[pick]) pick = i;
      }
    } else {
      const double u = sampling_->uniform();
      double acc = 0.0;
      pick = logp.size() - 1;
      for (std::size_t i = 0; i < logp.size(); ++i) {
        acc += std::exp(logp[i]);
        if (u < acc) {
          pick = i;
          break;
        }
      }
    }
    vars_.push_back({lp, v, pick});
    return {pick, logp[pick], f.tape().scalar(v)};
  }

  struct StepVars {
    nn::Var log_probs;
    nn::Var value;
    std::size_t chosen;
  };

  nn::Forward& forward() { return *forward_; }
  const std::vector<StepVars>& step_vars() const { return vars_; }
  const obs::StateTracker& tracker() const { return tracker_; }
  const graph::DiffGraph& graph() const { return graph_; }

 private:
  const nn::Model* model_;
  const Resources* res_;
  Mode mode_;
  Rng* sampling_;
  Rng* dropout_;
  obs::StateTracker tracker_;
  graph::DiffGraph graph_;
  std::unique_ptr<nn::Forward> forward_;
  std::vector<StepVars> vars_;
};

// Ground-truth planner; certifies solvability and bounds evaluation.
struct OraclePolicy {
  void reset() {}
  Choice choose(const world::Observation&, const world::GameState& s, const std::vector<std::string>& commands) {
    auto cmd = world::oracle_policy(s);
    auto it = cmd ? std::find(commands.begin(), commands.end(), *cmd) : commands.end();
    if (it == commands.end()) throw ConfigError("oracle proposed an inadmissible command");
    return {static_cast<std::size_t>(it - commands.begin()), 0.0, 0.0};
  }
};

struct RandomPolicy {
  Rng rng;
  void reset() {}
  Choice choose(const world::Observation&, const world::GameState&, const std::vector<std::string>& commands) {
    return {rng.below(commands.size()), -std::log(static_cast<double>(commands.size())), 0.0};
  }
};

// Plays one game to completion. `observer(policy, record, state)` runs after
// every step.
template <typename Policy, typename Observer>
Trajectory run(Policy& policy, std::shared_ptr<const world::GameSpec> spec, Observer&& observer) {
  policy.reset();
  auto [state, obs] = world::reset(spec);
  Trajectory t;
  t.game = spec->id;
  while (!state.done) {
    auto commands = world::admissible_commands(state);
    if (commands.empty()) break;
    auto c = policy.choose(obs, state, commands);
    StepRecord rec{obs.text, commands, c.index, c.log_prob, c.value, 0};
    auto r = world::step(state, commands[c.index]);
    if (!r.accepted) throw ConfigError("policy chose a rejected command: " + r.error);
    rec.reward = r.reward;
    t.episode_return += r.reward;
    obs = r.observation;
    t.steps.push_back(std::move(rec));
    observer(policy, t.steps.back(), state);
  }
  t.score = world::normalized_score(state);
  return t;
}

template <typename Policy>
Trajectory run(Policy& policy, std::shared_ptr<const world::GameSpec> spec) {
  return run(policy, std::move(spec), [](const Policy&, const StepRecord&, const world::GameState&) {});
}

inline Trajectory run_episode(std::shared_ptr<const world::GameSpec> spec, const nn::Model& model,
                              const Resources& res, Mode mode, Rng* sampling = nullptr, Rng* dropout = nullptr) {
  Agent agent(model, res, mode, sampling, dropout);
  return run(agent, std::move(spec));
}

// G_t = r_t + gamma G_{t+1}
inline std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

class Adam {
 public:
  explicit Adam(const nn::Params& p, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(nn::zero_gradients(p)), v_(nn::zero_gradients(p)) {}

  void step(nn::Params& p, const nn::Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto& w = p[k].values;
      for (std::size_t i = 0; i < w.size(); ++i) {
        m_[k][i] = b1_ * m_[k][i] + (1.0 - b1_) * g[k][i];
        v_[k][i] = b2_ * v_[k][i] + (1.0 - b2_) * g[k][i] * g[k][i];
        const double mhat = m_[k][i] / c1;
        const double vhat = v_[k][i] / c2;
        w[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

  long steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  nn::Gradients m_, v_;
  long t_ = 0;
};

struct TrainConfig {
  int epochs = 100;
  std::size_t train_games = 20;  // first n games of the train split; 0 means all
  double learning_rate = 3e-5;
  double gamma = 0.9;
  std::size_t hidden = 64;
  std::uint64_t seed = 1;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  bool difference_encoder = true;
  nn::Activation activation = nn::Activation::elu;
  bool graph_activation = true;
  double dropout = 0.1;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("discount must be in (0, 1]");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
  }

  nn::ModelConfig model_config(std::size_t embed_dim) const {
    nn::ModelConfig m;
    m.embed_dim = embed_dim;
    m.hidden = hidden;
    m.activation = activation;
    m.graph_activation = graph_activation;
    m.dropout = dropout;
    m.difference_encoder = difference_encoder;
    return m;
  }

  // key=value pairs in a fixed order, for manifests
  std::vector<std::pair<std::string, std::string>> fields() const {
    return {{"epochs", std::to_string(epochs)},
            {"train-games", std::to_string(train_games)},
            {"lr", text::format_double(learning_rate)},
            {"gamma", text::format_double(gamma)},
            {"hidden", std::to_string(hidden)},
            {"seed", std::to_string(seed)},
            {"entropy-coef", text::format_double(entropy_coef)},
            {"value-coef", text::format_double(value_coef)},
            {"ablation", difference_encoder ? "full" : "no-de"},
            {"activation", std::string(nn::to_string(activation))},
            {"graph-activation", graph_activation ? "true" : "false"},
            {"dropout", text::format_double(dropout)}};
  }
};

struct EpisodeOutcome {
  double score = 0.0;
  int steps = 0;
};

struct SetResult {
  double score = 0.0;  // mean normalized score
  double steps = 0.0;  // mean steps
};

template <typename Policy>
SetResult play_set(Policy& policy, const std::vector<world::GameSpec>& games) {
  if (games.empty()) throw ConfigError("no games to play");
  SetResult r;
  for (const auto& g : games) {
    auto t = run(policy, std::make_shared<const world::GameSpec>(g));
    r.score += t.score;
    r.steps += static_cast<double>(t.steps.size());
  }
  r.score /= static_cast<double>(games.size());
  r.steps /= static_cast<double>(games.size());
  return r;
}

inline SetResult greedy_set(const nn::Model& model, const Resources& res, const std::vector<world::GameSpec>& games) {
  Agent agent(model, res, Mode::greedy);
  return play_set(agent, games);
}

struct CurveRow {
  int epoch = 0;
  double train_score = 0.0;
  double valid_score = 0.0;
  double valid_steps = 0.0;
};

inline std::string format_curve(const std::vector<CurveRow>& rows) {
  std::string s;
  for (const auto& r : rows) {
    s += std::to_string(r.epoch) + "\t" + text::format_double(r.train_score) + "\t" +
         text::format_double(r.valid_score) + "\t" + text::format_double(r.valid_steps) + "\n";
  }
  return s;
}

// Highest validation score, then fewest mean steps, then earliest epoch.
inline std::size_t select_model(const std::vector<SetResult>& valid) {
  if (valid.empty()) throw ConfigError("no checkpoints to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < valid.size(); ++i) {
    if (valid[i].score > valid[best].score ||
        (valid[i].score == valid[best].score && valid[i].steps < valid[best].steps))
      best = i;
  }
  return best;
}

struct TrainResult {
  nn::Model best;
  nn::Model last;
  int best_epoch = 1;
  std::vector<CurveRow> curve;
};

using EpochCallback = std::function<void(int epoch, const nn::Model&, const CurveRow&)>;

// One actor-critic update per episode over one pass of the training games
// per epoch; validation after every epoch picks the returned model.
inline TrainResult train(const TrainConfig& cfg, const world::Dataset& data, const Resources& res,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  std::vector<world::GameSpec> games = data.train;
  if (cfg.train_games && cfg.train_games < games.size()) games.resize(cfg.train_games);
  if (games.empty()) throw ConfigError("training set is empty");
  if (data.valid.empty()) throw ConfigError("validation set is empty");
  std::vector<std::shared_ptr<const world::GameSpec>> specs;
  for (auto& g : games) specs.push_back(std::make_shared<const world::GameSpec>(g));

  nn::Model model(cfg.model_config(res.table.dim()), cfg.seed);
  Adam adam(model.params(), cfg.learning_rate);
  Rng sampling(cfg.seed, "sampling");
  Rng dropout(cfg.seed, "dropout");
  Rng schedule(cfg.seed, "schedule");

  TrainResult out{model, model, 1, {}};
  std::vector<SetResult> valid;
  std::vector<std::size_t> order(specs.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    schedule.shuffle(order);
    double train_score = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      Agent agent(model, res, Mode::sample, &sampling, &dropout);
      auto traj = run(agent, specs[order[k]]);
      train_score += traj.score;
      std::vector<double> rewards;
      for (const auto& s : traj.steps) rewards.push_back(s.reward);
      auto returns = discounted_returns(rewards, cfg.gamma);
      auto& tape = agent.forward().tape();
      std::vector<nn::Var> losses;
      for (std::size_t t = 0; t < returns.size(); ++t) {
        const auto& sv = agent.step_vars()[t];
        const double adv = returns[t] - tape.scalar(sv.value);
        losses.push_back(nn::a2c_step_loss(tape, sv.log_probs, sv.chosen, sv.value, returns[t], adv,
                                           cfg.value_coef, cfg.entropy_coef));
      }
      if (losses.empty()) continue;
      nn::Var loss = tape.add_n(losses);
      if (!std::isfinite(tape.scalar(loss)))
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", game " + specs[order[k]]->id);
      auto grads = tape.backward(loss);
      for (const auto& g : grads) {
        for (double x : g) {
          if (!std::isfinite(x))
            throw NumericError("non-finite gradient at epoch " + std::to_string(epoch) + ", game " +
                               specs[order[k]]->id);
        }
      }
      adam.step(model.params(), grads);
    }
    auto v = greedy_set(model, res, data.valid);
    CurveRow row{epoch, train_score / static_cast<double>(order.size()), v.score, v.steps};
    out.curve.push_back(row);
    valid.push_back(v);
    if (select_model(valid) == valid.size() - 1) {
      out.best = model;
      out.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(epoch, model, row);
  }
  out.last = model;
  return out;
}

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;  // population, over seeds
  double steps = 0.0;   // mean steps over all episodes
  std::vector<double> per_seed;
};

// Aggregates per-seed set results into mean +- std of the per-seed means.
inline EvalResult summarize(const std::vector<SetResult>& per_seed) {
  if (per_seed.empty()) throw ConfigError("no seeds to summarize");
  EvalResult r;
  for (const auto& s : per_seed) {
    r.per_seed.push_back(s.score);
    r.mean += s.score;
    r.steps += s.steps;
  }
  const double n = static_cast<double>(per_seed.size());
  r.mean /= n;
  r.steps /= n;
  double var = 0.0;
  for (double x : r.per_seed) var += (x - r.mean) * (x - r.mean);
  r.stddev = std::sqrt(var / n);
  return r;
}

// Greedy evaluation of one model per seed on a game set.
inline EvalResult evaluate(const std::vector<nn::Model>& models, const Resources& res,
                           const std::vector<world::GameSpec>& games) {
  std::vector<SetResult> per_seed;
  for (const auto& m : models) per_seed.push_back(greedy_set(m, res, games));
  return summarize(per_seed);
}

// Trains one model per seed and evaluates the selected checkpoints.
inline EvalResult train_and_evaluate(TrainConfig cfg, const world::Dataset& data, const Resources& res,
                                     const std::vector<std::uint64_t>& seeds,
                                     const std::vector<world::GameSpec>& games) {
  std::vector<nn::Model> models;
  for (auto s : seeds) {
    cfg.seed = s;
    models.push_back(train(cfg, data, res).best);
  }
  return evaluate(models, res, games);
}

// The same run with the difference graph encoder replaced by mean-pooled
// node features through one affine layer.
inline EvalResult ablate_no_de(TrainConfig cfg, const world::Dataset& data, const Resources& res,
                               const std::vector<std::uint64_t>& seeds, const std::vector<world::GameSpec>& games) {
  cfg.difference_encoder = false;
  return train_and_evaluate(cfg, data, res, seeds, games);
}

inline Resources make_resources(embed::EmbeddingTable table, const cs::CommonsenseGraph& graph) {
  Resources r;
  r.table = std::move(table);
  r.commonsense = graph::index_commonsense(graph);
  return r;
}

}  // namespace diffg::train
