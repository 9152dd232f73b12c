// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "diffg/neural/checkpoint.hpp"
#include "diffg/neural/gradcheck.hpp"
#include "diffg/neural/model.hpp"
#include "support.hpp"

namespace diffg::nn {
namespace {

using Vec = std::vector<double>;

// Reference arithmetic on plain vectors, independent of the tape.
Vec mv(const Tensor& W, const Vec& x) {
  Vec out(W.shape[0], 0.0);
  for (std::size_t r = 0; r < W.shape[0]; ++r) {
    for (std::size_t c = 0; c < W.shape[1]; ++c) out[r] += W.values[r * W.shape[1] + c] * x[c];
  }
  return out;
}
Vec plus(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
Vec elu(Vec a) {
  for (auto& x : a) x = x > 0 ? x : std::exp(x) - 1.0;
  return a;
}
double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct RefModel {
  const Model& m;
  const Tensor& p(const std::string& name) const { return m.params()[m.params().id(name)]; }

  Vec gru(const std::string& dir, const Vec& x, const Vec& h) const {
    auto pre = [&](const char* W, const char* U, const char* b, const Vec& hh) {
      return plus(plus(mv(p(dir + W), x), mv(p(dir + U), hh)), p(dir + b).values);
    };
    Vec z = pre(".W_z", ".U_z", ".b_z", h), r = pre(".W_r", ".U_r", ".b_r", h);
    for (auto& v : z) v = sig(v);
    for (auto& v : r) v = sig(v);
    Vec rh(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) rh[i] = r[i] * h[i];
    Vec c = pre(".W_h", ".U_h", ".b_h", rh);
    Vec out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = (1 - z[i]) * h[i] + z[i] * std::tanh(c[i]);
    return out;
  }

  Vec phrase(const std::vector<Vec>& words) const {
    const std::size_t half = m.config().hidden / 2;
    Vec f(half, 0.0), b(half, 0.0);
    for (const auto& w : words) f = gru("gru.fwd", w, f);
    for (auto it = words.rbegin(); it != words.rend(); ++it) b = gru("gru.bwd", *it, b);
    f.insert(f.end(), b.begin(), b.end());
    return f;
  }

  // One io node with its neighbor features, one hop, ELU and MLP enabled.
  Vec io_update(const Vec& h, const std::vector<Vec>& states, const std::vector<Vec>& cs) const {
    Vec s = elu(plus(h, mv(p("graph.W_I"), h)));
    for (const auto& x : states) s = plus(s, elu(mv(p("graph.W_ST"), x)));
    for (const auto& x : cs) s = plus(s, elu(mv(p("graph.W_CO"), x)));
    Vec hidden = elu(plus(mv(p("graph.mlp1.W"), s), p("graph.mlp1.b").values));
    return plus(mv(p("graph.mlp2.W"), hidden), p("graph.mlp2.b").values);
  }

  double logit(const Vec& a, const Vec& d) const {
    Vec x = a;
    x.insert(x.end(), d.begin(), d.end());
    Vec h = elu(plus(mv(p("scorer.l1.W"), x), p("scorer.l1.b").values));
    return mv(p("scorer.l2.W"), h)[0] + p("scorer.l2.b").values[0];
  }
};

ModelConfig small(std::size_t hidden = 8, std::size_t embed = 4) {
  ModelConfig c;
  c.hidden = hidden;
  c.embed_dim = embed;
  return c;
}

Vec random_vec(std::size_t n, Rng& rng) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform(-1, 1);
  return v;
}

void zero(Model& m, const std::string& prefix) {
  for (ParamId i = 0; i < m.params().size(); ++i) {
    if (text::starts_with(m.params().name(i), prefix)) {
      for (auto& v : m.params()[i].values) v = 0.0;
    }
  }
}

embed::EmbeddingTable random_table(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  embed::EmbeddingTable t(dim);
  for (const char* w : {"cup", "shelf", "table", "dirty", "fork", "floor", "you", "take", "put", "on", "dishwasher",
                        "sock", "wardrobe", "into", "insert"})
    t.insert(w, random_vec(dim, rng));
  return t;
}

void expect_near(const Vec& a, const Vec& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << i;
}

TEST(Gru, ZeroWeightsHalveTheState) {
  Model m(small(), 1);
  zero(m, "gru.");
  Tape t(m.params());
  Rng rng(2);
  Vec h = random_vec(4, rng);
  Var out = gru_cell(t, m.gru_forward(), t.constant(random_vec(4, rng)), t.constant(h));
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_EQ(t.value(out)[i], 0.5 * h[i]);
}

TEST(Gru, ZeroInputZeroStateZeroBias) {
  Model m(small(), 1);
  for (const char* b : {"gru.fwd.b_z", "gru.fwd.b_r", "gru.fwd.b_h"}) {
    for (auto& v : m.params()[m.params().id(b)].values) v = 0.0;
  }
  Tape t(m.params());
  Var out = gru_cell(t, m.gru_forward(), t.zeros(4), t.zeros(4));
  EXPECT_EQ(t.value(out), Vec(4, 0.0));
}

TEST(Gru, MatchesReference) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Model m(small(8, 5), seed);
    Rng rng(seed + 100);
    Vec x = random_vec(5, rng), h = random_vec(4, rng);
    Tape t(m.params());
    Var out = gru_cell(t, m.gru_forward(), t.constant(x), t.constant(h));
    expect_near(t.value(out), RefModel{m}.gru("gru.fwd", x, h), 1e-12);
  }
}

TEST(Gru, WrongStateSizeThrows) {
  Model m(small(), 1);
  Tape t(m.params());
  EXPECT_THROW(gru_cell(t, m.gru_forward(), t.zeros(4), t.zeros(3)), ConfigError);
  EXPECT_THROW(gru_cell(t, m.gru_forward(), t.zeros(5), t.zeros(4)), ConfigError);
}

TEST(Phrase, MatchesReferenceForOneAndManyTokens) {
  Model m(small(8, 4), 3);
  auto table = random_table(4, 9);
  for (const char* p : {"cup", "dirty fork", "take dirty fork from shelf"}) {
    Tape t(m.params());
    Var v = encode_phrase(t, m, table, p);
    std::vector<Vec> words;
    for (const auto& tok : text::tokens(p)) words.push_back(table.token_vector(tok));
    expect_near(t.value(v), RefModel{m}.phrase(words), 1e-12);
  }
}

TEST(Phrase, ReversalSwapsDirectionsWhenWeightsAreShared) {
  Model m(small(8, 4), 4);
  const std::string suffixes[] = {"W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h"};
  for (const auto& s : suffixes) {
    m.params()[m.params().id("gru.bwd." + s)] = m.params()[m.params().id("gru.fwd." + s)];
  }
  auto table = random_table(4, 1);
  Tape t(m.params());
  const Vec a = t.value(encode_phrase(t, m, table, "dirty fork"));
  const Vec b = t.value(encode_phrase(t, m, table, "fork dirty"));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(a[i], b[i + 4]);
    EXPECT_EQ(a[i + 4], b[i]);
  }
  EXPECT_NE(a, b);
}

TEST(Phrase, DeterministicAndErrors) {
  Model m(small(8, 4), 5);
  auto table = random_table(4, 2);
  Tape t(m.params());
  const Vec first = t.value(encode_phrase(t, m, table, "cup"));
  EXPECT_EQ(t.value(encode_phrase(t, m, table, "cup")), first);
  EXPECT_THROW(encode_phrase(t, m, table, "  "), ConfigError);
  EXPECT_THROW(encode_phrase(t, m, random_table(3, 2), "cup"), ConfigError);
}

// Features supplied per label so the graph encoder can be tested alone.
NodeFeature fixed_features(Tape& t, const std::map<std::string, Vec>& features) {
  return [&t, &features](const graph::Node& n) { return t.constant(features.at(n.label)); };
}

TEST(GraphEncoder, LinearisedHandExample) {
  ModelConfig c = small(2, 2);
  c.graph_mlp = false;
  c.graph_activation = false;
  Model m(c, 1);
  m.params()[m.graph_ids().W_I].values = {1, 2, 3, 4};
  m.params()[m.graph_ids().W_ST].values = {0, 0, 0, 0};
  m.params()[m.graph_ids().W_CO].values = {0, 0, 0, 0};
  graph::DiffGraph g;
  auto i = g.add_object("cup");
  g.add_state(i, "table");
  g.add_commonsense(i, "shelf");
  std::map<std::string, Vec> f{{"cup", {1, -1}}, {"table", {5, 5}}, {"shelf", {7, 7}}};
  Tape t(m.params());
  auto enc = encode_diff_graph(t, m, g, fixed_features(t, f));
  EXPECT_FALSE(enc.empty);
  // h + W_I h = [1, -1] + [1*1 + 2*-1, 3*1 + 4*-1] = [0, -2]
  EXPECT_EQ(t.value(enc.d), (Vec{0, -2}));
}

TEST(GraphEncoder, LoneObjectAndFullReference) {
  Model m(small(6, 4), 7);
  Rng rng(70);
  std::map<std::string, Vec> f;
  for (const char* l : {"cup", "sock", "table", "floor", "shelf", "wardrobe", "You"}) f[l] = random_vec(6, rng);
  graph::DiffGraph g;
  auto cup = g.add_object("cup");
  g.add_state(cup, "table");
  g.add_state(cup, "floor");
  g.add_commonsense(cup, "shelf");
  auto sock = g.add_object("sock");
  g.add_state(sock, "You");
  g.add_commonsense(sock, "wardrobe");
  g.add_commonsense(sock, "shelf");
  graph::DiffGraph lone;
  lone.add_object("cup");

  RefModel ref{m};
  Tape t(m.params());
  expect_near(t.value(encode_diff_graph(t, m, lone, fixed_features(t, f)).d), ref.io_update(f["cup"], {}, {}),
              1e-12);
  Vec a = ref.io_update(f["cup"], {f["floor"], f["table"]}, {f["shelf"]});
  Vec b = ref.io_update(f["sock"], {f["You"]}, {f["shelf"], f["wardrobe"]});
  Vec d(6);
  for (std::size_t k = 0; k < 6; ++k) d[k] = (a[k] + b[k]) / 2.0;
  expect_near(t.value(encode_diff_graph(t, m, g, fixed_features(t, f)).d), d, 1e-12);
}

TEST(GraphEncoder, EmptyGraphFlag) {
  Model m(small(), 1);
  Tape t(m.params());
  auto enc = encode_diff_graph(t, m, graph::DiffGraph{}, [&](const graph::Node&) { return t.zeros(8); });
  EXPECT_TRUE(enc.empty);
  EXPECT_EQ(t.value(enc.d), Vec(8, 0.0));
}

struct GraphShape {
  std::vector<std::tuple<std::string, std::vector<std::string>, std::vector<std::string>>> objects;
};

graph::DiffGraph materialise(GraphShape s, Rng& rng) {
  rng.shuffle(s.objects);
  graph::DiffGraph g;
  for (auto& [io, states, cs] : s.objects) {
    auto i = g.add_object(io);
    // interleave insertions in random order so node ids differ
    std::vector<std::pair<bool, std::string>> ops;
    for (auto& x : states) ops.push_back({true, x});
    for (auto& x : cs) ops.push_back({false, x});
    rng.shuffle(ops);
    for (auto& [is_state, label] : ops) is_state ? g.add_state(i, label) : g.add_commonsense(i, label);
  }
  return g;
}

TEST(Property, PermutationInvariance) {
  auto table = random_table(8, 3);
  const std::vector<std::string> words{"cup", "shelf", "table", "dirty fork", "floor", "you", "dishwasher",
                                       "sock", "wardrobe", "take cup"};
  Rng rng(99);
  for (int graph_no = 0; graph_no < 5; ++graph_no) {
    Model m(small(8, 8), rng.next());
    GraphShape shape;
    auto pool = words;
    rng.shuffle(pool);
    for (std::size_t o = 0; o < 1 + rng.below(3); ++o) {
      std::vector<std::string> st, cs;
      for (std::size_t k = 0; k < 1 + rng.below(3); ++k) st.push_back(words[rng.below(words.size())]);
      for (std::size_t k = 0; k < rng.below(3); ++k) cs.push_back(words[rng.below(words.size())]);
      std::sort(st.begin(), st.end());
      st.erase(std::unique(st.begin(), st.end()), st.end());
      std::sort(cs.begin(), cs.end());
      cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
      shape.objects.emplace_back(pool[o], st, cs);
    }
    Vec reference;
    for (int perm = 0; perm < 30; ++perm) {
      auto g = materialise(shape, rng);
      Forward f(m, table);
      auto d = f.tape().value(f.graph(g).d);
      if (perm == 0) reference = d;
      ASSERT_EQ(d, reference);
    }
  }
}

TEST(Property, TypeSensitivity) {
  auto table = random_table(4, 5);
  Model m(small(8, 4), 11);
  graph::DiffGraph as_state, as_cs;
  as_state.add_state(as_state.add_object("cup"), "shelf");
  as_cs.add_commonsense(as_cs.add_object("cup"), "shelf");
  auto encode = [&](const Model& model, const graph::DiffGraph& g) {
    Forward f(model, table);
    return f.tape().value(f.graph(g).d);
  };
  EXPECT_NE(encode(m, as_state), encode(m, as_cs));
  m.params()[m.graph_ids().W_CO] = m.params()[m.graph_ids().W_ST];
  EXPECT_EQ(encode(m, as_state), encode(m, as_cs));
}

TEST(NoDifferenceEncoder, MeanOfNodesThroughOneAffine) {
  ModelConfig c = small(4, 4);
  c.difference_encoder = false;
  Model m(c, 2);
  EXPECT_FALSE(m.params().contains("graph.W_ST"));
  EXPECT_FALSE(m.params().contains("graph.W_CO"));
  EXPECT_NE(m.params().scalar_count(), Model(small(4, 4), 2).params().scalar_count());
  graph::DiffGraph g;
  auto i = g.add_object("cup");
  g.add_state(i, "table");
  g.add_commonsense(i, "shelf");
  std::map<std::string, Vec> f{{"cup", {1, 2, 3, 4}}, {"table", {0, 1, 0, 1}}, {"shelf", {2, 0, 0, 1}}};
  Tape t(m.params());
  Vec mean{1, 1, 1, 2};
  const auto& W = m.params()[m.pool_W()];
  Vec expected = plus(mv(W, mean), m.params()[m.pool_b()].values);
  expect_near(t.value(encode_diff_graph(t, m, g, fixed_features(t, f)).d), expected, 1e-12);
}

TEST(Scorer, SymmetryAndSingleCommand) {
  Model m(small(), 3);
  Tape t(m.params());
  Rng rng(1);
  Var d = t.constant(random_vec(8, rng));
  Var a = t.constant(random_vec(8, rng));
  std::vector<Var> two{a, a};
  auto lp = t.value(score_actions(t, m, d, two, nullptr));
  EXPECT_NEAR(std::exp(lp[0]), 0.5, 1e-15);
  EXPECT_EQ(lp[0], lp[1]);
  std::vector<Var> one{a};
  EXPECT_EQ(t.value(score_actions(t, m, d, one, nullptr)), Vec{0.0});
  EXPECT_THROW(score_actions(t, m, d, {}, nullptr), ConfigError);
}

TEST(Scorer, MatchesReferenceAndSumsToOne) {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    Model m(small(8, 4), rng.next());
    Tape t(m.params());
    Vec dv = random_vec(8, rng);
    std::vector<Vec> cmds;
    std::vector<Var> vars;
    for (std::size_t k = 0; k < 1 + rng.below(6); ++k) {
      cmds.push_back(random_vec(8, rng));
      vars.push_back(t.constant(cmds.back()));
    }
    auto lp = t.value(score_actions(t, m, t.constant(dv), vars, nullptr));
    std::vector<double> logits;
    for (const auto& c : cmds) logits.push_back(RefModel{m}.logit(c, dv));
    double z = 0.0;
    for (double l : logits) z += std::exp(l);
    double total = 0.0;
    for (std::size_t k = 0; k < lp.size(); ++k) {
      EXPECT_NEAR(std::exp(lp[k]), std::exp(logits[k]) / z, 1e-12);
      total += std::exp(lp[k]);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Scorer, DropoutOnlyInTrainingMode) {
  Model m(small(), 3);
  Tape t(m.params());
  Rng rng(4);
  Var d = t.constant(random_vec(8, rng));
  std::vector<Var> cmds{t.constant(random_vec(8, rng)), t.constant(random_vec(8, rng)),
                        t.constant(random_vec(8, rng))};
  auto eval1 = t.value(score_actions(t, m, d, cmds, nullptr));
  auto eval2 = t.value(score_actions(t, m, d, cmds, nullptr));
  EXPECT_EQ(eval1, eval2);
  Rng dropout(8);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= t.value(score_actions(t, m, d, cmds, &dropout)) != eval1;
  EXPECT_TRUE(differs);
}

TEST(Dropout, MaskValues) {
  Rng rng(6);
  auto mask = dropout_mask(100000, 0.1, rng);
  std::size_t dropped = 0;
  for (double x : mask) {
    if (x == 0.0) ++dropped;
    else EXPECT_EQ(x, 1.0 / 0.9);
  }
  EXPECT_NEAR(static_cast<double>(dropped) / 100000.0, 0.1, 0.01);
}

TEST(ValueHead, ZeroLinearAndReference) {
  Model m(small(), 3);
  Rng rng(2);
  Tape t(m.params());
  Vec x = random_vec(8, rng);
  const double v0 = t.scalar(value(t, m, t.zeros(8)));
  EXPECT_EQ(v0, m.params()[m.value_b()].values[0]);
  Vec x2 = x;
  for (auto& e : x2) e *= 2;
  const double v1 = t.scalar(value(t, m, t.constant(x)));
  const double v2 = t.scalar(value(t, m, t.constant(x2)));
  EXPECT_NEAR(v2 - v0, 2 * (v1 - v0), 1e-12);
  const auto& W = m.params()[m.value_W()].values;
  EXPECT_NEAR(v1, std::inner_product(W.begin(), W.end(), x.begin(), 0.0) + v0, 1e-12);
  m.params()[m.value_b()].values[0] = 0.0;
  Tape t2(m.params());
  EXPECT_EQ(t2.scalar(value(t2, m, t2.zeros(8))), 0.0);
}

TEST(Backward, RepeatableAndUnusedParametersGetZero) {
  auto c = random_case(3);
  Forward f(c.model, c.table);
  auto enc = f.graph(c.graph);
  Var v = f.value(enc.d);
  auto g1 = f.tape().backward(v);
  auto g2 = f.tape().backward(v);
  EXPECT_EQ(g1, g2);
  const auto& p = c.model.params();
  for (ParamId i = 0; i < p.size(); ++i) {
    const bool unused = text::starts_with(p.name(i), "scorer.");
    for (double x : g1[i]) {
      if (unused) {
        EXPECT_EQ(x, 0.0) << p.name(i);
      }
    }
  }
  EXPECT_EQ(g1[c.model.value_b()], Vec{1.0});
  Tape constant_only(p);
  Var k = constant_only.sum(constant_only.constant({1, 2, 3}));
  for (const auto& g : constant_only.backward(k)) {
    for (double x : g) EXPECT_EQ(x, 0.0);
  }
}

TEST(Backward, Errors) {
  Model m(small(), 1);
  Tape t(m.params());
  Var vec = t.constant({1, 2});
  EXPECT_THROW(t.backward(vec), ConfigError);
  EXPECT_THROW(t.backward(Var{}), ConfigError);
  Tape other(m.params());
  EXPECT_THROW(other.backward(Var{5}), ConfigError);
}

TEST(Gradcheck, TenSeedsWithinTolerance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = gradcheck(seed);
    EXPECT_TRUE(r.pass) << "seed " << seed << " worst " << r.worst << " " << r.max_error;
    EXPECT_LE(r.max_error, 1e-4);
    std::size_t checked = 0;
    for (const auto& g : r.groups) checked += g.checked;
    EXPECT_EQ(checked, random_case(seed).model.params().scalar_count());
  }
}

TEST(Gradcheck, OtherActivations) {
  for (auto act : {Activation::identity, Activation::relu}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto c = random_case(seed, 8, 8, act);
      Gradients analytic;
      case_loss(c, c.model, &analytic);
      Model probe = c.model;
      double worst = 0.0;
      for (ParamId p = 0; p < probe.params().size(); ++p) {
        auto& vals = probe.params()[p].values;
        for (std::size_t i = 0; i < vals.size(); ++i) {
          const double saved = vals[i];
          vals[i] = saved + 1e-5;
          const double up = case_loss(c, probe);
          vals[i] = saved - 1e-5;
          const double down = case_loss(c, probe);
          vals[i] = saved;
          const double numeric = (up - down) / 2e-5;
          const double denom = std::max({std::abs(numeric), std::abs(analytic[p][i]), 1e-6});
          worst = std::max(worst, std::abs(numeric - analytic[p][i]) / denom);
        }
      }
      // a relu kink inside the probe interval can spoil a single entry
      EXPECT_LE(worst, act == Activation::relu ? 1e-2 : 1e-4) << to_string(act) << " seed " << seed;
    }
  }
}

TEST(Params, InitialisationWithinFanInBound) {
  Model m(small(8, 4), 5);
  EXPECT_EQ(m, Model(small(8, 4), 5));
  EXPECT_NE(m, Model(small(8, 4), 6));
  const auto& p = m.params();
  for (ParamId i = 0; i < p.size(); ++i) {
    double fan_in = static_cast<double>(p[i].shape.size() == 2 ? p[i].shape[1] : p[i].shape[0]);
    if (p.name(i) == "scorer.l1.b") fan_in = 16.0;
    if (p.name(i) == "scorer.l2.b" || p.name(i) == "value.b") fan_in = 8.0;
    for (double v : p[i].values) EXPECT_LE(std::abs(v), 1.0 / std::sqrt(fan_in)) << p.name(i);
  }
}

TEST(Params, DuplicateAndUnknownNames) {
  Params p;
  p.add("a", {2});
  EXPECT_THROW(p.add("a", {3}), ConfigError);
  EXPECT_THROW(p.id("b"), ConfigError);
}

TEST(Config, Validation) {
  ModelConfig c = small();
  c.hidden = 7;
  EXPECT_THROW(Model(c, 1), ConfigError);
  c = small();
  c.dropout = 1.0;
  EXPECT_THROW(Model(c, 1), ConfigError);
  c = small();
  c.embed_dim = 0;
  EXPECT_THROW(Model(c, 1), ConfigError);
  EXPECT_EQ(parse_activation("relu"), Activation::relu);
  EXPECT_THROW(parse_activation("tanh"), ConfigError);
}

TEST(Checkpoint, ByteStableRoundTrip) {
  for (bool de : {true, false}) {
    for (bool phi : {true, false}) {
      ModelConfig c = small(8, 4);
      c.difference_encoder = de;
      c.graph_activation = phi;
      c.activation = phi ? Activation::elu : Activation::relu;
      Model m(c, 21);
      auto bytes = serialize(m);
      Model back = deserialize(bytes);
      EXPECT_EQ(back.params(), m.params());
      EXPECT_EQ(back.config(), m.config());
      EXPECT_EQ(serialize(back), bytes);
    }
  }
  auto dir = diffg::testing::scratch_dir("checkpoint");
  Model m(small(), 4);
  save(m, dir / "m.ckpt");
  EXPECT_EQ(load(dir / "m.ckpt"), m);
}

TEST(Checkpoint, HeaderLayout) {
  Model m(small(8, 4), 1);
  auto bytes = serialize(m);
  EXPECT_EQ(bytes.substr(0, 4), "DGRL");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 8);  // hidden size
  EXPECT_EQ(bytes.substr(16, 15), "elu;phi=1;mlp=1");
}

TEST(Checkpoint, CorruptInputsAreDataErrors) {
  auto bytes = serialize(Model(small(), 1));
  EXPECT_THROW(deserialize("XXXX" + bytes.substr(4)), DataError);
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  EXPECT_THROW(deserialize(bytes + "x"), DataError);
  EXPECT_THROW(deserialize(""), DataError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(deserialize(bad_version), DataError);
}

}  // namespace
}  // namespace diffg::nn
