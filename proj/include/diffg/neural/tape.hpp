// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode automatic differentiation over dense vectors. A Tape records
// every operation of one forward pass against a fixed Params; backward()
// walks it in reverse and returns the gradient of a scalar output with
// respect to every parameter.
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "diffg/error.hpp"
#include "diffg/neural/params.hpp"

namespace diffg::nn {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op {
  constant,
  param,
  matvec,
  add,
  sub,
  mul,
  one_minus,
  sigmoid,
  tanh,
  elu,
  relu,
  concat,
  add_n,
  scale,
  mask,
  dot,
  stack,
  log_softmax,
  exp,
  pick,
  square,
  sum,
};

class Tape {
 public:
  explicit Tape(const Params& params) : params_(&params) {}

  const Params& params() const { return *params_; }
  std::size_t size() const { return nodes_.size(); }

  const std::vector<double>& value(Var v) const { return node(v).value; }
  double scalar(Var v) const {
    const auto& x = value(v);
    if (x.size() != 1) throw ConfigError("expected a scalar variable");
    return x[0];
  }

  Var constant(std::vector<double> v) { return push(Op::constant, std::move(v)); }
  Var zeros(std::size_t n) { return constant(std::vector<double>(n, 0.0)); }

  // Parameter tensor used directly as a vector (biases).
  Var param(ParamId p) {
    Node n{Op::param, (*params_)[p].values};
    n.pid = p;
    return push(std::move(n));
  }

  // W x for a rows x cols parameter matrix.
  Var matvec(ParamId w, Var x) {
    const Tensor& W = (*params_)[w];
    const auto& xv = value(x);
    if (W.shape.size() != 2 || W.cols() != xv.size())
      throw ConfigError("matvec shape mismatch for '" + params_->name(w) + "': " + std::to_string(W.cols()) +
                        " columns vs input of " + std::to_string(xv.size()));
    const std::size_t R = W.rows(), C = W.cols();
    std::vector<double> out(R, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      const double* row = W.values.data() + r * C;
      double s = 0.0;
      for (std::size_t c = 0; c < C; ++c) s += row[c] * xv[c];
      out[r] = s;
    }
    Node n{Op::matvec, std::move(out)};
    n.pid = w;
    n.a = x.id;
    return push(std::move(n));
  }

  Var affine(ParamId w, ParamId b, Var x) { return add(matvec(w, x), param(b)); }

  Var add(Var a, Var b) { return binary(Op::add, a, b, [](double x, double y) { return x + y; }); }
  Var sub(Var a, Var b) { return binary(Op::sub, a, b, [](double x, double y) { return x - y; }); }
  Var mul(Var a, Var b) { return binary(Op::mul, a, b, [](double x, double y) { return x * y; }); }

  Var one_minus(Var a) { return unary(Op::one_minus, a, [](double x) { return 1.0 - x; }); }
  Var sigmoid(Var a) {
    return unary(Op::sigmoid, a, [](double x) {
      if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
      const double e = std::exp(x);
      return e / (1.0 + e);
    });
  }
  Var tanh(Var a) { return unary(Op::tanh, a, [](double x) { return std::tanh(x); }); }
  Var elu(Var a) { return unary(Op::elu, a, [](double x) { return x > 0 ? x : std::expm1(x); }); }
  Var relu(Var a) { return unary(Op::relu, a, [](double x) { return x > 0 ? x : 0.0; }); }
  Var exp(Var a) { return unary(Op::exp, a, [](double x) { return std::exp(x); }); }
  Var square(Var a) { return unary(Op::square, a, [](double x) { return x * x; }); }

  Var scale(Var a, double s) {
    Node n = unary_node(Op::scale, a, [s](double x) { return x * s; });
    n.s = s;
    return push(std::move(n));
  }

  // Element-wise product with a constant vector (dropout).
  Var mask(Var a, std::vector<double> m) {
    const auto& av = value(a);
    if (m.size() != av.size()) throw ConfigError("mask size mismatch");
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * m[i];
    Node n{Op::mask, std::move(out)};
    n.a = a.id;
    n.aux = std::move(m);
    return push(std::move(n));
  }

  Var concat(Var a, Var b) {
    std::vector<double> out = value(a);
    const auto& bv = value(b);
    out.insert(out.end(), bv.begin(), bv.end());
    Node n{Op::concat, std::move(out)};
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
  }

  // Sum of equally sized vectors, accumulated left to right.
  Var add_n(std::span<const Var> xs) {
    if (xs.empty()) throw ConfigError("add_n of no inputs");
    std::vector<double> out = value(xs[0]);
    std::vector<int> args{xs[0].id};
    for (std::size_t k = 1; k < xs.size(); ++k) {
      const auto& v = value(xs[k]);
      if (v.size() != out.size()) throw ConfigError("add_n size mismatch");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
      args.push_back(xs[k].id);
    }
    Node n{Op::add_n, std::move(out)};
    n.args = std::move(args);
    return push(std::move(n));
  }

  Var dot(Var a, Var b) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.size() != bv.size()) throw ConfigError("dot size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    Node n{Op::dot, {s}};
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
  }

  Var sum(Var a) {
    double s = 0.0;
    for (double x : value(a)) s += x;
    Node n{Op::sum, {s}};
    n.a = a.id;
    return push(std::move(n));
  }

  // Scalars -> vector.
  Var stack(std::span<const Var> xs) {
    std::vector<double> out;
    std::vector<int> args;
    for (auto x : xs) {
      out.push_back(scalar(x));
      args.push_back(x.id);
    }
    Node n{Op::stack, std::move(out)};
    n.args = std::move(args);
    return push(std::move(n));
  }

  Var log_softmax(Var a) {
    const auto& av = value(a);
    if (av.empty()) throw ConfigError("log_softmax of an empty vector");
    double m = av[0];
    for (double x : av) m = std::max(m, x);
    double z = 0.0;
    for (double x : av) z += std::exp(x - m);
    const double lse = m + std::log(z);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] - lse;
    Node n{Op::log_softmax, std::move(out)};
    n.a = a.id;
    return push(std::move(n));
  }

  Var pick(Var a, std::size_t i) {
    const auto& av = value(a);
    if (i >= av.size()) throw ConfigError("pick index out of range");
    Node n{Op::pick, {av[i]}};
    n.a = a.id;
    n.index = i;
    return push(std::move(n));
  }

  // d(output)/d(params) for a scalar output. Does not modify the tape, so
  // repeated calls return identical gradients.
  Gradients backward(Var output) const {
    if (!output.valid() || static_cast<std::size_t>(output.id) >= nodes_.size())
      throw ConfigError("backward on a variable not recorded by this tape");
    if (nodes_[output.id].value.size() != 1) throw ConfigError("backward needs a scalar output");
    Gradients grads = zero_gradients(*params_);
    std::vector<std::vector<double>> adj(output.id + 1);
    adj[output.id] = {1.0};
    for (int i = output.id; i >= 0; --i) {
      if (adj[i].empty()) continue;
      propagate(nodes_[i], adj[i], adj, grads);
    }
    return grads;
  }

 private:
  struct Node {
    Node(Op o, std::vector<double> v) : op(o), value(std::move(v)) {}
    Op op;
    std::vector<double> value;
    int a = -1;
    int b = -1;
    std::vector<int> args;
    std::vector<double> aux;
    ParamId pid = 0;
    double s = 0.0;
    std::size_t index = 0;
  };

  const Node& node(Var v) const {
    if (!v.valid() || static_cast<std::size_t>(v.id) >= nodes_.size())
      throw ConfigError("variable not recorded by this tape");
    return nodes_[v.id];
  }

  Var push(Op op, std::vector<double> v) { return push(Node{op, std::move(v)}); }
  Var push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  template <typename F>
  Node unary_node(Op op, Var a, F f) {
    const auto& av = value(a);
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
    Node n{op, std::move(out)};
    n.a = a.id;
    return n;
  }

  template <typename F>
  Var unary(Op op, Var a, F f) {
    return push(unary_node(op, a, f));
  }

  template <typename F>
  Var binary(Op op, Var a, Var b, F f) {
    const auto& av = value(a);
    const auto& bv = value(b);
    if (av.size() != bv.size())
      throw ConfigError("shape mismatch: " + std::to_string(av.size()) + " vs " + std::to_string(bv.size()));
    std::vector<double> out(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i], bv[i]);
    Node n{op, std::move(out)};
    n.a = a.id;
    n.b = b.id;
    return push(std::move(n));
  }

  static std::vector<double>& slot(std::vector<std::vector<double>>& adj, int id, std::size_t n) {
    auto& s = adj[id];
    if (s.empty()) s.assign(n, 0.0);
    return s;
  }

  void propagate(const Node& n, const std::vector<double>& g, std::vector<std::vector<double>>& adj,
                 Gradients& grads) const {
    auto in = [&](int id) -> std::vector<double>& { return slot(adj, id, nodes_[id].value.size()); };
    const std::size_t N = g.size();
    switch (n.op) {
      case Op::constant:
        break;
      case Op::param: {
        auto& gp = grads[n.pid];
        for (std::size_t i = 0; i < N; ++i) gp[i] += g[i];
        break;
      }
      case Op::matvec: {
        const Tensor& W = (*params_)[n.pid];
        const auto& x = nodes_[n.a].value;
        const std::size_t C = W.cols();
        auto& gW = grads[n.pid];
        auto& gx = in(n.a);
        for (std::size_t r = 0; r < N; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          const double* row = W.values.data() + r * C;
          double* grow = gW.data() + r * C;
          for (std::size_t c = 0; c < C; ++c) {
            grow[c] += gr * x[c];
            gx[c] += gr * row[c];
          }
        }
        break;
      }
      case Op::add: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i];
        auto& gb = in(n.b);
        for (std::size_t i = 0; i < N; ++i) gb[i] += g[i];
        break;
      }
      case Op::sub: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i];
        auto& gb = in(n.b);
        for (std::size_t i = 0; i < N; ++i) gb[i] -= g[i];
        break;
      }
      case Op::mul: {
        const auto& av = nodes_[n.a].value;
        const auto& bv = nodes_[n.b].value;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * bv[i];
        auto& gb = in(n.b);
        for (std::size_t i = 0; i < N; ++i) gb[i] += g[i] * av[i];
        break;
      }
      case Op::one_minus: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] -= g[i];
        break;
      }
      case Op::sigmoid: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        break;
      }
      case Op::tanh: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]);
        break;
      }
      case Op::elu: {
        const auto& x = nodes_[n.a].value;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * (x[i] > 0 ? 1.0 : n.value[i] + 1.0);
        break;
      }
      case Op::relu: {
        const auto& x = nodes_[n.a].value;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += x[i] > 0 ? g[i] : 0.0;
        break;
      }
      case Op::exp: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * n.value[i];
        break;
      }
      case Op::square: {
        const auto& x = nodes_[n.a].value;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += 2.0 * g[i] * x[i];
        break;
      }
      case Op::scale: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * n.s;
        break;
      }
      case Op::mask: {
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] * n.aux[i];
        break;
      }
      case Op::concat: {
        const std::size_t na = nodes_[n.a].value.size();
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < na; ++i) ga[i] += g[i];
        auto& gb = in(n.b);
        for (std::size_t i = na; i < N; ++i) gb[i - na] += g[i];
        break;
      }
      case Op::add_n: {
        for (int id : n.args) {
          auto& gi = in(id);
          for (std::size_t i = 0; i < N; ++i) gi[i] += g[i];
        }
        break;
      }
      case Op::dot: {
        const auto& av = nodes_[n.a].value;
        const auto& bv = nodes_[n.b].value;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g[0] * bv[i];
        auto& gb = in(n.b);
        for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g[0] * av[i];
        break;
      }
      case Op::sum: {
        auto& ga = in(n.a);
        for (auto& x : ga) x += g[0];
        break;
      }
      case Op::stack: {
        for (std::size_t k = 0; k < n.args.size(); ++k) in(n.args[k])[0] += g[k];
        break;
      }
      case Op::log_softmax: {
        // d/dx_j = g_j - softmax_j * sum(g)
        double total = 0.0;
        for (double x : g) total += x;
        auto& ga = in(n.a);
        for (std::size_t i = 0; i < N; ++i) ga[i] += g[i] - std::exp(n.value[i]) * total;
        break;
      }
      case Op::pick: {
        in(n.a)[n.index] += g[0];
        break;
      }
    }
  }

  const Params* params_;
  std::vector<Node> nodes_;
};

}  // namespace diffg::nn
