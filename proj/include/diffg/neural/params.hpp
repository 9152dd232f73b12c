// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "diffg/error.hpp"
#include "diffg/rng.hpp"

namespace diffg::nn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), values(count(shape), 0.0) {}

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const { return values.size(); }
  std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool valid() const { return count(shape) == values.size(); }

  bool operator==(const Tensor&) const = default;
};

using ParamId = std::size_t;

// Named parameter tensors in insertion order; ids are indices.
class Params {
 public:
  ParamId add(std::string name, std::vector<std::size_t> shape) {
    for (const auto& n : names_) {
      if (n == name) throw ConfigError("duplicate parameter '" + name + "'");
    }
    names_.push_back(std::move(name));
    tensors_.emplace_back(std::move(shape));
    return tensors_.size() - 1;
  }

  ParamId id(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }

  bool contains(std::string_view name) const {
    for (const auto& n : names_) {
      if (n == name) return true;
    }
    return false;
  }

  std::size_t size() const { return tensors_.size(); }
  const std::string& name(ParamId i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  const Tensor& operator[](ParamId i) const { return tensors_[i]; }
  Tensor& operator[](ParamId i) { return tensors_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

  bool operator==(const Params&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
};

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); fan_in is the column count of
// a matrix, or the owning layer's input width for a bias.
inline void init_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : t.values) v = rng.uniform(-bound, bound);
}

// One gradient tensor per parameter, shaped like Params.
using Gradients = std::vector<std::vector<double>>;

inline Gradients zero_gradients(const Params& p) {
  Gradients g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) g[i].assign(p[i].size(), 0.0);
  return g;
}

}  // namespace diffg::nn
