// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diffg/error.hpp"
#include "diffg/text.hpp"

namespace diffg::embed {

struct PhraseVector {
  std::vector<double> values;
  bool oov = false;  // every token was out of vocabulary
};

// Word vectors in GloVe text format: `token v1 .. vD` per line.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  static EmbeddingTable parse(std::string_view contents, std::string_view source = "embeddings") {
    EmbeddingTable t;
    auto ls = text::lines(contents);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (text::trim(ls[i]).empty()) continue;
      auto toks = text::tokens(ls[i]);
      const std::string where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
      if (toks.size() < 2) throw DataError(where + "expected token followed by values");
      std::vector<double> v;
      v.reserve(toks.size() - 1);
      for (std::size_t k = 1; k < toks.size(); ++k) {
        char* end = nullptr;
        double x = std::strtod(toks[k].c_str(), &end);
        if (end == toks[k].c_str() || *end != '\0') throw DataError(where + "bad number '" + toks[k] + "'");
        v.push_back(x);
      }
      if (t.dim_ == 0) t.dim_ = v.size();
      if (v.size() != t.dim_)
        throw DataError(where + "expected " + std::to_string(t.dim_) + " values, found " + std::to_string(v.size()));
      auto token = text::lower(toks[0]);
      if (t.vectors_.count(token)) t.warnings_.push_back(where + "duplicate token '" + token + "', last one wins");
      t.vectors_[token] = std::move(v);
    }
    return t;
  }

  static EmbeddingTable load(const std::filesystem::path& path) {
    return parse(text::read_file(path), path.string());
  }

  void insert(std::string token, std::vector<double> v) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) throw DataError("vector for '" + token + "' has wrong dimension");
    vectors_[text::lower(token)] = std::move(v);
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  const std::vector<double>* find(std::string_view token) const {
    auto it = vectors_.find(text::lower(token));
    return it == vectors_.end() ? nullptr : &it->second;
  }

  // Vector of one token; zeros when out of vocabulary.
  std::vector<double> token_vector(std::string_view token) const {
    if (auto* v = find(token)) return *v;
    return std::vector<double>(dim_, 0.0);
  }

  // Mean of the in-vocabulary token vectors, summed in sorted token order so
  // that any reordering of the phrase gives the same bits.
  PhraseVector phrase_vector(std::string_view phrase) const {
    PhraseVector out{std::vector<double>(dim_, 0.0), true};
    std::size_t n = 0;
    auto toks = text::tokens(text::lower(phrase));
    std::sort(toks.begin(), toks.end());
    for (const auto& tok : toks) {
      auto* v = find(tok);
      if (!v) continue;
      for (std::size_t i = 0; i < dim_; ++i) out.values[i] += (*v)[i];
      ++n;
    }
    if (n == 0) return out;
    for (auto& x : out.values) x /= static_cast<double>(n);
    out.oov = false;
    return out;
  }

  bool operator==(const EmbeddingTable& o) const { return dim_ == o.dim_ && vectors_ == o.vectors_; }

 private:
  std::size_t dim_ = 0;
  std::map<std::string, std::vector<double>> vectors_;
  std::vector<std::string> warnings_;
};

// a.b / (|a||b|); nullopt when either vector has zero norm.
inline std::optional<double> cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return std::nullopt;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace diffg::embed
