// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint: "DGRL", u32 version, u32 hidden size, activation tag,
// u32 tensor count, then per tensor its name, u32 rank, u64 dims and the
// values. Integers and doubles are little-endian; strings are u32 length
// followed by bytes.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>

#include "diffg/error.hpp"
#include "diffg/neural/model.hpp"
#include "diffg/text.hpp"

namespace diffg::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline void put_string(std::string& out, std::string_view s) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string string() {
    auto n = get<std::uint32_t>();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

// "elu;phi=1;mlp=1"
inline std::string activation_tag(const ModelConfig& c) {
  return std::string(to_string(c.activation)) + ";phi=" + (c.graph_activation ? "1" : "0") +
         ";mlp=" + (c.graph_mlp ? "1" : "0");
}

}  // namespace detail

inline std::string serialize(const Model& m) {
  std::string out = "DGRL";
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.config().hidden));
  detail::put_string(out, detail::activation_tag(m.config()));
  const auto& p = m.params();
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.size()));
  for (ParamId i = 0; i < p.size(); ++i) {
    detail::put_string(out, p.name(i));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p[i].shape.size()));
    for (auto d : p[i].shape) detail::put_le<std::uint64_t>(out, d);
    for (double v : p[i].values) detail::put_le<double>(out, v);
  }
  return out;
}

// The embedding width and the ablation variant follow from the tensors.
inline Model deserialize(std::string_view data) {
  if (data.substr(0, 4) != "DGRL") throw DataError("not a checkpoint (bad magic)");
  detail::Reader r(data.substr(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  ModelConfig cfg;
  cfg.hidden = r.get<std::uint32_t>();
  const auto tag = text::split(r.string(), ';');
  cfg.activation = parse_activation(tag.at(0));
  for (std::size_t i = 1; i < tag.size(); ++i) {
    if (tag[i] == "phi=0") cfg.graph_activation = false;
    else if (tag[i] == "mlp=0") cfg.graph_mlp = false;
    else if (tag[i] != "phi=1" && tag[i] != "mlp=1") throw DataError("bad activation tag field '" + tag[i] + "'");
  }
  Params params;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < count; ++k) {
    auto name = r.string();
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
    auto id = params.add(name, shape);
    for (auto& v : params[id].values) v = r.get<double>();
  }
  if (!r.done()) throw DataError("trailing bytes after checkpoint");
  if (!params.contains("gru.fwd.W_z")) throw DataError("checkpoint lacks the phrase encoder");
  cfg.embed_dim = params[params.id("gru.fwd.W_z")].cols();
  cfg.difference_encoder = params.contains("graph.W_I");
  return Model(cfg, params);
}

inline void save(const Model& m, const std::filesystem::path& path) { text::write_file(path, serialize(m)); }

inline Model load(const std::filesystem::path& path) { return deserialize(text::read_file(path)); }

}  // namespace diffg::nn
