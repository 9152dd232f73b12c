// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "diffg/rng.hpp"
#include "diffg/world.hpp"

namespace diffg::testing {

inline std::filesystem::path data_dir() { return DIFFG_DATA_DIR; }

inline const world::Catalog& catalog() {
  static const world::Catalog c = world::Catalog::load_dir(data_dir());
  return c;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("diffg-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace diffg::testing
