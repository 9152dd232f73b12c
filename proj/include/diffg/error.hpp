// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace diffg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration: impossible level/pool combinations, invalid knobs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input files.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf during training, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace diffg
