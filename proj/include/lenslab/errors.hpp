// SPDX-FileCopyrightText: (c) 2026 the lenslab authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lenslab {

// Error taxonomy mirrored by the CLI exit codes: config 2, data 3, numeric 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected inputs: dimension mismatches, malformed files, invalid ranges.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failures: non-finite activations, non-convergence.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_data(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace lenslab
