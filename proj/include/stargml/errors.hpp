// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The stargml Authors

#pragma once

#include <stdexcept>
#include <string>

namespace stargml {

/// Inconsistent dimensions or invalid configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input that cannot be projected onto the feasible set (e.g. an all-zero
/// precoder or a zero amplitude pair). Callers are expected to re-initialize.
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stargml

namespace stargml {

/// A sub-operation failed inside the training loop; what() carries the
/// epoch/outer/inner position followed by the original message.
class GmlRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stargml
