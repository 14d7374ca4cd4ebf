// Copyright (c) bkrylov contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace bkr {

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file or configuration.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN or Inf encountered where finite values are required.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dense path was requested above the desk-scale dimension cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// An experiment's hypotheses could not be certified, so it refuses to run.
class PreconditionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message);
void require_dims(bool condition, const std::string& message);

}  // namespace bkr
