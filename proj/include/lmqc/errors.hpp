// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lmqc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A physical or numerical parameter is outside its validity range.
class ParameterError : public Error {
public:
  explicit ParameterError(const std::string& msg) : Error(msg) {}
};

/// File or stream failure.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Scenario name not recognized by the runner.
class UnknownScenarioError : public Error {
public:
  explicit UnknownScenarioError(const std::string& msg) : Error(msg) {}
};

/// Integration or linear-algebra failure (non-convergence, singularity).
class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

} // namespace lmqc
