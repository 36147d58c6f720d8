// Copyright 2026 The driftplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIFTPLAN_ERRORS_HPP_
#define DRIFTPLAN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace driftplan {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A query fell outside the domain of a centerline, grid or image.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Array dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Rank deficiency, non-PSD covariance and similar linear-algebra failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Curvature requested at a step where the speed is (numerically) zero.
class SingularCurvatureError : public Error {
 public:
  SingularCurvatureError(std::size_t step, const std::string& what)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// The inner solver produced a non-finite iterate.
class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// Every candidate of a planning call failed.
class PlanningFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `location()` names the line and/or field.
class ParseError : public Error {
 public:
  ParseError(std::string location, const std::string& what)
      : Error(location.empty() ? what : location + ": " + what),
        location_(std::move(location)) {}
  const std::string& location() const noexcept { return location_; }

 private:
  std::string location_;
};

}  // namespace driftplan

#endif  // DRIFTPLAN_ERRORS_HPP_
