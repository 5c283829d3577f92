// Copyright 2026 The R2B2 Authors. All rights reserved.
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

#ifndef R2B2_ERRORS_H_
#define R2B2_ERRORS_H_

#include <stdexcept>
#include <string>

namespace r2b2 {

// Bad arguments: dimension mismatches, out-of-range parameters, invalid
// distributions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration is inconsistent (missing opponent model, unsupported level
// combination, schema violation).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Factorization breakdown that jitter escalation could not repair.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested exact computation exceeds the enumeration / memory budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant. Never expected in correct use.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace r2b2

#endif  // R2B2_ERRORS_H_
