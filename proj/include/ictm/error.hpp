// Copyright Contributors to the ictm project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace ictm {

// Raised when a run breaks a numerical guarantee of the method, e.g. the
// total energy grows between two iterations. This indicates a defect in the
// implementation, never bad user input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite intermediate values (NaN/Inf) produced inside an update.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ictm
