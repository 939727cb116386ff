// Copyright 2026 The TensorBudget Authors.
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

#ifndef TENSORBUDGET_STATUS_H_
#define TENSORBUDGET_STATUS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tb {

enum class ErrorCode {
  kShapeMismatch,
  kAttributeOutOfRange,
  kOverflow,
  kCycleDetected,
  kInvalidArgument,
  kBudgetExceeded,
  kUnsplittableCandidate,
  kPipelineInvariantViolation,
  kUnimplemented,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the interpreter when an allocation would push live bytes over the
// configured budget. Mirrors a device out-of-memory halt.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(int64_t instruction, int64_t requested, int64_t live,
                 int64_t budget);

  int64_t instruction() const { return instruction_; }
  int64_t requested() const { return requested_; }
  int64_t live() const { return live_; }
  int64_t budget() const { return budget_; }

 private:
  int64_t instruction_;
  int64_t requested_;
  int64_t live_;
  int64_t budget_;
};

}  // namespace tb

#endif  // TENSORBUDGET_STATUS_H_
