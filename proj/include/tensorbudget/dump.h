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

#ifndef TENSORBUDGET_DUMP_H_
#define TENSORBUDGET_DUMP_H_

#include <string>

#include "tensorbudget/ir.h"

namespace tb {

// Textual form, one instruction per line:
//
//   computation main (root=%9) {
//     %0 = parameter([1000],f64) [index=0]
//     %3 = broadcast([1000,1000],f64) %0 [dims={0}]
//     %9 = dot([1000],f64) %8, %2 [lhs_contracting={1},rhs_contracting={0}]
//   }
//
// While sub-graphs are printed as separate blocks before their user.
// Instructions appear in topological order; output is stable across runs.
std::string Dump(const Graph& graph);

}  // namespace tb

#endif  // TENSORBUDGET_DUMP_H_
