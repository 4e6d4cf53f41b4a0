// Copyright 2026 The spkreassign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPKREASSIGN_HUNGARIAN_H_
#define SPKREASSIGN_HUNGARIAN_H_

#include <vector>

namespace spkr {

// Minimum-cost assignment on a rows x cols cost matrix (row-major). Every row
// is assigned when rows <= cols, every column otherwise. Returns, per row, the
// assigned column or -1.
std::vector<int> SolveAssignment(const std::vector<double>& cost, int rows,
                                 int cols);

}  // namespace spkr

#endif  // SPKREASSIGN_HUNGARIAN_H_
