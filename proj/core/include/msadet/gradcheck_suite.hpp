// Copyright 2026 The msadet Authors
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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msadet/gradcheck.hpp"

namespace msadet {

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

/// Central-difference checks of every differentiable op, the attention
/// blocks and a miniature end-to-end detector (d=8, N=16, Qn=4) on random
/// inputs drawn from `seed`. Inputs keep clear of relu / |x| kinks and
/// max-pool ties so the finite differences are well defined.
std::vector<GradCheckCase> run_gradcheck_suite(std::uint64_t seed, double h = 1e-6);

}  // namespace msadet
