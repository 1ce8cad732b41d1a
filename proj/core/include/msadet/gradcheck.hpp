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

#include <functional>
#include <span>

#include "msadet/tensor.hpp"

namespace msadet {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t n_checked = 0;
};

using LossFn = std::function<Tensor(std::span<const Tensor>)>;

/// |analytic - numeric| / max(1, |numeric|).
double gradient_relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of a scalar `loss` against central
/// differences with step `h` for every element of every input. Inputs are
/// perturbed in place and restored.
GradCheckReport check_gradients(const LossFn& loss, std::span<Tensor> inputs, double h = 1e-6);

}  // namespace msadet
