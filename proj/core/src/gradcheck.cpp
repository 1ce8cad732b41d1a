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
#include "msadet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace msadet {

double gradient_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

GradCheckReport check_gradients(const LossFn& loss, std::span<Tensor> inputs, double h) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  std::vector<std::vector<double>> analytic;
  {
    GradGraph graph;
    GradGraph::Scope scope(graph);
    Tensor l = loss(inputs);
    graph.backward(l);
  }
  for (auto& t : inputs) {
    analytic.emplace_back(t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                                       : std::vector<double>(t.numel(), 0.0));
  }

  GradCheckReport report;
  NoGradScope no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].data();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + h;
      const double up = loss(inputs).item();
      values[j] = saved - h;
      const double down = loss(inputs).item();
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      report.max_rel_error = std::max(report.max_rel_error, gradient_relative_error(analytic[i][j], numeric));
      ++report.n_checked;
    }
  }
  return report;
}

}  // namespace msadet
