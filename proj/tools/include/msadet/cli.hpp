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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace msadet {

/// Entry point of the `msadet` tool. Returns 0 on success, 1 on a runtime
/// failure and 2 on a usage error (unknown flag, bad value).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Kernel timings as CSV: "op,n_points,repeats,mean_seconds,min_seconds".
/// `op` is fps, knn, wid, attention or all.
std::string bench_csv(std::string_view op, std::span<const std::size_t> sizes, std::uint64_t seed);

}  // namespace msadet
