// Copyright 2026 The statret Authors.
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
#include <functional>
#include <string>
#include <vector>

#include "statret/tensor.hpp"

namespace statret {

// Evaluates the loss at the current parameter values. When `with_grad` is
// set it must also accumulate d(loss)/d(param) into each tensor's grad
// buffer (which the caller has zeroed).
using LossFn = std::function<double(ModelParams& params, bool with_grad)>;

struct GradCheckOptions {
  double eps = 1e-5;
  double tol = 1e-4;
  // 0 checks every trainable scalar; otherwise a seeded sample of at most
  // this many scalars per tensor.
  std::size_t max_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  bool passed = true;
  std::size_t checked = 0;
  std::vector<GradCheckEntry> worst_per_param;
  std::vector<GradCheckEntry> failures;  // first few offenders

  std::string summary() const;
};

// Central differences against the analytic gradient. Relative error is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport check_gradients(const LossFn& loss_fn, ModelParams& params,
                                const GradCheckOptions& options = {});

}  // namespace statret
