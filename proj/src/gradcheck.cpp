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

#include "statret/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace statret {

namespace {
constexpr std::size_t kMaxReportedFailures = 16;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << (passed ? "PASS" : "FAIL") << " (" << checked << " scalars)";
  for (const auto& w : worst_per_param)
    os << "\n  " << w.param << "[" << w.index << "] analytic=" << w.analytic
       << " numeric=" << w.numeric << " rel=" << w.rel_error;
  for (const auto& f : failures)
    os << "\n  offender " << f.param << "[" << f.index << "] analytic=" << f.analytic
       << " numeric=" << f.numeric << " rel=" << f.rel_error;
  return os.str();
}

GradCheckReport check_gradients(const LossFn& loss_fn, ModelParams& params,
                                const GradCheckOptions& options) {
  params.zero_grad();
  loss_fn(params, true);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : params) analytic.push_back(p.tensor.grad);

  GradCheckReport report;
  Rng rng(options.seed);
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ParamTensor& p = params[pi];
    if (!p.trainable) continue;
    std::vector<std::size_t> indices(p.tensor.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (options.max_per_tensor > 0 && indices.size() > options.max_per_tensor) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.max_per_tensor);
      std::sort(indices.begin(), indices.end());
    }
    GradCheckEntry worst{p.name, 0, 0.0, 0.0, -1.0};
    for (std::size_t idx : indices) {
      double& v = p.tensor.values[idx];
      const double saved = v;
      v = saved + options.eps;
      const double plus = loss_fn(params, false);
      v = saved - options.eps;
      const double minus = loss_fn(params, false);
      v = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double a = analytic[pi][idx];
      const double rel = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
      ++report.checked;
      GradCheckEntry e{p.name, idx, a, numeric, rel};
      if (!(rel <= options.tol)) {  // NaN fails too
        report.passed = false;
        if (report.failures.size() < kMaxReportedFailures) report.failures.push_back(e);
      }
      if (rel > worst.rel_error || std::isnan(rel)) worst = e;
    }
    if (worst.rel_error >= 0.0 || std::isnan(worst.rel_error)) report.worst_per_param.push_back(worst);
  }
  // Leave the analytic gradient in place for callers that inspect it.
  for (std::size_t pi = 0; pi < params.size(); ++pi) params[pi].tensor.grad = analytic[pi];
  return report;
}

}  // namespace statret
