// Copyright 2026 The oidc2 Authors
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

#include <span>

namespace oidc2 {

/// Student's t cumulative distribution function with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

struct MeanInterval {
  double mean = 0;
  double lo = 0;
  double hi = 0;
};

/// Sample mean with the two-sided 95% Student-t interval
/// mean +- t(0.975, n-1) * s / sqrt(n), s using the n-1 divisor.
/// Throws Error(insufficient_samples) for n < 2.
MeanInterval mean_ci95(std::span<const double> samples);

}  // namespace oidc2
