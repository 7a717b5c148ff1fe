//
// Copyright 2026 The memaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef MEMAUDIT_STATS_H_
#define MEMAUDIT_STATS_H_

#include <cstddef>
#include <span>

namespace memaudit {

// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in
// [0, 1], evaluated with a modified-Lentz continued fraction (relative
// tolerance 1e-12). Returns exactly 0 at x = 0 and exactly 1 at x = 1.
double RegularizedIncompleteBeta(double a, double b, double x);

// P(T <= t) for Student's t with `df` > 0 degrees of freedom.
double StudentTCdf(double t, double df);

// P(|T| >= |t|). Equals 1 exactly at t = 0.
double StudentTTwoSidedPValue(double t, double df);

// Survival function of the limiting Kolmogorov distribution,
// Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2).
// Q(lambda) = 1 for lambda <= 0.
double KolmogorovSurvival(double lambda);

// Sup-norm distance between the empirical CDFs of `a` and `b`. Both must be
// non-empty.
double KsTwoSampleStatistic(std::span<const double> a,
                            std::span<const double> b);

// Asymptotic two-sample KS p-value for statistic `d` with sample sizes n1 and
// n2, using the effective size n1*n2/(n1+n2) and Stephens' correction
// (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * d. Returns 1 when d = 0.
double KsTwoSamplePValue(double d, size_t n1, size_t n2);

}  // namespace memaudit

#endif  // MEMAUDIT_STATS_H_
