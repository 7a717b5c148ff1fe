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

#include "memaudit/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace memaudit {
namespace {

constexpr double kBetaRelativeTolerance = 1e-12;
constexpr double kLentzFloor = 1e-300;
constexpr int kMaxContinuedFractionTerms = 200000;

// Below this lambda the theta-function form of the Kolmogorov CDF converges
// in a handful of terms; above it the alternating survival series does.
constexpr double kKolmogorovSeriesSwitch = 1.18;

// Continued fraction for I_x(a, b) (modified Lentz). Converges quickly for
// x < (a + 1) / (a + b + 2).
double BetaContinuedFraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kLentzFloor) d = kLentzFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxContinuedFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kLentzFloor) d = kLentzFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kLentzFloor) c = kLentzFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kLentzFloor) d = kLentzFloor;
    c = 1.0 + aa / c;
    if (std::abs(c) < kLentzFloor) c = kLentzFloor;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kBetaRelativeTolerance) break;
  }
  return h;
}

// I_x(a, b) with y = 1 - x supplied separately so callers can pass an
// accurately computed complement.
double IncompleteBeta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, y) / b;
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return std::clamp(IncompleteBeta(a, b, x, 1.0 - x), 0.0, 1.0);
}

double StudentTTwoSidedPValue(double t, double df) {
  if (std::isnan(t)) return std::nan("");
  const double t2 = t * t;
  if (std::isinf(t2)) return 0.0;
  const double denom = df + t2;
  // P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  return std::clamp(IncompleteBeta(0.5 * df, 0.5, df / denom, t2 / denom),
                    0.0, 1.0);
}

double StudentTCdf(double t, double df) {
  const double tail = 0.5 * StudentTTwoSidedPValue(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

double KolmogorovSurvival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < kKolmogorovSeriesSwitch) {
    // P(K <= lambda) = sqrt(2 pi) / lambda * sum exp(-(2k-1)^2 pi^2 / (8
    // lambda^2)).
    const double w = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * w);
      sum += term;
      if (term <= 1e-17 * sum || term == 0.0) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term <= 1e-17 * std::abs(sum) || term == 0.0) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double KsTwoSampleStatistic(std::span<const double> a,
                            std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  size_t i = 0;
  size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx -
                             static_cast<double>(j) / ny));
  }
  return d;
}

double KsTwoSamplePValue(double d, size_t n1, size_t n2) {
  if (!(d > 0.0)) return 1.0;
  const double n_eff = static_cast<double>(n1) * static_cast<double>(n2) /
                       static_cast<double>(n1 + n2);
  const double root = std::sqrt(n_eff);
  return KolmogorovSurvival((root + 0.12 + 0.11 / root) * d);
}

}  // namespace memaudit
