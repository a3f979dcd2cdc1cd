//
// Copyright 2026 The dpiadmm Authors
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

#include "dpiadmm/mechanisms.hpp"

#include <cmath>
#include <vector>

namespace dpiadmm {

namespace {

// splitmix64 finalizer; spreads the (seed, agent, t, e) words into
// well-separated engine seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamId id) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ id.agent);
  h = mix64(h ^ id.iteration);
  h = mix64(h ^ id.epoch);
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(mix64(h)),
                    static_cast<std::uint32_t>(mix64(h) >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform_open() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double sample_laplace_scalar(double scale, RngStream& rng) {
  if (scale == 0.0) return 0.0;
  const double v = rng.uniform_open() - 0.5;  // in (-1/2, 1/2)
  const double sign = (v < 0.0) ? -1.0 : 1.0;
  return -scale * sign * std::log1p(-2.0 * std::abs(v));
}

Matrix sample_laplace_matrix(const LaplaceSpec& spec, RngStream& rng) {
  spec.Validate();
  Matrix xi = Matrix::Zero(spec.rows, spec.cols);
  if (spec.scale == 0.0) return xi;
  for (Eigen::Index j = 0; j < spec.rows; ++j) {
    for (Eigen::Index k = 0; k < spec.cols; ++k) {
      xi(j, k) = sample_laplace_scalar(spec.scale, rng);
    }
  }
  return xi;
}

Matrix sample_gaussian_output_noise(const GaussianSpec& spec, int t, RngStream& rng) {
  spec.Validate();
  if (t < 1) throw UsageError("sample_gaussian_output_noise: t must be >= 1");
  Matrix noise = Matrix::Zero(spec.rows, spec.cols);
  if (spec.sigma0 == 0.0) return noise;
  const double sigma = spec.sigma0 / std::pow(static_cast<double>(t), spec.decay);
  for (Eigen::Index j = 0; j < spec.rows; ++j) {
    for (Eigen::Index k = 0; k < spec.cols; ++k) {
      noise(j, k) = sigma * rng.standard_normal();
    }
  }
  return noise;
}

double gaussian_base_sigma(double delta2, double eps_bar, double delta_bar) {
  if (eps_bar <= 0.0) throw UsageError("gaussian_base_sigma: eps_bar must be > 0");
  if (!(delta_bar > 0.0 && delta_bar < 1.0)) {
    throw UsageError("gaussian_base_sigma: delta_bar must be in (0,1)");
  }
  return std::sqrt(2.0 * std::log(1.25 / delta_bar)) * delta2 / eps_bar;
}

RatioAuditResult laplace_ratio_audit(double scale, double shift,
                                     std::int64_t samples, int bins,
                                     RngStream& rng,
                                     std::int64_t min_bin_count) {
  if (scale <= 0.0) throw UsageError("laplace_ratio_audit: scale must be > 0");
  if (samples < 1 || bins < 1) throw UsageError("laplace_ratio_audit: bad sample/bin count");

  // Range wide enough to keep the tail mass negligible yet bins populated.
  const double lo = -8.0 * scale;
  const double hi = shift + 8.0 * scale;
  const double width = (hi - lo) / bins;

  std::vector<std::int64_t> count0(bins, 0), count1(bins, 0);
  for (std::int64_t n = 0; n < samples; ++n) {
    const double a = sample_laplace_scalar(scale, rng);
    const double b = shift + sample_laplace_scalar(scale, rng);
    const auto idx0 = static_cast<std::int64_t>((a - lo) / width);
    const auto idx1 = static_cast<std::int64_t>((b - lo) / width);
    if (idx0 >= 0 && idx0 < bins) ++count0[idx0];
    if (idx1 >= 0 && idx1 < bins) ++count1[idx1];
  }

  RatioAuditResult result;
  for (int i = 0; i < bins; ++i) {
    if (count0[i] < min_bin_count || count1[i] < min_bin_count) continue;
    ++result.populated_bins;
    const double ratio = std::abs(std::log(static_cast<double>(count0[i]) /
                                           static_cast<double>(count1[i])));
    result.max_log_ratio = std::max(result.max_log_ratio, ratio);
  }
  result.conclusive = result.populated_bins > 0;
  return result;
}

}  // namespace dpiadmm
