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

// Noise generation: per-entry Laplace objective perturbation, the Gaussian
// output-perturbation baseline, and a Monte-Carlo log-ratio audit of the
// Laplace mechanism.

#pragma once

#include "dpiadmm/types.hpp"

#include <cstdint>
#include <random>

namespace dpiadmm {

/// Deterministic substream of a seeded generator. Identical (seed, stream_id)
/// always reproduces identical draws; distinct ids give statistically
/// independent streams. Not shareable across threads.
class RngStream {
 public:
  struct StreamId {
    std::uint64_t agent = 0;
    std::uint64_t iteration = 0;
    std::uint64_t epoch = 0;
  };

  RngStream(std::uint64_t seed, StreamId id);

  /// Uniform draw strictly inside (0, 1), 53-bit resolution.
  double uniform_open();

  /// Standard normal draw (Box-Muller on uniform_open pairs).
  double standard_normal();

  std::uint64_t next_word() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

struct LaplaceSpec {
  double scale = 0.0;  // b = Delta / eps_bar; 0 means deterministic zero noise
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  void Validate() const {
    if (scale < 0.0) throw UsageError("LaplaceSpec: scale must be >= 0");
    if (rows < 1 || cols < 1) throw UsageError("LaplaceSpec: empty shape");
  }
};

struct GaussianSpec {
  double sigma0 = 0.0;     // base standard deviation
  double decay = 0.5;      // sigma^t = sigma0 / t^decay
  double delta_bar = 1e-6; // delta in (0,1)
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  void Validate() const {
    if (sigma0 < 0.0) throw UsageError("GaussianSpec: sigma0 must be >= 0");
    if (decay < 0.0) throw UsageError("GaussianSpec: decay must be >= 0");
    if (!(delta_bar > 0.0 && delta_bar < 1.0)) {
      throw UsageError("GaussianSpec: delta_bar must be in (0,1)");
    }
    if (rows < 1 || cols < 1) throw UsageError("GaussianSpec: empty shape");
  }
};

/// One scalar Laplace(0, b) draw by inverse CDF.
double sample_laplace_scalar(double scale, RngStream& rng);

/// Matrix of i.i.d. Laplace(0, spec.scale) entries. scale == 0 returns the
/// zero matrix deterministically.
Matrix sample_laplace_matrix(const LaplaceSpec& spec, RngStream& rng);

/// Matrix of i.i.d. Normal(0, (sigma0 / t^decay)^2) entries, t >= 1.
Matrix sample_gaussian_output_noise(const GaussianSpec& spec, int t, RngStream& rng);

/// The classic (eps, delta) Gaussian-mechanism base deviation:
///   sqrt(2 ln(1.25/delta_bar)) * delta2 / eps_bar.
double gaussian_base_sigma(double delta2, double eps_bar, double delta_bar);

struct RatioAuditResult {
  double max_log_ratio = 0.0;
  bool conclusive = false;     // false when no bin reached the count floor
  int populated_bins = 0;
};

/// Histograms two Laplace(.,b) populations centered at 0 and `shift` and
/// returns the max |ln(count0/count1)| over bins holding >= min_bin_count
/// samples in both populations. Used to check the mechanism's log-ratio
/// never exceeds eps * (shift / Delta) plus statistical slack.
RatioAuditResult laplace_ratio_audit(double scale, double shift,
                                     std::int64_t samples, int bins,
                                     RngStream& rng,
                                     std::int64_t min_bin_count = 1000);

}  // namespace dpiadmm
