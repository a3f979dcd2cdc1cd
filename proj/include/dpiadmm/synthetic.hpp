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

// Deterministic synthetic image-classification data: per-class sparse
// prototypes in [0,1]^J plus pixel noise and optional label flips. Stands in
// for the real IDX datasets where those files are not available.

#pragma once

#include "dpiadmm/data.hpp"

#include <cstdint>

namespace dpiadmm {

struct SyntheticSpec {
  Eigen::Index num_train = 60000;
  Eigen::Index num_test = 10000;
  Eigen::Index dim = 784;      // J
  int num_classes = 10;        // K
  double pixel_sigma = 0.30;   // noise added to prototype pixels
  double density = 0.20;       // fraction of active prototype pixels
  double label_flip = 0.05;    // probability of a uniformly wrong label
  std::uint64_t seed = 12345;
};

/// Train/test pair drawn from the same prototypes. Features are quantized to
/// multiples of 1/255 so an IDX round trip is exact.
struct SyntheticData {
  RawDataset train;
  RawDataset test;
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

/// Writer-skewed split of a synthetic dataset: each writer draws from a
/// small subset of classes, for non-IID fixtures.
std::map<std::string, RawDataset> make_synthetic_writers(const SyntheticSpec& spec,
                                                         int num_writers,
                                                         int classes_per_writer);

}  // namespace dpiadmm
