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

#include "dpiadmm/synthetic.hpp"

#include "dpiadmm/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

namespace dpiadmm {

namespace {

double quantize_byte(double v) {
  v = std::min(std::max(v, 0.0), 1.0);
  return std::round(v * 255.0) / 255.0;
}

Matrix make_prototypes(const SyntheticSpec& spec, RngStream& rng) {
  Matrix protos = Matrix::Zero(spec.num_classes, spec.dim);
  for (int k = 0; k < spec.num_classes; ++k) {
    for (Eigen::Index j = 0; j < spec.dim; ++j) {
      if (rng.uniform_open() < spec.density) {
        protos(k, j) = 0.35 + 0.65 * rng.uniform_open();
      }
    }
  }
  return protos;
}

void fill_samples(const SyntheticSpec& spec, const Matrix& protos, RngStream& rng,
                  Matrix& x, IntVector& y,
                  const std::vector<int>* allowed_classes = nullptr) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int cls;
    if (allowed_classes) {
      cls = (*allowed_classes)[static_cast<std::size_t>(
          rng.next_word() % allowed_classes->size())];
    } else {
      cls = static_cast<int>(rng.next_word() % spec.num_classes);
    }
    for (Eigen::Index j = 0; j < spec.dim; ++j) {
      x(i, j) = quantize_byte(protos(cls, j) + spec.pixel_sigma * rng.standard_normal());
    }
    if (spec.label_flip > 0.0 && rng.uniform_open() < spec.label_flip) {
      cls = static_cast<int>(rng.next_word() % spec.num_classes);
    }
    y(i) = cls;
  }
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.num_train < 1 || spec.num_test < 1) {
    throw UsageError("make_synthetic: need at least one train and test sample");
  }
  RngStream rng(spec.seed, RngStream::StreamId{0, 0, 0});
  const Matrix protos = make_prototypes(spec, rng);

  SyntheticData data;
  data.train.num_classes = spec.num_classes;
  data.train.features.resize(spec.num_train, spec.dim);
  data.train.labels.resize(spec.num_train);
  fill_samples(spec, protos, rng, data.train.features, data.train.labels);

  data.test.num_classes = spec.num_classes;
  data.test.features.resize(spec.num_test, spec.dim);
  data.test.labels.resize(spec.num_test);
  fill_samples(spec, protos, rng, data.test.features, data.test.labels);
  return data;
}

std::map<std::string, RawDataset> make_synthetic_writers(const SyntheticSpec& spec,
                                                         int num_writers,
                                                         int classes_per_writer) {
  if (num_writers < 1) throw UsageError("make_synthetic_writers: need >= 1 writer");
  classes_per_writer = std::min(classes_per_writer, spec.num_classes);
  RngStream rng(spec.seed, RngStream::StreamId{0, 0, 1});
  const Matrix protos = make_prototypes(spec, rng);

  std::map<std::string, RawDataset> writers;
  const Eigen::Index per_writer = std::max<Eigen::Index>(1, spec.num_train / num_writers);
  for (int wtr = 0; wtr < num_writers; ++wtr) {
    std::vector<int> allowed(classes_per_writer);
    for (int c = 0; c < classes_per_writer; ++c) {
      allowed[c] = static_cast<int>((wtr + c) % spec.num_classes);
    }
    RawDataset data;
    data.num_classes = spec.num_classes;
    data.features.resize(per_writer, spec.dim);
    data.labels.resize(per_writer);
    fill_samples(spec, protos, rng, data.features, data.labels, &allowed);
    char name[16];
    std::snprintf(name, sizeof(name), "w%04d", wtr);
    writers.emplace(name, std::move(data));
  }
  return writers;
}

}  // namespace dpiadmm
