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

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dpiadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

/// Thrown on misuse of an in-process API (dimension mismatch, empty input).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed external input (files, configs).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One labeled example: feature vector of length J, one-hot label of length K.
struct Sample {
  Vector features;
  Vector label;
};

/// One agent's training data, stored row-major per sample: X is I_p x J,
/// Y is the one-hot I_p x K label matrix.
class AgentShard {
 public:
  AgentShard(int agent_id, Matrix features, Matrix labels);

  int agent_id() const { return agent_id_; }
  Eigen::Index size() const { return features_.rows(); }
  const Matrix& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  Sample sample(Eigen::Index i) const {
    return Sample{features_.row(i).transpose(), labels_.row(i).transpose()};
  }

  static AgentShard FromSamples(int agent_id, const std::vector<Sample>& samples);

 private:
  int agent_id_;
  Matrix features_;  // I_p x J
  Matrix labels_;    // I_p x K, one-hot rows
};

/// Problem-level constants shared by all agents.
struct ModelConfig {
  double beta = 0.0;        // regularization weight, >= 0
  Eigen::Index total_samples = 0;  // I, summed over all agents
  int num_agents = 1;       // P

  void Validate() const {
    if (beta < 0.0) throw UsageError("ModelConfig: beta must be >= 0");
    if (total_samples < 1) throw UsageError("ModelConfig: total_samples must be >= 1");
    if (num_agents < 1) throw UsageError("ModelConfig: num_agents must be >= 1");
  }
};

}  // namespace dpiadmm
