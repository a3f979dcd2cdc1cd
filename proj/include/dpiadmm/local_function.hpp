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

#include "dpiadmm/model.hpp"
#include "dpiadmm/types.hpp"

namespace dpiadmm {

/// One agent's local objective f_p: value, a subgradient, and the L1
/// sensitivity of the subgradient under single-entry dataset changes.
/// Implementations must be pure functions of their inputs.
class LocalFunction {
 public:
  virtual ~LocalFunction() = default;

  virtual double value(const Matrix& z) const = 0;
  virtual Matrix subgradient(const Matrix& z) const = 0;
  virtual double sensitivity(const Matrix& z) const = 0;

  /// Combined evaluation; override when the two share intermediate work.
  virtual GradAndSensitivity gradient_and_sensitivity(const Matrix& z) const {
    return GradAndSensitivity{subgradient(z), sensitivity(z)};
  }
};

/// Multiclass logistic regression local objective over one agent shard.
class LogisticLocal : public LocalFunction {
 public:
  LogisticLocal(AgentShard shard, ModelConfig cfg)
      : shard_(std::move(shard)), cfg_(cfg) {
    cfg_.Validate();
  }

  double value(const Matrix& z) const override { return local_objective(z, shard_, cfg_); }
  Matrix subgradient(const Matrix& z) const override { return local_gradient(z, shard_, cfg_); }
  double sensitivity(const Matrix& z) const override {
    return dpiadmm::sensitivity(z, shard_, cfg_);
  }
  GradAndSensitivity gradient_and_sensitivity(const Matrix& z) const override {
    return dpiadmm::gradient_and_sensitivity(z, shard_, cfg_);
  }

  const AgentShard& shard() const { return shard_; }

 private:
  AgentShard shard_;
  ModelConfig cfg_;
};

}  // namespace dpiadmm
