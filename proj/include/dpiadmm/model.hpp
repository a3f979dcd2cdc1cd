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

// Multiclass logistic regression: softmax, cross-entropy loss with an L2
// regularizer, its gradient, and the per-round L1 sensitivity of the local
// gradient under single-entry dataset changes.

#pragma once

#include "dpiadmm/types.hpp"

namespace dpiadmm {

/// Softmax class probabilities for one feature vector under parameters w
/// (J x K). Uses max-logit subtraction; entries are strictly in (0,1) and
/// sum to 1.
Vector softmax_probs(const Matrix& w, const Vector& x);

/// Row-wise softmax of a logit matrix (N x K), max-subtracted per row.
Matrix softmax_rows(const Matrix& logits);

/// Local empirical risk of agent p:
///   -(1/I) sum_i sum_k y_ik ln h_k(w; x_i) + (beta/P) sum_jk w_jk^2.
double local_objective(const Matrix& w, const AgentShard& shard,
                       const ModelConfig& cfg);

/// Gradient of local_objective:
///   (1/I) sum_i x_ij (h_k(w; x_i) - y_ik) + (2 beta / P) w_jk.
Matrix local_gradient(const Matrix& w, const AgentShard& shard,
                      const ModelConfig& cfg);

/// Worst-case L1 change of the local gradient over single-entry dataset
/// changes, evaluated at z:
///   max_{i*} sum_j sum_k | (1/I) x_{i*j} (h_k(z; x_{i*}) - y_{i*k}) |.
double sensitivity(const Matrix& z, const AgentShard& shard,
                   const ModelConfig& cfg);

/// Gradient and sensitivity from one softmax evaluation (they share the
/// per-sample probability rows, which dominate the cost).
struct GradAndSensitivity {
  Matrix grad;
  double delta;
};
GradAndSensitivity gradient_and_sensitivity(const Matrix& z, const AgentShard& shard,
                                            const ModelConfig& cfg);

}  // namespace dpiadmm
