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

#include "dpiadmm/model.hpp"

#include <cmath>

namespace dpiadmm {

namespace {

constexpr double kLogFloor = 1e-300;

void check_dims(const Matrix& w, const AgentShard& shard) {
  if (w.rows() != shard.features().cols()) {
    throw UsageError("model: parameter rows != feature length");
  }
  if (w.cols() != shard.labels().cols()) {
    throw UsageError("model: parameter cols != label length");
  }
}

}  // namespace

AgentShard::AgentShard(int agent_id, Matrix features, Matrix labels)
    : agent_id_(agent_id), features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.rows() < 1) throw UsageError("AgentShard: shard must hold >= 1 sample");
  if (features_.rows() != labels_.rows()) {
    throw UsageError("AgentShard: feature/label row count mismatch");
  }
  if (!features_.allFinite()) throw UsageError("AgentShard: non-finite feature entry");
  for (Eigen::Index i = 0; i < labels_.rows(); ++i) {
    int ones = 0;
    for (Eigen::Index k = 0; k < labels_.cols(); ++k) {
      const double v = labels_(i, k);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        throw UsageError("AgentShard: label entries must be 0 or 1");
      }
    }
    if (ones != 1) throw UsageError("AgentShard: label rows must be one-hot");
  }
}

AgentShard AgentShard::FromSamples(int agent_id, const std::vector<Sample>& samples) {
  if (samples.empty()) throw UsageError("AgentShard: empty sample list");
  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Matrix x(n, samples[0].features.size());
  Matrix y(n, samples[0].label.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (samples[i].features.size() != x.cols() || samples[i].label.size() != y.cols()) {
      throw UsageError("AgentShard: inconsistent sample dimensions");
    }
    x.row(i) = samples[i].features.transpose();
    y.row(i) = samples[i].label.transpose();
  }
  return AgentShard(agent_id, std::move(x), std::move(y));
}

Matrix softmax_rows(const Matrix& logits) {
  // Probabilities are kept strictly inside (0,1): exp underflow would
  // otherwise produce exact 0 (and exact 1 for the max entry) once logits
  // spread past ~700. The 1e-300 floor shifts the row sum by far less than
  // the 1e-12 contract.
  const double ceiling = std::nextafter(1.0, 0.0);
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    probs.row(i) = (logits.row(i).array() - m).exp();
    probs.row(i) /= probs.row(i).sum();
    for (Eigen::Index k = 0; k < probs.cols(); ++k) {
      probs(i, k) = std::min(std::max(probs(i, k), kLogFloor), ceiling);
    }
  }
  return probs;
}

Vector softmax_probs(const Matrix& w, const Vector& x) {
  if (w.rows() != x.size()) throw UsageError("softmax_probs: dimension mismatch");
  Matrix logits = (x.transpose() * w);
  return softmax_rows(logits).row(0).transpose();
}

double local_objective(const Matrix& w, const AgentShard& shard,
                       const ModelConfig& cfg) {
  check_dims(w, shard);
  const Matrix logits = shard.features() * w;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = std::log((logits.row(i).array() - m).exp().sum()) + m;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      if (shard.labels()(i, k) == 1.0) {
        // ln h_k = logit_k - logsumexp, floored at ln(1e-300).
        double log_h = logits(i, k) - lse;
        log_h = std::max(log_h, std::log(kLogFloor));
        loss -= log_h;
      }
    }
  }
  loss /= static_cast<double>(cfg.total_samples);
  const double reg = (cfg.beta / cfg.num_agents) * w.squaredNorm();
  return loss + reg;
}

Matrix local_gradient(const Matrix& w, const AgentShard& shard,
                      const ModelConfig& cfg) {
  check_dims(w, shard);
  const Matrix probs = softmax_rows(shard.features() * w);
  Matrix grad = shard.features().transpose() * (probs - shard.labels());
  grad /= static_cast<double>(cfg.total_samples);
  grad += (2.0 * cfg.beta / cfg.num_agents) * w;
  return grad;
}

namespace {

// Per-sample L1 norm of the gradient contribution, accumulated j-outer,
// k-inner. Exact zeros in x are skipped; that never changes the sum.
double sample_l1_contribution(const Matrix& features, const Matrix& residual,
                              Eigen::Index i, double inv_total) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double xj = features(i, j);
    if (xj == 0.0) continue;
    for (Eigen::Index k = 0; k < residual.cols(); ++k) {
      s += std::abs(inv_total * (xj * residual(i, k)));
    }
  }
  return s;
}

}  // namespace

double sensitivity(const Matrix& z, const AgentShard& shard, const ModelConfig& cfg) {
  check_dims(z, shard);
  const Matrix probs = softmax_rows(shard.features() * z);
  const Matrix residual = probs - shard.labels();
  const double inv_total = 1.0 / static_cast<double>(cfg.total_samples);
  double delta = 0.0;
  for (Eigen::Index i = 0; i < shard.size(); ++i) {
    delta = std::max(delta, sample_l1_contribution(shard.features(), residual, i, inv_total));
  }
  return delta;
}

GradAndSensitivity gradient_and_sensitivity(const Matrix& z, const AgentShard& shard,
                                            const ModelConfig& cfg) {
  check_dims(z, shard);
  const Matrix probs = softmax_rows(shard.features() * z);
  const Matrix residual = probs - shard.labels();
  const double inv_total = 1.0 / static_cast<double>(cfg.total_samples);

  // Same arithmetic as local_gradient so the two paths agree bitwise.
  Matrix grad = shard.features().transpose() * residual;
  grad /= static_cast<double>(cfg.total_samples);
  grad += (2.0 * cfg.beta / cfg.num_agents) * z;

  double delta = 0.0;
  for (Eigen::Index i = 0; i < shard.size(); ++i) {
    delta = std::max(delta, sample_l1_contribution(shard.features(), residual, i, inv_total));
  }
  return GradAndSensitivity{std::move(grad), delta};
}

}  // namespace dpiadmm
