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

#include "dpiadmm/optimizer.hpp"

#include <cmath>
#include <sstream>
#include <thread>

namespace dpiadmm {

double rho_schedule(int t, double eps_bar, double c1, double c2, int Tc, double cap) {
  if (t < 1) throw UsageError("rho_schedule: t must be >= 1");
  if (Tc < 1) throw UsageError("rho_schedule: Tc must be >= 1");
  const double privacy_term = std::isinf(eps_bar) ? 0.0 : c2 / eps_bar;
  const double growth = c1 * std::pow(1.2, static_cast<double>(t / Tc));
  return std::min(cap, growth + privacy_term);
}

double eta_schedule(int t, EtaMode mode, double eps_bar, double L, double alpha) {
  if (t < 1) throw UsageError("eta_schedule: t must be >= 1");
  switch (mode) {
    case EtaMode::Smooth: {
      const double priv = std::isinf(eps_bar) ? 0.0 : std::sqrt(static_cast<double>(t)) / eps_bar;
      const double denom = L + priv;
      if (denom <= 0.0) throw UsageError("eta_schedule: smooth mode needs L > 0 when eps_bar = inf");
      return 1.0 / denom;
    }
    case EtaMode::Nonsmooth:
      return 1.0 / std::sqrt(static_cast<double>(t));
    case EtaMode::Strong:
      if (alpha <= 0.0) throw UsageError("eta_schedule: alpha must be > 0");
      return 2.0 / (alpha * (t + 2));
  }
  throw UsageError("eta_schedule: unknown mode");
}

Matrix server_global_update(const std::vector<Matrix>& z,
                            const std::vector<Matrix>& lambda, double rho) {
  if (z.empty() || z.size() != lambda.size()) {
    throw UsageError("server_global_update: agent list mismatch");
  }
  if (rho <= 0.0) throw UsageError("server_global_update: rho must be > 0");
  Matrix w = Matrix::Zero(z[0].rows(), z[0].cols());
  for (std::size_t p = 0; p < z.size(); ++p) {
    w += z[p] - lambda[p] / rho;
  }
  w /= static_cast<double>(z.size());
  return w;
}

Matrix local_subproblem_step(const Matrix& z_prev, const Matrix& grad,
                             const Matrix& w, const Matrix& lambda,
                             const Matrix& xi, double rho, double eta,
                             const BoxConstraint& box) {
  if (rho <= 0.0 || eta <= 0.0) {
    throw UsageError("local_subproblem_step: rho and eta must be > 0");
  }
  const double inv_eta = 1.0 / eta;
  Matrix z = (z_prev * inv_eta + rho * w + lambda - xi - grad) / (inv_eta + rho);
  box.project(z);
  return z;
}

LocalRoundResult local_round(const AgentState& state, const Matrix& w_next,
                             const LocalFunction& f, int t,
                             const Schedules& sched, const BoxConstraint& box,
                             Mechanism mode, const GaussianSpec& out_noise,
                             std::uint64_t seed, int agent_index,
                             const InnerObserver& observer) {
  const int E = sched.local_updates;
  const double rho = sched.rho(t);
  const double eta = sched.eta(t);
  const Eigen::Index J = state.z.rows();
  const Eigen::Index K = state.z.cols();

  LocalRoundResult result;
  result.z_next = Matrix::Zero(J, K);

  Matrix z_inner = state.inner;  // the inner chain continues where it left off
  const Matrix zero_noise = Matrix::Zero(J, K);

  for (int e = 1; e <= E; ++e) {
    const GradAndSensitivity gs = f.gradient_and_sensitivity(z_inner);
    Matrix xi = zero_noise;
    if (mode == Mechanism::ObjP && !std::isinf(sched.eps_bar)) {
      RngStream rng(seed, RngStream::StreamId{static_cast<std::uint64_t>(agent_index),
                                              static_cast<std::uint64_t>(t),
                                              static_cast<std::uint64_t>(e)});
      LaplaceSpec spec{gs.delta / sched.eps_bar, J, K};
      xi = sample_laplace_matrix(spec, rng);
      result.noise_abs_sum += xi.cwiseAbs().sum();
      result.noise_entries += J * K;
    }
    Matrix z_new = local_subproblem_step(z_inner, gs.grad, w_next, state.lambda,
                                         xi, rho, eta, box);
    if (!z_new.allFinite()) {
      std::ostringstream msg;
      msg << "run_training: non-finite iterate at t=" << t << " e=" << e
          << " p=" << agent_index;
      throw std::runtime_error(msg.str());
    }
    if (observer) observer(t, e, agent_index, z_inner, z_new);
    result.z_next += z_new;
    z_inner = std::move(z_new);
  }
  result.z_next /= static_cast<double>(E);  // the transmitted iterate is the mean
  result.inner_next = z_inner;

  if (mode == Mechanism::OutP) {
    RngStream rng(seed, RngStream::StreamId{static_cast<std::uint64_t>(agent_index),
                                            static_cast<std::uint64_t>(t), 1});
    GaussianSpec spec = out_noise;
    spec.rows = J;
    spec.cols = K;
    const Matrix noise = sample_gaussian_output_noise(spec, t, rng);
    result.z_next += noise;
    result.inner_next = result.z_next;  // the perturbed output is what the chain keeps
    result.noise_abs_sum += noise.cwiseAbs().sum();
    result.noise_entries += J * K;
  }

  // Agent-side dual update.
  result.lambda_next = state.lambda + rho * (w_next - result.z_next);
  return result;
}

FederationState run_training(
    const std::vector<std::shared_ptr<const LocalFunction>>& agents,
    Eigen::Index J, Eigen::Index K, const RunConfig& config,
    const RoundObserver& on_round, const InnerObserver& on_inner) {
  config.Validate();
  const int P = static_cast<int>(agents.size());
  if (P < 1) throw UsageError("run_training: need at least one agent");

  FederationState state;
  state.w = Matrix::Zero(J, K);
  state.agents.resize(P);
  for (auto& a : state.agents) {
    a.z = Matrix::Zero(J, K);
    a.lambda = Matrix::Zero(J, K);
    a.inner = Matrix::Zero(J, K);
  }

  std::vector<Matrix> z_list(P), lambda_list(P);
  std::vector<LocalRoundResult> results(P);

  for (int t = 1; t <= config.schedules.horizon; ++t) {
    const double rho = config.schedules.rho(t);
    for (int p = 0; p < P; ++p) {
      z_list[p] = state.agents[p].z;
      lambda_list[p] = state.agents[p].lambda;
    }
    const Matrix w_next = server_global_update(z_list, lambda_list, rho);
    if (!w_next.allFinite()) {
      std::ostringstream msg;
      msg << "run_training: non-finite global parameter at t=" << t;
      throw std::runtime_error(msg.str());
    }

    auto run_agent = [&](int p) {
      results[p] = local_round(state.agents[p], w_next, *agents[p], t,
                               config.schedules, config.box, config.mode,
                               config.out_noise, config.seed, p, on_inner);
    };
    if (config.threads <= 1 || P == 1) {
      for (int p = 0; p < P; ++p) run_agent(p);
    } else {
      const int workers = std::min(config.threads, P);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int wkr = 0; wkr < workers; ++wkr) {
        pool.emplace_back([&, wkr] {
          for (int p = wkr; p < P; p += workers) run_agent(p);
        });
      }
      for (auto& th : pool) th.join();
    }

    double noise_abs_sum = 0.0;
    std::int64_t noise_entries = 0;
    for (int p = 0; p < P; ++p) {
      // Server-side dual update; must reproduce the agent's value bitwise.
      Matrix lambda_server = state.agents[p].lambda + rho * (w_next - results[p].z_next);
      if ((lambda_server.array() != results[p].lambda_next.array()).any()) {
        std::ostringstream msg;
        msg << "run_training: dual update mismatch at t=" << t << " p=" << p;
        throw std::runtime_error(msg.str());
      }
      state.agents[p].z = results[p].z_next;
      state.agents[p].lambda = std::move(lambda_server);
      state.agents[p].inner = results[p].inner_next;
      noise_abs_sum += results[p].noise_abs_sum;
      noise_entries += results[p].noise_entries;
    }
    state.w = w_next;
    state.t = t;

    const double avg_noise = noise_entries > 0
                                 ? noise_abs_sum / static_cast<double>(noise_entries)
                                 : 0.0;
    if (on_round) on_round(t, state, avg_noise);
  }
  return state;
}

}  // namespace dpiadmm
