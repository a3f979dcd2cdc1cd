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

// The DP-IADMM federation: global averaging at the server, perturbed
// closed-form proximal steps with E local updates per agent, dual updates,
// and the rho/eta schedules.

#pragma once

#include "dpiadmm/local_function.hpp"
#include "dpiadmm/mechanisms.hpp"
#include "dpiadmm/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace dpiadmm {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Mechanism { NonPrivate, ObjP, OutP };

enum class EtaMode { Smooth, Nonsmooth, Strong };

/// Penalty parameter rho^t = min(cap, c1 * 1.2^floor(t/Tc) + c2/eps_bar).
/// Nondecreasing in t and capped.
double rho_schedule(int t, double eps_bar, double c1, double c2, int Tc,
                    double cap = 1e9);

/// Proximity weight eta^t for the three convexity regimes:
/// smooth 1/(L + sqrt(t)/eps_bar), nonsmooth 1/sqrt(t), strong 2/(alpha(t+2)).
double eta_schedule(int t, EtaMode mode, double eps_bar, double L, double alpha);

/// Per-iteration hyperparameters and the run horizon.
struct Schedules {
  double c1 = 2.0;
  double c2 = 5.0;
  int Tc = 10000;
  double rho_cap = 1e9;
  EtaMode eta_mode = EtaMode::Nonsmooth;
  double L = 0.0;       // smoothness modulus (Smooth mode)
  double alpha = 1.0;   // strong-convexity modulus (Strong mode)
  double eps_bar = kInf;  // infinity means nonprivate
  int local_updates = 1;  // E
  int horizon = 1;        // T

  double rho(int t) const { return rho_schedule(t, eps_bar, c1, c2, Tc, rho_cap); }
  double eta(int t) const { return eta_schedule(t, eta_mode, eps_bar, L, alpha); }

  void Validate() const {
    if (local_updates < 1) throw UsageError("Schedules: E must be >= 1");
    if (horizon < 0) throw UsageError("Schedules: T must be >= 0");
    if (!(eps_bar > 0.0)) throw UsageError("Schedules: eps_bar must be > 0 or inf");
    if (eta_mode == EtaMode::Smooth && L < 0.0) throw UsageError("Schedules: L must be >= 0");
    if (eta_mode == EtaMode::Strong && alpha <= 0.0) {
      throw UsageError("Schedules: alpha must be > 0");
    }
  }
};

/// Symmetric box [-B, B]^{JxK}; B = inf disables projection.
struct BoxConstraint {
  double bound = kInf;

  void Validate() const {
    if (!(bound > 0.0)) throw UsageError("BoxConstraint: bound must be > 0");
  }
  bool finite() const { return std::isfinite(bound); }
  double clamp(double v) const {
    if (!finite()) return v;
    return std::min(std::max(v, -bound), bound);
  }
  void project(Matrix& z) const {
    if (!finite()) return;
    z = z.cwiseMax(-bound).cwiseMin(bound);
  }
};

/// w^{t+1} = (1/P) sum_p (z_p - lambda_p / rho), the exact minimizer of the
/// server's quadratic. Agent order is fixed for bitwise reproducibility.
Matrix server_global_update(const std::vector<Matrix>& z,
                            const std::vector<Matrix>& lambda, double rho);

/// Closed-form minimizer of the perturbed linearized subproblem over the box:
/// unconstrained solution (z_prev/eta + rho w + lambda - xi - grad) / (1/eta + rho),
/// then entrywise clamp. With xi = 0 this is the plain inexact step.
Matrix local_subproblem_step(const Matrix& z_prev, const Matrix& grad,
                             const Matrix& w, const Matrix& lambda,
                             const Matrix& xi, double rho, double eta,
                             const BoxConstraint& box);

struct AgentState {
  Matrix z;       // z_p^t, the transmitted local parameter
  Matrix lambda;  // lambda_p^t
  Matrix inner;   // z_p^{t-1,E+1}, the carried end of the inner chain
};

struct FederationState {
  Matrix w;
  std::vector<AgentState> agents;
  int t = 0;  // completed outer rounds
};

/// Observes every inner iterate; used by the analysis module's averaged
/// iterates and by tests. (t, e, p, z_pre, z_post) with e in [1, E].
using InnerObserver =
    std::function<void(int t, int e, int p, const Matrix& z_pre, const Matrix& z_post)>;

struct LocalRoundResult {
  Matrix z_next;      // z_p^{t+1}, mean of the E inner iterates (noisy in OutP)
  Matrix inner_next;  // z_p^{t,E+1} carried into the next round
  Matrix lambda_next; // agent-side dual update
  double noise_abs_sum = 0.0;   // sum of |noise| entries over the round's draws
  std::int64_t noise_entries = 0;  // number of entries those draws covered
};

/// One agent's round: E perturbed proximal steps from the carried inner
/// iterate; the transmitted iterate averages them, then the dual updates.
LocalRoundResult local_round(const AgentState& state, const Matrix& w_next,
                             const LocalFunction& f, int t,
                             const Schedules& sched, const BoxConstraint& box,
                             Mechanism mode, const GaussianSpec& out_noise,
                             std::uint64_t seed, int agent_index,
                             const InnerObserver& observer = nullptr);

struct RunConfig {
  Schedules schedules;
  BoxConstraint box;
  Mechanism mode = Mechanism::NonPrivate;
  GaussianSpec out_noise;  // OutP only; shape filled in by run_training
  std::uint64_t seed = 0;
  int threads = 1;

  void Validate() const {
    schedules.Validate();
    box.Validate();
    if (threads < 1) throw UsageError("RunConfig: threads must be >= 1");
    if (mode == Mechanism::OutP && schedules.local_updates != 1) {
      throw UsageError("RunConfig: OutP requires E = 1");
    }
  }
};

/// Called after every completed round with the new state and the round's
/// average per-entry noise magnitude (1/(P J K) sum |xi|, E draws averaged).
using RoundObserver = std::function<void(int t, const FederationState& state,
                                         double avg_noise_magnitude)>;

/// Runs T outer rounds of the federation from the all-zero initial state.
/// Results are independent of the thread count. Aborts with a diagnostic
/// naming (t, e, p) if any iterate turns non-finite.
FederationState run_training(
    const std::vector<std::shared_ptr<const LocalFunction>>& agents,
    Eigen::Index J, Eigen::Index K, const RunConfig& config,
    const RoundObserver& on_round = nullptr,
    const InnerObserver& on_inner = nullptr);

}  // namespace dpiadmm
