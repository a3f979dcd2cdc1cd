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

#include "dpiadmm/analysis.hpp"

#include "dpiadmm/local_function.hpp"
#include "dpiadmm/mechanisms.hpp"
#include "dpiadmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace dpiadmm {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

BoundConstants estimate_bound_constants(const FederatedDataset& fed, double beta,
                                        const BoxConstraint& box, int trials,
                                        std::uint64_t seed) {
  box.Validate();
  if (!box.finite()) {
    throw UsageError("estimate_bound_constants: U2 undefined for an infinite box");
  }
  if (trials < 1) throw UsageError("estimate_bound_constants: trials must be >= 1");
  if (fed.shards.empty()) throw UsageError("estimate_bound_constants: empty federation");

  const Eigen::Index J = fed.J;
  const Eigen::Index K = fed.K;
  ModelConfig mc;
  mc.beta = beta;
  mc.total_samples = fed.total_train();
  mc.num_agents = fed.num_agents();

  BoundConstants c;
  c.U2 = 2.0 * box.bound * std::sqrt(static_cast<double>(J * K));
  c.M = 2 * J * K;
  c.sampled_lower_bound = true;

  RngStream rng(seed, RngStream::StreamId{0, 0, 2});
  const double inv_total = 1.0 / static_cast<double>(mc.total_samples);

  for (int trial = 0; trial <= trials; ++trial) {
    Matrix u = Matrix::Zero(J, K);  // trial 0 probes the origin
    if (trial > 0) {
      for (Eigen::Index j = 0; j < J; ++j) {
        for (Eigen::Index k = 0; k < K; ++k) {
          u(j, k) = (2.0 * rng.uniform_open() - 1.0) * box.bound;
        }
      }
    }
    for (const auto& shard : fed.shards) {
      c.U1 = std::max(c.U1, local_gradient(u, shard, mc).norm());

      // Exhaustive single-sample replacements within small shards. The
      // regularizer cancels, so the difference is between two per-sample
      // gradient contributions.
      if (shard.size() > 50) continue;
      const Matrix residual = softmax_rows(shard.features() * u) - shard.labels();
      for (Eigen::Index i = 0; i < shard.size(); ++i) {
        for (Eigen::Index r = i + 1; r < shard.size(); ++r) {
          double l1 = 0.0;
          for (Eigen::Index j = 0; j < J; ++j) {
            for (Eigen::Index k = 0; k < K; ++k) {
              l1 += std::abs(inv_total * (shard.features()(i, j) * residual(i, k) -
                                          shard.features()(r, j) * residual(r, k)));
            }
          }
          c.U3 = std::max(c.U3, l1);
        }
      }
    }
  }
  c.H = c.U1;
  c.U3_cross_check = 2.0 * c.H * std::sqrt(static_cast<double>(J * K));
  return c;
}

double theorem_rhs(EtaMode regime, const BoundConstants& c, int T, int E,
                   double eps_bar, int P, Eigen::Index J, Eigen::Index K) {
  if (T < 1 || E < 1 || P < 1) throw UsageError("theorem_rhs: T, E, P must be >= 1");
  if (!(eps_bar > 0.0)) throw UsageError("theorem_rhs: eps_bar must be > 0 or inf");
  const double inv_eps = std::isinf(eps_bar) ? 0.0 : 1.0 / eps_bar;
  const double JK = static_cast<double>(J * K);
  const double sqrtT = std::sqrt(static_cast<double>(T));
  const double dual_sq = (c.gamma + c.lambda1_norm) * (c.gamma + c.lambda1_norm);

  switch (regime) {
    case EtaMode::Smooth: {
      const double rs = (2.0 * P * JK * c.U3 * c.U3 + c.U2 * c.U2 / (2.0 * E)) *
                        inv_eps / sqrtT;
      return rs + (c.U2 * c.U2 * (c.rho_max + c.L / E) + dual_sq / c.rho1) /
                      (2.0 * T);
    }
    case EtaMode::Nonsmooth: {
      const double rns = (2.0 * P * JK * c.U3 * c.U3 * inv_eps * inv_eps +
                          P * c.U1 * c.U1 + c.U2 * c.U2 / (2.0 * E)) /
                         sqrtT;
      return rns + (c.U2 * c.U2 * c.rho_max + dual_sq / c.rho1 +
                    2.0 * c.gamma * c.U2) /
                       (2.0 * T);
    }
    case EtaMode::Strong: {
      if (c.alpha <= 0.0) throw UsageError("theorem_rhs: alpha must be > 0");
      return (2.0 * c.U2 * c.gamma + c.U2 * c.U2 * c.rho_max +
              4.0 * c.gamma * c.gamma / c.rho1 +
              c.alpha * c.U2 * c.U2 / (2.0 * E) +
              2.0 * P * (c.U1 * c.U1 + 2.0 * JK * c.U3 * c.U3 * inv_eps * inv_eps) /
                  c.alpha) /
             (T + 1.0);
    }
  }
  throw UsageError("theorem_rhs: unknown regime");
}

double theorem_rhs_smooth_exact_sum(const BoundConstants& c, int T, int E,
                                    double eps_bar, int P, Eigen::Index J,
                                    Eigen::Index K) {
  if (T < 1 || E < 1 || P < 1) {
    throw UsageError("theorem_rhs_smooth_exact_sum: T, E, P must be >= 1");
  }
  const double inv_eps = std::isinf(eps_bar) ? 0.0 : 1.0 / eps_bar;
  const double JK = static_cast<double>(J * K);
  const double dual_sq = (c.gamma + c.lambda1_norm) * (c.gamma + c.lambda1_norm);

  double rhs = (c.U2 * c.U2 * c.rho_max + dual_sq / c.rho1) / (2.0 * T);
  // U2^2 / (2 T E eta^T) with eta^T = 1/(L + sqrt(T)/eps).
  rhs += c.U2 * c.U2 * (c.L + std::sqrt(static_cast<double>(T)) * inv_eps) /
         (2.0 * T * E);
  if (inv_eps > 0.0) {
    // (1/(TE)) sum_t E/(2(1/eta^t - L)) * P * 2JK U3^2 / eps^2, with
    // 1/eta^t - L = sqrt(t)/eps, evaluated exactly instead of bounded.
    double s = 0.0;
    for (int t = 1; t <= T; ++t) s += 1.0 / std::sqrt(static_cast<double>(t));
    rhs += s / T * P * JK * c.U3 * c.U3 * inv_eps;
  }
  return rhs;
}

AveragedIterates::AveragedIterates(EtaMode regime, int T, int E, int P,
                                   Eigen::Index J, Eigen::Index K)
    : regime_(regime), T_(T), E_(E) {
  if (T < 1 || E < 1 || P < 1) throw UsageError("AveragedIterates: T, E, P must be >= 1");
  w_avg_ = Matrix::Zero(J, K);
  z_avg_.assign(P, Matrix::Zero(J, K));
}

double AveragedIterates::round_weight(int t) const {
  if (t < 1 || t > T_) throw UsageError("AveragedIterates: round out of range");
  if (regime_ == EtaMode::Strong) {
    return 2.0 * t / (static_cast<double>(T_) * (T_ + 1.0));
  }
  return 1.0 / T_;
}

void AveragedIterates::observe_inner(int t, int e, int p, const Matrix& z_pre,
                                     const Matrix& z_post) {
  const double weight = round_weight(t) / E_;
  const Matrix& z = (regime_ == EtaMode::Smooth) ? z_post : z_pre;
  z_avg_[static_cast<std::size_t>(p)] += weight * z;
  if (p == 0) weight_sum_ += weight;
  (void)e;
}

void AveragedIterates::observe_round(int t, const FederationState& state) {
  w_avg_ += round_weight(t) * state.w;
}

ToyLocal::ToyLocal(Matrix mean, double offset, double mu, double sensitivity_const)
    : mean_(std::move(mean)), offset_(offset), mu_(mu),
      sensitivity_const_(sensitivity_const) {
  if (mu < 0.0 || sensitivity_const < 0.0) {
    throw UsageError("ToyLocal: mu and sensitivity must be >= 0");
  }
}

double ToyLocal::value(const Matrix& z) const {
  return 0.5 * (z - mean_).squaredNorm() + offset_ +
         mu_ * z.cwiseAbs().sum();
}

Matrix ToyLocal::subgradient(const Matrix& z) const {
  Matrix g = z - mean_;
  if (mu_ > 0.0) {
    g += mu_ * z.unaryExpr([](double v) {
      return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    });
  }
  return g;
}

double ToyProblem::objective(const std::vector<Matrix>& z) const {
  if (z.size() != agents.size()) throw UsageError("ToyProblem: agent count mismatch");
  double total = 0.0;
  for (std::size_t p = 0; p < agents.size(); ++p) total += agents[p]->value(z[p]);
  return total;
}

ToyProblem make_toy_problem(EtaMode regime, int P, Eigen::Index J, Eigen::Index K,
                            double box_bound, std::uint64_t seed) {
  if (P < 1 || J < 1 || K < 1) throw UsageError("make_toy_problem: P, J, K must be >= 1");
  if (!(box_bound > 0.0) || !std::isfinite(box_bound)) {
    throw UsageError("make_toy_problem: box bound must be finite and > 0");
  }

  ToyProblem problem;
  problem.regime = regime;
  problem.P = P;
  problem.J = J;
  problem.K = K;
  problem.box.bound = box_bound;
  problem.L = 1.0;
  problem.alpha = 1.0;

  // Data values bounded by a = 1/2 across I = 20 virtual samples gives the
  // exact sensitivity constant 2 a JK / I per agent.
  const double data_bound = 0.5;
  const Eigen::Index virtual_samples = 20;
  const double sens = 2.0 * data_bound * static_cast<double>(J * K) /
                      static_cast<double>(virtual_samples);
  problem.U3 = sens;

  RngStream rng(seed, RngStream::StreamId{0, 0, 3});
  Matrix mean_sum = Matrix::Zero(J, K);
  double mu_total = 0.0;
  std::vector<Matrix> means;
  std::vector<double> mus;
  for (int p = 0; p < P; ++p) {
    Matrix m(J, K);
    for (Eigen::Index j = 0; j < J; ++j) {
      for (Eigen::Index k = 0; k < K; ++k) {
        m(j, k) = (2.0 * rng.uniform_open() - 1.0) * data_bound;
      }
    }
    const double mu = (regime == EtaMode::Nonsmooth)
                          ? 0.05 + 0.05 * rng.uniform_open()
                          : 0.0;
    mean_sum += m;
    mu_total += mu;
    means.push_back(std::move(m));
    mus.push_back(mu);
  }

  // F(z) = sum_p (1/2)||z - m_p||^2 + (sum_p mu_p)||z||_1 has the
  // coordinatewise soft-thresholded mean as its unique minimizer.
  const Matrix mean_bar = mean_sum / static_cast<double>(P);
  const double threshold = mu_total / static_cast<double>(P);
  problem.z_star = mean_bar.unaryExpr([threshold](double v) {
    if (v > threshold) return v - threshold;
    if (v < -threshold) return v + threshold;
    return 0.0;
  });
  if (problem.z_star.cwiseAbs().maxCoeff() >= box_bound) {
    throw UsageError("make_toy_problem: optimum not interior; enlarge the box");
  }

  problem.f_star = 0.0;
  for (int p = 0; p < P; ++p) {
    const double u1_quad = std::sqrt(
        (means[p].cwiseAbs().array() + box_bound).square().sum());
    problem.U1 = std::max(
        problem.U1,
        u1_quad + mus[static_cast<std::size_t>(p)] *
                      std::sqrt(static_cast<double>(J * K)));
    auto agent = std::make_shared<ToyLocal>(means[p], 0.0,
                                            mus[static_cast<std::size_t>(p)], sens);
    problem.f_star += agent->value(problem.z_star);
    problem.agents.push_back(std::move(agent));
  }
  return problem;
}

GapCheckResult expectation_gap_check(const ToyProblem& problem, int runs, int T,
                                     int E, double eps_bar, std::uint64_t seed) {
  if (runs < 1 || T < 1 || E < 1) {
    throw UsageError("expectation_gap_check: runs, T, E must be >= 1");
  }
  if (problem.agents.empty() || problem.z_star.size() == 0) {
    throw UsageError("expectation_gap_check: problem has no analytic optimum");
  }

  RunConfig rc;
  rc.schedules.c1 = 2.0;
  rc.schedules.c2 = 5.0;
  rc.schedules.Tc = T + 1;  // constant rho over the horizon
  rc.schedules.eta_mode = problem.regime;
  rc.schedules.L = problem.L;
  rc.schedules.alpha = problem.alpha;
  rc.schedules.eps_bar = eps_bar;
  rc.schedules.local_updates = E;
  rc.schedules.horizon = T;
  rc.box = problem.box;
  rc.mode = std::isinf(eps_bar) ? Mechanism::NonPrivate : Mechanism::ObjP;

  GapCheckResult result;
  result.rho1 = rc.schedules.rho(1);
  result.rho_max = rc.schedules.rho(T);

  std::vector<double> f_gaps, residuals;
  for (int r = 0; r < runs; ++r) {
    AveragedIterates avg(problem.regime, T, E, problem.P, problem.J, problem.K);
    double max_dual = 0.0;
    rc.seed = seed + static_cast<std::uint64_t>(r);
    run_training(
        problem.agents, problem.J, problem.K, rc,
        [&](int t, const FederationState& state, double) {
          avg.observe_round(t, state);
          double sq = 0.0;
          for (const auto& a : state.agents) sq += a.lambda.squaredNorm();
          max_dual = std::max(max_dual, std::sqrt(sq));
        },
        [&](int t, int e, int p, const Matrix& z_pre, const Matrix& z_post) {
          avg.observe_inner(t, e, p, z_pre, z_post);
        });
    result.max_dual_norm = std::max(result.max_dual_norm, max_dual);
    f_gaps.push_back(problem.objective(avg.z_avg()) - problem.f_star);
    double res_sq = 0.0;
    for (const auto& z : avg.z_avg()) res_sq += (avg.w_avg() - z).squaredNorm();
    residuals.push_back(std::sqrt(res_sq));
  }

  result.gamma = std::max(2.0 * result.max_dual_norm, 1e-8);
  result.dual_bound_ok = result.max_dual_norm <= result.gamma;

  double lhs = 0.0;
  for (int r = 0; r < runs; ++r) {
    lhs += f_gaps[static_cast<std::size_t>(r)] +
           result.gamma * residuals[static_cast<std::size_t>(r)];
  }
  result.lhs = lhs / runs;

  BoundConstants c;
  c.U1 = problem.U1;
  c.U2 = 2.0 * problem.box.bound *
         std::sqrt(static_cast<double>(problem.J * problem.K));
  c.U3 = problem.U3;
  c.gamma = result.gamma;
  c.L = problem.L;
  c.alpha = problem.alpha;
  c.rho_max = result.rho_max;
  c.rho1 = result.rho1;
  c.lambda1_norm = 0.0;  // duals start at zero
  result.rhs = theorem_rhs(problem.regime, c, T, E, eps_bar, problem.P,
                           problem.J, problem.K);
  result.pass = result.lhs <= result.rhs;
  return result;
}

std::string bound_report_to_csv(const std::vector<BoundCheckRecord>& rows) {
  std::ostringstream out;
  out << "regime,T,E,eps_bar,lhs,rhs,pass\n";
  for (const auto& r : rows) {
    out << r.regime << ',' << r.T << ',' << r.E << ',' << fmt(r.eps_bar) << ','
        << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << (r.pass ? "true" : "false")
        << '\n';
  }
  return out.str();
}

Matrix penalized_subproblem_solve(const SubproblemParams& params,
                                  const BoxConstraint& box, double ell,
                                  double grad_tol, int max_iter) {
  if (!(ell > 0.0)) throw UsageError("penalized_subproblem_solve: ell must be > 0");
  if (!box.finite()) {
    throw UsageError("penalized_subproblem_solve: box must be finite");
  }
  if (params.rho <= 0.0 || params.eta <= 0.0) {
    throw UsageError("penalized_subproblem_solve: rho and eta must be > 0");
  }
  const Eigen::Index J = params.z_prev.rows();
  const Eigen::Index K = params.z_prev.cols();
  if (params.grad.rows() != J || params.grad.cols() != K ||
      params.w.rows() != J || params.w.cols() != K ||
      params.lambda.rows() != J || params.lambda.cols() != K ||
      params.xi.rows() != J || params.xi.cols() != K) {
    throw UsageError("penalized_subproblem_solve: shape mismatch");
  }

  const double B = box.bound;
  const double inv_eta = 1.0 / params.eta;
  const double curvature = inv_eta + params.rho;
  const double tol = grad_tol / std::sqrt(static_cast<double>(J * K));

  Matrix z(J, K);
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double a = params.z_prev(j, k);
      const double linear = params.grad(j, k) - params.lambda(j, k) +
                            params.xi(j, k) - params.rho * params.w(j, k) -
                            a * inv_eta;
      auto deriv = [&](double v) {
        return linear + curvature * v + ell * sigmoid(ell * (v - B)) -
               ell * sigmoid(ell * (-v - B));
      };
      auto deriv2 = [&](double v) {
        const double s1 = sigmoid(ell * (v - B));
        const double s2 = sigmoid(ell * (-v - B));
        return curvature + ell * ell * (s1 * (1.0 - s1) + s2 * (1.0 - s2));
      };

      const double unconstrained = -linear / curvature;
      double lo = std::min(unconstrained, -B) - 1.0;
      double hi = std::max(unconstrained, B) + 1.0;
      while (deriv(lo) > 0.0) lo -= (hi - lo);
      while (deriv(hi) < 0.0) hi += (hi - lo);

      double v = std::min(std::max(unconstrained, lo), hi);
      bool converged = false;
      double d = 0.0;
      for (int it = 0; it < max_iter; ++it) {
        d = deriv(v);
        if (std::abs(d) <= tol) {
          converged = true;
          break;
        }
        if (d > 0.0) hi = v; else lo = v;
        double next = v - d / deriv2(v);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        v = next;
      }
      if (!converged) {
        std::ostringstream msg;
        msg << "penalized_subproblem_solve: no convergence at (" << j << "," << k
            << "), residual " << d;
        throw UsageError(msg.str());
      }
      z(j, k) = v;
    }
  }
  return z;
}

NoiseRecovery noise_recovery(const Matrix& z_solution, const Matrix& z_prev,
                             const Matrix& grad, const Matrix& w,
                             const Matrix& lambda, double rho, double eta,
                             const BoxConstraint& box) {
  if (rho <= 0.0 || eta <= 0.0) {
    throw UsageError("noise_recovery: rho and eta must be > 0");
  }
  NoiseRecovery rec;
  rec.xi = -grad + rho * (w - z_solution) + lambda - (z_solution - z_prev) / eta;
  rec.interior.resize(z_solution.rows(), z_solution.cols());
  for (Eigen::Index j = 0; j < z_solution.rows(); ++j) {
    for (Eigen::Index k = 0; k < z_solution.cols(); ++k) {
      const bool clamped = box.finite() && std::abs(z_solution(j, k)) >= box.bound;
      rec.interior(j, k) = !clamped;
      if (clamped) {
        rec.xi(j, k) = 0.0;
        ++rec.clamped;
      }
    }
  }
  if (rec.clamped > 0) {
    std::cerr << "noise_recovery: excluded " << rec.clamped
              << " clamped coordinate(s); normal-cone term unknown there\n";
  }
  return rec;
}

}  // namespace dpiadmm
