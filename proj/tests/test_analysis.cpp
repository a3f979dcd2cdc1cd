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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dpiadmm/analysis.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace dpiadmm;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng, double span) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = span * (2.0 * rng.uniform_open() - 1.0);
  return m;
}

FederatedDataset tiny_federation(bool zero_features) {
  RngStream rng(3, RngStream::StreamId{0, 0, 7});
  FederatedDataset fed;
  fed.J = 2;
  fed.K = 2;
  fed.provenance = "iid";
  for (int p = 0; p < 3; ++p) {
    Matrix x = zero_features ? Matrix::Zero(6, 2) : random_matrix(6, 2, rng, 1.0);
    Matrix y = Matrix::Zero(6, 2);
    for (int i = 0; i < 6; ++i) y(i, i % 2) = 1.0;
    fed.shards.emplace_back(p, std::move(x), std::move(y));
  }
  fed.test_set.features = Matrix::Zero(2, 2);
  fed.test_set.labels = IntVector::Zero(2);
  fed.test_set.num_classes = 2;
  return fed;
}

BoundConstants reference_constants() {
  BoundConstants c;
  c.U1 = 1.5;
  c.U2 = 4.0;
  c.U3 = 0.25;
  c.gamma = 3.0;
  c.L = 2.0;
  c.alpha = 1.0;
  c.rho_max = 10.0;
  c.rho1 = 7.0;
  c.lambda1_norm = 0.0;
  return c;
}

}  // namespace

TEST_CASE("box diameter constant is exact") {
  const auto fed = tiny_federation(false);
  const auto c = estimate_bound_constants(fed, 1e-3, BoxConstraint{1.0}, 50, 1);
  CHECK(c.U2 == doctest::Approx(2.0 * std::sqrt(4.0)).epsilon(1e-15));
  CHECK(c.M == 2 * 2 * 2);
  CHECK(c.sampled_lower_bound);
  CHECK(c.H == c.U1);
  CHECK(c.U3 <= c.U3_cross_check);
  CHECK(c.U3_cross_check == doctest::Approx(2.0 * c.H * 2.0).epsilon(1e-15));
}

TEST_CASE("zero features leave only the regularizer in the constants") {
  const auto fed = tiny_federation(true);
  const auto c0 = estimate_bound_constants(fed, 0.0, BoxConstraint{1.0}, 50, 1);
  CHECK(c0.U1 == 0.0);
  CHECK(c0.U3 == 0.0);
  const double beta = 0.3;
  const auto cb = estimate_bound_constants(fed, beta, BoxConstraint{1.0}, 200, 1);
  CHECK(cb.U1 > 0.0);
  // ||2 beta / P z|| over the box is at most 2 beta B sqrt(JK) / P.
  CHECK(cb.U1 <= 2.0 * beta * 2.0 / 3.0 + 1e-12);
  CHECK(cb.U3 == 0.0);
}

TEST_CASE("bound constants reject an infinite box") {
  const auto fed = tiny_federation(false);
  CHECK_THROWS_AS(estimate_bound_constants(fed, 0.0, BoxConstraint{}, 10, 1),
                  UsageError);
}

TEST_CASE("guarantee values match independent arithmetic per regime") {
  const auto c = reference_constants();
  const int T = 100, E = 4, P = 5;
  const Eigen::Index J = 3, K = 2;
  const double eps = 0.5;
  const double JK = double(J * K);

  const double smooth =
      (2.0 * P * JK * c.U3 * c.U3 + c.U2 * c.U2 / (2.0 * E)) / (eps * std::sqrt(double(T))) +
      (c.U2 * c.U2 * (c.rho_max + c.L / E) +
       std::pow(c.gamma + c.lambda1_norm, 2) / c.rho1) / (2.0 * T);
  CHECK(theorem_rhs(EtaMode::Smooth, c, T, E, eps, P, J, K) ==
        doctest::Approx(smooth).epsilon(1e-14));

  const double nonsmooth =
      (2.0 * P * JK * c.U3 * c.U3 / (eps * eps) + P * c.U1 * c.U1 +
       c.U2 * c.U2 / (2.0 * E)) / std::sqrt(double(T)) +
      (c.U2 * c.U2 * c.rho_max + std::pow(c.gamma + c.lambda1_norm, 2) / c.rho1 +
       2.0 * c.gamma * c.U2) / (2.0 * T);
  CHECK(theorem_rhs(EtaMode::Nonsmooth, c, T, E, eps, P, J, K) ==
        doctest::Approx(nonsmooth).epsilon(1e-14));

  const double strong =
      (2.0 * c.U2 * c.gamma + c.U2 * c.U2 * c.rho_max + 4.0 * c.gamma * c.gamma / c.rho1 +
       c.alpha * c.U2 * c.U2 / (2.0 * E) +
       2.0 * P * (c.U1 * c.U1 + 2.0 * JK * c.U3 * c.U3 / (eps * eps)) / c.alpha) /
      (T + 1.0);
  CHECK(theorem_rhs(EtaMode::Strong, c, T, E, eps, P, J, K) ==
        doctest::Approx(strong).epsilon(1e-14));
}

TEST_CASE("infinite privacy budget zeroes every sensitivity term") {
  auto c = reference_constants();
  auto c0 = c;
  c0.U3 = 0.0;
  for (EtaMode m : {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    const double with_inf = theorem_rhs(m, c, 100, 2, kInf, 4, 3, 2);
    const double with_zero_u3 = theorem_rhs(m, c0, 100, 2, 1e18, 4, 3, 2);
    CHECK(with_inf == doctest::Approx(with_zero_u3).epsilon(1e-9));
  }
}

TEST_CASE("guarantee shrinks as T, E, or the budget grows") {
  const auto c = reference_constants();
  for (EtaMode m : {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    double prev = kInf;
    for (int T : {10, 100, 1000, 10000}) {
      const double r = theorem_rhs(m, c, T, 2, 1.0, 4, 3, 2);
      CHECK(r < prev);
      prev = r;
    }
    prev = kInf;
    for (int E : {1, 2, 4, 8}) {
      const double r = theorem_rhs(m, c, 100, E, 1.0, 4, 3, 2);
      CHECK(r < prev);
      prev = r;
    }
    prev = kInf;
    for (double eps : {0.1, 0.5, 1.0, 10.0}) {
      const double r = theorem_rhs(m, c, 100, 2, eps, 4, 3, 2);
      CHECK(r < prev);
      prev = r;
    }
  }
}

TEST_CASE("exact per-round sum never exceeds the printed smooth bound") {
  const auto c = reference_constants();
  for (int T : {1, 10, 100, 5000}) {
    for (double eps : {0.25, 1.0, 4.0}) {
      const double exact = theorem_rhs_smooth_exact_sum(c, T, 2, eps, 4, 3, 2);
      const double printed = theorem_rhs(EtaMode::Smooth, c, T, 2, eps, 4, 3, 2);
      CHECK(exact <= printed * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("averaged iterates apply the regime weights and sum to one") {
  const int T = 12, E = 3, P = 3;
  const auto toy = make_toy_problem(EtaMode::Strong, P, 2, 2, 5.0, 31);
  for (EtaMode regime : {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    AveragedIterates avg(regime, T, E, P, 2, 2);
    if (regime == EtaMode::Strong) {
      for (int t = 1; t <= T; ++t) {
        CHECK(avg.round_weight(t) == 2.0 * t / (double(T) * (T + 1)));
      }
    } else {
      CHECK(avg.round_weight(5) == doctest::Approx(1.0 / T).epsilon(1e-15));
    }
    RunConfig cfg;
    cfg.schedules.eta_mode = regime;
    cfg.schedules.L = 1.0;
    cfg.schedules.alpha = 1.0;
    cfg.schedules.local_updates = E;
    cfg.schedules.horizon = T;
    cfg.box = toy.box;
    std::vector<Matrix> ws;
    run_training(toy.agents, 2, 2, cfg,
                 [&](int t, const FederationState& s, double) {
                   avg.observe_round(t, s);
                   ws.push_back(s.w);
                 },
                 [&](int t, int e, int p, const Matrix& pre, const Matrix& post) {
                   avg.observe_inner(t, e, p, pre, post);
                 });
    CHECK(avg.weight_sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(int(avg.z_avg().size()) == P);

    // The global average under smooth/nonsmooth weights is the plain mean.
    if (regime != EtaMode::Strong) {
      Matrix mean = Matrix::Zero(2, 2);
      for (const auto& w : ws) mean += w;
      mean /= double(T);
      CHECK((avg.w_avg() - mean).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("toy problems expose their analytic optimum") {
  for (EtaMode regime : {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    const auto toy = make_toy_problem(regime, 4, 2, 3, 5.0, 41);
    CHECK(toy.z_star.cwiseAbs().maxCoeff() < toy.box.bound);
    const std::vector<Matrix> at_star(4, toy.z_star);
    CHECK(toy.objective(at_star) == doctest::Approx(toy.f_star).epsilon(1e-12));
    // First-order optimality: random feasible perturbations never improve F.
    RngStream rng(43, RngStream::StreamId{0, 0, 0});
    for (int trial = 0; trial < 50; ++trial) {
      Matrix d = random_matrix(2, 3, rng, 0.5);
      const std::vector<Matrix> moved(4, toy.z_star + d);
      CHECK(toy.objective(moved) >= toy.f_star - 1e-12);
    }
  }
}

TEST_CASE("expectation gap stays below the regime bound on toys") {
  for (EtaMode regime : {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    const auto toy = make_toy_problem(regime, 3, 2, 2, 5.0, 7);
    for (double eps : {1.0, kInf}) {
      const auto r = expectation_gap_check(toy, 10, 200, 2, eps, 100);
      CHECK(r.pass);
      CHECK(r.dual_bound_ok);
      CHECK(r.lhs <= r.rhs);
      CHECK(r.max_dual_norm <= r.gamma);
    }
  }
}

TEST_CASE("bound report serializes with the fixed column order") {
  std::vector<BoundCheckRecord> rows;
  rows.push_back(BoundCheckRecord{"smooth", 100, 2, 1.0, 0.5, 2.0, true});
  rows.push_back(BoundCheckRecord{"strong", 50, 1, kInf, 0.25, 1.0, false});
  const std::string csv = bound_report_to_csv(rows);
  CHECK(csv.find("regime,T,E,eps_bar,lhs,rhs,pass") == 0);
  CHECK(csv.find("smooth,100,2,1,0.5,2,true") != std::string::npos);
  CHECK(csv.find("strong,50,1,inf,0.25,1,false") != std::string::npos);
}

TEST_CASE("stiff penalty reproduces the closed-form step") {
  RngStream rng(51, RngStream::StreamId{0, 0, 0});
  // The worst-case distance over the ensemble shrinks along the ladder;
  // per-instance distances may tick up between the two softest penalties
  // when the unconstrained optimum sits near the boundary.
  double ensemble_max[5] = {0, 0, 0, 0, 0};
  for (int trial = 0; trial < 100; ++trial) {
    SubproblemParams p;
    p.z_prev = random_matrix(2, 2, rng, 1.0);
    p.grad = random_matrix(2, 2, rng, 2.0);
    p.w = random_matrix(2, 2, rng, 2.0);
    p.lambda = random_matrix(2, 2, rng, 1.0);
    p.xi = random_matrix(2, 2, rng, 1.0);
    p.rho = 0.5 + 3.0 * rng.uniform_open();
    p.eta = 0.1 + rng.uniform_open();
    const BoxConstraint box{3.0};
    const Matrix closed = local_subproblem_step(p.z_prev, p.grad, p.w, p.lambda,
                                                p.xi, p.rho, p.eta, box);
    const Matrix pen = penalized_subproblem_solve(p, box, 1e4);
    CHECK((pen - closed).cwiseAbs().maxCoeff() <= 1e-3);

    const double ladder[5] = {1.0, 10.0, 100.0, 1000.0, 10000.0};
    for (int s = 0; s < 5; ++s) {
      const double d = (penalized_subproblem_solve(p, box, ladder[s]) - closed)
                           .cwiseAbs().maxCoeff();
      ensemble_max[s] = std::max(ensemble_max[s], d);
    }
  }
  for (int s = 1; s < 5; ++s) CHECK(ensemble_max[s] <= ensemble_max[s - 1] + 1e-9);
}

TEST_CASE("soft penalty pulls boundary solutions inward") {
  SubproblemParams p;
  p.z_prev = Matrix::Constant(1, 1, 2.0);
  p.grad = Matrix::Constant(1, 1, -10.0);  // pushes past the upper bound
  p.w = Matrix::Zero(1, 1);
  p.lambda = Matrix::Zero(1, 1);
  p.xi = Matrix::Zero(1, 1);
  const BoxConstraint box{1.0};
  const Matrix closed = local_subproblem_step(p.z_prev, p.grad, p.w, p.lambda,
                                              p.xi, p.rho, p.eta, box);
  CHECK(closed(0, 0) == 1.0);
  const Matrix soft = penalized_subproblem_solve(p, box, 1.0);
  const Matrix stiff = penalized_subproblem_solve(p, box, 1e4);
  CHECK(stiff(0, 0) <= closed(0, 0) + 1e-3);
  CHECK(std::abs(stiff(0, 0) - closed(0, 0)) <
        std::abs(soft(0, 0) - closed(0, 0)));
}

TEST_CASE("noise recovery inverts the perturbed step on the interior") {
  RngStream rng(61, RngStream::StreamId{0, 0, 0});
  int interior_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double rho = 0.5 + 3.0 * rng.uniform_open();
    const double eta = 0.1 + rng.uniform_open();
    const Matrix z_prev = random_matrix(2, 2, rng, 1.0);
    const Matrix grad = random_matrix(2, 2, rng, 1.0);
    const Matrix w = random_matrix(2, 2, rng, 1.0);
    const Matrix lambda = random_matrix(2, 2, rng, 1.0);
    const Matrix xi = random_matrix(2, 2, rng, 1.0);
    const BoxConstraint box{20.0};
    const Matrix z = local_subproblem_step(z_prev, grad, w, lambda, xi, rho, eta, box);
    const auto rec = noise_recovery(z, z_prev, grad, w, lambda, rho, eta, box);
    CHECK(rec.clamped == 0);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        REQUIRE(rec.interior(i, j));
        CHECK(std::abs(rec.xi(i, j) - xi(i, j)) <= 1e-8);
        ++interior_checked;
      }
    }
  }
  CHECK(interior_checked == 4000);
}

TEST_CASE("zero noise recovers as numerically zero") {
  RngStream rng(63, RngStream::StreamId{0, 0, 0});
  const Matrix z_prev = random_matrix(3, 2, rng, 1.0);
  const Matrix grad = random_matrix(3, 2, rng, 1.0);
  const Matrix w = random_matrix(3, 2, rng, 1.0);
  const Matrix lambda = random_matrix(3, 2, rng, 1.0);
  const BoxConstraint box{50.0};
  const Matrix z = local_subproblem_step(z_prev, grad, w, lambda,
                                         Matrix::Zero(3, 2), 2.0, 0.5, box);
  const auto rec = noise_recovery(z, z_prev, grad, w, lambda, 2.0, 0.5, box);
  CHECK(rec.xi.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("clamped coordinates are excluded from recovery") {
  SubproblemParams p;
  const Matrix z_prev = Matrix::Constant(1, 2, 0.5);
  Matrix grad(1, 2);
  grad << -100.0, 0.0;  // first coordinate slams into the upper bound
  const Matrix zeros = Matrix::Zero(1, 2);
  const BoxConstraint box{1.0};
  const Matrix z = local_subproblem_step(z_prev, grad, zeros, zeros, zeros,
                                         1.0, 1.0, box);
  REQUIRE(z(0, 0) == 1.0);
  const auto rec = noise_recovery(z, z_prev, grad, zeros, zeros, 1.0, 1.0, box);
  CHECK(rec.clamped == 1);
  CHECK_FALSE(rec.interior(0, 0));
  CHECK(rec.interior(0, 1));
  CHECK(rec.xi(0, 0) == 0.0);
}
