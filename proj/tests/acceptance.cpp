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

// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line with the measured values; the process exits nonzero if any fail.
//
// Criteria 1-4 run on deterministic synthetic image data by default. Real
// IDX files can be substituted for criterion 1 by setting DPIADMM_FULL_SCALE=1
// and DPIADMM_MNIST_DIR to a directory holding train-images-idx3-ubyte,
// train-labels-idx1-ubyte, t10k-images-idx3-ubyte, t10k-labels-idx1-ubyte.

#include "dpiadmm/analysis.hpp"
#include "dpiadmm/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

using namespace dpiadmm;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %02d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

ExperimentConfig benchmark_config() {
  ExperimentConfig cfg;
  cfg.dataset = "synthetic";
  cfg.synthetic.num_train = 2000;
  cfg.synthetic.num_test = 1000;
  cfg.synthetic.dim = 100;
  cfg.synthetic.num_classes = 10;
  cfg.synthetic.pixel_sigma = 0.30;
  cfg.synthetic.density = 0.20;
  cfg.synthetic.label_flip = 0.05;
  cfg.P = 10;
  cfg.T = 300;
  cfg.eval_every = 100;
  cfg.threads = 8;
  return cfg;
}

struct SeedStats {
  double best_final_error = 1.0;
  double mean_final_error = 0.0;
  double mean_final_objective = 0.0;
};

SeedStats run_seeds(const ExperimentConfig& cfg, const FederatedDataset& fed,
                    int num_seeds) {
  SeedStats s;
  for (int seed = 1; seed <= num_seeds; ++seed) {
    const RunMetrics m = run_single_seed(cfg, fed, std::uint64_t(seed));
    const MetricsRow& last = m.rows.back();
    s.best_final_error = std::min(s.best_final_error, last.test_error);
    s.mean_final_error += last.test_error / num_seeds;
    s.mean_final_objective += last.global_objective / num_seeds;
  }
  return s;
}

Matrix random_box_matrix(Eigen::Index r, Eigen::Index c, RngStream& rng, double span) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = span * (2.0 * rng.uniform_open() - 1.0);
  return m;
}

// Independent per-coordinate minimizer: bisects the sign of the subproblem
// derivative over the box.
double bisect_coordinate(double lo, double hi, double g, double xi, double lam,
                         double w, double a, double rho, double eta) {
  const auto deriv = [&](double v) {
    return g + xi - lam - rho * (w - v) + (v - a) / eta;
  };
  if (deriv(lo) >= 0.0) return lo;
  if (deriv(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (deriv(mid) > 0.0) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion_1_nonprivate_accuracy() {
  const char* full = std::getenv("DPIADMM_FULL_SCALE");
  const char* mnist_dir = std::getenv("DPIADMM_MNIST_DIR");
  ExperimentConfig cfg;
  double threshold = 0.15;
  std::string scale = "ci-scale synthetic";
  if (full && std::string(full) == "1" && mnist_dir) {
    cfg.dataset = "mnist";
    const std::string dir = mnist_dir;
    cfg.train_images = dir + "/train-images-idx3-ubyte";
    cfg.train_labels = dir + "/train-labels-idx1-ubyte";
    cfg.test_images = dir + "/t10k-images-idx3-ubyte";
    cfg.test_labels = dir + "/t10k-labels-idx1-ubyte";
    cfg.T = 20000;
    cfg.eval_every = 1000;
    threshold = 0.106;
    scale = "full-scale idx";
  } else {
    cfg.dataset = "synthetic";
    cfg.synthetic.num_train = 6000;
    cfg.synthetic.num_test = 1000;
    cfg.synthetic.dim = 784;
    cfg.synthetic.num_classes = 10;
    cfg.synthetic.pixel_sigma = 0.30;
    cfg.synthetic.density = 0.20;
    cfg.synthetic.label_flip = 0.05;
    cfg.T = 2000;
    cfg.eval_every = 500;
  }
  cfg.P = 10;
  cfg.mode = RunMode::NonPrivate;
  cfg.threads = 8;
  const FederatedDataset fed = load_experiment_dataset(cfg);
  const RunMetrics m = run_single_seed(cfg, fed, 1);
  const double err = m.rows.back().test_error;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s final_error=%.4f (threshold %.4f, T=%d)",
                scale.c_str(), err, threshold, cfg.T);
  report(1, "nonprivate accuracy", err <= threshold, buf);
}

void criteria_2_3_4_private_benchmarks() {
  const ExperimentConfig base = benchmark_config();
  const FederatedDataset fed = load_experiment_dataset(base);
  const int seeds = 10;

  // Criterion 2: mechanism ordering at a tight budget.
  ExperimentConfig objpm = base;
  objpm.mode = RunMode::ObjPM;
  objpm.E = 10;
  objpm.eps_bar = 0.05;
  ExperimentConfig objp = base;
  objp.mode = RunMode::ObjP;
  objp.E = 1;
  objp.eps_bar = 0.05;
  ExperimentConfig outp = base;
  outp.mode = RunMode::OutP;
  outp.E = 1;
  outp.eps_bar = 0.05;
  const SeedStats s_objpm = run_seeds(objpm, fed, seeds);
  const SeedStats s_objp = run_seeds(objp, fed, seeds);
  const SeedStats s_outp = run_seeds(outp, fed, seeds);
  {
    const bool ordered = s_objpm.best_final_error < s_objp.best_final_error &&
                         s_objp.best_final_error < s_outp.best_final_error;
    const bool margin =
        s_outp.best_final_error - s_objpm.best_final_error >= 0.05;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "eps=0.05 best-of-%d: ObjPM=%.4f ObjP=%.4f OutP=%.4f "
                  "(need ObjPM<ObjP<OutP and OutP-ObjPM>=0.05)",
                  seeds, s_objpm.best_final_error, s_objp.best_final_error,
                  s_outp.best_final_error);
    report(2, "mechanism ordering at tight budget", ordered && margin, buf);
  }

  // Criterion 3: eps=1 tracks the nonprivate error.
  ExperimentConfig nonpriv = base;
  nonpriv.mode = RunMode::NonPrivate;
  const SeedStats s_np = run_seeds(nonpriv, fed, 3);
  ExperimentConfig objpm1 = objpm;
  objpm1.eps_bar = 1.0;
  const SeedStats s_pm1 = run_seeds(objpm1, fed, seeds);
  {
    const double gap = s_pm1.best_final_error - s_np.best_final_error;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "eps=1 best ObjPM=%.4f nonprivate=%.4f gap=%.4f (need <= 0.03)",
                  s_pm1.best_final_error, s_np.best_final_error, gap);
    report(3, "loose budget approaches nonprivate error", gap <= 0.03, buf);
  }

  // Criterion 4: extra local updates do not hurt the mean final objective.
  bool all_ok = true;
  std::string detail;
  for (const double eps : {0.1, 1.0}) {
    ExperimentConfig e1 = objp;
    e1.eps_bar = eps;
    ExperimentConfig e10 = objpm;
    e10.eps_bar = eps;
    const SeedStats f1 = run_seeds(e1, fed, seeds);
    const SeedStats f10 = run_seeds(e10, fed, seeds);
    const bool ok = f10.mean_final_objective <= f1.mean_final_objective;
    all_ok &= ok;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "eps=%g: E10=%.5f E1=%.5f%s ", eps,
                  f10.mean_final_objective, f1.mean_final_objective,
                  ok ? "" : " (violated)");
    detail += buf;
  }
  report(4, "multiple local updates lower the mean final objective", all_ok,
         detail + "(mean over 10 seeds)");
}

void criterion_5_closed_form() {
  RngStream rng(501, RngStream::StreamId{0, 0, 0});
  double max_diff = 0.0, max_resid = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double B = 0.5 + 4.0 * rng.uniform_open();
    const double rho = 0.1 + 5.0 * rng.uniform_open();
    const double eta = 0.05 + 2.0 * rng.uniform_open();
    const Matrix z_prev = random_box_matrix(3, 2, rng, B);
    const Matrix grad = random_box_matrix(3, 2, rng, 3.0);
    const Matrix w = random_box_matrix(3, 2, rng, 2.0 * B);
    const Matrix lambda = random_box_matrix(3, 2, rng, 2.0);
    const Matrix xi = random_box_matrix(3, 2, rng, 1.0);
    const Matrix z = local_subproblem_step(z_prev, grad, w, lambda, xi, rho, eta,
                                           BoxConstraint{B});
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        const double oracle =
            bisect_coordinate(-B, B, grad(i, j), xi(i, j), lambda(i, j),
                              w(i, j), z_prev(i, j), rho, eta);
        max_diff = std::max(max_diff, std::abs(z(i, j) - oracle));
        const double d = grad(i, j) + xi(i, j) - lambda(i, j) -
                         rho * (w(i, j) - z(i, j)) +
                         (z(i, j) - z_prev(i, j)) / eta;
        double resid;
        if (z(i, j) >= B) resid = std::max(0.0, d);
        else if (z(i, j) <= -B) resid = std::max(0.0, -d);
        else resid = std::abs(d);
        max_resid = std::max(max_resid, resid);
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "1000 instances: max|closed-iterative|=%.3e (<=1e-8), "
                "max stationarity residual=%.3e (<=1e-10)",
                max_diff, max_resid);
  report(5, "closed-form step matches an iterative minimizer",
         max_diff <= 1e-8 && max_resid <= 1e-10, buf);
}

void criterion_6_gradient_fd() {
  RngStream rng(601, RngStream::StreamId{0, 0, 0});
  double max_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 3 + Eigen::Index(3.0 * rng.uniform_open());
    const Eigen::Index J = 2 + Eigen::Index(2.0 * rng.uniform_open());
    const int K = 2 + int(2.0 * rng.uniform_open());
    Matrix x = random_box_matrix(n, J, rng, 1.0);
    Matrix y = Matrix::Zero(n, K);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i, Eigen::Index(double(K) * 0.999 * rng.uniform_open())) = 1.0;
    }
    const AgentShard shard(0, x, y);
    ModelConfig mc;
    mc.beta = 1e-3;
    mc.total_samples = 4 * n;
    mc.num_agents = 4;
    const Matrix w = random_box_matrix(J, K, rng, 1.0);
    const Matrix grad = local_gradient(w, shard, mc);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < J; ++j) {
      for (int k = 0; k < K; ++k) {
        Matrix wp = w, wm = w;
        wp(j, k) += h;
        wm(j, k) -= h;
        const double fd =
            (local_objective(wp, shard, mc) - local_objective(wm, shard, mc)) /
            (2.0 * h);
        const double denom = std::max(std::abs(grad(j, k)), 1e-4);
        max_rel = std::max(max_rel, std::abs(fd - grad(j, k)) / denom);
      }
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "100 instances: max relative error=%.3e (<=1e-5)", max_rel);
  report(6, "gradient matches finite differences", max_rel <= 1e-5, buf);
}

void criterion_7_sensitivity_oracle() {
  RngStream rng(701, RngStream::StreamId{0, 0, 0});
  bool all_exact = true;
  int shards_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + Eigen::Index(48.9 * rng.uniform_open());
    const Eigen::Index J = 2 + Eigen::Index(3.0 * rng.uniform_open());
    const int K = 2 + int(3.0 * rng.uniform_open());
    Matrix x = random_box_matrix(n, J, rng, 1.0);
    Matrix y = Matrix::Zero(n, K);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i, Eigen::Index(double(K) * 0.999 * rng.uniform_open())) = 1.0;
    }
    const AgentShard shard(0, x, y);
    ModelConfig mc;
    mc.beta = 1e-4;
    mc.total_samples = 2 * n;
    mc.num_agents = 2;
    const Matrix z = random_box_matrix(J, K, rng, 2.0);

    // Exhaustive enumeration over every sample, same arithmetic order.
    const Matrix probs = softmax_rows(shard.features() * z);
    const Matrix residual = probs - shard.labels();
    const double inv_total = 1.0 / double(mc.total_samples);
    double oracle = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < J; ++j) {
        const double xj = shard.features()(i, j);
        if (xj == 0.0) continue;
        for (int k = 0; k < K; ++k) s += std::abs(inv_total * (xj * residual(i, k)));
      }
      oracle = std::max(oracle, s);
    }
    all_exact &= (sensitivity(z, shard, mc) == oracle);
    ++shards_checked;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "%d shards (size <= 50): exact equality %s",
                shards_checked, all_exact ? "held" : "violated");
  report(7, "sensitivity equals exhaustive enumeration", all_exact, buf);
}

void criterion_8_laplace_mechanism() {
  // Moments at one million draws.
  RngStream rng(801, RngStream::StreamId{0, 0, 0});
  const double b = 1.5;
  const int n = 1000000;
  double sum = 0.0, abs_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_laplace_scalar(b, rng);
    sum += x;
    abs_sum += std::abs(x);
  }
  const double mean = sum / n;
  const double mean_abs = abs_sum / n;
  const bool moments_ok =
      std::abs(mean) <= 3.0 * b * std::sqrt(2.0) / std::sqrt(double(n)) &&
      std::abs(mean_abs - b) / b <= 0.01;

  // Ratio audit over the eps x shift grid at ten million draws per cell.
  bool audit_ok = true;
  double worst_excess = -1.0;
  for (const double eps : {0.5, 1.0, 2.0}) {
    for (const double frac : {0.0, 0.5, 1.0}) {
      const double scale = 1.0 / eps;  // sensitivity 1
      RngStream audit_rng(811, RngStream::StreamId{std::uint64_t(eps * 10),
                                                   std::uint64_t(frac * 10), 0});
      const auto r = laplace_ratio_audit(scale, frac, 10000000, 60, audit_rng);
      const double bound = eps * frac + 0.1;
      audit_ok &= r.conclusive && r.max_log_ratio <= bound;
      worst_excess = std::max(worst_excess, r.max_log_ratio - eps * frac);
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "moments: mean=%.4g E|x|=%.5g (b=%.1f, 1%% tol); audit 3x3 grid "
                "at 1e7 draws: worst log-ratio excess=%.4f (<=0.1)",
                mean, mean_abs, b, worst_excess);
  report(8, "Laplace moments and log-ratio audit", moments_ok && audit_ok, buf);
}

void criterion_9_noise_recovery() {
  RngStream rng(901, RngStream::StreamId{0, 0, 0});
  double max_err = 0.0;
  int instances = 0;
  while (instances < 1000) {
    const double rho = 0.5 + 3.0 * rng.uniform_open();
    const double eta = 0.1 + rng.uniform_open();
    const Matrix z_prev = random_box_matrix(2, 2, rng, 1.0);
    const Matrix grad = random_box_matrix(2, 2, rng, 1.0);
    const Matrix w = random_box_matrix(2, 2, rng, 1.0);
    const Matrix lambda = random_box_matrix(2, 2, rng, 1.0);
    const Matrix xi = random_box_matrix(2, 2, rng, 1.0);
    const BoxConstraint box{20.0};
    const Matrix z = local_subproblem_step(z_prev, grad, w, lambda, xi, rho, eta, box);
    const auto rec = noise_recovery(z, z_prev, grad, w, lambda, rho, eta, box);
    if (rec.clamped != 0) continue;  // interior instances only
    max_err = std::max(max_err, (rec.xi - xi).cwiseAbs().maxCoeff());
    ++instances;
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "1000 interior instances: max round-trip error=%.3e (<=1e-8)",
                max_err);
  report(9, "noise recovery inverts the perturbed step", max_err <= 1e-8, buf);
}

void criterion_10_penalty_ladder() {
  // Monotonicity is asserted on the worst case over the instance ensemble:
  // per-instance distances can tick up between the two softest penalties when
  // the unconstrained optimum sits near the boundary (the gap there scales
  // like ln(ell)/ell, which peaks after ell = 1), so that is tracked and
  // reported but not required.
  RngStream rng(1001, RngStream::StreamId{0, 0, 0});
  const double ladder[4] = {1.0, 10.0, 100.0, 1000.0};
  double ensemble_max[4] = {0.0, 0.0, 0.0, 0.0};
  int per_instance_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    SubproblemParams p;
    p.z_prev = random_box_matrix(2, 2, rng, 1.0);
    p.grad = random_box_matrix(2, 2, rng, 2.0);
    p.w = random_box_matrix(2, 2, rng, 2.0);
    p.lambda = random_box_matrix(2, 2, rng, 1.0);
    p.xi = random_box_matrix(2, 2, rng, 1.0);
    p.rho = 0.5 + 3.0 * rng.uniform_open();
    p.eta = 0.1 + rng.uniform_open();
    const BoxConstraint box{2.0};
    const Matrix closed = local_subproblem_step(p.z_prev, p.grad, p.w, p.lambda,
                                                p.xi, p.rho, p.eta, box);
    double prev = kInf;
    for (int s = 0; s < 4; ++s) {
      const double d = (penalized_subproblem_solve(p, box, ladder[s]) - closed)
                           .cwiseAbs().maxCoeff();
      ensemble_max[s] = std::max(ensemble_max[s], d);
      if (d > prev + 1e-9) ++per_instance_violations;
      prev = d;
    }
  }
  bool monotone = true;
  for (int s = 1; s < 4; ++s) {
    monotone &= (ensemble_max[s] <= ensemble_max[s - 1] + 1e-9);
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "100 instances, worst distance per ell in {1,10,100,1000}: "
                "%.3g %.3g %.3g %.3g (monotone %s; %d per-instance upticks "
                "at the softest step)",
                ensemble_max[0], ensemble_max[1], ensemble_max[2],
                ensemble_max[3], monotone ? "held" : "violated",
                per_instance_violations);
  report(10, "penalized solutions approach the projected step monotonically",
         monotone, buf);
}

void criterion_11_expectation_gap() {
  bool all_pass = true;
  std::string detail;
  const char* names[] = {"smooth", "nonsmooth", "strong"};
  int idx = 0;
  for (const EtaMode regime :
       {EtaMode::Smooth, EtaMode::Nonsmooth, EtaMode::Strong}) {
    const auto toy = make_toy_problem(regime, 3, 2, 2, 5.0, 7);
    for (const double eps : {1.0, kInf}) {
      const auto r = expectation_gap_check(toy, 50, 1000, 2, eps, 100);
      all_pass &= r.pass && r.dual_bound_ok;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s/eps=%s lhs=%.4g rhs=%.4g%s ",
                    names[idx], std::isinf(eps) ? "inf" : "1", r.lhs, r.rhs,
                    (r.pass && r.dual_bound_ok) ? "" : " (violated)");
      detail += buf;
    }
    ++idx;
  }
  report(11, "expectation gap stays below the regime bound", all_pass, detail);
}

void criterion_12_determinism() {
  ExperimentConfig cfg = benchmark_config();
  cfg.mode = RunMode::ObjP;
  cfg.eps_bar = 1.0;
  cfg.T = 50;
  cfg.eval_every = 10;
  const FederatedDataset fed = load_experiment_dataset(cfg);
  cfg.threads = 1;
  const std::string csv1 = metrics_to_csv(run_single_seed(cfg, fed, 7));
  cfg.threads = 8;
  const std::string csv8 = metrics_to_csv(run_single_seed(cfg, fed, 7));
  const bool same = csv1 == csv8;
  report(12, "byte-identical metrics at thread counts 1 and 8", same,
         same ? "CSV outputs identical" : "CSV outputs differ");
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_1_nonprivate_accuracy();
  criteria_2_3_4_private_benchmarks();
  criterion_5_closed_form();
  criterion_6_gradient_fd();
  criterion_7_sensitivity_oracle();
  criterion_8_laplace_mechanism();
  criterion_9_noise_recovery();
  criterion_10_penalty_ladder();
  criterion_11_expectation_gap();
  criterion_12_determinism();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  std::printf("%d/12 criteria passed in %llds\n", 12 - g_failures,
              static_cast<long long>(secs));
  return g_failures == 0 ? 0 : 1;
}
