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

// Experiment configuration, metrics, CSV emission, and multi-seed
// aggregation.

#pragma once

#include "dpiadmm/data.hpp"
#include "dpiadmm/optimizer.hpp"
#include "dpiadmm/synthetic.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dpiadmm {

enum class RunMode { ObjP, ObjPM, OutP, NonPrivate };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

struct ExperimentConfig {
  // Dataset selection.
  std::string dataset = "synthetic";  // mnist | femnist | synthetic
  std::string train_images, train_labels, test_images, test_labels;  // mnist
  std::string femnist_path;       // femnist train writers
  std::string femnist_test_path;  // femnist test writers (pooled)
  SyntheticSpec synthetic;                                           // synthetic
  int P = 10;
  std::uint64_t partition_seed = 0;
  Eigen::Index subset_train = 0;  // 0 = use every training sample
  bool append_bias = false;       // append a constant-1 feature column

  // Algorithm.
  RunMode mode = RunMode::NonPrivate;
  double eps_bar = kInf;
  double delta_bar = 1e-6;
  int E = 1;
  int T = 1000;
  double c1 = 2.0, c2 = 5.0;
  int Tc = 10000;
  EtaMode eta_mode = EtaMode::Nonsmooth;
  double L = 0.0;
  double alpha = 1.0;
  double beta = 1e-6;
  double box_bound = 100.0;
  bool allow_E_override = false;

  // OutP baseline calibration: sigma0 defaults to the classic Gaussian
  // mechanism sqrt(2 ln(1.25/delta_bar)) * l2_factor * Delta / eps_bar with
  // Delta the worst-agent sensitivity at the zero iterate; a fixed override
  // can be given instead.
  double sigma0_override = -1.0;  // < 0 means calibrate from sensitivity
  double sigma_decay = 0.5;
  double sigma_l2_factor = 1.0;

  // Harness.
  std::vector<std::uint64_t> seeds = {1};
  int eval_every = 100;
  int threads = 1;
  std::string out_dir = "out";

  void Validate() const;
  Mechanism mechanism() const;
};

/// Parses a flat key=value file with '#' comments. Unknown keys, duplicate
/// keys, and invariant violations are errors naming the offending line.
ExperimentConfig parse_config(const std::string& path);

/// Serializes the resolved config back to key=value text (provenance echo).
std::string config_to_text(const ExperimentConfig& config);

/// Fraction of test samples whose argmax logit class differs from the truth;
/// argmax ties break toward the lowest class index.
double evaluate_test_error(const Matrix& w, const RawDataset& test_set);

/// One agent's noise draws for one round.
struct NoiseRecord {
  double abs_sum = 0.0;       // sum of |xi| over all draws
  Eigen::Index entries = 0;   // J*K
  int draws = 1;              // E draws for ObjP/ObjPM, 1 for OutP
};

/// (1/(P J K)) sum_p |xi_p| with the E draws of a round averaged.
double avg_noise_magnitude(const std::vector<NoiseRecord>& records);

struct MetricsRow {
  int t = 0;
  double test_error = 0.0;
  double avg_noise_magnitude = 0.0;
  double consensus_residual = 0.0;
  double global_objective = 0.0;
  double cumulative_epsilon = 0.0;
};

struct RunMetrics {
  std::vector<MetricsRow> rows;
  double best_test_error = 1.0;
};

/// CSV column order is fixed:
/// t,test_error,avg_noise_magnitude,consensus_residual,global_objective,cumulative_epsilon
std::string metrics_to_csv(const RunMetrics& metrics);
RunMetrics metrics_from_csv(const std::string& text);

/// Loads the configured dataset and partitions it into the federation.
FederatedDataset load_experiment_dataset(const ExperimentConfig& config);

/// Runs one seed and returns the metrics (no file I/O).
RunMetrics run_single_seed(const ExperimentConfig& config,
                           const FederatedDataset& fed, std::uint64_t seed);

/// Runs every configured seed, writing out_dir/run_seed<seed>.csv per seed
/// plus aggregate.csv, summary.csv, and the resolved config echo. Returns the
/// per-seed metrics in seed order.
std::vector<RunMetrics> run_experiment(const ExperimentConfig& config);

struct AggregateRow {
  int t = 0;
  double test_error_mean = 0.0;
  double test_error_p20 = 0.0;
  double test_error_p80 = 0.0;
  double avg_noise_magnitude_mean = 0.0;
};

/// Per-t mean and 20/80th percentiles across seeds (linear interpolation on
/// sorted values); all runs must share the evaluation grid.
std::vector<AggregateRow> aggregate_runs(const std::vector<RunMetrics>& runs);
std::string aggregate_to_csv(const std::vector<AggregateRow>& rows);

/// Best final and best overall test error across seeds.
struct RunSummary {
  double best_final_test_error = 1.0;
  double best_overall_test_error = 1.0;
};
RunSummary summarize_runs(const std::vector<RunMetrics>& runs);

}  // namespace dpiadmm
