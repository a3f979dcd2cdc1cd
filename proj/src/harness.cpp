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

#include "dpiadmm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dpiadmm {

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::ObjP: return "ObjP";
    case RunMode::ObjPM: return "ObjPM";
    case RunMode::OutP: return "OutP";
    case RunMode::NonPrivate: return "NonPrivate";
  }
  return "?";
}

RunMode run_mode_from_string(const std::string& s) {
  if (s == "ObjP") return RunMode::ObjP;
  if (s == "ObjPM") return RunMode::ObjPM;
  if (s == "OutP") return RunMode::OutP;
  if (s == "NonPrivate") return RunMode::NonPrivate;
  throw FormatError("unknown mode '" + s + "'");
}

Mechanism ExperimentConfig::mechanism() const {
  switch (mode) {
    case RunMode::ObjP:
    case RunMode::ObjPM: return Mechanism::ObjP;
    case RunMode::OutP: return Mechanism::OutP;
    case RunMode::NonPrivate: return Mechanism::NonPrivate;
  }
  return Mechanism::NonPrivate;
}

void ExperimentConfig::Validate() const {
  if (!(eps_bar > 0.0)) throw FormatError("config: eps_bar must be > 0 or inf");
  if (!(delta_bar > 0.0 && delta_bar < 1.0)) throw FormatError("config: delta_bar must be in (0,1)");
  if (E < 1) throw FormatError("config: E must be >= 1");
  if (T < 0) throw FormatError("config: T must be >= 0");
  if (P < 1) throw FormatError("config: P must be >= 1");
  if (beta < 0.0) throw FormatError("config: beta must be >= 0");
  if (!(box_bound > 0.0)) throw FormatError("config: box_bound must be > 0 or inf");
  if (eval_every < 1) throw FormatError("config: eval_every must be >= 1");
  if (threads < 1) throw FormatError("config: threads must be >= 1");
  if (seeds.empty()) throw FormatError("config: seeds must not be empty");
  if (!allow_E_override) {
    if (mode == RunMode::ObjP && E != 1) {
      throw FormatError("config: mode=ObjP requires E=1 (set allow_E_override=true to force)");
    }
    if (mode == RunMode::ObjPM && E != 10) {
      throw FormatError("config: mode=ObjPM requires E=10 (set allow_E_override=true to force)");
    }
  }
  if (mode == RunMode::OutP && E != 1) {
    throw FormatError("config: mode=OutP requires E=1");
  }
  if (dataset != "mnist" && dataset != "femnist" && dataset != "synthetic") {
    throw FormatError("config: dataset must be mnist, femnist, or synthetic");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key) {
  if (v == "inf" || v == "infinity") return kInf;
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw FormatError("config: unparseable value '" + v + "' for key " + key);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw FormatError("config: unparseable integer '" + v + "' for key " + key);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw FormatError("config: unparseable boolean '" + v + "' for key " + key);
}

EtaMode parse_eta(const std::string& v) {
  if (v == "smooth") return EtaMode::Smooth;
  if (v == "nonsmooth") return EtaMode::Nonsmooth;
  if (v == "strong") return EtaMode::Strong;
  throw FormatError("config: eta must be smooth, nonsmooth, or strong (got '" + v + "')");
}

std::string eta_to_string(EtaMode mode) {
  switch (mode) {
    case EtaMode::Smooth: return "smooth";
    case EtaMode::Nonsmooth: return "nonsmooth";
    case EtaMode::Strong: return "strong";
  }
  return "?";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file: " + path);

  ExperimentConfig cfg;
  std::set<std::string> seen;
  bool explicit_E = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw FormatError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }

    if (key == "dataset") cfg.dataset = value;
    else if (key == "train_images") cfg.train_images = value;
    else if (key == "train_labels") cfg.train_labels = value;
    else if (key == "test_images") cfg.test_images = value;
    else if (key == "test_labels") cfg.test_labels = value;
    else if (key == "femnist_path") cfg.femnist_path = value;
    else if (key == "femnist_test_path") cfg.femnist_test_path = value;
    else if (key == "P") cfg.P = static_cast<int>(parse_int(value, key));
    else if (key == "partition_seed") cfg.partition_seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "subset_train") cfg.subset_train = static_cast<Eigen::Index>(parse_int(value, key));
    else if (key == "append_bias") cfg.append_bias = parse_bool(value, key);
    else if (key == "mode") cfg.mode = run_mode_from_string(value);
    else if (key == "eps_bar") cfg.eps_bar = parse_double(value, key);
    else if (key == "delta_bar") cfg.delta_bar = parse_double(value, key);
    else if (key == "E") { cfg.E = static_cast<int>(parse_int(value, key)); explicit_E = true; }
    else if (key == "T") cfg.T = static_cast<int>(parse_int(value, key));
    else if (key == "c1") cfg.c1 = parse_double(value, key);
    else if (key == "c2") cfg.c2 = parse_double(value, key);
    else if (key == "Tc") cfg.Tc = static_cast<int>(parse_int(value, key));
    else if (key == "eta") cfg.eta_mode = parse_eta(value);
    else if (key == "L") cfg.L = parse_double(value, key);
    else if (key == "alpha") cfg.alpha = parse_double(value, key);
    else if (key == "beta") cfg.beta = parse_double(value, key);
    else if (key == "box_bound") cfg.box_bound = parse_double(value, key);
    else if (key == "allow_E_override") cfg.allow_E_override = parse_bool(value, key);
    else if (key == "sigma0") cfg.sigma0_override = parse_double(value, key);
    else if (key == "sigma_decay") cfg.sigma_decay = parse_double(value, key);
    else if (key == "sigma_l2_factor") cfg.sigma_l2_factor = parse_double(value, key);
    else if (key == "eval_every") cfg.eval_every = static_cast<int>(parse_int(value, key));
    else if (key == "threads") cfg.threads = static_cast<int>(parse_int(value, key));
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "synth_train") cfg.synthetic.num_train = static_cast<Eigen::Index>(parse_int(value, key));
    else if (key == "synth_test") cfg.synthetic.num_test = static_cast<Eigen::Index>(parse_int(value, key));
    else if (key == "synth_dim") cfg.synthetic.dim = static_cast<Eigen::Index>(parse_int(value, key));
    else if (key == "synth_classes") cfg.synthetic.num_classes = static_cast<int>(parse_int(value, key));
    else if (key == "synth_sigma") cfg.synthetic.pixel_sigma = parse_double(value, key);
    else if (key == "synth_density") cfg.synthetic.density = parse_double(value, key);
    else if (key == "synth_flip") cfg.synthetic.label_flip = parse_double(value, key);
    else if (key == "synth_seed") cfg.synthetic.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "seeds") {
      cfg.seeds.clear();
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int(tok, key)));
      }
      if (cfg.seeds.empty()) {
        throw FormatError("config line " + std::to_string(lineno) + ": empty seed list");
      }
    } else {
      throw FormatError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }

  if (!explicit_E) cfg.E = (cfg.mode == RunMode::ObjPM) ? 10 : 1;
  cfg.Validate();
  return cfg;
}

std::string config_to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "dataset=" << c.dataset << "\n";
  if (!c.train_images.empty()) out << "train_images=" << c.train_images << "\n";
  if (!c.train_labels.empty()) out << "train_labels=" << c.train_labels << "\n";
  if (!c.test_images.empty()) out << "test_images=" << c.test_images << "\n";
  if (!c.test_labels.empty()) out << "test_labels=" << c.test_labels << "\n";
  if (!c.femnist_path.empty()) out << "femnist_path=" << c.femnist_path << "\n";
  if (!c.femnist_test_path.empty()) out << "femnist_test_path=" << c.femnist_test_path << "\n";
  out << "P=" << c.P << "\n"
      << "partition_seed=" << c.partition_seed << "\n"
      << "subset_train=" << c.subset_train << "\n"
      << "append_bias=" << (c.append_bias ? "true" : "false") << "\n"
      << "mode=" << to_string(c.mode) << "\n"
      << "eps_bar=" << fmt(c.eps_bar) << "\n"
      << "delta_bar=" << fmt(c.delta_bar) << "\n"
      << "E=" << c.E << "\n"
      << "T=" << c.T << "\n"
      << "c1=" << fmt(c.c1) << "\n"
      << "c2=" << fmt(c.c2) << "\n"
      << "Tc=" << c.Tc << "\n"
      << "eta=" << eta_to_string(c.eta_mode) << "\n"
      << "L=" << fmt(c.L) << "\n"
      << "alpha=" << fmt(c.alpha) << "\n"
      << "beta=" << fmt(c.beta) << "\n"
      << "box_bound=" << fmt(c.box_bound) << "\n"
      << "allow_E_override=" << (c.allow_E_override ? "true" : "false") << "\n"
      << "sigma0=" << fmt(c.sigma0_override) << "\n"
      << "sigma_decay=" << fmt(c.sigma_decay) << "\n"
      << "sigma_l2_factor=" << fmt(c.sigma_l2_factor) << "\n"
      << "eval_every=" << c.eval_every << "\n"
      << "threads=" << c.threads << "\n"
      << "out_dir=" << c.out_dir << "\n";
  if (c.dataset == "synthetic") {
    out << "synth_train=" << c.synthetic.num_train << "\n"
        << "synth_test=" << c.synthetic.num_test << "\n"
        << "synth_dim=" << c.synthetic.dim << "\n"
        << "synth_classes=" << c.synthetic.num_classes << "\n"
        << "synth_sigma=" << fmt(c.synthetic.pixel_sigma) << "\n"
        << "synth_density=" << fmt(c.synthetic.density) << "\n"
        << "synth_flip=" << fmt(c.synthetic.label_flip) << "\n"
        << "synth_seed=" << c.synthetic.seed << "\n";
  }
  out << "seeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i) out << ",";
    out << c.seeds[i];
  }
  out << "\n";
  return out.str();
}

double evaluate_test_error(const Matrix& w, const RawDataset& test_set) {
  if (test_set.size() < 1) throw UsageError("evaluate_test_error: empty test set");
  if (w.rows() != test_set.dim()) throw UsageError("evaluate_test_error: dimension mismatch");
  const Matrix logits = test_set.features * w;
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.cols(); ++k) {
      if (logits(i, k) > logits(i, best)) best = k;  // ties keep the lowest index
    }
    if (best != test_set.labels(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test_set.size());
}

double avg_noise_magnitude(const std::vector<NoiseRecord>& records) {
  if (records.empty()) throw UsageError("avg_noise_magnitude: no records");
  double total = 0.0;
  for (const auto& r : records) {
    if (r.entries < 1 || r.draws < 1) throw UsageError("avg_noise_magnitude: bad record");
    total += r.abs_sum / (static_cast<double>(r.entries) * r.draws);
  }
  return total / static_cast<double>(records.size());
}

std::string metrics_to_csv(const RunMetrics& metrics) {
  std::ostringstream out;
  out << "t,test_error,avg_noise_magnitude,consensus_residual,global_objective,"
         "cumulative_epsilon\n";
  for (const auto& r : metrics.rows) {
    out << r.t << ',' << fmt(r.test_error) << ',' << fmt(r.avg_noise_magnitude) << ','
        << fmt(r.consensus_residual) << ',' << fmt(r.global_objective) << ','
        << fmt(r.cumulative_epsilon) << '\n';
  }
  return out.str();
}

RunMetrics metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,test_error,avg_noise_magnitude,consensus_residual,global_objective,"
              "cumulative_epsilon") {
    throw FormatError("metrics CSV: bad header");
  }
  RunMetrics metrics;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() != 6) throw FormatError("metrics CSV: bad row '" + line + "'");
    MetricsRow r;
    r.t = static_cast<int>(parse_int(cells[0], "t"));
    r.test_error = parse_double(cells[1], "test_error");
    r.avg_noise_magnitude = parse_double(cells[2], "avg_noise_magnitude");
    r.consensus_residual = parse_double(cells[3], "consensus_residual");
    r.global_objective = parse_double(cells[4], "global_objective");
    r.cumulative_epsilon = parse_double(cells[5], "cumulative_epsilon");
    metrics.rows.push_back(r);
    metrics.best_test_error = std::min(metrics.best_test_error, r.test_error);
  }
  return metrics;
}

namespace {

void append_bias_column(RawDataset& data) {
  data.features.conservativeResize(Eigen::NoChange, data.features.cols() + 1);
  data.features.col(data.features.cols() - 1).setOnes();
}

}  // namespace

FederatedDataset load_experiment_dataset(const ExperimentConfig& config) {
  config.Validate();
  if (config.dataset == "mnist") {
    RawDataset train = load_idx(config.train_images, config.train_labels);
    RawDataset test = load_idx(config.test_images, config.test_labels);
    if (config.subset_train > 0 && config.subset_train < train.size()) {
      RawDataset sub;
      sub.num_classes = train.num_classes;
      sub.features = train.features.topRows(config.subset_train);
      sub.labels = train.labels.head(config.subset_train);
      train = std::move(sub);
    }
    if (config.append_bias) {
      append_bias_column(train);
      append_bias_column(test);
    }
    return partition_iid(train, test, config.P, config.partition_seed);
  }
  if (config.dataset == "femnist") {
    auto writers = load_femnist_json(config.femnist_path, config.synthetic.num_classes);
    RawDataset test;
    if (!config.femnist_test_path.empty()) {
      auto test_writers = load_femnist_json(config.femnist_test_path, config.synthetic.num_classes);
      Eigen::Index n = 0;
      Eigen::Index J = 0;
      for (const auto& [_, d] : test_writers) { n += d.size(); J = d.dim(); }
      test.num_classes = config.synthetic.num_classes;
      test.features.resize(n, J);
      test.labels.resize(n);
      Eigen::Index off = 0;
      for (const auto& [_, d] : test_writers) {
        test.features.middleRows(off, d.size()) = d.features;
        test.labels.segment(off, d.size()) = d.labels;
        off += d.size();
      }
    } else {
      throw FormatError("config: femnist dataset requires femnist_test_path");
    }
    if (config.append_bias) {
      for (auto& [_, d] : writers) append_bias_column(d);
      append_bias_column(test);
    }
    return partition_by_writer(writers, test);
  }
  // synthetic
  SyntheticSpec spec = config.synthetic;
  if (config.subset_train > 0) spec.num_train = std::min(spec.num_train, config.subset_train);
  SyntheticData data = make_synthetic(spec);
  if (config.append_bias) {
    append_bias_column(data.train);
    append_bias_column(data.test);
  }
  return partition_iid(data.train, data.test, config.P, config.partition_seed);
}

RunMetrics run_single_seed(const ExperimentConfig& config,
                           const FederatedDataset& fed, std::uint64_t seed) {
  config.Validate();
  ModelConfig mc;
  mc.beta = config.beta;
  mc.total_samples = fed.total_train();
  mc.num_agents = fed.num_agents();

  std::vector<std::shared_ptr<const LocalFunction>> agents;
  agents.reserve(fed.shards.size());
  for (const auto& shard : fed.shards) {
    agents.push_back(std::make_shared<LogisticLocal>(shard, mc));
  }

  RunConfig rc;
  rc.schedules.c1 = config.c1;
  rc.schedules.c2 = config.c2;
  rc.schedules.Tc = config.Tc;
  rc.schedules.eta_mode = config.eta_mode;
  rc.schedules.L = config.L;
  rc.schedules.alpha = config.alpha;
  rc.schedules.eps_bar = (config.mode == RunMode::NonPrivate) ? kInf : config.eps_bar;
  rc.schedules.local_updates = config.E;
  rc.schedules.horizon = config.T;
  rc.box.bound = config.box_bound;
  rc.mode = config.mechanism();
  rc.seed = seed;
  rc.threads = config.threads;

  if (rc.mode == Mechanism::OutP) {
    rc.out_noise.decay = config.sigma_decay;
    rc.out_noise.delta_bar = config.delta_bar;
    if (config.sigma0_override >= 0.0) {
      rc.out_noise.sigma0 = config.sigma0_override;
    } else if (std::isinf(rc.schedules.eps_bar)) {
      rc.out_noise.sigma0 = 0.0;
    } else {
      const Matrix zero = Matrix::Zero(fed.J, fed.K);
      double delta0 = 0.0;
      for (const auto& a : agents) delta0 = std::max(delta0, a->sensitivity(zero));
      rc.out_noise.sigma0 = gaussian_base_sigma(config.sigma_l2_factor * delta0,
                                                rc.schedules.eps_bar, config.delta_bar);
    }
  }

  RunMetrics metrics;
  const double eps_for_budget =
      (config.mode == RunMode::NonPrivate) ? kInf : config.eps_bar;
  auto on_round = [&](int t, const FederationState& state, double noise) {
    if (t % config.eval_every != 0 && t != config.T) return;
    MetricsRow row;
    row.t = t;
    row.test_error = evaluate_test_error(state.w, fed.test_set);
    row.avg_noise_magnitude = noise;
    double residual = 0.0;
    double objective = 0.0;
    for (std::size_t p = 0; p < state.agents.size(); ++p) {
      residual += (state.w - state.agents[p].z).norm();
      objective += agents[p]->value(state.agents[p].z);
    }
    row.consensus_residual = residual / static_cast<double>(state.agents.size());
    row.global_objective = objective;
    row.cumulative_epsilon = static_cast<double>(t) * config.E * eps_for_budget;
    metrics.rows.push_back(row);
    metrics.best_test_error = std::min(metrics.best_test_error, row.test_error);
  };

  run_training(agents, fed.J, fed.K, rc, on_round);
  return metrics;
}

std::vector<RunMetrics> run_experiment(const ExperimentConfig& config) {
  config.Validate();
  const FederatedDataset fed = load_experiment_dataset(config);
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream echo(std::filesystem::path(config.out_dir) / "config_resolved.txt",
                       std::ios::binary);
    echo << config_to_text(config);
  }

  std::vector<RunMetrics> runs;
  for (const std::uint64_t seed : config.seeds) {
    RunMetrics metrics = run_single_seed(config, fed, seed);
    std::ofstream out(std::filesystem::path(config.out_dir) /
                          ("run_seed" + std::to_string(seed) + ".csv"),
                      std::ios::binary);
    out << metrics_to_csv(metrics);
    runs.push_back(std::move(metrics));
  }

  const auto agg = aggregate_runs(runs);
  {
    std::ofstream out(std::filesystem::path(config.out_dir) / "aggregate.csv",
                      std::ios::binary);
    out << aggregate_to_csv(agg);
  }
  {
    const RunSummary summary = summarize_runs(runs);
    std::ofstream out(std::filesystem::path(config.out_dir) / "summary.csv",
                      std::ios::binary);
    out << "mode,seeds,best_final_test_error,best_overall_test_error\n"
        << to_string(config.mode) << ',' << config.seeds.size() << ','
        << fmt(summary.best_final_test_error) << ','
        << fmt(summary.best_overall_test_error) << '\n';
  }
  return runs;
}

namespace {

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

}  // namespace

std::vector<AggregateRow> aggregate_runs(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw UsageError("aggregate_runs: no runs");
  const std::size_t rows = runs[0].rows.size();
  for (const auto& r : runs) {
    if (r.rows.size() != rows) throw UsageError("aggregate_runs: evaluation grids differ");
  }
  std::vector<AggregateRow> agg(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> errors;
    double noise = 0.0;
    for (const auto& r : runs) {
      if (r.rows[i].t != runs[0].rows[i].t) {
        throw UsageError("aggregate_runs: evaluation grids differ");
      }
      errors.push_back(r.rows[i].test_error);
      noise += r.rows[i].avg_noise_magnitude;
    }
    agg[i].t = runs[0].rows[i].t;
    double sum = 0.0;
    for (const double e : errors) sum += e;
    agg[i].test_error_mean = sum / static_cast<double>(errors.size());
    agg[i].test_error_p20 = percentile(errors, 0.20);
    agg[i].test_error_p80 = percentile(errors, 0.80);
    agg[i].avg_noise_magnitude_mean = noise / static_cast<double>(runs.size());
  }
  return agg;
}

std::string aggregate_to_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << "t,test_error_mean,test_error_p20,test_error_p80,avg_noise_magnitude_mean\n";
  for (const auto& r : rows) {
    out << r.t << ',' << fmt(r.test_error_mean) << ',' << fmt(r.test_error_p20) << ','
        << fmt(r.test_error_p80) << ',' << fmt(r.avg_noise_magnitude_mean) << '\n';
  }
  return out.str();
}

RunSummary summarize_runs(const std::vector<RunMetrics>& runs) {
  if (runs.empty()) throw UsageError("summarize_runs: no runs");
  RunSummary s;
  for (const auto& r : runs) {
    s.best_overall_test_error = std::min(s.best_overall_test_error, r.best_test_error);
    if (!r.rows.empty()) {
      s.best_final_test_error = std::min(s.best_final_test_error, r.rows.back().test_error);
    }
  }
  return s;
}

}  // namespace dpiadmm
