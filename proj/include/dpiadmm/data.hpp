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

// Dataset ingestion (IDX binary images/labels, writer-keyed JSON) and
// federated partitioning (IID shuffle-split and one-agent-per-writer).

#pragma once

#include "dpiadmm/types.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dpiadmm {

/// Flat dataset: N x J features (pixels already scaled to [0,1]) and
/// length-N class indices in [0, K).
struct RawDataset {
  Matrix features;
  IntVector labels;
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// P agent shards plus the held-out test set.
struct FederatedDataset {
  std::vector<AgentShard> shards;
  RawDataset test_set;
  Eigen::Index J = 0;
  int K = 0;
  std::string provenance;  // "iid" or "by_writer"

  int num_agents() const { return static_cast<int>(shards.size()); }
  Eigen::Index total_train() const {
    Eigen::Index n = 0;
    for (const auto& s : shards) n += s.size();
    return n;
  }
};

/// Loads an MNIST-style IDX image/label pair. Image magic 2051, label magic
/// 2049, big-endian counts and dimensions; pixels divided by 255.
RawDataset load_idx(const std::string& images_path, const std::string& labels_path,
                    int num_classes = 10);

/// Writes a RawDataset back to the IDX pair (features are rounded to bytes
/// via *255; intended for fixtures whose features are exact multiples of
/// 1/255).
void save_idx(const RawDataset& data, Eigen::Index rows, Eigen::Index cols,
              const std::string& images_path, const std::string& labels_path);

/// Writer-keyed JSON: top-level object mapping writer id to {"x": [[...]],
/// "y": [...]}. Returns one dataset per writer, keyed and ordered by id.
std::map<std::string, RawDataset> load_femnist_json(const std::string& path,
                                                    int num_classes);

/// One-hot expansion of class indices.
Matrix one_hot(const IntVector& labels, int num_classes);

/// Seeded shuffle then contiguous split into P shards whose sizes differ by
/// at most one (the first N mod P shards get the extra sample).
FederatedDataset partition_iid(const RawDataset& train, const RawDataset& test,
                               int P, std::uint64_t seed);

/// One agent per writer; P equals the writer count.
FederatedDataset partition_by_writer(const std::map<std::string, RawDataset>& writers,
                                     const RawDataset& test);

}  // namespace dpiadmm
