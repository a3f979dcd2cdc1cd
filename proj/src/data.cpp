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

#include "dpiadmm/data.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace dpiadmm {

namespace {

constexpr std::uint32_t kImageMagic = 2051;  // 0x00000803
constexpr std::uint32_t kLabelMagic = 2049;  // 0x00000801

std::uint32_t read_be32(std::istream& in, const std::string& path, std::streamoff offset) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) {
    std::ostringstream msg;
    msg << "IDX file truncated: " << path << " at offset " << offset;
    throw FormatError(msg.str());
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path,
                    int num_classes) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("cannot open IDX image file: " + images_path);
  const std::uint32_t img_magic = read_be32(img, images_path, 0);
  if (img_magic != kImageMagic) {
    std::ostringstream msg;
    msg << "bad IDX image magic " << img_magic << " (want " << kImageMagic
        << ") in " << images_path << " at offset 0";
    throw FormatError(msg.str());
  }
  const std::uint32_t n = read_be32(img, images_path, 4);
  const std::uint32_t rows = read_be32(img, images_path, 8);
  const std::uint32_t cols = read_be32(img, images_path, 12);

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw FormatError("cannot open IDX label file: " + labels_path);
  const std::uint32_t lab_magic = read_be32(lab, labels_path, 0);
  if (lab_magic != kLabelMagic) {
    std::ostringstream msg;
    msg << "bad IDX label magic " << lab_magic << " (want " << kLabelMagic
        << ") in " << labels_path << " at offset 0";
    throw FormatError(msg.str());
  }
  const std::uint32_t n_labels = read_be32(lab, labels_path, 4);
  if (n != n_labels) {
    std::ostringstream msg;
    msg << "IDX count mismatch: " << n << " images vs " << n_labels << " labels";
    throw FormatError(msg.str());
  }

  const Eigen::Index J = static_cast<Eigen::Index>(rows) * cols;
  RawDataset data;
  data.num_classes = num_classes;
  data.features.resize(n, J);
  data.labels.resize(n);

  std::vector<unsigned char> pixel_row(J);
  for (std::uint32_t i = 0; i < n; ++i) {
    img.read(reinterpret_cast<char*>(pixel_row.data()), J);
    if (!img) {
      std::ostringstream msg;
      msg << "IDX file truncated: " << images_path << " at offset "
          << (16 + static_cast<std::streamoff>(i) * J);
      throw FormatError(msg.str());
    }
    for (Eigen::Index j = 0; j < J; ++j) {
      data.features(i, j) = pixel_row[j] / 255.0;
    }
    char label = 0;
    lab.read(&label, 1);
    if (!lab) {
      std::ostringstream msg;
      msg << "IDX file truncated: " << labels_path << " at offset " << (8 + i);
      throw FormatError(msg.str());
    }
    const int cls = static_cast<unsigned char>(label);
    if (cls >= num_classes) {
      std::ostringstream msg;
      msg << "IDX label " << cls << " out of range [0," << num_classes << ") at sample " << i;
      throw FormatError(msg.str());
    }
    data.labels(i) = cls;
  }
  return data;
}

void save_idx(const RawDataset& data, Eigen::Index rows, Eigen::Index cols,
              const std::string& images_path, const std::string& labels_path) {
  if (rows * cols != data.dim()) throw UsageError("save_idx: rows*cols != feature length");
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw FormatError("cannot write IDX image file: " + images_path);
  write_be32(img, kImageMagic);
  write_be32(img, static_cast<std::uint32_t>(data.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  std::vector<unsigned char> pixel_row(data.dim());
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      pixel_row[j] = static_cast<unsigned char>(std::lround(data.features(i, j) * 255.0));
    }
    img.write(reinterpret_cast<const char*>(pixel_row.data()), data.dim());
  }

  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw FormatError("cannot write IDX label file: " + labels_path);
  write_be32(lab, kLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const char c = static_cast<char>(data.labels(i));
    lab.write(&c, 1);
  }
}

std::map<std::string, RawDataset> load_femnist_json(const std::string& path,
                                                    int num_classes) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open JSON file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("unparseable JSON in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError("expected top-level object in " + path);

  std::map<std::string, RawDataset> writers;
  for (const auto& [writer, entry] : doc.items()) {
    if (!entry.contains("x") || !entry.contains("y")) {
      throw FormatError("writer '" + writer + "' missing x/y arrays in " + path);
    }
    const auto& xs = entry.at("x");
    const auto& ys = entry.at("y");
    if (xs.size() != ys.size()) {
      throw FormatError("writer '" + writer + "': x/y length mismatch in " + path);
    }
    RawDataset data;
    data.num_classes = num_classes;
    const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
    if (n == 0) {
      throw FormatError("writer '" + writer + "' has no samples in " + path);
    }
    const Eigen::Index J = static_cast<Eigen::Index>(xs.at(0).size());
    data.features.resize(n, J);
    data.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = xs.at(i);
      if (static_cast<Eigen::Index>(row.size()) != J) {
        throw FormatError("writer '" + writer + "': inconsistent feature length at sample " +
                          std::to_string(i) + " in " + path);
      }
      for (Eigen::Index j = 0; j < J; ++j) data.features(i, j) = row.at(j).get<double>();
      const int cls = ys.at(i).get<int>();
      if (cls < 0 || cls >= num_classes) {
        throw FormatError("writer '" + writer + "': label out of range at sample " +
                          std::to_string(i) + " in " + path);
      }
      data.labels(i) = cls;
    }
    writers.emplace(writer, std::move(data));
  }
  return writers;
}

Matrix one_hot(const IntVector& labels, int num_classes) {
  Matrix y = Matrix::Zero(labels.size(), num_classes);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) < 0 || labels(i) >= num_classes) {
      throw UsageError("one_hot: class index out of range");
    }
    y(i, labels(i)) = 1.0;
  }
  return y;
}

namespace {

// Explicit Fisher-Yates with modulo draws; std::shuffle is
// implementation-defined and would break cross-platform determinism.
std::vector<Eigen::Index> seeded_permutation(Eigen::Index n, std::uint64_t seed) {
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 engine(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(engine() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

}  // namespace

FederatedDataset partition_iid(const RawDataset& train, const RawDataset& test,
                               int P, std::uint64_t seed) {
  if (P < 1) throw UsageError("partition_iid: P must be >= 1");
  if (static_cast<Eigen::Index>(P) > train.size()) {
    throw UsageError("partition_iid: more agents than samples");
  }
  const auto perm = seeded_permutation(train.size(), seed);

  FederatedDataset fed;
  fed.J = train.dim();
  fed.K = train.num_classes;
  fed.test_set = test;
  fed.provenance = "iid";

  const Eigen::Index base = train.size() / P;
  const Eigen::Index extra = train.size() % P;
  Eigen::Index offset = 0;
  for (int p = 0; p < P; ++p) {
    const Eigen::Index count = base + (p < extra ? 1 : 0);
    Matrix x(count, fed.J);
    IntVector labels(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      x.row(i) = train.features.row(perm[offset + i]);
      labels(i) = train.labels(perm[offset + i]);
    }
    fed.shards.emplace_back(p, std::move(x), one_hot(labels, fed.K));
    offset += count;
  }
  return fed;
}

FederatedDataset partition_by_writer(const std::map<std::string, RawDataset>& writers,
                                     const RawDataset& test) {
  if (writers.empty()) throw UsageError("partition_by_writer: need at least one writer");
  FederatedDataset fed;
  fed.test_set = test;
  fed.provenance = "by_writer";
  int p = 0;
  for (const auto& [writer, data] : writers) {
    if (p == 0) {
      fed.J = data.dim();
      fed.K = data.num_classes;
    } else if (data.dim() != fed.J) {
      throw FormatError("partition_by_writer: writer '" + writer +
                        "' feature length differs from first writer");
    }
    fed.shards.emplace_back(p, data.features, one_hot(data.labels, fed.K));
    ++p;
  }
  return fed;
}

}  // namespace dpiadmm
