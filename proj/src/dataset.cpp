#include "fedcell/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fedcell/rng.hpp"

namespace fedcell {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::vector<int> sample_indices(int available, int wanted, Rng& rng) {
  if (wanted > available) {
    throw std::invalid_argument("requested " + std::to_string(wanted) + " samples but only " +
                                std::to_string(available) + " available");
  }
  std::vector<int> idx(static_cast<std::size_t>(available));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(wanted));
  return idx;
}

std::filesystem::path find_file(const std::filesystem::path& dir,
                                std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (std::filesystem::exists(dir / name)) return dir / name;
  }
  throw std::runtime_error("no " + std::string(*names.begin()) + " in " + dir.string());
}

}  // namespace

Dataset Dataset::subset(std::span<const int> indices) const {
  Dataset out;
  out.num_classes = num_classes;
  out.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    out.inputs.col(static_cast<Eigen::Index>(k)) = inputs.col(indices[k]);
    out.labels.push_back(labels[static_cast<std::size_t>(indices[k])]);
  }
  return out;
}

IdxArray parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw std::runtime_error("IDX: truncated header");
  if (bytes[0] != 0 || bytes[1] != 0) throw std::runtime_error("IDX: bad magic");
  if (bytes[2] != 0x08) throw std::runtime_error("IDX: only unsigned-byte data is supported");
  const std::size_t rank = bytes[3];
  if (rank == 0) throw std::runtime_error("IDX: rank 0");
  if (bytes.size() < 4 + 4 * rank) throw std::runtime_error("IDX: truncated dimensions");
  IdxArray out;
  std::size_t count = 1;
  for (std::size_t k = 0; k < rank; ++k) {
    out.dims.push_back(read_be32(bytes, 4 + 4 * k));
    count *= out.dims.back();
  }
  const std::size_t offset = 4 + 4 * rank;
  if (bytes.size() - offset != count) {
    throw std::runtime_error("IDX: payload has " + std::to_string(bytes.size() - offset) +
                             " bytes, header promises " + std::to_string(count));
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return out;
}

std::vector<std::uint8_t> encode_idx(const IdxArray& array) {
  std::vector<std::uint8_t> out{0, 0, 0x08, static_cast<std::uint8_t>(array.dims.size())};
  for (std::uint32_t d : array.dims) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(d >> shift));
  }
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

IdxArray read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return parse_idx(bytes);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Dataset idx_to_dataset(const IdxArray& images, const IdxArray& labels, int num_classes) {
  if (images.dims.size() != 3) throw std::runtime_error("IDX images must have rank 3");
  if (labels.dims.size() != 1) throw std::runtime_error("IDX labels must have rank 1");
  if (images.dims[0] != labels.dims[0]) throw std::runtime_error("IDX image/label count mismatch");
  const auto n = static_cast<Eigen::Index>(images.dims[0]);
  const auto pixels = static_cast<Eigen::Index>(images.dims[1]) * images.dims[2];
  Dataset out;
  out.num_classes = num_classes;
  out.inputs.resize(pixels, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index p = 0; p < pixels; ++p) {
      out.inputs(p, j) = images.data[static_cast<std::size_t>(j * pixels + p)] / 255.0;
    }
  }
  out.labels.assign(labels.data.begin(), labels.data.end());
  for (int y : out.labels) {
    if (y >= num_classes) throw std::runtime_error("IDX label out of range");
  }
  return out;
}

DataSplit load_idx_digits(const std::filesystem::path& dir, int train_size, int test_size,
                          std::uint64_t seed) {
  const Dataset train = idx_to_dataset(
      read_idx(find_file(dir, {"train-images-idx3-ubyte", "train-images.idx3-ubyte"})),
      read_idx(find_file(dir, {"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"})));
  const Dataset test = idx_to_dataset(
      read_idx(find_file(dir, {"t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"})),
      read_idx(find_file(dir, {"t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"})));
  Rng rng = make_rng(seed, Stream::kDataset);
  const std::vector<int> train_idx = sample_indices(train.size(), train_size, rng);
  const std::vector<int> test_idx = sample_indices(test.size(), test_size, rng);
  return DataSplit{train.subset(train_idx), test.subset(test_idx)};
}

DataSplit make_synthetic(int num_features, int num_classes, double separation, int train_size,
                         int test_size, std::uint64_t seed) {
  Rng rng = make_rng(seed, Stream::kDataset);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::MatrixXd means =
      Eigen::MatrixXd::NullaryExpr(num_features, num_classes, [&] { return normal(rng); }) *
      separation;
  auto draw = [&](int n) {
    Dataset d;
    d.num_classes = num_classes;
    d.inputs.resize(num_features, n);
    d.labels.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const int y = j % num_classes;
      d.labels[static_cast<std::size_t>(j)] = y;
      for (int f = 0; f < num_features; ++f) d.inputs(f, j) = means(f, y) + normal(rng);
    }
    // Shuffle so that contiguous shards are not label-sorted.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    return d.subset(order);
  };
  DataSplit split;
  split.train = draw(train_size);
  split.test = draw(test_size);
  return split;
}

DataSplit load_data(const SystemConfig& config) {
  if (!config.dataset_dir.empty()) {
    return load_idx_digits(config.dataset_dir, config.total_samples, config.test_samples,
                           config.seed);
  }
  return make_synthetic(config.num_features, config.num_classes, config.class_separation,
                        config.total_samples, config.test_samples, config.seed);
}

}  // namespace fedcell
