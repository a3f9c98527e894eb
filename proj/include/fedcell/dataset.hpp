#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fedcell/config.hpp"

namespace fedcell {

// Feature x sample matrix with integer class labels.
struct Dataset {
  Eigen::MatrixXd inputs;
  std::vector<int> labels;
  int num_classes = 0;

  int size() const { return static_cast<int>(labels.size()); }
  int num_features() const { return static_cast<int>(inputs.rows()); }
  Dataset subset(std::span<const int> indices) const;
};

struct DataSplit {
  Dataset train;
  Dataset test;
};

// Unsigned-byte IDX array: big-endian magic 0x000008NN (NN = rank), then NN
// big-endian uint32 dimensions, then the raw bytes.
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

IdxArray read_idx(const std::filesystem::path& path);
IdxArray parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_idx(const IdxArray& array);

// Images (rank 3, pixels scaled to [0, 1]) and matching labels (rank 1).
Dataset idx_to_dataset(const IdxArray& images, const IdxArray& labels, int num_classes = 10);

// Handwritten-digit IDX files in `dir` (train-/t10k- images and labels),
// randomly subsampled to the requested sizes.
DataSplit load_idx_digits(const std::filesystem::path& dir, int train_size, int test_size,
                          std::uint64_t seed);

// Gaussian blobs: class means ~ N(0, separation^2 I), samples = mean + N(0, I),
// balanced uniform labels.
DataSplit make_synthetic(int num_features, int num_classes, double separation, int train_size,
                         int test_size, std::uint64_t seed);

// IDX data when config.dataset_dir is set, synthetic blobs otherwise; the
// training set has config.total_samples rows.
DataSplit load_data(const SystemConfig& config);

}  // namespace fedcell
