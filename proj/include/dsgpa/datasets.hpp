#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dsgpa/types.hpp"

namespace dsgpa {

// Labeled feature matrix: one sample per row.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;

  Index samples() const { return features.rows(); }
  Index dim() const { return features.cols(); }
};

// Isotropic Gaussian clusters, one per class, centers drawn uniformly from
// [-1, 1]^dim. Labels cycle through the classes so they stay balanced.
Dataset gaussian_blobs(Index samples, Index dim, int classes, double spread, std::uint64_t seed);

// Header-free CSV rows "label,f1,...,fd". Rejects ragged rows, unparsable
// fields and labels outside [0, classes).
Dataset read_dataset_csv(std::istream& is, int classes);
Dataset load_dataset_csv(const std::string& path, int classes);

}  // namespace dsgpa
