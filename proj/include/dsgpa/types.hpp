#pragma once

#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace dsgpa {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;

// Stacked per-agent state: row i holds agent i's vector.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsgpa
