#include "evonet/tensor.hpp"

#include <functional>
#include <numeric>

namespace evonet {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) {
    throw ValidationError("tensor: non-finite value in data");
  }
}

}  // namespace

Tensor::Tensor(std::vector<Index> shape, const std::vector<Scalar>& data)
    : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 2) {
    throw ValidationError("tensor: rank must be 1 or 2, got " + std::to_string(shape_.size()));
  }
  for (Index d : shape_) {
    if (d <= 0) throw ValidationError("tensor: dimensions must be positive");
  }
  const Index expected =
      std::accumulate(shape_.begin(), shape_.end(), Index{1}, std::multiplies<>());
  if (expected != static_cast<Index>(data.size())) {
    throw ValidationError("tensor: data length " + std::to_string(data.size()) +
                          " does not match shape product " + std::to_string(expected));
  }
  const Index rows = shape_[0];
  const Index cols = shape_.size() == 2 ? shape_[1] : 1;
  values_ = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      data.data(), rows, cols);
  require_finite(values_);
}

Tensor::Tensor(Matrix values) : shape_{values.rows(), values.cols()}, values_(std::move(values)) {
  if (values_.size() == 0) throw ValidationError("tensor: empty matrix");
  require_finite(values_);
}

Tensor Tensor::vector(const Vector& values) {
  Tensor t{Matrix(values)};
  t.shape_ = {values.size()};
  return t;
}

Tensor Tensor::zeros(Index rows, Index cols) { return Tensor(Matrix::Zero(rows, cols)); }

std::vector<Scalar> Tensor::row_major() const {
  std::vector<Scalar> out;
  out.reserve(static_cast<size_t>(values_.size()));
  for (Index r = 0; r < values_.rows(); ++r) {
    for (Index c = 0; c < values_.cols(); ++c) out.push_back(values_(r, c));
  }
  return out;
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && a.matrix() == b.matrix();
}

}  // namespace evonet
