#ifndef EVONET_TENSOR_HPP
#define EVONET_TENSOR_HPP

#include "evonet/core.hpp"

#include <vector>

namespace evonet {

/// Dense rank-1 or rank-2 array of doubles.
///
/// A rank-1 tensor of length n is held as an n x 1 column. Construction
/// rejects NaN/Inf and shapes whose product does not match the data length.
/// Tensors are immutable values.
class Tensor {
 public:
  Tensor() = default;

  /// `data` is row-major.
  Tensor(std::vector<Index> shape, const std::vector<Scalar>& data);

  explicit Tensor(Matrix values);

  static Tensor vector(const Vector& values);
  static Tensor zeros(Index rows, Index cols);

  const std::vector<Index>& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return values_.size(); }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  const Matrix& matrix() const { return values_; }
  Scalar operator()(Index r, Index c) const { return values_(r, c); }

  std::vector<Scalar> row_major() const;

 private:
  std::vector<Index> shape_;
  Matrix values_;
};

bool operator==(const Tensor& a, const Tensor& b);

}  // namespace evonet

#endif  // EVONET_TENSOR_HPP
