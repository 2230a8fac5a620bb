#ifndef EVONET_SERIES_HPP
#define EVONET_SERIES_HPP

#include "evonet/core.hpp"

#include <string>
#include <vector>

namespace evonet {

/// A tau x d slice of a series.
using Segment = Matrix;

/// Raw d-dimensional series with optional per-row binary event labels.
struct Series {
  std::string id;
  Index start = 0;          // time index of the first row
  Matrix values;            // L x d, one observation per row
  std::vector<int> labels;  // per row; empty when unlabeled

  Index length() const { return values.rows(); }
  Index dim() const { return values.cols(); }
  bool labeled() const { return !labels.empty(); }
};

/// floor(L / tau) contiguous, non-overlapping segments; the tail of L mod tau rows is dropped.
std::vector<Segment> segment(const Series& series, Index tau);

/// Event label of each segment: the label of the segment's final row.
std::vector<int> segment_labels(const Series& series, Index tau);

/// Row-stacks flattened segments (row-major within each segment) into an n x (tau*d) matrix.
Matrix flatten_segments(const std::vector<Segment>& segments);

}  // namespace evonet

#endif  // EVONET_SERIES_HPP
