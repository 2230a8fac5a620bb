#include "evonet/series.hpp"

namespace evonet {

namespace {

void check_tau(const Series& series, Index tau) {
  if (tau <= 0) throw ValidationError("segment: tau must be positive");
  if (series.dim() < 1) throw ValidationError("segment: series has no dimensions");
  if (series.length() < tau) {
    throw ValidationError("segment: series shorter than one segment (L=" +
                          std::to_string(series.length()) + ", tau=" + std::to_string(tau) + ")");
  }
}

}  // namespace

std::vector<Segment> segment(const Series& series, Index tau) {
  check_tau(series, tau);
  const Index count = series.length() / tau;
  std::vector<Segment> out;
  out.reserve(static_cast<size_t>(count));
  for (Index t = 0; t < count; ++t) out.emplace_back(series.values.middleRows(t * tau, tau));
  return out;
}

std::vector<int> segment_labels(const Series& series, Index tau) {
  check_tau(series, tau);
  if (!series.labeled()) throw ValidationError("segment_labels: series '" + series.id + "' is unlabeled");
  const Index count = series.length() / tau;
  std::vector<int> out;
  out.reserve(static_cast<size_t>(count));
  for (Index t = 0; t < count; ++t) out.push_back(series.labels[static_cast<size_t>((t + 1) * tau - 1)]);
  return out;
}

Matrix flatten_segments(const std::vector<Segment>& segments) {
  if (segments.empty()) return Matrix(0, 0);
  const Index width = segments.front().size();
  Matrix out(static_cast<Index>(segments.size()), width);
  for (size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (s.size() != width) throw ValidationError("flatten_segments: segments differ in shape");
    for (Index r = 0; r < s.rows(); ++r) {
      for (Index c = 0; c < s.cols(); ++c) out(static_cast<Index>(i), r * s.cols() + c) = s(r, c);
    }
  }
  return out;
}

}  // namespace evonet
