#ifndef EVONET_STATES_HPP
#define EVONET_STATES_HPP

#include "evonet/core.hpp"
#include "evonet/series.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace evonet {

enum class RecognizerKind { kKMeans, kSax, kShapelet };

std::string to_string(RecognizerKind kind);
RecognizerKind parse_recognizer(const std::string& name);

struct KMeansInfo {
  std::vector<Scalar> objective;  // WCSS after each assignment step
  int iterations = 0;
};

struct SaxInfo {
  int alphabet = 0;
  std::vector<Scalar> breakpoints;  // standard-normal equiprobable cut points
  std::vector<Scalar> levels;       // mid-quantile of each symbol's bin (z units)
  Scalar mean = 0;
  Scalar stddev = 0;
};

struct ShapeletScore {
  Index candidate = 0;  // index into the segment list the model was fitted on
  Scalar gain = 0;
  Scalar threshold = 0;
};

struct ShapeletInfo {
  std::vector<ShapeletScore> ranking;  // candidates by descending gain
  std::vector<Index> chosen;           // candidate indices kept as states
  Scalar diversity_cutoff = 0;         // median pairwise candidate distance
};

/// The |V| state patterns, each tau x d, plus what the recognizer learned.
struct StateModel {
  RecognizerKind kind = RecognizerKind::kKMeans;
  Index tau = 0;
  Index dim = 0;
  std::vector<Matrix> patterns;
  std::variant<KMeansInfo, SaxInfo, ShapeletInfo> info;

  Index num_states() const { return static_cast<Index>(patterns.size()); }
  void validate() const;
};

/// Per-segment recognition weights, T x |V|, entries in [0, 1].
struct RecognitionFrame {
  Matrix weights;

  Index steps() const { return weights.rows(); }
  Index num_states() const { return weights.cols(); }
};

/// Squared Euclidean distance between a segment and a pattern of the same shape.
template <typename A, typename B>
Scalar distance(const Eigen::MatrixBase<A>& segment, const Eigen::MatrixBase<B>& pattern) {
  if (segment.rows() != pattern.rows() || segment.cols() != pattern.cols()) {
    throw ValidationError("distance: shape mismatch " + shape_string(segment) + " vs " +
                          shape_string(pattern));
  }
  return (segment - pattern).squaredNorm();
}

/// Min-max normalization of one row of distances: nearest -> 1, farthest -> 0.
/// When every distance is equal (including a single state) all weights are 1/|V|.
RowVector normalize_distances(const RowVector& distances);

RecognitionFrame recognition_weights(const std::vector<Segment>& segments, const StateModel& model);

// ---- k-means -------------------------------------------------------------

struct KMeansResult {
  Matrix centroids;  // k x D
  std::vector<Index> assignment;
  std::vector<Scalar> objective;
  int iterations = 0;
};

/// Within-cluster sum of squares of an assignment.
Scalar wcss(const Matrix& points, const Matrix& centroids, const std::vector<Index>& assignment);

/// k-means++ seeding followed by Lloyd iterations on the rows of `points`.
/// An emptied cluster is re-seeded at the point farthest from its own centroid.
KMeansResult lloyd(const Matrix& points, Index k, int max_iter, std::uint64_t seed);

/// Best (lowest WCSS) of `restarts` seeded runs, each seeded from `seed`.
KMeansResult kmeans(const Matrix& points, Index k, int max_iter, std::uint64_t seed, int restarts = 10);

StateModel fit_kmeans(const std::vector<Segment>& segments, Index k, int max_iter, std::uint64_t seed,
                      int restarts = 10);

// ---- SAX -----------------------------------------------------------------

/// Inverse of the standard normal CDF.
Scalar normal_quantile(Scalar p);

/// The alphabet_size - 1 equiprobable cut points of N(0, 1).
std::vector<Scalar> gaussian_breakpoints(int alphabet_size);

/// Globally z-normalizes the (univariate) series, takes one PAA mean per
/// segment and fits one constant pattern per symbol, in the series' units.
StateModel fit_sax(const Series& series, Index tau, int alphabet_size);

/// SAX symbol of every segment of `series` under a fitted SAX model.
std::vector<int> sax_symbols(const Series& series, const StateModel& model);

// ---- shapelets -----------------------------------------------------------

/// Binary entropy in bits of a set with `positives` out of `total`.
Scalar binary_entropy(Index positives, Index total);

struct SplitScore {
  Scalar gain = 0;
  Scalar threshold = 0;
};

/// Best information gain over all thresholds splitting the distances into
/// near (<= threshold) and far sets.
SplitScore best_information_gain(const std::vector<Scalar>& distances, const std::vector<int>& labels);

StateModel fit_shapelets(const std::vector<Segment>& segments, const std::vector<int>& labels, Index k,
                         Index candidates, std::uint64_t seed);

// ---- persistence ---------------------------------------------------------

std::string state_model_to_json(const StateModel& model);
StateModel state_model_from_json(const std::string& text);

}  // namespace evonet

#endif  // EVONET_STATES_HPP
