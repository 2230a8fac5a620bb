#include "evonet/states.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace evonet {

namespace {

using nlohmann::json;

constexpr int kStateModelVersion = 1;

void check_segments(const std::vector<Segment>& segments, const char* who) {
  if (segments.empty()) throw ValidationError(std::string(who) + ": no segments");
  const Index rows = segments.front().rows();
  const Index cols = segments.front().cols();
  for (const auto& s : segments) {
    if (s.rows() != rows || s.cols() != cols) {
      throw ValidationError(std::string(who) + ": segments differ in shape");
    }
  }
}

Matrix unflatten(const Eigen::Ref<const RowVector>& flat, Index tau, Index dim) {
  Matrix m(tau, dim);
  for (Index r = 0; r < tau; ++r) {
    for (Index c = 0; c < dim; ++c) m(r, c) = flat(r * dim + c);
  }
  return m;
}

// Uniform draw of an index with probability proportional to `weights`.
Index sample_weighted(const std::vector<Scalar>& weights, std::mt19937_64& rng) {
  const Scalar total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) {
    std::uniform_int_distribution<Index> pick(0, static_cast<Index>(weights.size()) - 1);
    return pick(rng);
  }
  std::uniform_real_distribution<Scalar> u(0.0, total);
  const Scalar target = u(rng);
  Scalar acc = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc && weights[i] > 0) return static_cast<Index>(i);
  }
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0) return static_cast<Index>(i);
  }
  return 0;
}

Matrix kmeanspp_seed(const Matrix& points, Index k, std::mt19937_64& rng) {
  const Index n = points.rows();
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  std::vector<Scalar> d2(static_cast<size_t>(n), std::numeric_limits<Scalar>::infinity());
  for (Index c = 1; c < k; ++c) {
    for (Index i = 0; i < n; ++i) {
      d2[static_cast<size_t>(i)] =
          std::min(d2[static_cast<size_t>(i)], (points.row(i) - centroids.row(c - 1)).squaredNorm());
    }
    centroids.row(c) = points.row(sample_weighted(d2, rng));
  }
  return centroids;
}

// Single-point moves that lower the exact WCSS (centroid shifts included).
// Lloyd stops at partitions where such a move still helps.
void hartigan_refine(const Matrix& points, KMeansResult& r) {
  const Index n = points.rows();
  const Index k = r.centroids.rows();
  std::vector<Index> counts(static_cast<size_t>(k), 0);
  Matrix sums = Matrix::Zero(k, points.cols());
  for (Index i = 0; i < n; ++i) {
    ++counts[static_cast<size_t>(r.assignment[static_cast<size_t>(i)])];
    sums.row(r.assignment[static_cast<size_t>(i)]) += points.row(i);
  }
  for (Index c = 0; c < k; ++c) {
    if (counts[static_cast<size_t>(c)] > 0) r.centroids.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
  }
  bool moved = true;
  for (int pass = 0; moved && pass < 1000; ++pass) {
    moved = false;
    for (Index i = 0; i < n; ++i) {
      const Index a = r.assignment[static_cast<size_t>(i)];
      const Scalar na = static_cast<Scalar>(counts[static_cast<size_t>(a)]);
      if (na < 2) continue;
      const Scalar leave = na / (na - 1) * (points.row(i) - r.centroids.row(a)).squaredNorm();
      Index best = a;
      Scalar best_gain = 1e-12 * std::max<Scalar>(1.0, leave);
      for (Index b = 0; b < k; ++b) {
        if (b == a) continue;
        const Scalar nb = static_cast<Scalar>(counts[static_cast<size_t>(b)]);
        const Scalar join = nb / (nb + 1) * (points.row(i) - r.centroids.row(b)).squaredNorm();
        if (leave - join > best_gain) {
          best_gain = leave - join;
          best = b;
        }
      }
      if (best == a) continue;
      sums.row(a) -= points.row(i);
      sums.row(best) += points.row(i);
      --counts[static_cast<size_t>(a)];
      ++counts[static_cast<size_t>(best)];
      r.centroids.row(a) = sums.row(a) / static_cast<Scalar>(counts[static_cast<size_t>(a)]);
      r.centroids.row(best) = sums.row(best) / static_cast<Scalar>(counts[static_cast<size_t>(best)]);
      r.assignment[static_cast<size_t>(i)] = best;
      moved = true;
    }
  }
  const Scalar obj = wcss(points, r.centroids, r.assignment);
  if (obj < r.objective.back()) r.objective.push_back(obj);
}

Index nearest(const Matrix& centroids, const Eigen::Ref<const RowVector>& x) {
  Index best = 0;
  Scalar best_d = std::numeric_limits<Scalar>::infinity();
  for (Index c = 0; c < centroids.rows(); ++c) {
    const Scalar d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::string to_string(RecognizerKind kind) {
  switch (kind) {
    case RecognizerKind::kKMeans: return "kmeans";
    case RecognizerKind::kSax: return "sax";
    case RecognizerKind::kShapelet: return "shapelet";
  }
  return "unknown";
}

RecognizerKind parse_recognizer(const std::string& name) {
  if (name == "kmeans") return RecognizerKind::kKMeans;
  if (name == "sax") return RecognizerKind::kSax;
  if (name == "shapelet") return RecognizerKind::kShapelet;
  throw ValidationError("unknown recognizer '" + name + "' (expected kmeans, sax or shapelet)");
}

void StateModel::validate() const {
  if (patterns.empty()) throw ValidationError("state model: no states");
  if (tau <= 0 || dim <= 0) throw ValidationError("state model: tau and dim must be positive");
  for (const auto& p : patterns) {
    if (p.rows() != tau || p.cols() != dim) {
      throw ValidationError("state model: pattern shape " + shape_string(p) + " differs from " +
                            shape_string(tau, dim));
    }
    if (!p.allFinite()) throw ValidationError("state model: non-finite pattern value");
  }
}

RowVector normalize_distances(const RowVector& distances) {
  const Index v = distances.size();
  if (v == 0) throw ValidationError("normalize_distances: empty row");
  const Scalar hi = distances.maxCoeff();
  const Scalar lo = distances.minCoeff();
  if (hi == lo) return RowVector::Constant(v, 1.0 / static_cast<Scalar>(v));
  return ((hi - distances.array()) / (hi - lo)).matrix();
}

RecognitionFrame recognition_weights(const std::vector<Segment>& segments, const StateModel& model) {
  model.validate();
  RecognitionFrame frame;
  frame.weights.resize(static_cast<Index>(segments.size()), model.num_states());
  RowVector d(model.num_states());
  for (size_t t = 0; t < segments.size(); ++t) {
    for (Index v = 0; v < model.num_states(); ++v) d(v) = distance(segments[t], model.patterns[v]);
    frame.weights.row(static_cast<Index>(t)) = normalize_distances(d);
  }
  return frame;
}

// ---- k-means -------------------------------------------------------------

Scalar wcss(const Matrix& points, const Matrix& centroids, const std::vector<Index>& assignment) {
  Scalar total = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(assignment[static_cast<size_t>(i)])).squaredNorm();
  }
  return total;
}

KMeansResult lloyd(const Matrix& points, Index k, int max_iter, std::uint64_t seed) {
  const Index n = points.rows();
  if (k < 1) throw ValidationError("kmeans: k must be at least 1");
  if (n < k) {
    throw ValidationError("kmeans: fewer segments (" + std::to_string(n) + ") than states (" +
                          std::to_string(k) + ")");
  }
  std::mt19937_64 rng(seed);
  KMeansResult r;
  r.centroids = kmeanspp_seed(points, k, rng);
  r.assignment.assign(static_cast<size_t>(n), -1);

  for (int iter = 0; iter < std::max(1, max_iter); ++iter) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const Index c = nearest(r.centroids, points.row(i));
      if (c != r.assignment[static_cast<size_t>(i)]) {
        r.assignment[static_cast<size_t>(i)] = c;
        changed = true;
      }
    }
    r.objective.push_back(wcss(points, r.centroids, r.assignment));
    r.iterations = iter + 1;
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(r.assignment[static_cast<size_t>(i)]) += points.row(i);
      ++counts[static_cast<size_t>(r.assignment[static_cast<size_t>(i)])];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) r.centroids.row(c) = sums.row(c) / counts[static_cast<size_t>(c)];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) continue;
      Index far = 0;
      Scalar far_d = -1;
      for (Index i = 0; i < n; ++i) {
        const Scalar d = (points.row(i) - r.centroids.row(r.assignment[static_cast<size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.centroids.row(c) = points.row(far);
    }
  }
  hartigan_refine(points, r);
  return r;
}

KMeansResult kmeans(const Matrix& points, Index k, int max_iter, std::uint64_t seed, int restarts) {
  std::vector<std::uint64_t> seeds(static_cast<size_t>(std::max(1, restarts)));
  std::mt19937_64 streams(seed);
  for (auto& s : seeds) s = streams();

  KMeansResult best;
  Scalar best_obj = std::numeric_limits<Scalar>::infinity();
  for (std::uint64_t s : seeds) {
    KMeansResult r = lloyd(points, k, max_iter, s);
    if (r.objective.back() < best_obj) {
      best_obj = r.objective.back();
      best = std::move(r);
    }
  }
  return best;
}

StateModel fit_kmeans(const std::vector<Segment>& segments, Index k, int max_iter, std::uint64_t seed,
                      int restarts) {
  check_segments(segments, "fit_kmeans");
  const Matrix points = flatten_segments(segments);
  KMeansResult r = kmeans(points, k, max_iter, seed, restarts);

  StateModel model;
  model.kind = RecognizerKind::kKMeans;
  model.tau = segments.front().rows();
  model.dim = segments.front().cols();
  for (Index c = 0; c < k; ++c) model.patterns.push_back(unflatten(r.centroids.row(c), model.tau, model.dim));
  model.info = KMeansInfo{r.objective, r.iterations};
  return model;
}

// ---- SAX -----------------------------------------------------------------

Scalar normal_quantile(Scalar p) {
  if (!(p > 0 && p < 1)) throw ValidationError("normal_quantile: p must be in (0, 1)");
  // Acklam's rational approximation, then one Halley step against erfc.
  static constexpr Scalar a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr Scalar b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr Scalar c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr Scalar d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr Scalar low = 0.02425;
  Scalar x;
  if (p < low) {
    const Scalar q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - low) {
    const Scalar q = p - 0.5;
    const Scalar r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const Scalar q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const Scalar e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const Scalar u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

std::vector<Scalar> gaussian_breakpoints(int alphabet_size) {
  if (alphabet_size < 2 || alphabet_size > 20) {
    throw ValidationError("SAX alphabet size must be in [2, 20], got " + std::to_string(alphabet_size));
  }
  std::vector<Scalar> cuts;
  for (int i = 1; i < alphabet_size; ++i) {
    // The middle cut of an even alphabet is exactly zero.
    cuts.push_back(2 * i == alphabet_size ? 0.0 : normal_quantile(static_cast<Scalar>(i) / alphabet_size));
  }
  return cuts;
}

namespace {

int symbol_of(Scalar z, const std::vector<Scalar>& cuts) {
  return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), z) - cuts.begin());
}

Scalar paa_mean(const Segment& s) { return s.mean(); }

}  // namespace

StateModel fit_sax(const Series& series, Index tau, int alphabet_size) {
  if (series.dim() != 1) throw ValidationError("SAX supports univariate series only");
  const std::vector<Scalar> cuts = gaussian_breakpoints(alphabet_size);
  const std::vector<Segment> segs = segment(series, tau);

  const Scalar mean = series.values.mean();
  const Scalar var = (series.values.array() - mean).square().mean();
  const Scalar stddev = std::sqrt(var);

  SaxInfo info;
  info.alphabet = alphabet_size;
  info.breakpoints = cuts;
  info.mean = mean;
  info.stddev = stddev;
  for (int v = 0; v < alphabet_size; ++v) {
    info.levels.push_back(normal_quantile((v + 0.5) / alphabet_size));
  }

  StateModel model;
  model.kind = RecognizerKind::kSax;
  model.tau = tau;
  model.dim = 1;
  for (int v = 0; v < alphabet_size; ++v) {
    model.patterns.push_back(Matrix::Constant(tau, 1, mean + stddev * info.levels[static_cast<size_t>(v)]));
  }
  model.info = std::move(info);
  return model;
}

std::vector<int> sax_symbols(const Series& series, const StateModel& model) {
  const auto* info = std::get_if<SaxInfo>(&model.info);
  if (info == nullptr) throw ValidationError("sax_symbols: not a SAX model");
  if (series.dim() != 1) throw ValidationError("SAX supports univariate series only");
  std::vector<int> out;
  for (const Segment& s : segment(series, model.tau)) {
    if (info->stddev < 1e-12) {
      out.push_back(info->alphabet / 2);
    } else {
      out.push_back(symbol_of((paa_mean(s) - info->mean) / info->stddev, info->breakpoints));
    }
  }
  return out;
}

// ---- shapelets -----------------------------------------------------------

Scalar binary_entropy(Index positives, Index total) {
  if (total <= 0 || positives <= 0 || positives >= total) return 0.0;
  const Scalar p = static_cast<Scalar>(positives) / static_cast<Scalar>(total);
  return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
}

SplitScore best_information_gain(const std::vector<Scalar>& distances, const std::vector<int>& labels) {
  if (distances.size() != labels.size()) throw ValidationError("information gain: size mismatch");
  const Index n = static_cast<Index>(distances.size());
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return distances[static_cast<size_t>(a)] < distances[static_cast<size_t>(b)]; });
  const Index pos_total = std::count(labels.begin(), labels.end(), 1);
  const Scalar parent = binary_entropy(pos_total, n);

  SplitScore best{0.0, n > 0 ? distances[static_cast<size_t>(order.back())] : 0.0};
  Index near_pos = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    near_pos += labels[static_cast<size_t>(order[static_cast<size_t>(i)])] == 1 ? 1 : 0;
    const Scalar here = distances[static_cast<size_t>(order[static_cast<size_t>(i)])];
    const Scalar next = distances[static_cast<size_t>(order[static_cast<size_t>(i + 1)])];
    if (next == here) continue;
    const Index near_n = i + 1;
    const Index far_n = n - near_n;
    const Scalar children = (static_cast<Scalar>(near_n) * binary_entropy(near_pos, near_n) +
                             static_cast<Scalar>(far_n) * binary_entropy(pos_total - near_pos, far_n)) /
                            static_cast<Scalar>(n);
    const Scalar gain = parent - children;
    if (gain > best.gain) best = SplitScore{gain, 0.5 * (here + next)};
  }
  return best;
}

StateModel fit_shapelets(const std::vector<Segment>& segments, const std::vector<int>& labels, Index k,
                         Index candidates, std::uint64_t seed) {
  check_segments(segments, "fit_shapelets");
  const Index n = static_cast<Index>(segments.size());
  if (static_cast<Index>(labels.size()) != n) throw ValidationError("fit_shapelets: one label per segment required");
  for (int y : labels) {
    if (y != 0 && y != 1) throw ValidationError("fit_shapelets: labels must be 0 or 1");
  }
  const Index positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == n) throw ValidationError("fit_shapelets: labels contain a single class");
  if (k < 1) throw ValidationError("fit_shapelets: k must be at least 1");
  if (candidates < k) throw ValidationError("fit_shapelets: candidates must be at least k");
  if (n < k) throw ValidationError("fit_shapelets: fewer segments than states");

  // Partial Fisher-Yates draw of distinct candidate indices.
  std::mt19937_64 rng(seed);
  std::vector<Index> pool(static_cast<size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  const Index m = std::min(candidates, n);
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
  }
  pool.resize(static_cast<size_t>(m));

  ShapeletInfo info;
  std::vector<Scalar> dist(static_cast<size_t>(n));
  for (Index c : pool) {
    for (Index i = 0; i < n; ++i) dist[static_cast<size_t>(i)] = distance(segments[static_cast<size_t>(i)], segments[static_cast<size_t>(c)]);
    const SplitScore s = best_information_gain(dist, labels);
    info.ranking.push_back(ShapeletScore{c, s.gain, s.threshold});
  }
  std::stable_sort(info.ranking.begin(), info.ranking.end(),
                   [](const ShapeletScore& a, const ShapeletScore& b) { return a.gain > b.gain; });

  std::vector<Scalar> pairwise;
  for (size_t i = 0; i < pool.size(); ++i) {
    for (size_t j = i + 1; j < pool.size(); ++j) {
      pairwise.push_back(distance(segments[static_cast<size_t>(pool[i])], segments[static_cast<size_t>(pool[j])]));
    }
  }
  if (!pairwise.empty()) {
    const size_t mid = pairwise.size() / 2;
    std::nth_element(pairwise.begin(), pairwise.begin() + static_cast<std::ptrdiff_t>(mid), pairwise.end());
    info.diversity_cutoff = pairwise[mid];
    if (pairwise.size() % 2 == 0) {
      const Scalar lower = *std::max_element(pairwise.begin(), pairwise.begin() + static_cast<std::ptrdiff_t>(mid));
      info.diversity_cutoff = 0.5 * (info.diversity_cutoff + lower);
    }
  }

  std::vector<Index> skipped;
  for (const ShapeletScore& s : info.ranking) {
    if (static_cast<Index>(info.chosen.size()) == k) break;
    bool close = false;
    for (Index c : info.chosen) {
      if (distance(segments[static_cast<size_t>(s.candidate)], segments[static_cast<size_t>(c)]) < info.diversity_cutoff) {
        close = true;
        break;
      }
    }
    (close ? skipped : info.chosen).push_back(s.candidate);
  }
  // Too few diverse candidates: top up with the best of the skipped ones.
  for (Index c : skipped) {
    if (static_cast<Index>(info.chosen.size()) == k) break;
    info.chosen.push_back(c);
  }

  StateModel model;
  model.kind = RecognizerKind::kShapelet;
  model.tau = segments.front().rows();
  model.dim = segments.front().cols();
  for (Index c : info.chosen) model.patterns.push_back(segments[static_cast<size_t>(c)]);
  model.info = std::move(info);
  return model;
}

// ---- persistence ---------------------------------------------------------

std::string state_model_to_json(const StateModel& model) {
  model.validate();
  json doc;
  doc["version"] = kStateModelVersion;
  doc["kind"] = to_string(model.kind);
  doc["tau"] = model.tau;
  doc["dim"] = model.dim;
  json patterns = json::array();
  for (const Matrix& p : model.patterns) {
    json row = json::array();
    for (Index r = 0; r < p.rows(); ++r) {
      for (Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
    }
    patterns.push_back(std::move(row));
  }
  doc["patterns"] = std::move(patterns);

  json meta = json::object();
  if (const auto* km = std::get_if<KMeansInfo>(&model.info)) {
    meta["objective"] = km->objective;
    meta["iterations"] = km->iterations;
  } else if (const auto* sax = std::get_if<SaxInfo>(&model.info)) {
    meta["alphabet"] = sax->alphabet;
    meta["breakpoints"] = sax->breakpoints;
    meta["levels"] = sax->levels;
    meta["mean"] = sax->mean;
    meta["stddev"] = sax->stddev;
  } else if (const auto* sh = std::get_if<ShapeletInfo>(&model.info)) {
    json ranking = json::array();
    for (const auto& s : sh->ranking) {
      ranking.push_back({{"candidate", s.candidate}, {"gain", s.gain}, {"threshold", s.threshold}});
    }
    meta["ranking"] = std::move(ranking);
    meta["chosen"] = sh->chosen;
    meta["diversity_cutoff"] = sh->diversity_cutoff;
  }
  doc["metadata"] = std::move(meta);
  return doc.dump(2) + "\n";
}

StateModel state_model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("state model: malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("version").get<int>() != kStateModelVersion) {
      throw ValidationError("state model: unsupported version " + doc.at("version").dump());
    }
    StateModel model;
    model.kind = parse_recognizer(doc.at("kind").get<std::string>());
    model.tau = doc.at("tau").get<Index>();
    model.dim = doc.at("dim").get<Index>();
    for (const auto& row : doc.at("patterns")) {
      const auto flat = row.get<std::vector<Scalar>>();
      if (static_cast<Index>(flat.size()) != model.tau * model.dim) {
        throw ValidationError("state model: pattern length does not match tau*dim");
      }
      model.patterns.push_back(unflatten(Eigen::Map<const RowVector>(flat.data(), static_cast<Index>(flat.size())),
                                         model.tau, model.dim));
    }
    const json& meta = doc.at("metadata");
    switch (model.kind) {
      case RecognizerKind::kKMeans:
        model.info = KMeansInfo{meta.value("objective", std::vector<Scalar>{}), meta.value("iterations", 0)};
        break;
      case RecognizerKind::kSax: {
        SaxInfo info;
        info.alphabet = meta.at("alphabet").get<int>();
        info.breakpoints = meta.at("breakpoints").get<std::vector<Scalar>>();
        info.levels = meta.at("levels").get<std::vector<Scalar>>();
        info.mean = meta.at("mean").get<Scalar>();
        info.stddev = meta.at("stddev").get<Scalar>();
        model.info = std::move(info);
        break;
      }
      case RecognizerKind::kShapelet: {
        ShapeletInfo info;
        for (const auto& s : meta.at("ranking")) {
          info.ranking.push_back(ShapeletScore{s.at("candidate").get<Index>(), s.at("gain").get<Scalar>(),
                                               s.at("threshold").get<Scalar>()});
        }
        info.chosen = meta.at("chosen").get<std::vector<Index>>();
        info.diversity_cutoff = meta.at("diversity_cutoff").get<Scalar>();
        model.info = std::move(info);
        break;
      }
    }
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("state model: ") + e.what());
  }
}

}  // namespace evonet
