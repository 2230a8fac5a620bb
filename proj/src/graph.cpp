#include "evonet/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace evonet {

namespace {

constexpr int kGraphVersion = 1;
constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

bool same_length(Scalar a, Scalar b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

std::string fmt(const char* pattern, Scalar v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

void require_square(const Matrix& m, const char* who) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(who) + ": snapshot must be square, got " + shape_string(m));
}

void write_dot(std::ostringstream& out, const Matrix& m, const std::string& name, Scalar threshold) {
  out << "digraph " << name << " {\n";
  for (Index v = 0; v < m.rows(); ++v) out << "  s" << v << ";\n";
  for (Index a = 0; a < m.rows(); ++a) {
    for (Index b = 0; b < m.cols(); ++b) {
      if (m(a, b) >= threshold && m(a, b) > 0) {
        out << "  s" << a << " -> s" << b << " [label=\"" << fmt("%.4f", m(a, b))
            << "\", penwidth=" << fmt("%.4f", 5.0 * m(a, b)) << "];\n";
      }
    }
  }
  out << "}\n";
}

void write_json_snapshot(std::ostringstream& out, const Matrix& m, Index t, Scalar threshold) {
  out << "    {\"t\": " << t << ", \"edges\": [";
  bool first = true;
  for (Index a = 0; a < m.rows(); ++a) {
    for (Index b = 0; b < m.cols(); ++b) {
      if (m(a, b) < threshold || m(a, b) == 0) continue;
      out << (first ? "" : ", ") << "{\"from\": " << a << ", \"to\": " << b << ", \"w\": " << fmt("%.17g", m(a, b))
          << "}";
      first = false;
    }
  }
  out << "]}";
}

std::string write_json(const std::vector<Matrix>& snapshots, Index num_states, Scalar threshold) {
  std::ostringstream out;
  out << "{\n  \"version\": " << kGraphVersion << ",\n  \"num_states\": " << num_states
      << ",\n  \"snapshots\": [\n";
  for (size_t i = 0; i < snapshots.size(); ++i) {
    write_json_snapshot(out, snapshots[i], static_cast<Index>(i) + 1, threshold);
    out << (i + 1 < snapshots.size() ? ",\n" : "\n");
  }
  out << "  ]\n}\n";
  return out.str();
}

}  // namespace

EvoStateGraph build_graph_sequence(const RecognitionFrame& frame) {
  if (frame.steps() < 2) {
    throw ValidationError("build_graph: T < 2 (need at least two segments, got " + std::to_string(frame.steps()) + ")");
  }
  EvoStateGraph g;
  g.num_states = frame.num_states();
  g.snapshots.reserve(static_cast<size_t>(frame.steps() - 1));
  for (Index t = 1; t < frame.steps(); ++t) {
    g.snapshots.push_back(transition_snapshot(frame.weights.row(t - 1), frame.weights.row(t)));
  }
  return g;
}

Matrix in_out_adjacency(const Matrix& snapshot) {
  require_square(snapshot, "in_out_adjacency");
  Matrix stacked(2 * snapshot.rows(), snapshot.cols());
  stacked << snapshot, snapshot.transpose();
  return stacked;
}

Vector pagerank(const Matrix& snapshot, Scalar damping, Scalar tol, int max_iter) {
  require_square(snapshot, "pagerank");
  if (!(damping > 0 && damping < 1)) throw ValidationError("pagerank: damping must be in (0, 1)");
  if ((snapshot.array() < 0).any()) throw ValidationError("pagerank: negative edge weight");
  const Index n = snapshot.rows();
  const Vector out_mass = snapshot.rowwise().sum();
  Vector x = Vector::Constant(n, 1.0 / static_cast<Scalar>(n));
  for (int iter = 0; iter < max_iter; ++iter) {
    Scalar dangling = 0;
    Vector next = Vector::Zero(n);
    for (Index i = 0; i < n; ++i) {
      if (out_mass(i) > 0) {
        next += (x(i) / out_mass(i)) * snapshot.row(i).transpose();
      } else {
        dangling += x(i);
      }
    }
    next = damping * (next.array() + dangling / static_cast<Scalar>(n)).matrix();
    next.array() += (1 - damping) / static_cast<Scalar>(n);
    const Scalar change = (next - x).lpNorm<1>();
    x = next;
    if (change < tol) break;
  }
  return x / x.sum();
}

Centrality centrality(const Matrix& snapshot, Scalar epsilon) {
  require_square(snapshot, "centrality");
  if (!(epsilon > 0)) throw ValidationError("centrality: epsilon must be positive");
  const Index n = snapshot.rows();
  Matrix length = Matrix::Constant(n, n, kInf);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (a != b && snapshot(a, b) >= epsilon) length(a, b) = 1.0 / snapshot(a, b);
    }
  }

  Centrality c{Vector::Zero(n), Vector::Zero(n)};
  std::vector<Scalar> dist(static_cast<size_t>(n));
  std::vector<Scalar> sigma(static_cast<size_t>(n));
  std::vector<Scalar> delta(static_cast<size_t>(n));
  std::vector<std::vector<Index>> preds(static_cast<size_t>(n));
  std::vector<bool> done(static_cast<size_t>(n));
  std::vector<Index> order;

  for (Index s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(done.begin(), done.end(), false);
    for (auto& p : preds) p.clear();
    order.clear();
    dist[static_cast<size_t>(s)] = 0;
    sigma[static_cast<size_t>(s)] = 1;

    // Dense Dijkstra; |V| is small.
    for (;;) {
      Index u = -1;
      for (Index v = 0; v < n; ++v) {
        if (!done[static_cast<size_t>(v)] && std::isfinite(dist[static_cast<size_t>(v)]) &&
            (u < 0 || dist[static_cast<size_t>(v)] < dist[static_cast<size_t>(u)])) {
          u = v;
        }
      }
      if (u < 0) break;
      done[static_cast<size_t>(u)] = true;
      order.push_back(u);
      for (Index v = 0; v < n; ++v) {
        if (!std::isfinite(length(u, v)) || done[static_cast<size_t>(v)]) continue;
        const Scalar alt = dist[static_cast<size_t>(u)] + length(u, v);
        Scalar& dv = dist[static_cast<size_t>(v)];
        if (std::isfinite(dv) && same_length(alt, dv)) {
          sigma[static_cast<size_t>(v)] += sigma[static_cast<size_t>(u)];
          preds[static_cast<size_t>(v)].push_back(u);
        } else if (alt < dv) {
          dv = alt;
          sigma[static_cast<size_t>(v)] = sigma[static_cast<size_t>(u)];
          preds[static_cast<size_t>(v)].assign(1, u);
        }
      }
    }

    Scalar total = 0;
    for (Index v : order) total += dist[static_cast<size_t>(v)];
    const Index reached = static_cast<Index>(order.size());
    c.closeness(s) = reached > 1 ? static_cast<Scalar>(reached - 1) / total : 0.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const Index w = *it;
      for (Index v : preds[static_cast<size_t>(w)]) {
        delta[static_cast<size_t>(v)] += sigma[static_cast<size_t>(v)] / sigma[static_cast<size_t>(w)] *
                                         (1.0 + delta[static_cast<size_t>(w)]);
      }
      if (w != s) c.betweenness(w) += delta[static_cast<size_t>(w)];
    }
  }
  return c;
}

std::vector<GraphStats> graph_stats(const EvoStateGraph& graph, Scalar epsilon, Scalar damping, Scalar tol) {
  std::vector<GraphStats> out;
  out.reserve(graph.snapshots.size());
  for (const Matrix& m : graph.snapshots) {
    Centrality c = centrality(m, epsilon);
    out.push_back(GraphStats{std::move(c.betweenness), std::move(c.closeness), pagerank(m, damping, tol),
                             in_degree(m).transpose()});
  }
  return out;
}

Matrix aggregate_graph(const EvoStateGraph& graph, Index begin, Index end) {
  if (begin < 0 || end > graph.size() || begin >= end) {
    throw ValidationError("aggregate_graph: empty or out-of-range snapshot interval [" + std::to_string(begin) + ", " +
                          std::to_string(end) + ")");
  }
  Matrix acc = Matrix::Zero(graph.num_states, graph.num_states);
  for (Index t = begin; t < end; ++t) acc += graph.snapshots[static_cast<size_t>(t)];
  return acc / static_cast<Scalar>(end - begin);
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "dot") return ExportFormat::kDot;
  if (name == "json") return ExportFormat::kJson;
  throw ValidationError("unknown export format '" + name + "' (expected dot or json)");
}

std::string export_graph(const EvoStateGraph& graph, ExportFormat format, Scalar threshold) {
  if (!(threshold >= 0)) throw ValidationError("export: threshold must be non-negative");
  if (format == ExportFormat::kJson) return write_json(graph.snapshots, graph.num_states, threshold);
  std::ostringstream out;
  for (size_t i = 0; i < graph.snapshots.size(); ++i) {
    write_dot(out, graph.snapshots[i], "snapshot_" + std::to_string(i + 1), threshold);
  }
  return out.str();
}

std::string export_snapshot(const Matrix& snapshot, ExportFormat format, Scalar threshold) {
  require_square(snapshot, "export");
  if (!(threshold >= 0)) throw ValidationError("export: threshold must be non-negative");
  if (format == ExportFormat::kJson) return write_json({snapshot}, snapshot.rows(), threshold);
  std::ostringstream out;
  write_dot(out, snapshot, "evo", threshold);
  return out.str();
}

EvoStateGraph import_graph_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(text);
    if (doc.at("version").get<int>() != kGraphVersion) throw ValidationError("graph: unsupported version");
    EvoStateGraph g;
    g.num_states = doc.at("num_states").get<Index>();
    if (g.num_states < 1) throw ValidationError("graph: num_states must be positive");
    for (const json& snap : doc.at("snapshots")) {
      Matrix m = Matrix::Zero(g.num_states, g.num_states);
      for (const json& e : snap.at("edges")) {
        const Index a = e.at("from").get<Index>();
        const Index b = e.at("to").get<Index>();
        if (a < 0 || b < 0 || a >= g.num_states || b >= g.num_states) {
          throw ValidationError("graph: edge endpoint out of range");
        }
        m(a, b) = e.at("w").get<Scalar>();
      }
      g.snapshots.push_back(std::move(m));
    }
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph: malformed JSON: ") + e.what());
  }
}

}  // namespace evonet
