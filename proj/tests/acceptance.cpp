// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Usage: evonet_acceptance --cli <path to evonet> --workdir <dir> [--only N]
#include "evonet/graph.hpp"
#include "evonet/pipeline.hpp"
#include "evonet/synth.hpp"
#include "evonet/training.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

using namespace evonet;

namespace {

constexpr Scalar kWeightTol = 1e-12;        // criterion 1
constexpr Scalar kStructureTol = 1e-9;      // criterion 2
constexpr Scalar kGradTol = 1e-4;           // criterion 3
constexpr Scalar kPagerankTol = 1e-8;       // criterion 4
constexpr Scalar kBetweennessTol = 1e-12;   // criterion 4, summation-order rounding only
constexpr Scalar kMinAuc = 0.90;            // criterion 5
constexpr Scalar kMinGap = 0.05;            // criterion 5
constexpr Scalar kScaleLow = 3.0;           // criterion 7
constexpr Scalar kScaleHigh = 6.0;          // criterion 7
constexpr double kFastBudget = 5.0;         // seconds, criteria 1 and 2
constexpr double kGradBudget = 60.0;        // seconds, criterion 3
constexpr double kAblationBudget = 900.0;   // seconds, criterion 5

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

Matrix gaussian(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<Scalar> g(0.0, 1.0);
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  }
  return m;
}

// ---- 1 ---------------------------------------------------------------------

void criterion_normalization() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<Index> states(1, 10), len(1, 12), dims(1, 3);
  Index rows = 0, degenerate = 0, bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    StateModel model;
    model.tau = len(rng);
    model.dim = dims(rng);
    const Index k = states(rng);
    const bool collapse = trial % 10 == 0;  // every pattern identical: all rows degenerate
    const Matrix shared = gaussian(model.tau, model.dim, rng);
    for (Index v = 0; v < k; ++v) model.patterns.push_back(collapse ? shared : gaussian(model.tau, model.dim, rng));
    std::vector<Segment> segs;
    for (int t = 0; t < 8; ++t) segs.push_back(gaussian(model.tau, model.dim, rng));
    if (trial % 7 == 0) segs.push_back(model.patterns.front());  // exact hit
    const Matrix w = recognition_weights(segs, model).weights;
    for (Index t = 0; t < w.rows(); ++t) {
      ++rows;
      RowVector d(k);
      for (Index v = 0; v < k; ++v) d(v) = distance(segs[static_cast<size_t>(t)], model.patterns[static_cast<size_t>(v)]);
      const bool flat = d.maxCoeff() == d.minCoeff();
      bool ok = (w.row(t).array() >= 0).all() && (w.row(t).array() <= 1).all();
      if (flat) {
        ++degenerate;
        ok = ok && (w.row(t).array() - 1.0 / static_cast<Scalar>(k)).abs().maxCoeff() <= kWeightTol;
      } else {
        ok = ok && std::abs(w.row(t).maxCoeff() - 1.0) <= kWeightTol && std::abs(w.row(t).minCoeff()) <= kWeightTol;
      }
      if (!ok) ++bad;
    }
  }
  const double secs = seconds_since(t0);
  report(1, bad == 0 && degenerate > 0 && secs < kFastBudget,
         fmt("%ld rows (%ld degenerate), %ld violations, %.2fs (budget %.0fs)", static_cast<long>(rows),
             static_cast<long>(degenerate), static_cast<long>(bad), secs, kFastBudget));
}

// ---- 2 ---------------------------------------------------------------------

void criterion_structure() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<Index> states(1, 12), steps(2, 15);
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);
  Scalar worst_ratio = 0, worst_mass = 0;
  Index snapshots = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    RecognitionFrame f;
    f.weights.resize(steps(rng), states(rng));
    for (Index i = 0; i < f.weights.rows(); ++i) {
      for (Index j = 0; j < f.weights.cols(); ++j) f.weights(i, j) = unit(rng);
    }
    const EvoStateGraph g = build_graph_sequence(f);
    const Index n = f.num_states();
    for (Index t = 0; t < g.size(); ++t) {
      ++snapshots;
      const Matrix& m = g.snapshots[static_cast<size_t>(t)];
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          for (Index k = 0; k < n; ++k) {
            for (Index l = 0; l < n; ++l) {
              worst_ratio = std::max(worst_ratio, std::abs(m(i, j) * m(k, l) - m(i, l) * m(k, j)));
            }
          }
        }
      }
      worst_mass = std::max(worst_mass, std::abs(m.sum() - f.weights.row(t).sum() * f.weights.row(t + 1).sum()));
    }
  }
  const double secs = seconds_since(t0);
  report(2, worst_ratio <= kStructureTol && worst_mass <= kStructureTol && secs < kFastBudget,
         fmt("%ld snapshots, max cross-ratio residual %.2e, max mass residual %.2e, %.2fs (budget %.0fs)",
             static_cast<long>(snapshots), worst_ratio, worst_mass, secs, kFastBudget));
}

// ---- 3 ---------------------------------------------------------------------

void criterion_gradients() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (MessageKind kind : {MessageKind::kGgnn, MessageKind::kGat, MessageKind::kPool}) {
    ModelConfig c;
    c.num_states = 2;
    c.tau = 4;
    c.dim = 1;
    c.u_size = 8;
    c.hg_size = 8;
    c.message = kind;
    const GradCheckReport r = model_grad_check(c, 0, 1e-5, kGradTol);
    // Worst error per group: msg, attn, node, graph, readout, cls.
    std::map<std::string, Scalar> group;
    for (const GradCheckEntry& e : r.worst_per_param) {
      const std::string g = e.name.substr(0, e.name.find('.'));
      group[g] = std::max(group[g], e.rel_error);
    }
    const bool has_all = group.count("attn") && group.count("node") && group.count("graph") &&
                         group.count("readout") && group.count("cls") &&
                         (kind == MessageKind::kPool || group.count("msg"));
    pass = pass && has_all && r.max_rel_error < kGradTol;
    detail += to_string(kind) + " max " + fmt("%.2e", r.max_rel_error) + " [";
    for (const auto& [g, e] : group) detail += g + fmt(" %.1e ", e);
    detail.back() = ']';
    detail += "; ";
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < kGradBudget;
  report(3, pass, detail + fmt("tol %.0e, %.2fs (budget %.0fs)", kGradTol, secs, kGradBudget));
}

// ---- 4 ---------------------------------------------------------------------

Scalar two_means_optimum(const Matrix& pts) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << pts.rows()); ++mask) {
    Matrix c = Matrix::Zero(2, pts.cols());
    Scalar n[2] = {0, 0};
    for (Index i = 0; i < pts.rows(); ++i) {
      c.row((mask >> i) & 1u) += pts.row(i);
      n[(mask >> i) & 1u] += 1;
    }
    c.row(0) /= n[0];
    c.row(1) /= n[1];
    Scalar cost = 0;
    for (Index i = 0; i < pts.rows(); ++i) cost += (pts.row(i) - c.row((mask >> i) & 1u)).squaredNorm();
    best = std::min(best, cost);
  }
  return best;
}

Vector pagerank_solve(const Matrix& m, Scalar d) {
  const Index n = m.rows();
  Matrix s(n, n);
  for (Index i = 0; i < n; ++i) {
    const Scalar out = m.row(i).sum();
    s.row(i) = out > 0 ? (m.row(i) / out).eval() : RowVector::Constant(n, 1.0 / static_cast<Scalar>(n));
  }
  return (Matrix::Identity(n, n) - d * s.transpose()).fullPivLu().solve(Vector::Constant(n, (1 - d) / static_cast<Scalar>(n)));
}

Vector betweenness_fw(const Matrix& m, Scalar eps) {
  const Index n = m.rows();
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  Matrix dist = Matrix::Constant(n, n, inf), cnt = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    dist(i, i) = 0;
    cnt(i, i) = 1;
    for (Index j = 0; j < n; ++j) {
      if (i != j && m(i, j) >= eps) {
        dist(i, j) = 1.0 / m(i, j);
        cnt(i, j) = 1;
      }
    }
  }
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (i == k || j == k || i == j) continue;
        const Scalar via = dist(i, k) + dist(k, j);
        if (via < dist(i, j)) {
          dist(i, j) = via;
          cnt(i, j) = cnt(i, k) * cnt(k, j);
        } else if (via == dist(i, j) && via < inf) {
          cnt(i, j) += cnt(i, k) * cnt(k, j);
        }
      }
    }
  }
  Vector b = Vector::Zero(n);
  for (Index v = 0; v < n; ++v) {
    for (Index s = 0; s < n; ++s) {
      for (Index t = 0; t < n; ++t) {
        if (s == t || s == v || t == v || dist(s, t) == inf) continue;
        if (dist(s, v) + dist(v, t) == dist(s, t)) b(v) += cnt(s, v) * cnt(v, t) / cnt(s, t);
      }
    }
  }
  return b;
}

void criterion_oracles() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<Scalar> unit(0.0, 1.0);

  int kmeans_ok = 0;
  for (int i = 0; i < 10; ++i) {
    Matrix pts = gaussian(6, 2, rng);
    pts.topRows(3).array() += 1.5;
    const KMeansResult r = kmeans(pts, 2, 100, static_cast<std::uint64_t>(i));
    if (std::abs(wcss(pts, r.centroids, r.assignment) - two_means_optimum(pts)) <= 1e-12) ++kmeans_ok;
  }

  Scalar pr_err = 0;
  int bc_ok = 0;
  const Scalar levels[5] = {0.0, 0.0, 1.0, 0.5, 0.25};
  std::uniform_int_distribution<int> pick(0, 4);
  for (int i = 0; i < 10; ++i) {
    Matrix m(5, 5);
    for (Index r = 0; r < 5; ++r) {
      for (Index c = 0; c < 5; ++c) m(r, c) = unit(rng) < 0.4 ? 0.0 : unit(rng);
    }
    if (i % 3 == 0) m.row(i % 5).setZero();
    pr_err = std::max(pr_err, (pagerank(m) - pagerank_solve(m, 0.85)).cwiseAbs().maxCoeff());
    Matrix q(5, 5);
    for (Index r = 0; r < 5; ++r) {
      for (Index c = 0; c < 5; ++c) q(r, c) = levels[pick(rng)];
    }
    if ((centrality(q).betweenness - betweenness_fw(q, 1e-3)).cwiseAbs().maxCoeff() <= kBetweennessTol) ++bc_ok;
  }

  int auc_ok = 0;
  std::uniform_int_distribution<int> grid(0, 40);
  for (int i = 0; i < 10; ++i) {
    std::vector<Scalar> s;
    std::vector<int> y;
    for (int k = 0; k < 200; ++k) {
      s.push_back(grid(rng) / 40.0);
      y.push_back(unit(rng) < 0.35);
    }
    Scalar wins = 0, pairs = 0;
    for (size_t a = 0; a < s.size(); ++a) {
      for (size_t b = 0; b < s.size(); ++b) {
        if (y[a] == 1 && y[b] == 0) {
          pairs += 1;
          wins += s[a] > s[b] ? 1.0 : (s[a] == s[b] ? 0.5 : 0.0);
        }
      }
    }
    if (auc_score(s, y) == wins / pairs) ++auc_ok;
  }
  report(4, kmeans_ok == 10 && pr_err <= kPagerankTol && bc_ok == 10 && auc_ok == 10,
         fmt("k-means %d/10 optimal, pagerank max err %.1e (tol %.0e), betweenness %d/10 within %.0e, AUC %d/10 exact",
             kmeans_ok, pr_err, kPagerankTol, bc_ok, kBetweennessTol, auc_ok));
}

// ---- 5 and 6 ---------------------------------------------------------------

void criteria_synthetic() {
  const auto t0 = Clock::now();
  const SynthParams gen = default_synth_params();
  Scalar evo_sum = 0, wog_sum = 0, trig_sum = 0, non_sum = 0;
  std::string per_seed;
  std::string alpha_seed;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const std::vector<Series> train_series = synth_generate(gen, 500, seed).series;
    const std::vector<Series> test_series = synth_generate(gen, 200, seed + 1000).series;
    RunConfig rc;
    rc.tau = gen.tau();
    rc.num_states = 3;
    rc.message = MessageKind::kPool;
    rc.seed = seed;
    const StateModel states = fit_states(train_series, rc);
    const std::vector<Sequence> all = make_sequences(train_series, states);
    const std::vector<Sequence> fit(all.begin(), all.begin() + 450), val(all.begin() + 450, all.end());
    const std::vector<Sequence> test = make_sequences(test_series, states);
    const ModelConfig mc = rc.model_config(gen.dim());

    EvoNet net(mc, flatten_segments(states.patterns), derive_seed(seed, "init"));
    train(net, fit, val, rc.train_config());
    const Scalar evo_auc = evaluate(net, test).auc;
    const WithoutGraph wog = baseline_wog(mc, fit, val, rc.train_config());
    const Scalar wog_auc = evaluate(wog, test).auc;
    evo_sum += evo_auc;
    wog_sum += wog_auc;
    per_seed += fmt(" seed%llu %.3f/%.3f", static_cast<unsigned long long>(seed), evo_auc, wog_auc);

    // Reported attention at step s (s = 1..T-2) belongs to the transition from
    // segment s-1 to segment s; a trigger step is one whose transition fires the event.
    Scalar trig = 0, non = 0;
    Index nt = 0, nn = 0;
    for (const Sequence& s : test) {
      std::vector<Scalar> alphas;
      net.step_probabilities(s, s.segments() - 2, &alphas);
      const std::vector<Scalar> reported = normalize_attention(alphas);
      for (size_t k = 0; k < reported.size(); ++k) {
        if (s.labels[k + 2] == 1) {
          trig += reported[k];
          ++nt;
        } else {
          non += reported[k];
          ++nn;
        }
      }
    }
    trig /= static_cast<Scalar>(nt);
    non /= static_cast<Scalar>(nn);
    trig_sum += trig;
    non_sum += non;
    alpha_seed += fmt(" seed%llu %.5f/%.5f", static_cast<unsigned long long>(seed), trig, non);
  }
  const double secs = seconds_since(t0);
  const Scalar evo = evo_sum / 3, wog = wog_sum / 3;
  report(5, evo >= kMinAuc && evo - wog >= kMinGap && secs < kAblationBudget,
         fmt("mean test AUC EvoNet %.4f (min %.2f), w/o G %.4f, gap %.4f (min %.2f);", evo, kMinAuc, wog, evo - wog,
             kMinGap) +
             per_seed + fmt("; %.0fs (budget %.0fs)", secs, kAblationBudget));
  report(6, trig_sum / 3 > non_sum / 3,
         fmt("mean reported alpha trigger %.5f vs non-trigger %.5f;", trig_sum / 3, non_sum / 3) + alpha_seed);
}

// ---- 7 ---------------------------------------------------------------------

double graph_build_seconds(Index states, Index steps, std::mt19937_64& rng) {
  RecognitionFrame f;
  f.weights = (gaussian(steps, states, rng).array().abs()).matrix();
  const auto t0 = Clock::now();
  const EvoStateGraph g = build_graph_sequence(f);
  const double secs = seconds_since(t0);
  if (g.size() != steps - 1) std::abort();
  return secs;
}

void criterion_scaling() {
  std::mt19937_64 rng(707);
  const Index steps = 4000;
  graph_build_seconds(64, steps, rng);  // warm-up
  std::vector<double> ratios, t32, t64;
  for (int run = 0; run < 5; ++run) {
    t32.push_back(graph_build_seconds(32, steps, rng));
    t64.push_back(graph_build_seconds(64, steps, rng));
  }
  std::sort(t32.begin(), t32.end());
  std::sort(t64.begin(), t64.end());
  const double ratio = t64[2] / t32[2];
  report(7, ratio >= kScaleLow && ratio <= kScaleHigh,
         fmt("T=%ld, median build %.4fs at |V|=32, %.4fs at |V|=64, ratio %.2f (allowed [%.0f, %.0f])",
             static_cast<long>(steps), t32[2], t64[2], ratio, kScaleLow, kScaleHigh));
}

// ---- 8 ---------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_determinism(const std::string& cli, const std::filesystem::path& work) {
  std::filesystem::create_directories(work);
  std::string metrics[2];
  bool ran = true;
  for (int run = 0; run < 2; ++run) {
    const std::filesystem::path dir = work / ("run" + std::to_string(run));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const std::string d = dir.string();
    const std::string q = "\"" + cli + "\"";
    const std::string cmds[3] = {
        q + " synth --output " + d + "/data.csv --num-series 60 --segments 12 --seed 5",
        q + " train --input " + d + "/data.csv --output " + d + "/model.json --seed 5 --iterations 4 --batch-size 8"
            " --u-size 8 --hg-size 8 --message-kind gat",
        q + " evaluate --input " + d + "/data.csv --model " + d + "/model.json --output " + d + "/metrics.json"};
    for (const std::string& c : cmds) {
      if (std::system((c + " > " + d + "/log.txt 2>&1").c_str()) != 0) ran = false;
    }
    metrics[run] = slurp(dir / "metrics.json");
  }
  report(8, ran && !metrics[0].empty() && metrics[0] == metrics[1],
         fmt("synth -> train -> evaluate twice: commands %s, metrics JSON %zu bytes, %s", ran ? "ok" : "failed",
             metrics[0].size(), metrics[0] == metrics[1] ? "identical" : "different"));
}

// ---- 9 ---------------------------------------------------------------------

void criterion_schedule() {
  const TrainConfig c;
  const Scalar a = lr_at(0, c), b = lr_at(20, c), d = lr_at(40, c);
  report(9, a == 0.001 && b == 0.0001 && d == 0.00001,
         fmt("lr_at(0)=%.17g lr_at(20)=%.17g lr_at(40)=%.17g (exact comparison)", a, b, d));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::string cli, workdir = "acceptance_work";
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the evonet executable")->required();
  app.add_option("--workdir", workdir, "scratch directory for end-to-end runs");
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  if (want(1)) criterion_normalization();
  if (want(2)) criterion_structure();
  if (want(3)) criterion_gradients();
  if (want(4)) criterion_oracles();
  if (want(5) || want(6)) criteria_synthetic();
  if (want(7)) criterion_scaling();
  if (want(8)) criterion_determinism(cli, workdir);
  if (want(9)) criterion_schedule();
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
