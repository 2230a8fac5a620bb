// evonet: command-line front end for the time-series -> state graph -> EvoNet pipeline.
#include "evonet/checkpoint.hpp"
#include "evonet/dataset.hpp"
#include "evonet/graph.hpp"
#include "evonet/pipeline.hpp"
#include "evonet/run_config.hpp"
#include "evonet/synth.hpp"
#include "evonet/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace evonet;

namespace {

// Per-command overrides of RunConfig keys.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<Index> tau;
  std::optional<Index> num_states;
  std::optional<std::string> recognizer;
  std::optional<std::string> message_kind;
  std::optional<bool> attention;
  std::optional<Index> u_size;
  std::optional<Index> hg_size;
  std::optional<int> iterations;
  std::optional<Index> batch_size;
  std::optional<Scalar> learning_rate;
  std::optional<int> warmup_steps;
  std::optional<bool> final_step_only;
  std::optional<bool> class_weighting;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "run configuration JSON");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--tau", o.tau, "segment length");
  cmd->add_option("--num-states", o.num_states, "number of states |V| (SAX alphabet size)");
  cmd->add_option("--recognizer", o.recognizer, "kmeans | sax | shapelet");
}

void add_model(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--message-kind", o.message_kind, "pool | ggnn | gat");
  cmd->add_option("--attention", o.attention, "temporal attention on/off (true|false)");
  cmd->add_option("--u-size", o.u_size, "graph representation size |U|");
  cmd->add_option("--hg-size", o.hg_size, "readout size |h_G|");
  cmd->add_option("--iterations", o.iterations, "training iterations (passes over the data)");
  cmd->add_option("--batch-size", o.batch_size, "samples per optimizer step");
  cmd->add_option("--learning-rate", o.learning_rate, "initial learning rate");
  cmd->add_option("--warmup-steps", o.warmup_steps, "first supervised step");
  cmd->add_option("--final-step-only", o.final_step_only, "supervise only the last step");
  cmd->add_option("--class-weighting", o.class_weighting, "inverse-frequency class weights");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : run_config_from_json(read_file(o.config_path));
  if (o.seed) c.seed = *o.seed;
  if (o.tau) c.tau = *o.tau;
  if (o.num_states) c.num_states = *o.num_states;
  if (o.recognizer) c.recognizer = parse_recognizer(*o.recognizer);
  if (o.message_kind) c.message = parse_message_kind(*o.message_kind);
  if (o.attention) c.attention = *o.attention;
  if (o.u_size) c.u_size = *o.u_size;
  if (o.hg_size) c.hg_size = *o.hg_size;
  if (o.iterations) c.training.iterations = *o.iterations;
  if (o.batch_size) c.training.batch_size = *o.batch_size;
  if (o.learning_rate) c.training.learning_rate = *o.learning_rate;
  if (o.warmup_steps) c.training.warmup_steps = *o.warmup_steps;
  if (o.final_step_only) c.training.final_step_only = *o.final_step_only;
  if (o.class_weighting) c.training.class_weighting = *o.class_weighting;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::vector<Index> start_times(const std::vector<Series>& series) {
  std::vector<Index> t;
  for (const Series& s : series) t.push_back(s.start);
  return t;
}

std::vector<Series> pick(const std::vector<Series>& series, const std::vector<Index>& idx) {
  std::vector<Series> out;
  for (Index k : idx) out.push_back(series[static_cast<size_t>(k)]);
  return out;
}

const Series& find_series(const std::vector<Series>& series, const std::string& id) {
  if (id.empty()) return series.front();
  for (const Series& s : series) {
    if (s.id == id) return s;
  }
  throw ValidationError("no series named '" + id + "'");
}

std::string fmt17(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evonet: evolutionary state graphs and EvoNet event prediction"};
  app.require_subcommand(1);

  std::string input, output, states_path, model_path, series_id, format = "dot", loss_csv, model_kind = "evonet",
                                                                   partition = "test", generator_path, range;
  Scalar threshold = -1, epsilon = 1e-3, step = 1e-5, tol = 1e-4, noise = 0.3;
  Index num_series = 100, segments = 20;
  Overrides o;

  auto* synth = app.add_subcommand("synth", "generate a synthetic labeled dataset (CSV + sidecar JSON)");
  synth->add_option("--output", output, "CSV path")->required();
  synth->add_option("--num-series", num_series, "number of series");
  synth->add_option("--segments", segments, "segments per series");
  synth->add_option("--noise", noise, "Gaussian noise sigma");
  synth->add_option("--generator", generator_path, "generator JSON (prototypes, transition, trigger)");
  synth->add_option("--seed", o.seed, "seed");
  synth->add_option("--config", o.config_path, "run configuration JSON (seed only)");

  auto* seg = app.add_subcommand("segment", "cut series into tau-length segments");
  seg->add_option("--input", input, "dataset CSV")->required();
  seg->add_option("--output", output, "segments CSV (default stdout)");
  add_common(seg, o);

  auto* fit = app.add_subcommand("fit-states", "learn state patterns");
  fit->add_option("--input", input, "dataset CSV")->required();
  fit->add_option("--output", output, "state model JSON (default stdout)");
  add_common(fit, o);

  auto* build = app.add_subcommand("build-graph", "build the evolutionary state graph of one series");
  build->add_option("--input", input, "dataset CSV")->required();
  build->add_option("--states", states_path, "state model JSON")->required();
  build->add_option("--series", series_id, "series id (default: first)");
  build->add_option("--output", output, "graph JSON (default stdout)");

  auto* stats = app.add_subcommand("graph-stats", "betweenness, closeness, pagerank, in-degree per snapshot");
  stats->add_option("--input", input, "graph JSON")->required();
  stats->add_option("--output", output, "CSV (default stdout)");
  stats->add_option("--epsilon", epsilon, "edge pruning threshold for centrality");

  auto* exp = app.add_subcommand("export", "write a graph as DOT or JSON");
  exp->add_option("--input", input, "graph JSON")->required();
  exp->add_option("--format", format, "dot | json");
  exp->add_option("--threshold", threshold, "minimum edge weight (default 0)");
  exp->add_option("--aggregate", range, "average snapshots BEGIN:END (1-based, inclusive) into one");
  exp->add_option("--output", output, "output path (default stdout)");

  auto* tr = app.add_subcommand("train", "fit states on the training split and train a model");
  tr->add_option("--input", input, "dataset CSV")->required();
  tr->add_option("--output", output, "checkpoint JSON")->required();
  tr->add_option("--loss-csv", loss_csv, "loss curve CSV");
  tr->add_option("--model", model_kind, "evonet | wog");
  add_common(tr, o);
  add_model(tr, o);

  auto* ev = app.add_subcommand("evaluate", "F1 and AUC of a checkpoint");
  ev->add_option("--input", input, "dataset CSV")->required();
  ev->add_option("--model", model_path, "checkpoint JSON")->required();
  ev->add_option("--output", output, "metrics JSON (default stdout)");
  ev->add_option("--split", partition, "test | val | train | all");
  ev->add_option("--threshold", threshold, "decision threshold (default from config, 0.5)");
  ev->add_option("--config", o.config_path, "run configuration JSON");

  auto* pr = app.add_subcommand("predict", "forecast the next event of every series");
  pr->add_option("--input", input, "dataset CSV")->required();
  pr->add_option("--model", model_path, "checkpoint JSON")->required();
  pr->add_option("--output", output, "predictions JSON (default stdout)");

  auto* gc = app.add_subcommand("grad-check", "finite-difference check of the full training loss");
  gc->add_option("--step", step, "central-difference step");
  gc->add_option("--tol", tol, "relative error tolerance");
  add_common(gc, o);
  add_model(gc, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) {
      const RunConfig rc = resolve(o);
      SynthParams gen = generator_path.empty() ? default_synth_params() : synth_params_from_json(read_file(generator_path));
      if (synth->count("--segments") || generator_path.empty()) gen.segments = segments;
      if (synth->count("--noise") || generator_path.empty()) gen.noise = noise;
      const SynthData data = synth_generate(gen, num_series, rc.seed);
      write_file_atomic(output, format_csv(data.series));
      write_file_atomic(output + ".meta.json", synth_sidecar_json(gen, num_series, rc.seed));
    } else if (*seg) {
      const RunConfig rc = resolve(o);
      const std::vector<Series> series = load_csv(input);
      std::ostringstream out;
      const bool labeled = series.front().labeled();
      out << "series_id,segment";
      if (labeled) out << ",label";
      for (Index k = 0; k < rc.tau * series.front().dim(); ++k) out << ",v_" << k;
      out << '\n';
      for (const Series& s : series) {
        const std::vector<Segment> segs = segment(s, rc.tau);
        const std::vector<int> y = labeled ? segment_labels(s, rc.tau) : std::vector<int>{};
        for (size_t t = 0; t < segs.size(); ++t) {
          out << s.id << ',' << t;
          if (labeled) out << ',' << y[t];
          const Matrix flat = flatten_segments({segs[t]});
          for (Index k = 0; k < flat.cols(); ++k) out << ',' << fmt17(flat(0, k));
          out << '\n';
        }
      }
      emit(output, out.str());
    } else if (*fit) {
      const RunConfig rc = resolve(o);
      emit(output, state_model_to_json(fit_states(load_csv(input), rc)));
    } else if (*build) {
      const std::vector<Series> series = load_csv(input);
      const StateModel states = state_model_from_json(read_file(states_path));
      const Series& s = find_series(series, series_id);
      const RecognitionFrame frame = recognition_weights(segment(s, states.tau), states);
      emit(output, export_graph(build_graph_sequence(frame), ExportFormat::kJson, 0.0));
    } else if (*stats) {
      const EvoStateGraph g = import_graph_json(read_file(input));
      const std::vector<GraphStats> st = graph_stats(g, epsilon);
      std::ostringstream out;
      out << "t,node,betweenness,closeness,pagerank,in_degree\n";
      for (size_t t = 0; t < st.size(); ++t) {
        for (Index v = 0; v < g.num_states; ++v) {
          out << t + 1 << ",s" << v << ',' << fmt17(st[t].betweenness(v)) << ',' << fmt17(st[t].closeness(v)) << ','
              << fmt17(st[t].pagerank(v)) << ',' << fmt17(st[t].in_degree(v)) << '\n';
        }
      }
      emit(output, out.str());
    } else if (*exp) {
      const ExportFormat fmt = parse_export_format(format);
      const EvoStateGraph g = import_graph_json(read_file(input));
      const Scalar th = threshold < 0 ? 0.0 : threshold;
      if (range.empty()) {
        emit(output, export_graph(g, fmt, th));
      } else {
        const size_t colon = range.find(':');
        if (colon == std::string::npos) throw ValidationError("--aggregate expects BEGIN:END");
        const Index b = std::stoll(range.substr(0, colon));
        const Index e = std::stoll(range.substr(colon + 1));
        emit(output, export_snapshot(aggregate_graph(g, b - 1, e), fmt, th));
      }
    } else if (*tr) {
      const RunConfig rc = resolve(o);
      const std::vector<Series> series = load_csv(input);
      const Split sp = split(start_times(series));
      const std::vector<Series> train_series = pick(series, sp.train);
      const StateModel states = fit_states(train_series, rc);
      const std::vector<Sequence> train_set = make_sequences(train_series, states);
      const std::vector<Sequence> val_set = make_sequences(pick(series, sp.val), states);
      const ModelConfig mc = rc.model_config(series.front().dim());
      std::unique_ptr<Predictor> model;
      if (model_kind == "evonet") {
        model = std::make_unique<EvoNet>(mc, flatten_segments(states.patterns), derive_seed(rc.seed, "init"));
      } else if (model_kind == "wog") {
        model = std::make_unique<WithoutGraph>(mc, derive_seed(rc.seed, "init"));
      } else {
        throw ValidationError("--model must be evonet or wog");
      }
      const TrainResult result = train(*model, train_set, val_set, rc.train_config());
      save_checkpoint(output, make_checkpoint(*model, mc, states));
      if (!loss_csv.empty()) write_file_atomic(loss_csv, loss_curve_csv(result.curve));
      if (result.diverged) {
        std::cerr << "training diverged: " << result.diagnostic << " (kept iteration " << result.best_iteration
                  << ")\n";
        return 2;
      }
    } else if (*ev) {
      const RunConfig rc = resolve(o);
      const Checkpoint ckpt = load_checkpoint(model_path);
      const std::unique_ptr<Predictor> model = make_predictor(ckpt);
      const std::vector<Series> series = load_csv(input);
      std::vector<Series> chosen;
      if (partition == "all") {
        chosen = series;
      } else {
        const Split sp = split(start_times(series));
        if (partition == "test") chosen = pick(series, sp.test);
        else if (partition == "val") chosen = pick(series, sp.val);
        else if (partition == "train") chosen = pick(series, sp.train);
        else throw ValidationError("--split must be test, val, train or all");
      }
      const Metrics m = evaluate(*model, make_sequences(chosen, ckpt.states), threshold < 0 ? rc.threshold : threshold);
      if (!m.auc_defined) std::cerr << "warning: evaluation set holds a single class; AUC undefined\n";
      emit(output, metrics_to_json(m));
    } else if (*pr) {
      const Checkpoint ckpt = load_checkpoint(model_path);
      const std::unique_ptr<Predictor> model = make_predictor(ckpt);
      nlohmann::json doc;
      doc["version"] = 1;
      doc["predictions"] = nlohmann::json::array();
      for (const Series& s : load_csv(input)) {
        const Sequence seq = make_sequence(s, ckpt.states);
        std::vector<Scalar> alphas;
        const std::vector<Scalar> probs = model->step_probabilities(seq, static_cast<Index>(seq.snapshots.size()), &alphas);
        nlohmann::json p;
        p["series_id"] = s.id;
        p["probability"] = probs.back();
        p["alpha"] = alphas;
        p["alpha_normalized"] = normalize_attention(alphas);
        doc["predictions"].push_back(p);
      }
      emit(output, doc.dump(2) + "\n");
    } else if (*gc) {
      RunConfig rc = resolve(o);
      ModelConfig mc;
      mc.num_states = o.num_states.value_or(2);
      mc.tau = o.tau.value_or(4);
      mc.dim = 1;
      mc.u_size = o.u_size.value_or(8);
      mc.hg_size = o.hg_size.value_or(8);
      mc.message = rc.message;
      mc.attention = rc.attention;
      const GradCheckReport r = model_grad_check(mc, rc.seed, step, tol);
      for (const GradCheckEntry& e : r.worst_per_param) {
        std::printf("%-12s max_rel_error %.3e\n", e.name.c_str(), e.rel_error);
      }
      std::printf("max relative error: %.6e (tolerance %.1e) %s\n", r.max_rel_error, tol, r.passed() ? "PASS" : "FAIL");
      return r.passed() ? 0 : 1;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
