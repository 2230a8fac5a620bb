#include "evonet/synth.hpp"

#include <json.hpp>

#include <cmath>
#include <algorithm>
#include <numbers>
#include <random>

namespace evonet {

namespace {

Index draw(const Matrix& transition, Index row, std::mt19937_64& rng) {
  const Scalar u = std::uniform_real_distribution<Scalar>(0.0, 1.0)(rng);
  Scalar acc = 0;
  const Index k = transition.cols();
  for (Index j = 0; j < k; ++j) {
    acc += transition(row, j);
    if (u < acc) return j;
  }
  // Rounding left u above the last partial sum: take the last reachable state.
  for (Index j = k - 1; j >= 0; --j) {
    if (transition(row, j) > 0) return j;
  }
  return k - 1;
}

std::string series_name(Index i, Index total) {
  const size_t width = std::max<size_t>(4, std::to_string(total).size());
  std::string digits = std::to_string(i);
  return "s" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void SynthParams::validate() const {
  const Index k = num_prototypes();
  if (k < 1) throw ValidationError("synth: need at least one prototype");
  if (segments < 1) throw ValidationError("synth: segments must be >= 1");
  if (!(noise >= 0) || !std::isfinite(noise)) throw ValidationError("synth: noise must be a finite non-negative value");
  if (burn_in < 0) throw ValidationError("synth: burn_in must be >= 0");
  for (Index a = 0; a < k; ++a) {
    const Matrix& p = prototypes[static_cast<size_t>(a)];
    if (p.rows() != tau() || p.cols() != dim() || p.size() == 0) {
      throw ValidationError("synth: prototypes must share one non-empty tau x d shape");
    }
    if (!p.allFinite()) throw ValidationError("synth: prototype " + std::to_string(a) + " is not finite");
    for (Index b = 0; b < a; ++b) {
      if (p == prototypes[static_cast<size_t>(b)]) {
        throw ValidationError("synth: prototypes " + std::to_string(b) + " and " + std::to_string(a) + " coincide");
      }
    }
  }
  if (transition.rows() != k || transition.cols() != k) {
    throw ValidationError("synth: transition matrix must be " + shape_string(k, k) + ", got " +
                          shape_string(transition));
  }
  for (Index r = 0; r < k; ++r) {
    if (!transition.row(r).allFinite() || (transition.row(r).array() < 0).any()) {
      throw ValidationError("synth: transition row " + std::to_string(r) + " has negative or non-finite entries");
    }
    if (std::abs(transition.row(r).sum() - 1.0) > 1e-9) {
      throw ValidationError("synth: transition row " + std::to_string(r) + " does not sum to 1");
    }
  }
  if (trigger_from < 0 || trigger_from >= k || trigger_to < 0 || trigger_to >= k) {
    throw ValidationError("synth: trigger states out of range");
  }
}

SynthParams default_synth_params() {
  constexpr Index tau = 8;
  Matrix u(tau, 1), w(tau, 1);
  for (Index t = 0; t < tau; ++t) {
    u(t, 0) = std::sin(2.0 * std::numbers::pi * static_cast<Scalar>(t) / tau);
    const Scalar z = (static_cast<Scalar>(t) - 3.5) / 1.5;
    w(t, 0) = std::exp(-0.5 * z * z);
  }
  SynthParams gen;
  gen.prototypes = {0.35 * u + 0.8 * w, -0.35 * u + 0.8 * w, u, -u};
  gen.transition.resize(4, 4);
  gen.transition << 0.05, 0.05, 0.8, 0.1,  //
      0.05, 0.05, 0.8, 0.1,                 //
      0.4, 0.4, 0.05, 0.15,                 //
      0.4, 0.4, 0.15, 0.05;
  gen.trigger_from = 0;
  gen.trigger_to = 2;
  return gen;
}

SynthData synth_generate(const SynthParams& gen, Index num_series, std::uint64_t seed) {
  gen.validate();
  if (num_series < 1) throw ValidationError("synth: num_series must be >= 1");
  std::mt19937_64 rng(derive_seed(seed, "synth"));
  std::normal_distribution<Scalar> gauss(0.0, 1.0);
  const Index k = gen.num_prototypes();
  const Index tau = gen.tau();
  const Index d = gen.dim();
  const Index T = gen.segments;

  SynthData out;
  out.series.reserve(static_cast<size_t>(num_series));
  for (Index i = 0; i < num_series; ++i) {
    // Two extra leading states give every segment a defined label.
    std::vector<Index> chain;
    chain.push_back(std::uniform_int_distribution<Index>(0, k - 1)(rng));
    for (Index step = 0; step < gen.burn_in + T + 1; ++step) chain.push_back(draw(gen.transition, chain.back(), rng));
    const std::vector<Index> z(chain.end() - (T + 2), chain.end());

    Series s;
    s.id = series_name(i, num_series);
    s.start = i * T * tau;
    s.values.resize(T * tau, d);
    s.labels.resize(static_cast<size_t>(T * tau));
    std::vector<Index> latent;
    for (Index seg = 0; seg < T; ++seg) {
      const Index state = z[static_cast<size_t>(seg + 2)];
      latent.push_back(state);
      const int y = z[static_cast<size_t>(seg)] == gen.trigger_from && z[static_cast<size_t>(seg + 1)] == gen.trigger_to;
      const Matrix& proto = gen.prototypes[static_cast<size_t>(state)];
      for (Index r = 0; r < tau; ++r) {
        for (Index c = 0; c < d; ++c) s.values(seg * tau + r, c) = proto(r, c) + gen.noise * gauss(rng);
        s.labels[static_cast<size_t>(seg * tau + r)] = y;
      }
    }
    out.series.push_back(std::move(s));
    out.latent.push_back(std::move(latent));
  }
  return out;
}

Vector stationary_distribution(const Matrix& transition) {
  const Index k = transition.rows();
  if (k < 1 || transition.cols() != k) throw ValidationError("stationary_distribution: matrix must be square");
  Matrix a = transition.transpose() - Matrix::Identity(k, k);
  a.row(k - 1).setOnes();
  Vector rhs = Vector::Zero(k);
  rhs(k - 1) = 1.0;
  return a.colPivHouseholderQr().solve(rhs);
}

std::string synth_sidecar_json(const SynthParams& gen, Index num_series, std::uint64_t seed) {
  using nlohmann::json;
  gen.validate();
  json doc;
  doc["version"] = 1;
  doc["seed"] = seed;
  doc["num_series"] = num_series;
  doc["segments"] = gen.segments;
  doc["tau"] = gen.tau();
  doc["dim"] = gen.dim();
  doc["noise"] = gen.noise;
  doc["burn_in"] = gen.burn_in;
  doc["trigger"] = {gen.trigger_from, gen.trigger_to};
  json protos = json::array();
  for (const Matrix& p : gen.prototypes) {
    json rows = json::array();
    for (Index r = 0; r < p.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
      rows.push_back(row);
    }
    protos.push_back(rows);
  }
  doc["prototypes"] = protos;
  json trans = json::array();
  for (Index r = 0; r < gen.transition.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < gen.transition.cols(); ++c) row.push_back(gen.transition(r, c));
    trans.push_back(row);
  }
  doc["transition"] = trans;
  const Vector pi = stationary_distribution(gen.transition);
  doc["stationary"] = std::vector<Scalar>(pi.data(), pi.data() + pi.size());
  doc["expected_positive_rate"] = pi(gen.trigger_from) * gen.transition(gen.trigger_from, gen.trigger_to);
  return doc.dump(2) + "\n";
}

SynthParams synth_params_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json doc = json::parse(text);
    SynthParams gen = default_synth_params();
    if (doc.contains("segments")) gen.segments = doc.at("segments").get<Index>();
    if (doc.contains("noise")) gen.noise = doc.at("noise").get<Scalar>();
    if (doc.contains("burn_in")) gen.burn_in = doc.at("burn_in").get<Index>();
    if (doc.contains("trigger")) {
      gen.trigger_from = doc.at("trigger").at(0).get<Index>();
      gen.trigger_to = doc.at("trigger").at(1).get<Index>();
    }
    if (doc.contains("prototypes")) {
      gen.prototypes.clear();
      for (const json& p : doc.at("prototypes")) {
        const auto rows = p.get<std::vector<std::vector<Scalar>>>();
        if (rows.empty() || rows.front().empty()) throw ValidationError("synth: empty prototype");
        Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
        for (size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.front().size()) throw ValidationError("synth: ragged prototype");
          for (size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
        gen.prototypes.push_back(std::move(m));
      }
    }
    if (doc.contains("transition")) {
      const auto rows = doc.at("transition").get<std::vector<std::vector<Scalar>>>();
      gen.transition.resize(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows[0].size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Index>(rows[r].size()) != gen.transition.cols()) {
          throw ValidationError("synth: ragged transition matrix");
        }
        for (size_t c = 0; c < rows[r].size(); ++c) {
          gen.transition(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
      }
    }
    gen.validate();
    return gen;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth: malformed JSON: ") + e.what());
  }
}

}  // namespace evonet
