#ifndef EVONET_SYNTH_HPP
#define EVONET_SYNTH_HPP

#include "evonet/series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace evonet {

/// Latent Markov chain over K prototypes. Segment s of a series is prototype
/// z_s plus N(0, noise^2) noise, and its label is 1 iff z_{s-2} = trigger_from
/// and z_{s-1} = trigger_to.
struct SynthParams {
  Index segments = 20;
  Scalar noise = 0.3;
  std::vector<Matrix> prototypes;  // K, each tau x d
  Matrix transition;               // K x K, rows sum to 1
  Index trigger_from = 0;
  Index trigger_to = 2;
  Index burn_in = 5;

  Index tau() const { return prototypes.empty() ? 0 : prototypes.front().rows(); }
  Index dim() const { return prototypes.empty() ? 0 : prototypes.front().cols(); }
  Index num_prototypes() const { return static_cast<Index>(prototypes.size()); }
  void validate() const;
};

/// K = 4, tau = 8, d = 1. With u = sin(2 pi t / 8) and a Gaussian bump w,
/// prototypes are 0.35u + 0.8w, -0.35u + 0.8w, u and -u; trigger 0 -> 2.
/// The first two differ only in the sign of the small sine part.
SynthParams default_synth_params();

struct SynthData {
  std::vector<Series> series;
  std::vector<std::vector<Index>> latent;  // z_0..z_{T-1} per series
};

/// Series i starts at time i * segments * tau so the corpus is chronological.
SynthData synth_generate(const SynthParams& gen, Index num_series, std::uint64_t seed);

/// Stationary distribution of a row-stochastic matrix.
Vector stationary_distribution(const Matrix& transition);

/// Generator parameters (and the expected positive rate) as a versioned JSON document.
std::string synth_sidecar_json(const SynthParams& gen, Index num_series, std::uint64_t seed);

/// Reads the generator fields of a sidecar document (or a bare generator object).
SynthParams synth_params_from_json(const std::string& text);

}  // namespace evonet

#endif  // EVONET_SYNTH_HPP
