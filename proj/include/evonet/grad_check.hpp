#ifndef EVONET_GRAD_CHECK_HPP
#define EVONET_GRAD_CHECK_HPP

#include "evonet/tape.hpp"

#include <functional>
#include <string>
#include <vector>

namespace evonet {

struct NamedParam {
  std::string name;
  Matrix value;
};

/// Builds a scalar loss on `tape` from leaves holding the parameter values
/// (same order as the parameter list). Must be deterministic.
using LossBuilder = std::function<Var(Tape& tape, const std::vector<Var>& params)>;

struct GradCheckEntry {
  std::string name;
  Index row = 0;
  Index col = 0;
  Scalar analytic = 0;
  Scalar numeric = 0;
  Scalar rel_error = 0;
};

struct GradCheckReport {
  Scalar max_rel_error = 0;
  /// Worst entry per parameter, in parameter order.
  std::vector<GradCheckEntry> worst_per_param;
  /// Entries whose relative error exceeds the tolerance.
  std::vector<GradCheckEntry> failures;
  Scalar tolerance = 0;

  bool passed() const { return failures.empty(); }
};

/// |a - n| / max(|a|, |n|, floor). A central difference with step 1e-5 on an
/// O(1) loss carries about 1e-11 of rounding noise, so gradients below the
/// floor are in effect compared absolutely (|a - n| <= tol * floor).
Scalar relative_error(Scalar analytic, Scalar numeric, Scalar floor = 1e-6);

/// Compares backward() against central differences (f(p+h) - f(p-h)) / 2h
/// for every entry of every parameter.
GradCheckReport grad_check(const LossBuilder& f, const std::vector<NamedParam>& params,
                           Scalar step = 1e-5, Scalar tol = 1e-4);

}  // namespace evonet

#endif  // EVONET_GRAD_CHECK_HPP
