#include "evonet/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace evonet {

namespace {

Scalar evaluate(const LossBuilder& f, const std::vector<NamedParam>& params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto& p : params) leaves.push_back(tape.leaf(p.value));
  return f(tape, leaves).value()(0, 0);
}

}  // namespace

Scalar relative_error(Scalar analytic, Scalar numeric, Scalar floor) {
  const Scalar denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const LossBuilder& f, const std::vector<NamedParam>& params, Scalar step,
                           Scalar tol) {
  if (!(step > 0)) throw ValidationError("grad_check: step must be positive");

  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& p : params) leaves.push_back(tape.leaf(p.value));
    const Var loss = f(tape, leaves);
    const Gradients grads = tape.backward(loss);
    for (const Var& v : leaves) analytic.push_back(grads.of(v));
  }

  GradCheckReport report;
  report.tolerance = tol;
  std::vector<NamedParam> probe = params;
  for (size_t k = 0; k < params.size(); ++k) {
    GradCheckEntry worst{params[k].name, 0, 0, 0, 0, -1};
    Matrix& value = probe[k].value;
    for (Index c = 0; c < value.cols(); ++c) {
      for (Index r = 0; r < value.rows(); ++r) {
        const Scalar saved = value(r, c);
        value(r, c) = saved + step;
        const Scalar up = evaluate(f, probe);
        value(r, c) = saved - step;
        const Scalar down = evaluate(f, probe);
        value(r, c) = saved;

        GradCheckEntry e{params[k].name, r, c, analytic[k](r, c), (up - down) / (2 * step), 0};
        e.rel_error = relative_error(e.analytic, e.numeric);
        if (e.rel_error > worst.rel_error) worst = e;
        if (e.rel_error > tol) report.failures.push_back(e);
        report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
      }
    }
    report.worst_per_param.push_back(worst);
  }
  return report;
}

}  // namespace evonet
