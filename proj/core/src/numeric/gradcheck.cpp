#include "pretrec/numeric/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pretrec/error.hpp"

namespace pretrec {

namespace {

double evaluate(const LossBuilder& loss, const Parameter& p, std::size_t index) {
  Tape tape;
  const double v = loss(tape).value()[0];
  if (!std::isfinite(v)) {
    throw NumericError("finite_difference_check: non-finite loss while perturbing '" + p.name +
                       "' entry " + std::to_string(index));
  }
  return v;
}

}  // namespace

GradCheckResult finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params,
                                        double h) {
  if (!(h >= 1e-6 && h <= 1e-4)) throw ConfigError("finite_difference_check: h outside [1e-6, 1e-4]");
  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var l = loss(tape);
    if (!std::isfinite(l.value()[0])) {
      throw NumericError("finite_difference_check: non-finite loss at the base point");
    }
    tape.backward(l);
  }
  GradCheckResult result;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double original = p->value[i];
      p->value[i] = original + h;
      const double up = evaluate(loss, *p, i);
      p->value[i] = original - h;
      const double down = evaluate(loss, *p, i);
      p->value[i] = original;
      const double fd = (up - down) / (2.0 * h);
      const double err = std::abs(p->gradient[i] - fd) / std::max(1.0, std::abs(fd));
      ++result.entries_checked;
      if (err > result.max_relative_error || result.worst_parameter.empty()) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        if (err >= result.max_relative_error) {
          result.worst_parameter = p->name;
          result.worst_index = i;
        }
      }
    }
  }
  return result;
}

}  // namespace pretrec
