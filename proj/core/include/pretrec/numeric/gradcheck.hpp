#pragma once

#include <functional>
#include <span>
#include <string>

#include "pretrec/numeric/autodiff.hpp"

namespace pretrec {

// Builds a scalar loss on the given tape from the current parameter values. Must be
// deterministic (no dropout) because it is re-evaluated for every perturbed entry.
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t entries_checked = 0;
};

// Compares reverse-mode gradients with central differences,
// error = |g_analytic - g_fd| / max(1, |g_fd|), maximised over every entry of `params`.
// h must lie in [1e-6, 1e-4]. A non-finite loss raises NumericError naming the parameter.
GradCheckResult finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params,
                                        double h = 1e-5);

}  // namespace pretrec
