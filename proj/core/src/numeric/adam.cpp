#include "pretrec/numeric/adam.hpp"

#include <cmath>

#include "pretrec/error.hpp"

namespace pretrec {

void adam_step(Parameter& param, AdamState& state) {
  if (!param.gradient.same_shape(param.value) || !state.first_moment.same_shape(param.value) ||
      !state.second_moment.same_shape(param.value)) {
    throw ConfigError("adam_step: moment/gradient shape mismatch for parameter '" + param.name +
                      "'");
  }
  if (!param.trainable) return;
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    const double g = param.gradient[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g * g;
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    param.value[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)) {
  states_.reserve(params_.size());
  for (Parameter* p : params_) states_.emplace_back(p->value.rows(), p->value.cols(), config);
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Adam::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) adam_step(*params_[i], states_[i]);
}

}  // namespace pretrec
