#include "pretrec/numeric/dropout.hpp"

#include <string>

#include "pretrec/error.hpp"

namespace pretrec {

namespace {

void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw ConfigError("dropout ratio must lie in [0, 1), got " + std::to_string(ratio));
  }
}

}  // namespace

Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double ratio, RngStream& rng) {
  check_ratio(ratio);
  Tensor2 mask(rows, cols, 1.0);
  if (ratio == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - ratio);
  for (double& m : mask.values()) m = rng.uniform() < ratio ? 0.0 : keep_scale;
  return mask;
}

Tensor2 apply_dropout(const Tensor2& t, double ratio, RngStream& rng, bool training) {
  check_ratio(ratio);
  if (!training || ratio == 0.0) return t;
  Tensor2 out = dropout_mask(t.rows(), t.cols(), ratio, rng);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= t[i];
  return out;
}

}  // namespace pretrec
