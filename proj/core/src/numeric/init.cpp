#include "pretrec/numeric/init.hpp"

#include <cmath>

namespace pretrec {

Tensor2 uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, RngStream& rng) {
  Tensor2 t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

Tensor2 normal_init(std::size_t rows, std::size_t cols, double stddev, RngStream& rng) {
  Tensor2 t(rows, cols);
  for (double& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

Tensor2 xavier_uniform(std::size_t rows, std::size_t cols, RngStream& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform_init(rows, cols, -a, a, rng);
}

}  // namespace pretrec
