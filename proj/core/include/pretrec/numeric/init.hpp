#pragma once

#include "pretrec/numeric/rng.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

Tensor2 uniform_init(std::size_t rows, std::size_t cols, double lo, double hi, RngStream& rng);
Tensor2 normal_init(std::size_t rows, std::size_t cols, double stddev, RngStream& rng);
// Glorot/Xavier uniform: U(-a, a), a = sqrt(6 / (rows + cols)).
Tensor2 xavier_uniform(std::size_t rows, std::size_t cols, RngStream& rng);

}  // namespace pretrec
