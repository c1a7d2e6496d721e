#pragma once

#include "pretrec/numeric/rng.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

// Multiplicative inverted-dropout mask: each entry is 0 with probability `ratio`, otherwise
// 1/(1-ratio). Throws ConfigError unless 0 <= ratio < 1.
Tensor2 dropout_mask(std::size_t rows, std::size_t cols, double ratio, RngStream& rng);

// Applies an inverted-dropout mask when training; identity otherwise (no draws consumed).
Tensor2 apply_dropout(const Tensor2& t, double ratio, RngStream& rng, bool training);

}  // namespace pretrec
