#include "pretrec/numeric/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pretrec/error.hpp"
#include "pretrec/numeric/dropout.hpp"

namespace pretrec {

namespace {

constexpr double kLogClamp = 1e-12;

std::string shape_str(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_same_shape(Var a, Var b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw ConfigError(std::string(op) + ": shape mismatch " + shape_str(a.value()) + " vs " +
                      shape_str(b.value()));
  }
}

Tape& common_tape(Var a, Var b) {
  if (&a.tape() != &b.tape()) throw ConfigError("operands recorded on different tapes");
  return a.tape();
}

// Runs `fn(grad_buffer)` only when `v` takes part in differentiation.
template <typename Fn>
void accumulate(Tape& tape, Var v, Fn&& fn) {
  if (tape.requires_grad(v)) fn(tape.grad_buffer(v));
}

}  // namespace

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

const Tensor2& Var::value() const { return tape_->value(*this); }

Var Tape::record(Tensor2 value, bool requires_grad, Backward backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor2 value) { return record(std::move(value), false, nullptr); }

Var Tape::parameter(Parameter& p) {
  Var v = record(p.value, p.trainable, nullptr);
  nodes_[v.id_].parameter = &p;
  return v;
}

Tensor2& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id_];
  if (!n.grad_allocated) {
    n.grad = Tensor2(n.value.rows(), n.value.cols());
    n.grad_allocated = true;
  }
  return n.grad;
}

const Tensor2& Tape::grad(Var v) { return grad_buffer(v); }

void Tape::backward(Var scalar) {
  if (value(scalar).size() != 1) throw ConfigError("backward: target must be 1x1");
  for (auto& n : nodes_) {
    if (n.grad_allocated) n.grad.fill(0.0);
  }
  if (!nodes_[scalar.id_].requires_grad) return;
  grad_buffer(scalar)[0] = 1.0;
  for (std::size_t i = scalar.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad_allocated) continue;
    if (n.backward) n.backward(*this, n.value, n.grad);
    if (n.parameter) {
      Tensor2& g = n.parameter->gradient;
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
    }
  }
}

Var matmul(Var a, Var b) {
  Tape& t = common_tape(a, b);
  const bool rg = t.requires_grad(a) || t.requires_grad(b);
  return t.record(pretrec::matmul(a.value(), b.value()), rg,
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    // dA = G B^T, dB = A^T G
                    accumulate(tape, a,
                               [&](Tensor2& ga) { matmul_a_bt_accumulate(g, b.value(), ga); });
                    accumulate(tape, b,
                               [&](Tensor2& gb) { matmul_at_b_accumulate(a.value(), g, gb); });
                  });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& t = x.tape();
  const SparseMatrix* sp = &s;
  return t.record(s.multiply(x.value()), t.requires_grad(x),
                  [sp, x](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, x,
                               [&](Tensor2& gx) { sp->multiply_transposed_accumulate(g, gx); });
                  });
}

Var add(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a, b, "add");
  Tensor2 out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    for (Var v : {a, b}) {
                      accumulate(tape, v, [&](Tensor2& gv) {
                        for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
                      });
                    }
                  });
}

Var sub(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a, b, "sub");
  Tensor2 out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    });
                    accumulate(tape, b, [&](Tensor2& gb) {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                    });
                  });
}

Var add_row(Var a, Var b) {
  Tape& t = common_tape(a, b);
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw ConfigError("add_row: expected 1x" + std::to_string(a.cols()) + " row, got " +
                      shape_str(b.value()));
  }
  Tensor2 out = a.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b.value()[c];
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                    });
                    accumulate(tape, b, [&](Tensor2& gb) {
                      for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
                    });
                  });
}

Var hadamard(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a, b, "hadamard");
  Tensor2 out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.value()[i];
                    });
                    accumulate(tape, b, [&](Tensor2& gb) {
                      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.value()[i];
                    });
                  });
}

Var scale(Var a, double c) {
  Tape& t = a.tape();
  Tensor2 out = a.value();
  for (double& v : out.values()) v *= c;
  return t.record(std::move(out), t.requires_grad(a),
                  [a, c](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
                    });
                  });
}

Var relu(Var a) {
  Tape& t = a.tape();
  Tensor2 out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return t.record(std::move(out), t.requires_grad(a),
                  [a](Tape& tape, const Tensor2& y, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i)
                        if (y[i] > 0.0) ga[i] += g[i];
                    });
                  });
}

Var sigmoid(Var a) {
  Tape& t = a.tape();
  Tensor2 out = a.value();
  for (double& v : out.values()) v = logistic(v);
  return t.record(std::move(out), t.requires_grad(a),
                  [a](Tape& tape, const Tensor2& y, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i)
                        ga[i] += g[i] * y[i] * (1.0 - y[i]);
                    });
                  });
}

Var dropout(Var a, double ratio, RngStream& rng, bool training) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw ConfigError("dropout ratio must lie in [0, 1), got " + std::to_string(ratio));
  }
  if (!training || ratio == 0.0) return a;
  Tape& t = a.tape();
  Tensor2 mask = dropout_mask(a.rows(), a.cols(), ratio, rng);
  Tensor2 out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return t.record(std::move(out), t.requires_grad(a),
                  [a, mask = std::move(mask)](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * mask[i];
                    });
                  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  Tape& t = a.tape();
  const Tensor2& src = a.value();
  Tensor2 out(rows.size(), src.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= src.rows()) {
      throw ConfigError("gather_rows: index " + std::to_string(rows[r]) + " out of " +
                        std::to_string(src.rows()));
    }
    std::copy_n(&src(rows[r], 0), src.cols(), &out(r, 0));
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return t.record(std::move(out), t.requires_grad(a),
                  [a, idx = std::move(idx)](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t r = 0; r < idx.size(); ++r)
                        for (std::size_t c = 0; c < g.cols(); ++c) ga(idx[r], c) += g(r, c);
                    });
                  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) throw ConfigError("slice_rows: range out of bounds");
  Tape& t = a.tape();
  const Tensor2& src = a.value();
  Tensor2 out(count, src.cols());
  if (count) std::copy_n(&src(begin, 0), count * src.cols(), &out(0, 0));
  return t.record(std::move(out), t.requires_grad(a),
                  [a, begin](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      double* dst = ga.values().data() + begin * ga.cols();
                      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
                    });
                  });
}

Var rowwise_dot(Var a, Var b) {
  Tape& t = common_tape(a, b);
  require_same_shape(a, b, "rowwise_dot");
  Tensor2 out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a.value()(r, c) * b.value()(r, c);
    out[r] = acc;
  }
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t r = 0; r < ga.rows(); ++r)
                        for (std::size_t c = 0; c < ga.cols(); ++c)
                          ga(r, c) += g[r] * b.value()(r, c);
                    });
                    accumulate(tape, b, [&](Tensor2& gb) {
                      for (std::size_t r = 0; r < gb.rows(); ++r)
                        for (std::size_t c = 0; c < gb.cols(); ++c)
                          gb(r, c) += g[r] * a.value()(r, c);
                    });
                  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = common_tape(a, b);
  if (a.rows() != b.rows()) throw ConfigError("concat_cols: row count mismatch");
  const std::size_t ca = a.cols();
  const std::size_t cb = b.cols();
  Tensor2 out(a.rows(), ca + cb);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy_n(&a.value()(r, 0), ca, &out(r, 0));
    if (cb) std::copy_n(&b.value()(r, 0), cb, &out(r, ca));
  }
  return t.record(std::move(out), t.requires_grad(a) || t.requires_grad(b),
                  [a, b, ca, cb](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
                    });
                    accumulate(tape, b, [&](Tensor2& gb) {
                      for (std::size_t r = 0; r < g.rows(); ++r)
                        for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
                    });
                  });
}

Var mean_of(std::span<const Var> terms) {
  if (terms.empty()) throw ConfigError("mean_of: no terms");
  Tape& t = terms.front().tape();
  Tensor2 out(terms.front().rows(), terms.front().cols());
  bool rg = false;
  for (Var v : terms) {
    require_same_shape(v, terms.front(), "mean_of");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v.value()[i];
    rg = rg || t.requires_grad(v);
  }
  const double w = 1.0 / static_cast<double>(terms.size());
  for (double& v : out.values()) v *= w;
  std::vector<Var> parts(terms.begin(), terms.end());
  return t.record(std::move(out), rg,
                  [parts = std::move(parts), w](Tape& tape, const Tensor2&, const Tensor2& g) {
                    for (Var v : parts) {
                      accumulate(tape, v, [&](Tensor2& gv) {
                        for (std::size_t i = 0; i < g.size(); ++i) gv[i] += w * g[i];
                      });
                    }
                  });
}

Var sum(Var a) {
  Tape& t = a.tape();
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  return t.record(Tensor2(1, 1, acc), t.requires_grad(a),
                  [a](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (double& v : ga.values()) v += g[0];
                    });
                  });
}

Var sum_squares(Var a) {
  Tape& t = a.tape();
  return t.record(Tensor2(1, 1, squared_norm(a.value())), t.requires_grad(a),
                  [a](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, a, [&](Tensor2& ga) {
                      for (std::size_t i = 0; i < ga.size(); ++i)
                        ga[i] += 2.0 * g[0] * a.value()[i];
                    });
                  });
}

Var bce_with_logits(Var logits, std::span<const double> labels) {
  Tape& t = logits.tape();
  const Tensor2& x = logits.value();
  if (x.size() != labels.size()) {
    throw ConfigError("bce_with_logits: " + std::to_string(x.size()) + " scores for " +
                      std::to_string(labels.size()) + " labels");
  }
  const double log_floor = std::log(kLogClamp);
  double loss = 0.0;
  Tensor2 dlogit(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    // log s(x) = -softplus(-x), log(1 - s(x)) = -softplus(x)
    const double log_p = -softplus(-x[i]);
    const double log_q = -softplus(x[i]);
    const double y = labels[i];
    const bool p_clamped = log_p < log_floor;
    const bool q_clamped = log_q < log_floor;
    loss -= y * std::max(log_p, log_floor) + (1.0 - y) * std::max(log_q, log_floor);
    const double p = logistic(x[i]);
    double d = 0.0;
    if (!p_clamped) d -= y * (1.0 - p);
    if (!q_clamped) d += (1.0 - y) * p;
    dlogit[i] = d;
  }
  return t.record(Tensor2(1, 1, loss), t.requires_grad(logits),
                  [logits, dlogit = std::move(dlogit)](Tape& tape, const Tensor2&,
                                                       const Tensor2& g) {
                    accumulate(tape, logits, [&](Tensor2& gl) {
                      for (std::size_t i = 0; i < gl.size(); ++i) gl[i] += g[0] * dlogit[i];
                    });
                  });
}

Var neg_log_sigmoid_sum(Var x) {
  Tape& t = x.tape();
  double loss = 0.0;
  for (double v : x.value().values()) loss += softplus(-v);
  return t.record(Tensor2(1, 1, loss), t.requires_grad(x),
                  [x](Tape& tape, const Tensor2&, const Tensor2& g) {
                    accumulate(tape, x, [&](Tensor2& gx) {
                      for (std::size_t i = 0; i < gx.size(); ++i)
                        gx[i] -= g[0] * logistic(-x.value()[i]);
                    });
                  });
}

}  // namespace pretrec
