#include <doctest.h>

#include <cmath>
#include <vector>

#include "pretrec/error.hpp"
#include "pretrec/numeric/adam.hpp"
#include "pretrec/numeric/autodiff.hpp"
#include "pretrec/numeric/dropout.hpp"
#include "pretrec/numeric/gradcheck.hpp"
#include "pretrec/numeric/rng.hpp"

using namespace pretrec;

namespace {

Tensor2 random_tensor(std::size_t r, std::size_t c, RngStream& rng, double scale = 1.0) {
  Tensor2 t(r, c);
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("adam: zero gradient leaves the value unchanged") {
  Parameter p("p", Tensor2::from_rows({{0.3, -1.2}, {4.0, 0.0}}));
  const Tensor2 before = p.value;
  AdamState state(2, 2, {.learning_rate = 0.1});
  for (int i = 0; i < 5; ++i) adam_step(p, state);
  CHECK(p.value == before);
  CHECK(state.step == 5);
}

TEST_CASE("adam: first step with unit gradient") {
  Parameter p("p", Tensor2(1, 1, 0.0));
  p.gradient[0] = 1.0;
  AdamState state(1, 1, {.learning_rate = 0.001});
  adam_step(p, state);
  CHECK(p.value[0] == doctest::Approx(-0.000999999990).epsilon(1e-12));
  CHECK(p.gradient[0] == 1.0);
}

TEST_CASE("adam: two steps match the textbook update") {
  // Frozen from a scripted evaluation of m/v moments with bias correction.
  Parameter p("p", Tensor2(1, 1, 0.0));
  AdamState state(1, 1, {.learning_rate = 0.001});
  p.gradient[0] = 1.0;
  adam_step(p, state);
  const double after_first = p.value[0];
  adam_step(p, state);
  CHECK(std::abs(after_first - (-0.0009999999900000003)) < 1e-12);
  CHECK(std::abs((p.value[0] - after_first) - (-0.0009999999899999931)) < 1e-12);
  CHECK(std::abs(p.value[0] - (-0.001999999979999993)) < 1e-12);
}

TEST_CASE("adam: shape mismatch is a configuration error") {
  Parameter p("p", Tensor2(2, 2));
  AdamState state(3, 1, {});
  CHECK_THROWS_AS(adam_step(p, state), ConfigError);
}

TEST_CASE("dropout: degenerate ratio and inference mode are identities") {
  RngStream rng(1);
  const Tensor2 t = random_tensor(4, 5, rng);
  CHECK(apply_dropout(t, 0.0, rng, true) == t);
  CHECK(apply_dropout(t, 0.5, rng, false) == t);
  CHECK_THROWS_AS(apply_dropout(t, 1.0, rng, true), ConfigError);
  CHECK_THROWS_AS(apply_dropout(t, -0.1, rng, true), ConfigError);
}

TEST_CASE("dropout: binomial statistics at ratio 0.5") {
  RngStream rng(42);
  const Tensor2 ones(100, 100, 1.0);
  const Tensor2 out = apply_dropout(ones, 0.5, rng, true);
  const double n = 10000.0;
  double mean = 0.0;
  double zeros = 0.0;
  for (double v : out.values()) {
    mean += v;
    if (v == 0.0) zeros += 1.0;
    else CHECK(v == 2.0);
  }
  mean /= n;
  // Each entry is 0 or 2 with equal probability: sd(entry) = 1, sd(zero indicator) = 0.5.
  CHECK(std::abs(mean - 1.0) < 3.0 * 1.0 / std::sqrt(n));
  CHECK(std::abs(zeros / n - 0.5) < 3.0 * 0.5 / std::sqrt(n));
}

TEST_CASE("rng: identical seeds give identical streams, splits are independent") {
  RngStream a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream base(7);
  CHECK(base.split("x").next_u64() == RngStream(7).split("x").next_u64());
  CHECK(base.split("x").next_u64() != base.split("y").next_u64());
  // Reference values pin the algorithm so seeds stay portable.
  RngStream pinned(0);
  CHECK(pinned.next_u64() == 0x99ec5f36cb75f2b4ULL);
}

TEST_CASE("rng: uniform_index stays in range and sample_without_replacement is distinct") {
  RngStream rng(3);
  for (int i = 0; i < 1000; ++i) CHECK(rng.uniform_index(7) < 7);
  for (std::size_t k : {0u, 1u, 5u, 50u, 100u, 150u}) {
    auto s = rng.sample_without_replacement(100, k);
    CHECK(s.size() == std::min<std::size_t>(k, 100));
    std::sort(s.begin(), s.end());
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  }
}

TEST_CASE("activations: relu(0) = 0, sigmoid(0) = 0.5, sigmoid strictly monotone") {
  Tape tape;
  Var x = tape.constant(Tensor2::from_rows({{0.0, -1.0, 2.0}}));
  CHECK(relu(x).value() == Tensor2::from_rows({{0.0, 0.0, 2.0}}));
  CHECK(sigmoid(x).value()[0] == 0.5);
  double prev = logistic(-30.0);
  for (double v = -30.0 + 0.01; v <= 30.0; v += 0.01) {
    const double cur = logistic(v);
    CHECK(cur >= prev);
    prev = cur;
  }
  for (double v = -5.0; v < 5.0; v += 0.37) CHECK(logistic(v + 0.01) > logistic(v));
}

TEST_CASE("gradcheck: linear and quadratic losses") {
  RngStream rng(5);
  Parameter lin("lin", random_tensor(3, 2, rng));
  Parameter* lp[] = {&lin};
  auto r1 = finite_difference_check([&](Tape& t) { return sum(t.parameter(lin)); }, lp);
  CHECK(r1.max_relative_error < 1e-10);
  for (double g : lin.gradient.values()) CHECK(g == 1.0);

  Parameter quad("quad", random_tensor(3, 3, rng));
  Parameter* qp[] = {&quad};
  auto r2 = finite_difference_check([&](Tape& t) { return sum_squares(t.parameter(quad)); }, qp);
  CHECK(r2.max_relative_error < 1e-7);
  for (std::size_t i = 0; i < 9; ++i)
    CHECK(quad.gradient[i] == doctest::Approx(2.0 * quad.value[i]));
}

TEST_CASE("gradcheck: rejects bad step and non-finite loss") {
  Parameter p("p", Tensor2(1, 1, 1.0));
  Parameter* ps[] = {&p};
  auto loss = [&](Tape& t) { return sum(t.parameter(p)); };
  CHECK_THROWS_AS(finite_difference_check(loss, ps, 1e-2), ConfigError);
  auto bad = [&](Tape& t) {
    Var v = t.parameter(p);
    return scale(sum(v), std::nan(""));
  };
  CHECK_THROWS_AS(finite_difference_check(bad, ps), NumericError);
}

TEST_CASE("autodiff: every operation passes a central-difference check") {
  RngStream rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    Parameter a("a", random_tensor(4, 3, rng));
    Parameter b("b", random_tensor(3, 5, rng));
    Parameter c("c", random_tensor(4, 3, rng));
    Parameter row("row", random_tensor(1, 3, rng));
    const SparseMatrix s = SparseMatrix::from_dense(random_tensor(6, 4, rng));
    const std::vector<std::size_t> idx{3, 0, 0, 2};
    const std::vector<double> labels{1, 0, 1, 0};
    Parameter* ps[] = {&a, &b, &c, &row};
    auto loss = [&](Tape& t) {
      Var va = t.parameter(a), vb = t.parameter(b), vc = t.parameter(c), vr = t.parameter(row);
      Var h = add_row(hadamard(add(va, vc), sub(vc, scale(va, 0.5))), vr);
      Var m = matmul(h, vb);                                  // 4x5
      Var g = gather_rows(spmm(s, relu(concat_cols(h, va))), idx);  // 4x6
      Var sl = slice_rows(g, 1, 2);
      Var d = rowwise_dot(va, vc);                            // 4x1
      Var terms[] = {d, sigmoid(d)};
      Var mixed = mean_of(terms);
      Var l1 = bce_with_logits(mixed, labels);
      Var l2 = neg_log_sigmoid_sum(sub(d, scale(mixed, 2.0)));
      return add(add(add(l1, l2), sum(m)), add(sum_squares(sl), sum(sigmoid(m))));
    };
    auto r = finite_difference_check(loss, ps, 1e-6);
    CHECK(r.max_relative_error < 1e-6);
  }
}

TEST_CASE("autodiff: bce clamps its log arguments") {
  Tape t;
  Var x = t.constant(Tensor2::from_rows({{0.0}, {200.0}, {-200.0}}));
  const std::vector<double> y0{1.0};
  Var zero = t.constant(Tensor2(1, 1, 0.0));
  CHECK(bce_with_logits(zero, y0).value()[0] == doctest::Approx(std::log(2.0)));
  const std::vector<double> y{1.0, 0.0, 1.0};
  const double loss = bce_with_logits(x, y).value()[0];
  CHECK(loss == doctest::Approx(std::log(2.0) - 2.0 * std::log(1e-12)));
}

TEST_CASE("determinism: identical seeds give bit-identical Adam trajectories") {
  auto run = [](std::uint64_t seed) {
    RngStream rng(seed);
    Parameter w("w", random_tensor(5, 3, rng));
    Parameter x("x", random_tensor(7, 5, rng));
    Adam opt({&w, &x}, {.learning_rate = 0.01});
    for (int step = 0; step < 20; ++step) {
      opt.zero_grad();
      Tape t;
      Var h = dropout(matmul(t.parameter(x), t.parameter(w)), 0.3, rng, true);
      t.backward(sum_squares(relu(h)));
      opt.step();
    }
    return std::pair{w.value, x.value};
  };
  CHECK(run(9) == run(9));
  CHECK(run(9) != run(10));
}
