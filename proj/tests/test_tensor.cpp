#include <doctest.h>

#include <cmath>
#include <random>

#include "hkg/tensor.hpp"

using namespace hkg::ad;

namespace {

Tensor random_tensor(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(r, c);
  std::normal_distribution<double> dist(0.0, scale);
  for (double& v : t.data) v = dist(rng);
  return t;
}

// Runs backward on a composite loss and checks every parameter gradient
// against central finite differences.
void check_gradients(const std::function<VarId(Tape&, const BoundParams&)>& build,
                     const ParamSet& params, std::mt19937_64& rng,
                     double tol = 1e-4) {
  Tape tape;
  BoundParams bound = bind(tape, params);
  VarId loss = build(tape, bound);
  tape.backward(loss);
  auto loss_fn = [&build](const ParamSet& p) {
    Tape t;
    BoundParams b = bind(t, p);
    return t.value(build(t, b)).data[0];
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    double err = finite_difference_check(loss_fn, params, static_cast<int>(i),
                                         tape.grad(bound[static_cast<int>(i)]),
                                         10, rng);
    CHECK(err < tol);
  }
}

}  // namespace

TEST_CASE("matmul shapes and shape errors") {
  Tape t;
  VarId a = t.input(Tensor(2, 3));
  VarId b = t.input(Tensor(3, 4));
  VarId c = t.matmul(a, b);
  CHECK(t.value(c).rows == 2);
  CHECK(t.value(c).cols == 4);
  CHECK_THROWS_WITH_AS(t.matmul(a, a), doctest::Contains("[2,3]"), ShapeError);
  CHECK_THROWS_AS(t.add(a, b), ShapeError);
}

TEST_CASE("softmax rows sum to one") {
  std::mt19937_64 rng(1);
  Tape t;
  VarId x = t.input(random_tensor(5, 7, rng, 3.0));
  const Tensor& p = t.value(t.softmax_rows(x));
  for (int r = 0; r < p.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < p.cols; ++c) s += p.at(r, c);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("segment mean groups rows") {
  Tape t;
  Tensor x(3, 1);
  x.at(0, 0) = 1.0;
  x.at(1, 0) = 3.0;
  x.at(2, 0) = 5.0;
  VarId v = t.segment_mean(t.input(x), {0, 0, 1}, 2);
  CHECK(t.value(v).at(0, 0) == doctest::Approx(2.0));
  CHECK(t.value(v).at(1, 0) == doctest::Approx(5.0));

  // empty segment yields a zero row
  VarId w = t.segment_mean(t.input(x), {0, 0, 0}, 2);
  CHECK(t.value(w).at(1, 0) == 0.0);
}

TEST_CASE("backward on simple analytic losses") {
  std::mt19937_64 rng(2);
  Tensor w = random_tensor(3, 4, rng);

  {  // loss = sum(W) -> grad all ones
    Tape t;
    VarId p = t.param(w);
    t.backward(t.sum(p));
    for (double g : t.grad(p).data) CHECK(g == doctest::Approx(1.0));
  }
  {  // loss = sum(W*W)/2 -> grad = W
    Tape t;
    VarId p = t.param(w);
    t.backward(t.scale(t.sum(t.mul(p, p)), 0.5));
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(t.grad(p).data[i] == doctest::Approx(w.data[i]));
  }
}

TEST_CASE("non-scalar loss is rejected") {
  Tape t;
  VarId p = t.param(Tensor(2, 2));
  CHECK_THROWS_AS(t.backward(p), ShapeError);
}

TEST_CASE("fan-out accumulates gradients additively") {
  Tape t;
  Tensor w(1, 3);
  w.data = {1.0, 2.0, 3.0};
  VarId p = t.param(w);
  // p used twice: loss = sum(p + p)
  t.backward(t.sum(t.add(p, p)));
  for (double g : t.grad(p).data) CHECK(g == doctest::Approx(2.0));
}

TEST_CASE("unreachable parameters get zero gradient") {
  Tape t;
  VarId used = t.param(Tensor(1, 2));
  VarId unused = t.param(Tensor(1, 2));
  t.backward(t.sum(used));
  for (double g : t.grad(unused).data) CHECK(g == 0.0);
}

TEST_CASE("finite differences: dense op compositions") {
  std::mt19937_64 rng(3);
  ParamSet params;
  params.add("A", random_tensor(3, 4, rng));
  params.add("B", random_tensor(4, 5, rng));
  params.add("C", random_tensor(3, 5, rng));
  check_gradients(
      [](Tape& t, const BoundParams& p) {
        VarId prod = t.matmul(p[0], p[1]);
        // keep relu inputs away from the kink so central differences are valid
        VarId shifted = t.add(prod, t.input([] {
          Tensor c(3, 5);
          for (double& v : c.data) v = 0.75;
          return c;
        }()));
        VarId probs = t.softmax_rows(t.relu(shifted));
        return t.sum(t.mul(probs, p[2]));
      },
      params, rng);
}

TEST_CASE("finite differences: matmul_nt, slices, concats") {
  std::mt19937_64 rng(4);
  ParamSet params;
  params.add("A", random_tensor(2, 6, rng));
  params.add("B", random_tensor(3, 6, rng));
  check_gradients(
      [](Tape& t, const BoundParams& p) {
        VarId scores = t.matmul_nt(p[0], p[1]);        // [2,3]
        VarId left = t.slice_cols(scores, 0, 2);
        VarId right = t.slice_cols(scores, 1, 2);
        VarId cat = t.concat_cols({left, right});      // [2,4]
        VarId stack = t.concat_rows({cat, cat});       // [4,4]
        return t.sum(t.log_softmax_rows(stack));
      },
      params, rng);
}

TEST_CASE("finite differences: gather, segment mean, row ops") {
  std::mt19937_64 rng(5);
  ParamSet params;
  params.add("table", random_tensor(6, 4, rng));
  params.add("scales", random_tensor(5, 1, rng));
  params.add("bias", random_tensor(1, 4, rng));
  check_gradients(
      [](Tape& t, const BoundParams& p) {
        VarId rows = t.gather_rows(p[0], {0, 2, 2, 5, 1});  // repeated index
        VarId scaled = t.scale_rows(rows, p[1]);
        VarId shifted = t.add_rowvec(scaled, p[2]);
        VarId pooled = t.segment_mean(shifted, {0, 1, 1, 0, 2}, 4);
        return t.sum(t.mul(pooled, pooled));
      },
      params, rng);
}

TEST_CASE("finite differences: layer norm, sqrt, dropout") {
  std::mt19937_64 rng(6);
  ParamSet params;
  params.add("x", random_tensor(4, 8, rng));
  params.add("gain", random_tensor(1, 8, rng));
  params.add("shift", random_tensor(1, 8, rng));
  Tensor mask(4, 8);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.data[i] = (i % 3 == 0) ? 0.0 : 1.0;
  check_gradients(
      [mask](Tape& t, const BoundParams& p) {
        VarId ln = t.layer_norm_rows(p[0], p[1], p[2]);
        VarId dropped = t.dropout(ln, mask);
        VarId sq = t.mul(dropped, dropped);
        VarId safe = t.sqrt_elem(t.add(sq, t.input([] {
          Tensor one(4, 8);
          for (double& v : one.data) v = 1.0;
          return one;
        }())));
        return t.sum(t.row_sum(safe));
      },
      params, rng);
}

TEST_CASE("forward determinism") {
  std::mt19937_64 rng(7);
  Tensor a = random_tensor(5, 5, rng);
  Tensor b = random_tensor(5, 5, rng);
  auto run = [&] {
    Tape t;
    return t.value(t.sum(t.softmax_rows(t.matmul(t.input(a), t.input(b))))).data[0];
  };
  double first = run();
  for (int i = 0; i < 5; ++i) CHECK(run() == first);
}
