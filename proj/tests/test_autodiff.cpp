#include <cmath>
#include <iostream>
#include <random>

#include "doctest.h"
#include "gazecomp/error.hpp"
#include "gazecomp/autodiff.hpp"

using namespace gazecomp;
using ad::Tensor;

namespace {

Tensor col(std::initializer_list<double> values) {
  Tensor t(static_cast<ad::Index>(values.size()), 1);
  ad::Index i = 0;
  for (double v : values) t(i++, 0) = v;
  return t;
}

Tensor random_matrix(ad::Index r, ad::Index c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Tensor t(r, c);
  for (ad::Index i = 0; i < t.size(); ++i) t.data()[i] = d(rng);
  return t;
}

}  // namespace

TEST_SUITE("autodiff") {
  TEST_CASE("sigmoid of zero is one half") {
    ad::Tape tape;
    auto y = ad::sigmoid(tape.constant(col({0.0})));
    CHECK(y.value()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("identity matmul returns the operand") {
    ad::Tape tape;
    Tensor m(2, 2);
    m << 3, 4, 5, 6;
    auto y = ad::matmul(tape.constant(Tensor::Identity(2, 2)), tape.constant(m));
    CHECK(y.value() == m);
  }

  TEST_CASE("tanh(1) agrees with the exponential form") {
    ad::Tape tape;
    const double got = ad::tanh(tape.constant(col({1.0}))).value()(0, 0);
    const long double e2 = std::exp(2.0L);
    const double reference = static_cast<double>((e2 - 1.0L) / (e2 + 1.0L));
    CHECK(got == doctest::Approx(reference).epsilon(1e-15));
    CHECK(got == doctest::Approx(0.7615941559557649).epsilon(1e-15));
  }

  TEST_CASE("matmul shape mismatch names the primitive and both shapes") {
    ad::Tape tape;
    auto a = tape.constant(Tensor::Zero(2, 3));
    auto b = tape.constant(Tensor::Zero(2, 3));
    try {
      ad::matmul(a, b);
      FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("matmul") != std::string::npos);
      CHECK(msg.find("(2x3)") != std::string::npos);
    }
    CHECK_THROWS_AS(ad::add(a, tape.constant(Tensor::Zero(3, 2))), ShapeError);
    CHECK_THROWS_AS(ad::cmul(a, tape.constant(Tensor::Zero(1, 3))), ShapeError);
  }

  TEST_CASE("softmax cross-entropy values") {
    ad::Tape tape;
    CHECK(ad::softmax_cross_entropy(tape.constant(col({0.0, 0.0})), 0).value()(0, 0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));

    const double saturated = ad::softmax_cross_entropy(tape.constant(col({1000.0, 0.0})), 0).value()(0, 0);
    CHECK(std::isfinite(saturated));
    CHECK(saturated == doctest::Approx(0.0).epsilon(1e-12));

    const double got = ad::softmax_cross_entropy(tape.constant(col({1.0, 2.0, 3.0})), 2).value()(0, 0);
    const long double reference = std::log(1.0L + std::exp(-1.0L) + std::exp(-2.0L));
    CHECK(got == doctest::Approx(static_cast<double>(reference)).epsilon(1e-14));
    CHECK(got == doctest::Approx(0.40760596444438).epsilon(1e-12));

    CHECK_THROWS_AS(ad::softmax_cross_entropy(tape.constant(col({1.0, 2.0})), 2), ShapeError);
    CHECK_THROWS_AS(ad::softmax_cross_entropy(tape.constant(col({1.0, 2.0})), -1), ShapeError);
  }

  TEST_CASE("backward through sum gives ones") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({0.3, -2.0, 7.0}));
    ad::Tape tape;
    tape.backward(ad::sum(tape.parameter(p)));
    CHECK(p.grad == Tensor::Ones(3, 1));
  }

  TEST_CASE("half squared norm has gradient p") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({2.0, -1.0}));
    ad::Tape tape;
    auto v = tape.parameter(p);
    tape.backward(ad::scale(ad::sum(ad::cmul(v, v)), 0.5));
    CHECK(p.grad(0, 0) == doctest::Approx(2.0));
    CHECK(p.grad(1, 0) == doctest::Approx(-1.0));
  }

  TEST_CASE("backward twice is an error") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({1.0}));
    ad::Tape tape;
    auto loss = ad::sum(tape.parameter(p));
    tape.backward(loss);
    CHECK_THROWS_AS(tape.backward(loss), Error);
    CHECK_THROWS_AS(loss.value(), Error);
  }

  TEST_CASE("gradients accumulate across uses and scope filters parameters") {
    ad::ParameterSet params;
    auto& a = params.add("a", col({1.0, 2.0}));
    auto& b = params.add("b", col({3.0, 4.0}));
    ad::Tape tape;
    auto va = tape.parameter(a);
    auto vb = tape.parameter(b);
    // loss = sum(a*b) + sum(a)
    auto loss = ad::sum(ad::cmul(va, vb)) + ad::sum(va);
    tape.backward(loss, ad::Scope{{"a"}});
    CHECK(a.grad(0, 0) == doctest::Approx(4.0));
    CHECK(a.grad(1, 0) == doctest::Approx(5.0));
    CHECK(b.grad.isZero());
  }

  TEST_CASE("row lookup scatters its gradient into one row") {
    ad::ParameterSet params;
    Tensor e(3, 2);
    e << 1, 2, 3, 4, 5, 6;
    auto& emb = params.add("emb", e);
    ad::Tape tape;
    auto r = tape.row(emb, 1);
    CHECK(r.value() == col({3.0, 4.0}));
    tape.backward(ad::sum(ad::cmul(r, tape.constant(col({10.0, 20.0})))));
    CHECK(emb.grad.row(0).isZero());
    CHECK(emb.grad(1, 0) == doctest::Approx(10.0));
    CHECK(emb.grad(1, 1) == doctest::Approx(20.0));
    CHECK(emb.grad.row(2).isZero());
    ad::Tape t2;
    CHECK_THROWS_AS(t2.row(emb, 3), ShapeError);
  }

  TEST_CASE("duplicate parameter names are rejected") {
    ad::ParameterSet params;
    params.add("w", col({1.0}));
    CHECK_THROWS_AS(params.add("w", col({2.0})), ConfigError);
    CHECK(params.find("missing") == nullptr);
    CHECK_THROWS_AS(params.at("missing"), ConfigError);
  }

  TEST_CASE("sgd step") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({1.0}));
    p.grad(0, 0) = 0.5;
    auto ptrs = params.pointers();
    ad::sgd_step<double>(ptrs, 0.1);
    CHECK(p.value(0, 0) == doctest::Approx(0.95));
    CHECK(p.grad.isZero());

    ad::sgd_step<double>(ptrs, 0.1);  // zero grad: fixed point
    CHECK(p.value(0, 0) == doctest::Approx(0.95));
  }

  TEST_CASE("two gradient descent steps on p^2/2 from 1 with lr 0.5") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({1.0}));
    auto ptrs = params.pointers();
    for (int i = 0; i < 2; ++i) {
      ad::Tape tape;
      auto v = tape.parameter(p);
      tape.backward(ad::scale(ad::sum(ad::cmul(v, v)), 0.5));
      ad::sgd_step<double>(ptrs, 0.5);
    }
    // Hand iteration: 1 -> 0.5 -> 0.25.
    CHECK(p.value(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
  }

  TEST_CASE("sgd rejects non-finite gradients before touching any value") {
    ad::ParameterSet params;
    auto& a = params.add("a", col({1.0}));
    auto& b = params.add("bad", col({1.0}));
    a.grad(0, 0) = 1.0;
    b.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    auto ptrs = params.pointers();
    try {
      ad::sgd_step<double>(ptrs, 0.1);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("bad") != std::string::npos);
    }
    CHECK(a.value(0, 0) == 1.0);
    CHECK_THROWS_AS(ad::sgd_step<double>(ptrs, 0.0), ConfigError);
  }

  TEST_CASE("clip_grad_norm rescales to the bound") {
    ad::ParameterSet params;
    auto& p = params.add("p", col({3.0, 4.0}));
    p.grad = col({3.0, 4.0});
    auto ptrs = params.pointers();
    CHECK(ad::clip_grad_norm<double>(ptrs, 1.0) == doctest::Approx(5.0));
    CHECK(p.grad.norm() == doctest::Approx(1.0));
    CHECK(ad::clip_grad_norm<double>(ptrs, 10.0) == doctest::Approx(1.0));
    CHECK(p.grad.norm() == doctest::Approx(1.0));
  }

  TEST_CASE("finite differences: exact for a linear model, rejects epsilon 0") {
    std::mt19937_64 rng(3);
    ad::ParameterSet params;
    auto& w = params.add("w", random_matrix(3, 4, rng));
    const Tensor x = random_matrix(4, 1, rng);
    ad::LossFunction<double> f = [&](ad::Tape& tape) {
      return ad::sum(ad::matmul(tape.parameter(w), tape.constant(x)));
    };
    auto ptrs = params.pointers();
    const auto report = ad::finite_difference_check<double>(f, ptrs, 1e-5);
    CHECK(report.max_rel_error < 1e-10);
    CHECK(report.coordinates == 12);
    CHECK(w.grad.isZero());  // grads restored
    CHECK_THROWS_AS(ad::finite_difference_check<double>(f, ptrs, 0.0), ConfigError);
  }

  TEST_CASE("finite differences over every primitive") {
    std::mt19937_64 rng(8);
    ad::ParameterSet params;
    auto& w = params.add("w", random_matrix(3, 4, rng));
    auto& b = params.add("b", random_matrix(3, 1, rng));
    auto& x = params.add("x", random_matrix(4, 1, rng));
    auto& e = params.add("e", random_matrix(5, 2, rng));
    ad::LossFunction<double> f = [&](ad::Tape& tape) {
      auto h = ad::tanh(ad::affine(tape.parameter(w), tape.parameter(x), tape.parameter(b)));
      auto g = ad::sigmoid(ad::matmul(tape.parameter(w), tape.parameter(x)));
      auto z = ad::concat(ad::cmul(h, g), tape.row(e, 2));
      auto l1 = ad::softmax_cross_entropy(z, 3);
      auto l2 = ad::scale(ad::sum(ad::add(h, g)), 0.3);
      return l1 + l2;
    };
    auto ptrs = params.pointers();
    const auto report = ad::finite_difference_check<double>(f, ptrs, 1e-5);
    CHECK(report.max_rel_error < 1e-6);
    CHECK(report.worst.size() == 4);
  }

  TEST_CASE("float scalar instantiation") {
    ad::BasicParameterSet<float> params;
    auto& p = params.add("p", ad::MatrixX<float>::Constant(2, 1, 1.0f));
    ad::BasicTape<float> tape;
    tape.backward(ad::sum(ad::tanh(tape.parameter(p))));
    const float expected = 1.0f - std::tanh(1.0f) * std::tanh(1.0f);
    CHECK(p.grad(0, 0) == doctest::Approx(expected).epsilon(1e-6));
  }
}
