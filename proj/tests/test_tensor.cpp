#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "core/tensor.hpp"

using namespace stflow;

namespace {

Tensor random_tensor(const Shape& s, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> d(static_cast<size_t>(shape_size(s)));
  for (double& v : d) v = dist(rng);
  Tensor t = Tensor::from_data(s, std::move(d));
  t.set_requires_grad(true);
  return t;
}

// Independently written direct quadruple-loop convolution.
std::vector<double> conv_reference(const std::vector<double>& in, int b_, int cin, int h,
                                   int w, const std::vector<double>& wt, int cout, int kh,
                                   int kw, const std::vector<double>& bias, int stride,
                                   int pad, int* oh_out, int* ow_out) {
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (w + 2 * pad - kw) / stride + 1;
  *oh_out = oh;
  *ow_out = ow;
  std::vector<double> out(static_cast<size_t>(b_) * cout * oh * ow, 0.0);
  for (int b = 0; b < b_; ++b) {
    for (int co = 0; co < cout; ++co) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          double acc = bias[static_cast<size_t>(co)];
          for (int ci = 0; ci < cin; ++ci) {
            for (int ky = 0; ky < kh; ++ky) {
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = oy * stride - pad + ky;
                const int ix = ox * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += in[((static_cast<size_t>(b) * cin + ci) * h + iy) * w + ix] *
                       wt[((static_cast<size_t>(co) * cin + ci) * kh + ky) * kw + kx];
              }
            }
          }
          out[((static_cast<size_t>(b) * cout + co) * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("conv2d box sum with zero padding") {
  const Tensor in = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor w = Tensor::full({1, 1, 3, 3}, 1.0);
  const Tensor b = Tensor::zeros({1});
  const Tensor out = conv2d(in, w, b, 1, 1);
  CHECK(out.at4(0, 0, 1, 1) == doctest::Approx(9.0));
  CHECK(out.at4(0, 0, 0, 0) == doctest::Approx(4.0));
  CHECK(out.at4(0, 0, 2, 2) == doctest::Approx(4.0));
  CHECK(out.at4(0, 0, 0, 1) == doctest::Approx(6.0));
}

TEST_CASE("conv2d identity kernel") {
  std::mt19937_64 rng(11);
  const Tensor in = random_tensor({2, 3, 5, 7}, rng);
  std::vector<double> wd(3 * 3 * 9, 0.0);
  for (int c = 0; c < 3; ++c) wd[(static_cast<size_t>(c) * 3 + c) * 9 + 4] = 1.0;
  const Tensor w = Tensor::from_data({3, 3, 3, 3}, std::move(wd));
  const Tensor out = conv2d(in, w, Tensor::zeros({3}), 1, 1);
  REQUIRE(out.shape() == in.shape());
  for (size_t i = 0; i < in.data().size(); ++i) {
    CHECK(out.data()[i] == doctest::Approx(in.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d matches brute-force loop oracle") {
  std::mt19937_64 rng(42);
  const Tensor in = random_tensor({2, 3, 8, 8}, rng);
  const Tensor w = random_tensor({4, 3, 3, 3}, rng);
  const Tensor b = random_tensor({4}, rng);
  const Tensor out = conv2d(in, w, b, 2, 1);
  int oh = 0, ow = 0;
  const auto ref = conv_reference(in.data(), 2, 3, 8, 8, w.data(), 4, 3, 3, b.data(), 2,
                                  1, &oh, &ow);
  REQUIRE(out.shape() == Shape{2, 4, oh, ow});
  double max_diff = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(out.data()[i] - ref[i]));
  }
  CHECK(max_diff < 1e-6);
}

TEST_CASE("conv2d rejects channel mismatch with diagnostic") {
  const Tensor in = Tensor::zeros({1, 3, 4, 4});
  const Tensor w = Tensor::zeros({2, 4, 3, 3});
  CHECK_THROWS_AS(conv2d(in, w, Tensor::zeros({2}), 1, 1), std::invalid_argument);
}

TEST_CASE("conv2d linearity for bias-free kernels") {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor({1, 2, 6, 6}, rng);
  const Tensor y = random_tensor({1, 2, 6, 6}, rng);
  const Tensor w = random_tensor({3, 2, 3, 3}, rng);
  const Tensor zb = Tensor::zeros({3});
  const double a = 1.7, b = -0.3;
  const Tensor lhs = conv2d(add(scale(x, a), scale(y, b)), w, zb, 1, 1);
  const Tensor rhs = add(scale(conv2d(x, w, zb, 1, 1), a), scale(conv2d(y, w, zb, 1, 1), b));
  for (size_t i = 0; i < lhs.data().size(); ++i) {
    CHECK(std::abs(lhs.data()[i] - rhs.data()[i]) < 1e-10);
  }
}

TEST_CASE("bilinear_upsample factor 1 is bit-identical") {
  std::mt19937_64 rng(9);
  const Tensor in = random_tensor({1, 2, 4, 5}, rng);
  const Tensor out = bilinear_upsample(in, 1);
  CHECK(out.data() == in.data());
}

TEST_CASE("bilinear_upsample of a constant stays constant") {
  const Tensor in = Tensor::full({1, 1, 3, 3}, 2.5);
  const Tensor out = bilinear_upsample(in, 4);
  for (double v : out.data()) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("bilinear_upsample matches the coordinate formula on 2x2 factor 2") {
  const Tensor in = Tensor::from_data({1, 1, 2, 2}, {0.0, 1.0, 2.0, 3.0});
  const Tensor out = bilinear_upsample(in, 2);
  auto sample = [&](double sy, double sx) {
    sy = std::min(std::max(sy, 0.0), 1.0);
    sx = std::min(std::max(sx, 0.0), 1.0);
    const int y0 = static_cast<int>(std::floor(sy));
    const int x0 = static_cast<int>(std::floor(sx));
    const int y1 = std::min(y0 + 1, 1);
    const int x1 = std::min(x0 + 1, 1);
    const double fy = sy - y0, fx = sx - x0;
    auto v = [&](int y, int x) { return in.at4(0, 0, y, x); };
    return (1 - fy) * ((1 - fx) * v(y0, x0) + fx * v(y0, x1)) +
           fy * ((1 - fx) * v(y1, x0) + fx * v(y1, x1));
  };
  for (int oy = 0; oy < 4; ++oy) {
    for (int ox = 0; ox < 4; ++ox) {
      const double expect = sample((oy + 0.5) / 2.0 - 0.5, (ox + 0.5) / 2.0 - 0.5);
      CHECK(out.at4(0, 0, oy, ox) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("elementwise and concat basics") {
  CHECK(sigmoid(Tensor::zeros({1})).item() == doctest::Approx(0.5));
  CHECK(tanh_(Tensor::zeros({1})).item() == doctest::Approx(0.0));
  const Tensor a = Tensor::zeros({1, 2, 4, 4});
  const Tensor b = Tensor::zeros({1, 3, 4, 4});
  CHECK(concat({a, b}, 1).shape() == Shape{1, 5, 4, 4});
  const Tensor bad = Tensor::zeros({1, 3, 4, 5});
  CHECK_THROWS_AS(concat({a, bad}, 1), std::invalid_argument);
  std::mt19937_64 rng(3);
  const Tensor x = random_tensor({2, 3}, rng);
  const Tensor ones = Tensor::full({2, 3}, 1.0);
  const Tensor prod = mul(x, ones);
  CHECK(prod.data() == x.data());
}

TEST_CASE("backward of sum gives all-ones gradient") {
  std::mt19937_64 rng(1);
  Tensor x = random_tensor({3, 4}, rng);
  Tape tape;
  tape.backward(sum(x));
  for (double g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward of quadratic form gives x") {
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({2, 5}, rng);
  Tape tape;
  tape.backward(scale(sum(mul(x, x)), 0.5));
  for (size_t i = 0; i < x.data().size(); ++i) {
    CHECK(x.grad()[i] == doctest::Approx(x.data()[i]).epsilon(1e-10));
  }
}

TEST_CASE("backward rejects non-scalar loss") {
  Tensor x = Tensor::full({2, 2}, 1.0);
  x.set_requires_grad(true);
  Tape tape;
  const Tensor y = mul(x, x);
  CHECK_THROWS_AS(tape.backward(y), std::invalid_argument);
}

TEST_CASE("grad_check on linear op is exact to machine noise") {
  std::mt19937_64 rng(7);
  const Tensor w = random_tensor({4, 4}, rng);
  const double err = grad_check(
      [&w](const std::vector<Tensor>& in) { return sum(mul(w, in[0])); },
      {random_tensor({4, 4}, rng)}, 1e-4);
  CHECK(err < 1e-9);
}

TEST_CASE("finite differences agree for every primitive over 20 seeds") {
  for (unsigned long long seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(conv2d(in[0], in[1], in[2], 2, 1));
          },
          {random_tensor({1, 2, 6, 6}, rng), random_tensor({3, 2, 3, 3}, rng),
           random_tensor({3}, rng)},
          1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(bilinear_upsample(in[0], 2));
          },
          {random_tensor({1, 2, 3, 3}, rng)}, 1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(mul(sigmoid(in[0]), tanh_(in[1])));
          },
          {random_tensor({3, 3}, rng), random_tensor({3, 3}, rng)}, 1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(concat({add(in[0], in[1]), sub(in[0], in[1])}, 1));
          },
          {random_tensor({1, 2, 2, 2}, rng), random_tensor({1, 2, 2, 2}, rng)}, 1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(qcfs(in[0], in[1], 4));
          },
          {random_tensor({3, 3}, rng, 0.05, 0.95), random_tensor({1}, rng, 1.0, 2.0)},
          1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) { return sum(spike(in[0])); },
          {random_tensor({4, 4}, rng)}, 1e-4);
      CHECK(err < 1e-5);
    }
    {
      const double err = grad_check(
          [](const std::vector<Tensor>& in) {
            return sum(replicate_channels(in[0], 3));
          },
          {random_tensor({1, 2, 2, 2}, rng)}, 1e-4);
      CHECK(err < 1e-5);
    }
  }
}

TEST_CASE("qcfs direct evaluations") {
  // x=0.5, lambda=1, L=4 -> floor(2.0)/4 = 0.5
  CHECK(qcfs(Tensor::from_data({1}, {0.5}), Tensor::from_data({1}, {1.0}), 4).item() ==
        doctest::Approx(0.5));
  // x=0.55, lambda=2, L=8 -> 2*floor(2.2)/8 = 0.5
  CHECK(qcfs(Tensor::from_data({1}, {0.55}), Tensor::from_data({1}, {2.0}), 8).item() ==
        doctest::Approx(0.5));
  // clipping at both ends
  CHECK(qcfs(Tensor::from_data({1}, {-0.3}), Tensor::from_data({1}, {1.0}), 4).item() ==
        doctest::Approx(0.0));
  CHECK(qcfs(Tensor::from_data({1}, {7.0}), Tensor::from_data({1}, {1.5}), 4).item() ==
        doctest::Approx(1.5));
}

TEST_CASE("spike surrogate values and derivatives") {
  const double pi = 3.14159265358979323846;
  // true Heaviside forward
  CHECK(spike(Tensor::from_data({1}, {0.0})).item() == doctest::Approx(1.0));
  CHECK(spike(Tensor::from_data({1}, {-0.1})).item() == doctest::Approx(0.0));
  {
    RelaxedModeGuard relax;
    // surrogate value at 0 is 1/2
    CHECK(spike(Tensor::from_data({1}, {0.0})).item() == doctest::Approx(0.5));
  }
  // surrogate derivative: 1 at 0, 1/(1+pi^2) at 1
  Tensor x0 = Tensor::param({1}, {0.0});
  {
    Tape tape;
    tape.backward(sum(spike(x0)));
  }
  CHECK(x0.grad()[0] == doctest::Approx(1.0));
  Tensor x1 = Tensor::param({1}, {1.0});
  {
    Tape tape;
    tape.backward(sum(spike(x1)));
  }
  CHECK(x1.grad()[0] == doctest::Approx(1.0 / (1.0 + pi * pi)));
}

TEST_CASE("deterministic outputs for identical inputs") {
  std::mt19937_64 rng_a(123), rng_b(123);
  const Tensor a1 = random_tensor({1, 2, 8, 8}, rng_a);
  const Tensor w1 = random_tensor({2, 2, 3, 3}, rng_a);
  const Tensor a2 = random_tensor({1, 2, 8, 8}, rng_b);
  const Tensor w2 = random_tensor({2, 2, 3, 3}, rng_b);
  const Tensor o1 = conv2d(a1, w1, Tensor::zeros({2}), 1, 1);
  const Tensor o2 = conv2d(a2, w2, Tensor::zeros({2}), 1, 1);
  CHECK(o1.data() == o2.data());
}
