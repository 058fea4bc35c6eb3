#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "smrd/core.hpp"
#include "smrd/random.hpp"

using namespace smrd;

TEST_CASE("constant image concentrates at the center bin") {
  const ComplexImage x = ComplexImage::Constant(8, 8, Complex(0.7, -0.2));
  const ComplexImage k = fft2c(x);
  for (Eigen::Index r = 0; r < 8; ++r) {
    for (Eigen::Index c = 0; c < 8; ++c) {
      const Complex expect = (r == 4 && c == 4) ? 8.0 * Complex(0.7, -0.2) : Complex(0.0);
      CHECK(std::abs(k(r, c) - expect) < 1e-12);
    }
  }
}

TEST_CASE("centered impulse inverts to a constant") {
  ComplexImage k = ComplexImage::Zero(6, 10);
  k(3, 5) = std::sqrt(60.0);
  const ComplexImage x = ifft2c(k);
  CHECK((x.array() - Complex(1.0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("transforms agree with direct summation") {
  Rng rng(11);
  for (auto [h, w] : {std::pair{4, 4}, std::pair{5, 6}, std::pair{3, 8}}) {
    const ComplexImage x = oracle::random_image(h, w, rng);
    CHECK((fft2c(x) - oracle::dft2c(x, false)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((ifft2c(x) - oracle::dft2c(x, true)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("parseval, round trip, linearity, adjointness") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index h = 4 + trial % 7;
    const Eigen::Index w = 3 + trial % 5;
    const ComplexImage x = oracle::random_image(h, w, rng);
    const ComplexImage y = oracle::random_image(h, w, rng);
    CHECK(std::abs(fft2c(x).norm() - x.norm()) <= 1e-12 * x.norm());
    CHECK((ifft2c(fft2c(x)) - x).norm() <= 1e-12 * x.norm());
    const Complex a(0.3, -1.1), b(-2.0, 0.4);
    const ComplexImage lhs = fft2c<double>(a * x + b * y);
    const ComplexImage rhs = a * fft2c(x) + b * fft2c(y);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    CHECK(std::abs(inner(fft2c(x), y) - inner(x, ifft2c(y))) <= 1e-10 * x.norm() * y.norm());
  }
}

TEST_CASE("zero-sized transforms are rejected") {
  CHECK_THROWS_AS(fft2c(ComplexImage(0, 4)), ShapeError);
  CHECK_THROWS_AS(ifft2c(ComplexImage(3, 0)), ShapeError);
}

TEST_CASE("inner product") {
  Rng rng(5);
  const ComplexImage a = oracle::random_image(3, 4, rng);
  const ComplexImage b = oracle::random_image(3, 4, rng);
  const Complex aa = inner(a, a);
  CHECK(aa.imag() == doctest::Approx(0.0));
  CHECK(aa.real() == doctest::Approx(a.squaredNorm()));
  CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-12);

  ComplexImage p(1, 2), q(1, 2);
  p << Complex(1, 1), Complex(0, 0);
  q << Complex(0, 0), Complex(2, 0);
  CHECK(inner(p, q) == Complex(0.0));
  CHECK_THROWS_AS(inner(p, ComplexImage(2, 1)), ShapeError);
}

TEST_CASE("coil stacks keep a common shape") {
  CoilStack s(3, 4, 5);
  CHECK(s.coils() == 3);
  CHECK(s.height() == 4);
  CHECK(s.width() == 5);
  s[1](2, 3) = Complex(1.0, 2.0);
  CHECK(squared_norm(s) == doctest::Approx(5.0));
}

TEST_CASE("derived seeds separate labels and indices") {
  CHECK(derive_seed(1, "noise") == derive_seed(1, "noise"));
  CHECK(derive_seed(1, "noise") != derive_seed(2, "noise"));
  CHECK(derive_seed(1, "noise") != derive_seed(1, "mask"));
  CHECK(derive_seed(1, "noise", 0) != derive_seed(1, "noise", 1));
}

TEST_CASE("standard normal draws have unit variance") {
  Rng rng(17);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.01);
}

TEST_CASE("single-sample axes are the identity") {
  ComplexImage x(1, 1);
  x(0, 0) = Complex(2.0, -3.0);
  CHECK(fft2c(x) == x);
  Rng rng(2);
  const ComplexImage row = oracle::random_image(1, 6, rng);
  CHECK((fft2c(row) - oracle::dft2c(row, false)).cwiseAbs().maxCoeff() < 1e-12);
}
