#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "smrd/data.hpp"
#include "smrd/metrics.hpp"

using namespace smrd;

TEST_CASE("psnr") {
  Rng rng(1);
  const ComplexImage a = oracle::random_image(12, 9, rng);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(ComplexImage::Ones(4, 4), ComplexImage::Zero(4, 4)) == doctest::Approx(0.0));

  const ComplexImage b = oracle::random_image(12, 9, rng);
  const Eigen::ArrayXXd d = a.cwiseAbs().array() - b.cwiseAbs().array();
  const double rmse = std::sqrt(d.square().mean());
  CHECK(std::abs(psnr(a, b) - 20.0 * std::log10(a.cwiseAbs().maxCoeff() / rmse)) <= 1e-10);
  CHECK_THROWS_AS(psnr(a, ComplexImage::Zero(9, 12)), ShapeError);
}

TEST_CASE("psnr falls as noise grows") {
  const ComplexImage x = make_phantom({PhantomKind::shepp_logan, 32, PhaseKind::smooth}, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const ComplexImage noise = oracle::random_image(32, 32, rng);
    double last = std::numeric_limits<double>::infinity();
    for (double s : {0.001, 0.003, 0.01, 0.03, 0.1, 0.3}) {
      const double p = psnr(x, x + s * noise);
      CHECK(p < last);
      last = p;
    }
  }
}

TEST_CASE("ssim") {
  Rng rng(2);
  const ComplexImage x = make_phantom({PhantomKind::shepp_logan, 32, PhaseKind::none}, 0);
  CHECK(ssim(x, x) == 1.0);

  SUBCASE("inverted binary image scores low") {
    ComplexImage disk = ComplexImage::Zero(32, 32);
    for (int r = 0; r < 32; ++r)
      for (int c = 0; c < 32; ++c)
        if ((r - 15.5) * (r - 15.5) + (c - 15.5) * (c - 15.5) < 100.0) disk(r, c) = 1.0;
    CHECK(ssim(disk, ComplexImage(ComplexImage::Ones(32, 32) - disk)) < 0.2);
  }
  SUBCASE("constant images reduce to the luminance term") {
    const double c1 = 0.8, c2 = 0.3;
    const double k = (0.01 * c1) * (0.01 * c1);
    const double expect = (2 * c1 * c2 + k) / (c1 * c1 + c2 * c2 + k);
    CHECK(std::abs(ssim(ComplexImage::Constant(16, 16, c1), ComplexImage::Constant(16, 16, c2)) - expect) <= 1e-8);
  }
  SUBCASE("too small for the window") {
    CHECK_THROWS_AS(ssim(ComplexImage::Ones(10, 20), ComplexImage::Ones(10, 20)), ShapeError);
  }
  SUBCASE("both metrics ignore a shared global phase") {
    const ComplexImage y = x + 0.05 * oracle::random_image(32, 32, rng);
    const Complex rot = std::polar(1.0, 0.7);
    CHECK(psnr(ComplexImage(rot * x), ComplexImage(rot * y)) == doctest::Approx(psnr(x, y)).epsilon(1e-12));
    CHECK(ssim(ComplexImage(rot * x), ComplexImage(rot * y)) == doctest::Approx(ssim(x, y)).epsilon(1e-12));
    const double s = ssim(x, y);
    CHECK(s > -1.0);
    CHECK(s < 1.0);
  }
}
