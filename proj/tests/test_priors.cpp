#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "smrd/priors.hpp"

using namespace smrd;

namespace {

NoiseSchedule small_schedule() {
  NoiseSchedule s;
  s.levels = 2;
  s.beta_max = 1.0;
  s.beta_min = 0.1;
  s.steps_per_level = 3;
  s.eps0 = 1e-3;
  return s;
}

ComplexImage scalar(Complex v) {
  ComplexImage x(1, 1);
  x(0, 0) = v;
  return x;
}

}  // namespace

TEST_CASE("step sizes") {
  const NoiseSchedule s = small_schedule();
  CHECK(s.total_steps() == 6);
  CHECK(eta(s, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(eta(s, 5) == 1e-3);
  CHECK_THROWS_AS(eta(s, 6), std::out_of_range);

  const NoiseSchedule d;
  CHECK(d.total_steps() == 300);
  CHECK(eta(d, 299) == d.eps0);
  for (int t = 1; t < d.total_steps(); ++t) CHECK(eta(d, t) <= eta(d, t - 1));
  for (int l = 1; l < d.levels; ++l) CHECK(d.beta_at_level(l) < d.beta_at_level(l - 1));
  CHECK(d.beta_at_level(0) == doctest::Approx(1.0));
  CHECK(d.beta_at_level(d.levels - 1) == doctest::Approx(0.01));
}

TEST_CASE("invalid schedules and priors") {
  NoiseSchedule s;
  s.beta_min = 2.0;
  CHECK_THROWS(s.validate());
  CHECK_THROWS(make_gaussian_prior(ComplexImage::Zero(2, 2), 0.0, NoiseSchedule{}));
  CHECK_THROWS(make_smoothness_prior(-1.0, NoiseSchedule{}));
}

TEST_CASE("gaussian score") {
  NoiseSchedule s = small_schedule();
  const auto prior = make_gaussian_prior(scalar(0.0), 1.0, s);
  CHECK(std::abs(score(prior, scalar(2.0), 0)(0, 0) - Complex(-1.0)) < 1e-15);

  Rng rng(1);
  const ComplexImage m = oracle::random_image(5, 7, rng);
  const auto g = make_gaussian_prior(m, 0.3, NoiseSchedule{});
  CHECK(score(g, m, 10).cwiseAbs().maxCoeff() == 0.0);

  const ComplexImage x1 = oracle::random_image(5, 7, rng);
  const ComplexImage x2 = oracle::random_image(5, 7, rng);
  const double a = 0.37;
  const ComplexImage lhs = score(g, a * x1 + (1 - a) * x2, 42);
  const ComplexImage rhs = a * score(g, x1, 42) + (1 - a) * score(g, x2, 42);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(score(g, x1, 300), std::out_of_range);
}

TEST_CASE("noiseless langevin settles at the gaussian mean") {
  Rng rng(2);
  const ComplexImage m = oracle::random_image(4, 4, rng);
  const auto g = make_gaussian_prior(m, 0.5, NoiseSchedule{});
  ComplexImage x = oracle::random_image(4, 4, rng);
  for (int k = 0; k < 2000; ++k) x += 0.1 * score(g, x, 299);
  CHECK((x - m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("smoothness score") {
  const auto p = make_smoothness_prior(0.8, NoiseSchedule{});
  CHECK(score(p, ComplexImage::Constant(6, 5, Complex(2.0, -1.0)), 0).cwiseAbs().maxCoeff() == 0.0);

  Rng rng(3);
  const ComplexImage x = oracle::random_image(6, 5, rng);
  // -gamma L is the gradient of -gamma/2 * sum of squared neighbour differences; L is PSD.
  const Complex q = inner(x, graph_laplacian(x));
  CHECK(std::abs(q.imag()) < 1e-12);
  double diffs = 0.0;
  for (Eigen::Index r = 0; r < 6; ++r)
    for (Eigen::Index c = 0; c < 5; ++c) {
      if (r + 1 < 6) diffs += std::norm(x(r + 1, c) - x(r, c));
      if (c + 1 < 5) diffs += std::norm(x(r, c + 1) - x(r, c));
    }
  CHECK(q.real() == doctest::Approx(diffs).epsilon(1e-12));
  CHECK((score(p, x, 3) + 0.8 * graph_laplacian(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero prior") {
  Rng rng(4);
  const auto z = make_zero_prior(NoiseSchedule{});
  CHECK(score(z, oracle::random_image(3, 3, rng), 7).cwiseAbs().maxCoeff() == 0.0);
  CHECK(std::string(z.kind_name()) == "zero");
}
