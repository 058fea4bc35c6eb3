#include "smrd/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace smrd {

double psnr(const ComplexImage& ref, const ComplexImage& test) {
  require_same_shape(ref, test, "psnr");
  const MagnitudeImage a = ref.cwiseAbs();
  const MagnitudeImage b = test.cwiseAbs();
  const double mse = (a - b).squaredNorm() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(a.maxCoeff() / std::sqrt(mse));
}

namespace {

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const double c = 0.5 * static_cast<double>(size - 1);
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= total;
  return k;
}

// Separable weighted mean over every valid window position.
MagnitudeImage filter_valid(const MagnitudeImage& img, const std::vector<double>& k) {
  const auto n = static_cast<Eigen::Index>(k.size());
  const Eigen::Index oh = img.rows() - n + 1;
  const Eigen::Index ow = img.cols() - n + 1;
  MagnitudeImage rows = MagnitudeImage::Zero(img.rows(), ow);
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < ow; ++c)
      for (Eigen::Index j = 0; j < n; ++j) rows(r, c) += k[static_cast<std::size_t>(j)] * img(r, c + j);
  MagnitudeImage out = MagnitudeImage::Zero(oh, ow);
  for (Eigen::Index r = 0; r < oh; ++r)
    for (Eigen::Index c = 0; c < ow; ++c)
      for (Eigen::Index i = 0; i < n; ++i) out(r, c) += k[static_cast<std::size_t>(i)] * rows(r + i, c);
  return out;
}

}  // namespace

double ssim(const ComplexImage& ref, const ComplexImage& test, const SsimOptions& options) {
  require_same_shape(ref, test, "ssim");
  if (ref.rows() < options.window || ref.cols() < options.window)
    throw ShapeError("ssim: image smaller than the window");
  const MagnitudeImage x = ref.cwiseAbs();
  const MagnitudeImage y = test.cwiseAbs();
  const double range = x.maxCoeff();
  const double c1 = (options.k1 * range) * (options.k1 * range);
  const double c2 = (options.k2 * range) * (options.k2 * range);

  const auto k = gaussian_window(options.window, options.gaussian_sigma);
  const MagnitudeImage mx = filter_valid(x, k);
  const MagnitudeImage my = filter_valid(y, k);
  const MagnitudeImage xx = filter_valid(x.cwiseProduct(x), k);
  const MagnitudeImage yy = filter_valid(y.cwiseProduct(y), k);
  const MagnitudeImage xy = filter_valid(x.cwiseProduct(y), k);

  double total = 0.0;
  for (Eigen::Index i = 0; i < mx.size(); ++i) {
    const double ux = mx.data()[i];
    const double uy = my.data()[i];
    const double vx = xx.data()[i] - ux * ux;
    const double vy = yy.data()[i] - uy * uy;
    const double cxy = xy.data()[i] - ux * uy;
    total += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

MetricPair evaluate(const ComplexImage& ref, const ComplexImage& test) {
  return MetricPair{psnr(ref, test), ssim(ref, test)};
}

}  // namespace smrd
