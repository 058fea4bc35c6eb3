#pragma once

#include "smrd/core.hpp"

namespace smrd {

struct MetricPair {
  double psnr = 0.0;
  double ssim = 0.0;
};

// 20 log10(max|ref| / rmse(|ref|, |test|)); +inf when the magnitudes agree exactly.
double psnr(const ComplexImage& ref, const ComplexImage& test);

struct SsimOptions {
  int window = 11;
  double gaussian_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over all fully contained Gaussian windows of the magnitude images; the dynamic
// range is max|ref|.
double ssim(const ComplexImage& ref, const ComplexImage& test, const SsimOptions& options = {});

MetricPair evaluate(const ComplexImage& ref, const ComplexImage& test);

}  // namespace smrd
