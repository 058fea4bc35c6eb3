#include "smrd/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smrd/random.hpp"

namespace smrd {

SamplingMask::SamplingMask(MaskArray keep, double declared_accel, Eigen::Index calib_rows, Eigen::Index calib_cols)
    : keep_(std::move(keep)), declared_accel_(declared_accel), calib_rows_(calib_rows), calib_cols_(calib_cols) {
  if (keep_.rows() <= 0 || keep_.cols() <= 0) throw ShapeError("mask must be non-empty");
  if (!(declared_accel_ >= 1.0)) throw std::invalid_argument("declared acceleration must be >= 1");
}

Eigen::Index SamplingMask::kept_count() const {
  return static_cast<Eigen::Index>((keep_.array() != 0).count());
}

double SamplingMask::realized_accel() const {
  const auto kept = kept_count();
  if (kept == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(keep_.size()) / static_cast<double>(kept);
}

bool SamplingMask::in_calibration(Eigen::Index row, Eigen::Index col) const {
  if (calib_rows_ == 0 || calib_cols_ == 0) return false;
  const Eigen::Index r0 = height() / 2 - calib_rows_ / 2;
  const Eigen::Index c0 = width() / 2 - calib_cols_ / 2;
  return row >= r0 && row < r0 + calib_rows_ && col >= c0 && col < c0 + calib_cols_;
}

namespace {

std::vector<bool> equispaced_columns(Eigen::Index width, double accel, Eigen::Index acs, Eigen::Index offset,
                                     double spacing) {
  std::vector<bool> cols(static_cast<std::size_t>(width), false);
  const Eigen::Index c0 = width / 2 - acs / 2;
  for (Eigen::Index c = c0; c < c0 + acs; ++c) cols[static_cast<std::size_t>(c)] = true;
  if (std::isfinite(spacing)) {
    for (double pos = static_cast<double>(offset); pos < static_cast<double>(width) - 0.5; pos += spacing) {
      const auto c = static_cast<Eigen::Index>(std::lround(pos));
      if (c < width) cols[static_cast<std::size_t>(c)] = true;
    }
  }
  (void)accel;
  return cols;
}

}  // namespace

SamplingMask make_equispaced_mask(Eigen::Index height, Eigen::Index width, double accel, double acs_fraction,
                                  std::uint64_t seed) {
  if (height <= 0 || width <= 0) throw ShapeError("mask dimensions must be positive");
  if (!(accel >= 1.0)) throw std::invalid_argument("acceleration must be >= 1");
  if (accel > static_cast<double>(width)) throw std::invalid_argument("acceleration exceeds the number of columns");
  if (!(acs_fraction >= 0.0 && acs_fraction < 1.0)) throw std::invalid_argument("acs_fraction must lie in [0, 1)");

  const auto w = static_cast<double>(width);
  const auto acs = static_cast<Eigen::Index>(std::ceil(acs_fraction * w - 1e-9));
  // Spread the remaining budget so ACS plus outer lines total width / accel.
  double spacing = accel;
  if (acs > 0) {
    const double a = static_cast<double>(acs);
    spacing = (a * accel >= w) ? std::numeric_limits<double>::infinity() : accel * (a - w) / (a * accel - w);
  }
  const Eigen::Index phases = std::isfinite(spacing) ? std::max<Eigen::Index>(1, std::lround(spacing)) : 1;
  Rng rng = make_rng(seed, "equispaced-offset");
  const Eigen::Index first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(phases));

  // The seeded phase is used unless it misses the acceleration tolerance; then the closest phase wins.
  std::vector<bool> best;
  double best_err = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < phases; ++k) {
    const Eigen::Index offset = (first + k) % phases;
    auto cols = equispaced_columns(width, accel, acs, offset, spacing);
    const auto kept = std::count(cols.begin(), cols.end(), true);
    const double err = std::abs(w / static_cast<double>(kept) - accel) / accel;
    if (err < best_err) {
      best_err = err;
      best = std::move(cols);
    }
    if (err <= 0.10) break;
  }

  MaskArray keep = MaskArray::Zero(height, width);
  for (Eigen::Index c = 0; c < width; ++c) {
    if (best[static_cast<std::size_t>(c)]) keep.col(c).setConstant(1);
  }
  return SamplingMask(std::move(keep), accel, acs > 0 ? height : 0, acs);
}

double poisson_local_radius(Eigen::Index height, Eigen::Index width, Eigen::Index row, Eigen::Index col,
                            double base_radius, double density_slope) {
  const double dy = (static_cast<double>(row) - static_cast<double>(height / 2)) / (0.5 * static_cast<double>(height));
  const double dx = (static_cast<double>(col) - static_cast<double>(width / 2)) / (0.5 * static_cast<double>(width));
  const double rho = std::min(1.0, std::hypot(dx, dy) / std::sqrt(2.0));
  return base_radius * (1.0 + density_slope * rho);
}

namespace {

// Dart throwing over a fixed candidate order. Accepts p when every accepted q satisfies
// |p - q| >= max(r(p), r(q)).
MaskArray throw_darts(Eigen::Index height, Eigen::Index width, Eigen::Index calib, double base_radius,
                      double density_slope, const std::vector<Eigen::Index>& order) {
  MaskArray keep = MaskArray::Zero(height, width);
  const Eigen::Index r0 = height / 2 - calib / 2;
  const Eigen::Index c0 = width / 2 - calib / 2;
  auto in_calib = [&](Eigen::Index r, Eigen::Index c) {
    return calib > 0 && r >= r0 && r < r0 + calib && c >= c0 && c < c0 + calib;
  };
  const double max_radius = base_radius * (1.0 + density_slope);
  if (max_radius <= 1.0) {
    keep.setConstant(1);
    return keep;
  }
  RealImage<double> radius(height, width);
  for (Eigen::Index r = 0; r < height; ++r)
    for (Eigen::Index c = 0; c < width; ++c) radius(r, c) = poisson_local_radius(height, width, r, c, base_radius, density_slope);

  const auto reach = static_cast<Eigen::Index>(std::ceil(max_radius));
  for (Eigen::Index idx : order) {
    const Eigen::Index r = idx / width;
    const Eigen::Index c = idx % width;
    if (in_calib(r, c)) continue;
    const double rp = radius(r, c);
    bool ok = true;
    for (Eigen::Index qr = std::max<Eigen::Index>(0, r - reach); ok && qr <= std::min(height - 1, r + reach); ++qr) {
      for (Eigen::Index qc = std::max<Eigen::Index>(0, c - reach); qc <= std::min(width - 1, c + reach); ++qc) {
        if (keep(qr, qc) == 0 || in_calib(qr, qc)) continue;
        const double d = std::hypot(static_cast<double>(qr - r), static_cast<double>(qc - c));
        if (d < std::max(rp, radius(qr, qc))) {
          ok = false;
          break;
        }
      }
    }
    if (ok) keep(r, c) = 1;
  }
  for (Eigen::Index r = r0; calib > 0 && r < r0 + calib; ++r)
    for (Eigen::Index c = c0; c < c0 + calib; ++c) keep(r, c) = 1;
  return keep;
}

}  // namespace

PoissonDiscPattern make_poisson_disc_pattern(Eigen::Index height, Eigen::Index width, double accel, Eigen::Index calib,
                                             std::uint64_t seed, const PoissonDiscOptions& options) {
  if (height <= 0 || width <= 0) throw ShapeError("mask dimensions must be positive");
  if (calib < 0 || calib > std::min(height, width)) throw std::invalid_argument("calibration block larger than image");
  if (!(accel >= 1.0)) throw std::invalid_argument("infeasible acceleration: more samples than pixels requested");
  const double total = static_cast<double>(height * width);
  const double target = total / accel;
  if (static_cast<double>(calib * calib) > target * (1.0 + options.accel_tolerance))
    throw std::invalid_argument("infeasible acceleration: calibration block alone exceeds the sample budget");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(height * width));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng = make_rng(seed, "poisson-order");
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }

  auto realized = [&](const MaskArray& k) { return total / static_cast<double>((k.array() != 0).count()); };

  double lo = 0.0;
  double hi = std::sqrt(total);
  MaskArray best = throw_darts(height, width, calib, lo, options.density_slope, order);
  double best_err = std::abs(realized(best) - accel) / accel;
  double best_radius = lo;
  for (int step = 0; step < options.max_bisection_steps && best_err > 0.01; ++step) {
    const double mid = 0.5 * (lo + hi);
    MaskArray keep = throw_darts(height, width, calib, mid, options.density_slope, order);
    const double r = realized(keep);
    const double err = std::abs(r - accel) / accel;
    if (err < best_err) {
      best_err = err;
      best = keep;
      best_radius = mid;
    }
    if (r < accel) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_err > options.accel_tolerance)
    throw std::runtime_error("poisson-disc bisection did not reach the requested acceleration");
  return {SamplingMask(std::move(best), accel, calib, calib), best_radius};
}

SamplingMask make_poisson_disc_mask(Eigen::Index height, Eigen::Index width, double accel, Eigen::Index calib,
                                    std::uint64_t seed, const PoissonDiscOptions& options) {
  return make_poisson_disc_pattern(height, width, accel, calib, seed, options).mask;
}

double CoilSensitivities::sos_deviation() const {
  MagnitudeImage sos = MagnitudeImage::Zero(height(), width());
  for (const auto& s : maps) sos += s.cwiseAbs2();
  return (sos.array() - 1.0).abs().maxCoeff();
}

CoilSensitivities sos_normalize(CoilStack raw) {
  MagnitudeImage sos = MagnitudeImage::Zero(raw.height(), raw.width());
  for (const auto& s : raw) sos += s.cwiseAbs2();
  if ((sos.array() <= 0.0).any()) throw std::invalid_argument("coil maps vanish at some pixel");
  const MagnitudeImage inv = sos.cwiseSqrt().cwiseInverse();
  for (auto& s : raw) s = s.cwiseProduct(inv.cast<Complex>());
  return CoilSensitivities{std::move(raw)};
}

ForwardModel::ForwardModel(CoilSensitivities sens, SamplingMask mask) : sens_(std::move(sens)), mask_(std::move(mask)) {
  if (sens_.height() != mask_.height() || sens_.width() != mask_.width())
    throw ShapeError("coil maps and mask disagree on shape");
  const MaskArray& keep = mask_.keep();
  full_columns_ = true;
  for (Eigen::Index c = 0; c < keep.cols() && full_columns_; ++c) {
    for (Eigen::Index r = 1; r < keep.rows(); ++r) {
      if (keep(r, c) != keep(0, c)) {
        full_columns_ = false;
        break;
      }
    }
  }
}

CoilStack ForwardModel::forward(const ComplexImage& x) const {
  require_same_shape(x, sens_.maps[0], "apply_forward");
  CoilStack out(coils(), height(), width());
  for (std::size_t c = 0; c < coils(); ++c) out[c] = mask_.apply(fft2c<double>(sens_.maps[c].cwiseProduct(x)));
  return out;
}

ComplexImage ForwardModel::adjoint(const CoilStack& y) const {
  if (y.coils() != coils()) throw ShapeError("apply_adjoint: coil count mismatch");
  require_same_shape(y[0], sens_.maps[0], "apply_adjoint");
  ComplexImage out = ComplexImage::Zero(height(), width());
  for (std::size_t c = 0; c < coils(); ++c)
    out += sens_.maps[c].conjugate().cwiseProduct(ifft2c<double>(mask_.apply(y[c])));
  return out;
}

ComplexImage ForwardModel::normal(const ComplexImage& x) const {
  require_same_shape(x, sens_.maps[0], "normal");
  ComplexImage out = ComplexImage::Zero(height(), width());
  if (full_columns_) {
    // Whole columns kept or dropped: the transform along the height axis cancels, only rows need one.
    const MaskArray& keep = mask_.keep();
    for (std::size_t c = 0; c < coils(); ++c) {
      ComplexImage k = sens_.maps[c].cwiseProduct(x);
      detail::centered_fft_axis(k, 1, false);
      for (Eigen::Index col = 0; col < k.cols(); ++col) {
        if (keep(0, col) == 0) k.col(col).setZero();
      }
      detail::centered_fft_axis(k, 1, true);
      out += sens_.maps[c].conjugate().cwiseProduct(k);
    }
    return out;
  }
  for (std::size_t c = 0; c < coils(); ++c) {
    const ComplexImage k = mask_.apply(fft2c<double>(sens_.maps[c].cwiseProduct(x)));
    out += sens_.maps[c].conjugate().cwiseProduct(ifft2c<double>(k));
  }
  return out;
}

CoilStack apply_forward(const ForwardModel& fm, const ComplexImage& x) { return fm.forward(x); }

ComplexImage apply_adjoint(const ForwardModel& fm, const CoilStack& y) { return fm.adjoint(y); }

CoilStack add_kspace_noise(const CoilStack& y, const SamplingMask& mask, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
  CoilStack out = y;
  if (spec.sigma == 0.0) return out;
  for (std::size_t c = 0; c < out.coils(); ++c) {
    require_same_shape(out[c], mask.keep().cast<double>(), "add_kspace_noise");
    Rng rng = make_rng(spec.seed, "kspace-noise", c);
    const ComplexImage noise = complex_gaussian(out.height(), out.width(), rng, spec.sigma);
    for (Eigen::Index i = 0; i < noise.size(); ++i) {
      if (mask.keep().data()[i] != 0) out[c].data()[i] += noise.data()[i];
    }
  }
  return out;
}

MagnitudeImage density_weights(const SamplingMask& mask, int window) {
  const Eigen::Index h = mask.height();
  const Eigen::Index w = mask.width();
  const int half = window / 2;
  auto density = [&](Eigen::Index r, Eigen::Index c) {
    int count = 0;
    for (int dr = -half; dr <= half; ++dr)
      for (int dc = -half; dc <= half; ++dc) count += mask.keep()(((r + dr) % h + h) % h, ((c + dc) % w + w) % w) != 0;
    return static_cast<double>(count) / static_cast<double>(window * window);
  };
  const double center = density(h / 2, w / 2);
  MagnitudeImage weights = MagnitudeImage::Zero(h, w);
  for (Eigen::Index r = 0; r < h; ++r)
    for (Eigen::Index c = 0; c < w; ++c)
      if (mask.kept(r, c)) weights(r, c) = center / density(r, c);
  return weights;
}

CoilStack density_compensate(const CoilStack& y, const SamplingMask& mask) {
  const MagnitudeImage weights = density_weights(mask);
  CoilStack out = y;
  for (auto& plane : out) {
    require_same_shape(plane, weights, "density_compensate");
    plane = plane.cwiseProduct(weights.cast<Complex>());
  }
  return out;
}

}  // namespace smrd
