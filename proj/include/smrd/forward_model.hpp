#pragma once

#include <cstdint>
#include <vector>

#include "smrd/core.hpp"

namespace smrd {

using MaskArray = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Binary k-space sampling pattern with low frequencies at the array center.
class SamplingMask {
 public:
  SamplingMask() = default;
  SamplingMask(MaskArray keep, double declared_accel, Eigen::Index calib_rows = 0, Eigen::Index calib_cols = 0);

  Eigen::Index height() const { return keep_.rows(); }
  Eigen::Index width() const { return keep_.cols(); }
  const MaskArray& keep() const { return keep_; }
  bool kept(Eigen::Index row, Eigen::Index col) const { return keep_(row, col) != 0; }

  double declared_accel() const { return declared_accel_; }
  Eigen::Index kept_count() const;
  double realized_accel() const;

  // Size of the centered fully sampled block (0 when none was configured).
  Eigen::Index calib_rows() const { return calib_rows_; }
  Eigen::Index calib_cols() const { return calib_cols_; }
  bool in_calibration(Eigen::Index row, Eigen::Index col) const;

  // Zeroes every masked-out entry.
  template <typename Scalar>
  Image<Scalar> apply(const Image<Scalar>& ksp) const {
    if (ksp.rows() != keep_.rows() || ksp.cols() != keep_.cols()) throw ShapeError("mask apply: shape mismatch");
    Image<Scalar> out = ksp;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (keep_.data()[i] == 0) out.data()[i] = std::complex<Scalar>(0);
    }
    return out;
  }

 private:
  MaskArray keep_;
  double declared_accel_ = 1.0;
  Eigen::Index calib_rows_ = 0;
  Eigen::Index calib_cols_ = 0;
};

// 1D Cartesian undersampling along the width (phase-encode) axis with a centered ACS block.
SamplingMask make_equispaced_mask(Eigen::Index height, Eigen::Index width, double accel, double acs_fraction,
                                  std::uint64_t seed);

struct PoissonDiscOptions {
  // Radius grows as base * (1 + density_slope * rho), rho the normalized distance from the center.
  double density_slope = 2.0;
  int max_bisection_steps = 30;
  double accel_tolerance = 0.10;
};

// Variable-density Poisson-disc pattern; the base radius is bisected until the realized
// acceleration lands within tolerance of the request.
SamplingMask make_poisson_disc_mask(Eigen::Index height, Eigen::Index width, double accel, Eigen::Index calib,
                                    std::uint64_t seed, const PoissonDiscOptions& options = {});

struct PoissonDiscPattern {
  SamplingMask mask;
  double base_radius = 0.0;  // the radius the bisection settled on
};
PoissonDiscPattern make_poisson_disc_pattern(Eigen::Index height, Eigen::Index width, double accel, Eigen::Index calib,
                                             std::uint64_t seed, const PoissonDiscOptions& options = {});

// Exclusion radius used for the Poisson-disc sample at (row, col) given the base radius.
double poisson_local_radius(Eigen::Index height, Eigen::Index width, Eigen::Index row, Eigen::Index col,
                            double base_radius, double density_slope);

// Per-coil complex maps; sum over coils of |S_c|^2 is one at every pixel.
struct CoilSensitivities {
  CoilStack maps;

  std::size_t coils() const { return maps.coils(); }
  Eigen::Index height() const { return maps.height(); }
  Eigen::Index width() const { return maps.width(); }

  // max over pixels of |sum_c |S_c|^2 - 1|
  double sos_deviation() const;
};

CoilSensitivities sos_normalize(CoilStack raw);

// A = mask * F * S for a fixed set of coil maps.
class ForwardModel {
 public:
  ForwardModel(CoilSensitivities sens, SamplingMask mask);

  const CoilSensitivities& sens() const { return sens_; }
  const SamplingMask& mask() const { return mask_; }
  Eigen::Index height() const { return mask_.height(); }
  Eigen::Index width() const { return mask_.width(); }
  std::size_t coils() const { return sens_.coils(); }

  CoilStack forward(const ComplexImage& x) const;
  ComplexImage adjoint(const CoilStack& y) const;
  // A^H A x without materializing the coil stack twice.
  ComplexImage normal(const ComplexImage& x) const;

 private:
  CoilSensitivities sens_;
  SamplingMask mask_;
  bool full_columns_ = false;
};

CoilStack apply_forward(const ForwardModel& fm, const ComplexImage& x);
ComplexImage apply_adjoint(const ForwardModel& fm, const CoilStack& y);

struct NoiseSpec {
  double sigma = 0.0;  // std of each real/imag component
  std::uint64_t seed = 0;
};

// Adds i.i.d. complex Gaussian noise at kept locations only. Coil c draws from its own stream.
CoilStack add_kspace_noise(const CoilStack& y, const SamplingMask& mask, const NoiseSpec& spec);

// Reciprocal local sampling density (periodic 7x7 box count), relative to the density at the k-space center.
MagnitudeImage density_weights(const SamplingMask& mask, int window = 7);
CoilStack density_compensate(const CoilStack& y, const SamplingMask& mask);

}  // namespace smrd
