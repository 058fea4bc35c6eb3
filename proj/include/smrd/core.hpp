#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace smrd {

// Dense complex image, row-major so the flat index is y * width + x.
template <typename Scalar>
using Image = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RealImage = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Complex = std::complex<double>;
using ComplexImage = Image<double>;
using MagnitudeImage = RealImage<double>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Stack of per-coil planes sharing one shape.
template <typename Scalar>
class CoilStackT {
 public:
  CoilStackT() = default;
  CoilStackT(std::size_t coils, Eigen::Index height, Eigen::Index width)
      : planes_(coils, Image<Scalar>::Zero(height, width)) {
    if (coils == 0 || height <= 0 || width <= 0) throw ShapeError("coil stack must be non-empty");
  }
  explicit CoilStackT(std::vector<Image<Scalar>> planes) : planes_(std::move(planes)) {
    if (planes_.empty()) throw ShapeError("coil stack must be non-empty");
    for (const auto& p : planes_) {
      if (p.rows() != planes_.front().rows() || p.cols() != planes_.front().cols())
        throw ShapeError("coil planes must share one shape");
    }
  }

  std::size_t coils() const { return planes_.size(); }
  Eigen::Index height() const { return planes_.empty() ? 0 : planes_.front().rows(); }
  Eigen::Index width() const { return planes_.empty() ? 0 : planes_.front().cols(); }

  Image<Scalar>& operator[](std::size_t c) { return planes_[c]; }
  const Image<Scalar>& operator[](std::size_t c) const { return planes_[c]; }

  auto begin() { return planes_.begin(); }
  auto end() { return planes_.end(); }
  auto begin() const { return planes_.begin(); }
  auto end() const { return planes_.end(); }

  bool operator==(const CoilStackT& other) const {
    if (coils() != other.coils()) return false;
    for (std::size_t c = 0; c < coils(); ++c) {
      if (planes_[c].rows() != other[c].rows() || planes_[c].cols() != other[c].cols()) return false;
      if (planes_[c] != other[c]) return false;
    }
    return true;
  }

 private:
  std::vector<Image<Scalar>> planes_;
};

using CoilStack = CoilStackT<double>;

template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
}

// Sum of conj(a_i) * b_i.
template <typename A, typename B>
auto inner(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  require_same_shape(a, b, "inner");
  return (a.array().conjugate() * b.array()).sum();
}

template <typename Scalar>
std::complex<Scalar> inner(const CoilStackT<Scalar>& a, const CoilStackT<Scalar>& b) {
  if (a.coils() != b.coils()) throw ShapeError("inner: coil count mismatch");
  std::complex<Scalar> acc{0};
  for (std::size_t c = 0; c < a.coils(); ++c) acc += inner(a[c], b[c]);
  return acc;
}

template <typename Scalar>
Scalar squared_norm(const CoilStackT<Scalar>& a) {
  Scalar acc{0};
  for (const auto& p : a) acc += p.squaredNorm();
  return acc;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

namespace detail {

// Circular shift of a length-n sequence by `shift` (positive moves towards higher indices).
template <typename Scalar>
void roll(std::vector<std::complex<Scalar>>& v, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  shift = ((shift % n) + n) % n;
  if (shift == 0) return;
  std::rotate(v.begin(), v.end() - shift, v.end());
}

// Centered orthonormal 1D transform applied along every row (axis 1) or column (axis 0).
template <typename Scalar>
void centered_fft_axis(Image<Scalar>& img, int axis, bool inverse) {
  const Eigen::Index n = axis == 1 ? img.cols() : img.rows();
  const Eigen::Index lines = axis == 1 ? img.rows() : img.cols();
  const auto len = static_cast<std::ptrdiff_t>(n);
  if (n == 1) return;  // identity, and kissfft cannot plan a single point
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(n));
  // kissfft caches twiddles per object, so keep one per thread.
  thread_local Eigen::FFT<Scalar> fft = [] {
    Eigen::FFT<Scalar> f;
    f.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return f;
  }();
  thread_local std::vector<std::complex<Scalar>> in, out;
  in.resize(static_cast<std::size_t>(n));
  for (Eigen::Index line = 0; line < lines; ++line) {
    for (Eigen::Index k = 0; k < n; ++k) in[static_cast<std::size_t>(k)] = axis == 1 ? img(line, k) : img(k, line);
    // ifftshift: move the center sample (index n/2) to index 0.
    roll(in, -(len / 2));
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
    // fftshift: move index 0 to the center.
    roll(out, len / 2);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto v = out[static_cast<std::size_t>(k)] * scale;
      if (axis == 1) {
        img(line, k) = v;
      } else {
        img(k, line) = v;
      }
    }
  }
}

template <typename Scalar>
Image<Scalar> centered_fft2(const Image<Scalar>& img, bool inverse) {
  if (img.rows() == 0 || img.cols() == 0) throw ShapeError("fft2c: zero-sized image");
  Image<Scalar> out = img;
  centered_fft_axis(out, 1, inverse);
  centered_fft_axis(out, 0, inverse);
  return out;
}

}  // namespace detail

// Centered 2D DFT scaled by 1/sqrt(height * width). Low frequencies sit at (height/2, width/2).
template <typename Scalar>
Image<Scalar> fft2c(const Image<Scalar>& img) {
  return detail::centered_fft2(img, false);
}

template <typename Scalar>
Image<Scalar> ifft2c(const Image<Scalar>& ksp) {
  return detail::centered_fft2(ksp, true);
}

}  // namespace smrd
