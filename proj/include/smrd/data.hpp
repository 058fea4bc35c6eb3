#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "smrd/core.hpp"
#include "smrd/forward_model.hpp"

namespace smrd {

enum class PhantomKind { shepp_logan, blob_grid };
enum class PhaseKind { none, smooth };

struct PhantomSpec {
  PhantomKind kind = PhantomKind::shepp_logan;
  int size = 64;
  PhaseKind phase = PhaseKind::none;
};

// One ellipse of the phantom in normalized coordinates ([-1, 1] across the field of view, y up).
struct Ellipse {
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;
};

// Canonical 10-ellipse (modified, higher contrast) Shepp-Logan table.
const std::vector<Ellipse>& shepp_logan_ellipses();

// Normalized coordinates of pixel centers for an n x n grid.
double phantom_coord_x(int col, int n);
double phantom_coord_y(int row, int n);
bool inside_ellipse(const Ellipse& e, double x, double y);

// Sum of ellipse intensities at every pixel, without normalization.
MagnitudeImage rasterize_ellipses(const std::vector<Ellipse>& ellipses, int n);

// Unit-maximum magnitude phantom; deterministic in (spec, seed).
ComplexImage make_phantom(const PhantomSpec& spec, std::uint64_t seed);

// Prior template for make_phantom(spec, seed): the same geometry and phase with each ellipse (or blob)
// intensity scaled by (1 + u), u ~ U(-amp, amp) drawn from jitter_seed, and the reference's normalization.
ComplexImage make_phantom_template(const PhantomSpec& spec, double intensity_jitter, std::uint64_t seed,
                                   std::uint64_t jitter_seed);

// Gaussian lobes centred at evenly spaced angles on a ring around the field of view, each with a
// smooth linear phase, then SOS-normalized.
CoilSensitivities make_synth_coils(Eigen::Index height, Eigen::Index width, std::size_t coils, std::uint64_t seed);

struct CoilLobe {
  double center_row;
  double center_col;
  double angle_rad;
};
// Lobe geometry used by make_synth_coils (exposed for verification).
std::vector<CoilLobe> synth_coil_lobes(Eigen::Index height, Eigen::Index width, std::size_t coils, std::uint64_t seed);

// ---- tensor container -------------------------------------------------------------------

enum class DType : std::uint32_t { complex64 = 1, complex128 = 2, u8 = 3 };

std::size_t dtype_size(DType d);

struct Tensor {
  DType dtype = DType::complex128;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // row-major little-endian

  std::size_t element_count() const;
};

class TensorFormatError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, bad_version, unknown_dtype, truncated_payload, trailing_bytes, io };
  TensorFormatError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint32_t tensor_format_version = 1;

void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor load_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

Tensor to_tensor(const ComplexImage& img);
Tensor to_tensor(const CoilStack& stack);
Tensor to_tensor(const SamplingMask& mask);
ComplexImage image_from_tensor(const Tensor& t);
CoilStack stack_from_tensor(const Tensor& t);
MaskArray mask_from_tensor(const Tensor& t);

}  // namespace smrd
