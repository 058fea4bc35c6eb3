#include "smrd/data.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "smrd/random.hpp"

namespace smrd {

const std::vector<Ellipse>& shepp_logan_ellipses() {
  static const std::vector<Ellipse> table = {
      {1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0},    {-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
      {-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0}, {-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
      {0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0},    {0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
      {0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0},   {0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
      {0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0},   {0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
  };
  return table;
}

double phantom_coord_x(int col, int n) { return (col - 0.5 * (n - 1)) / (0.5 * n); }
double phantom_coord_y(int row, int n) { return -(row - 0.5 * (n - 1)) / (0.5 * n); }

bool inside_ellipse(const Ellipse& e, double x, double y) {
  const double a = e.angle_deg * std::numbers::pi / 180.0;
  const double dx = x - e.center_x;
  const double dy = y - e.center_y;
  const double u = dx * std::cos(a) + dy * std::sin(a);
  const double v = -dx * std::sin(a) + dy * std::cos(a);
  return (u * u) / (e.semi_x * e.semi_x) + (v * v) / (e.semi_y * e.semi_y) <= 1.0;
}

MagnitudeImage rasterize_ellipses(const std::vector<Ellipse>& ellipses, int n) {
  MagnitudeImage img = MagnitudeImage::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const double y = phantom_coord_y(r, n);
    for (int c = 0; c < n; ++c) {
      const double x = phantom_coord_x(c, n);
      for (const auto& e : ellipses) {
        if (inside_ellipse(e, x, y)) img(r, c) += e.intensity;
      }
    }
  }
  return img;
}

namespace {

void check_spec(const PhantomSpec& spec) {
  if (spec.size < 16) throw std::invalid_argument("phantom size must be at least 16");
}

// Blob centres on a 4x4 grid; amplitudes drawn once from the seed.
MagnitudeImage blob_grid(int n, std::uint64_t seed, double jitter, std::uint64_t jitter_seed) {
  constexpr int grid = 4;
  Rng rng = make_rng(seed, "blob-amplitude");
  Rng jit = make_rng(jitter_seed, "template-jitter");
  const double spacing = static_cast<double>(n) / grid;
  const double width = spacing / 4.0;
  MagnitudeImage img = MagnitudeImage::Zero(n, n);
  for (int by = 0; by < grid; ++by) {
    for (int bx = 0; bx < grid; ++bx) {
      double amp = 0.3 + 0.7 * uniform01(rng);
      if (jitter > 0.0) amp *= 1.0 + jitter * (2.0 * uniform01(jit) - 1.0);
      const double cy = (by + 0.5) * spacing - 0.5;
      const double cx = (bx + 0.5) * spacing - 0.5;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          const double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
          img(r, c) += amp * std::exp(-d2 / (2.0 * width * width));
        }
    }
  }
  return img;
}

MagnitudeImage base_magnitude(const PhantomSpec& spec, std::uint64_t seed, double jitter, std::uint64_t jitter_seed) {
  if (spec.kind == PhantomKind::blob_grid) return blob_grid(spec.size, seed, jitter, jitter_seed);
  std::vector<Ellipse> ellipses = shepp_logan_ellipses();
  if (jitter > 0.0) {
    Rng jit = make_rng(jitter_seed, "template-jitter");
    for (auto& e : ellipses) e.intensity *= 1.0 + jitter * (2.0 * uniform01(jit) - 1.0);
  }
  return rasterize_ellipses(ellipses, spec.size);
}

// Low-order polynomial phase in normalized coordinates.
ComplexImage phase_map(const PhantomSpec& spec, std::uint64_t seed) {
  const int n = spec.size;
  ComplexImage out = ComplexImage::Ones(n, n);
  if (spec.phase == PhaseKind::none) return out;
  Rng rng = make_rng(seed, "phantom-phase");
  double coef[6];
  for (double& k : coef) k = 2.0 * uniform01(rng) - 1.0;
  const double pi = std::numbers::pi;
  for (int r = 0; r < n; ++r) {
    const double y = phantom_coord_y(r, n);
    for (int c = 0; c < n; ++c) {
      const double x = phantom_coord_x(c, n);
      const double phi = pi * (coef[0] + 0.5 * coef[1] * x + 0.5 * coef[2] * y + 0.25 * coef[3] * x * x +
                               0.25 * coef[4] * y * y + 0.25 * coef[5] * x * y);
      out(r, c) = std::polar(1.0, phi);
    }
  }
  return out;
}

}  // namespace

ComplexImage make_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  const MagnitudeImage mag = base_magnitude(spec, seed, 0.0, 0);
  const double peak = mag.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw std::runtime_error("phantom is identically zero");
  return (mag / peak).cast<Complex>().cwiseProduct(phase_map(spec, seed));
}

ComplexImage make_phantom_template(const PhantomSpec& spec, double intensity_jitter, std::uint64_t seed,
                                   std::uint64_t jitter_seed) {
  check_spec(spec);
  if (!(intensity_jitter >= 0.0 && intensity_jitter < 1.0)) throw std::invalid_argument("jitter must lie in [0, 1)");
  const double peak = base_magnitude(spec, seed, 0.0, 0).cwiseAbs().maxCoeff();
  const MagnitudeImage mag = base_magnitude(spec, seed, intensity_jitter, jitter_seed);
  return (mag / peak).cast<Complex>().cwiseProduct(phase_map(spec, seed));
}

std::vector<CoilLobe> synth_coil_lobes(Eigen::Index height, Eigen::Index width, std::size_t coils, std::uint64_t) {
  std::vector<CoilLobe> lobes;
  const double cy = 0.5 * static_cast<double>(height - 1);
  const double cx = 0.5 * static_cast<double>(width - 1);
  const double ring = 0.5 * static_cast<double>(std::max(height, width));
  for (std::size_t c = 0; c < coils; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(coils);
    lobes.push_back({std::round(cy - ring * std::sin(angle)), std::round(cx + ring * std::cos(angle)), angle});
  }
  return lobes;
}

CoilSensitivities make_synth_coils(Eigen::Index height, Eigen::Index width, std::size_t coils, std::uint64_t seed) {
  if (coils < 1) throw std::invalid_argument("need at least one coil");
  if (height <= 0 || width <= 0) throw ShapeError("coil maps need a positive shape");
  const auto lobes = synth_coil_lobes(height, width, coils, seed);
  const double spread = 0.6 * static_cast<double>(std::max(height, width));
  Rng rng = make_rng(seed, "coil-phase");
  CoilStack raw(coils, height, width);
  for (std::size_t c = 0; c < coils; ++c) {
    const double phase0 = std::numbers::pi * (2.0 * uniform01(rng) - 1.0);
    const double slope_y = std::numbers::pi * (2.0 * uniform01(rng) - 1.0);
    const double slope_x = std::numbers::pi * (2.0 * uniform01(rng) - 1.0);
    for (Eigen::Index r = 0; r < height; ++r) {
      for (Eigen::Index col = 0; col < width; ++col) {
        const double dy = static_cast<double>(r) - lobes[c].center_row;
        const double dx = static_cast<double>(col) - lobes[c].center_col;
        const double mag = std::exp(-(dx * dx + dy * dy) / (2.0 * spread * spread));
        const double phi = phase0 + slope_y * static_cast<double>(r) / static_cast<double>(height) +
                           slope_x * static_cast<double>(col) / static_cast<double>(width);
        raw[c](r, col) = std::polar(mag, phi);
      }
    }
  }
  return sos_normalize(std::move(raw));
}

// ---- tensor container -------------------------------------------------------------------

std::size_t dtype_size(DType d) {
  switch (d) {
    case DType::complex64: return 8;
    case DType::complex128: return 16;
    case DType::u8: return 1;
  }
  throw TensorFormatError(TensorFormatError::Kind::unknown_dtype, "unknown dtype");
}

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

constexpr char magic[4] = {'S', 'M', 'R', 'D'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos, const char* what) {
  if (in.size() - pos < sizeof(T) || pos > in.size())
    throw TensorFormatError(TensorFormatError::Kind::truncated_payload, std::string("truncated payload: missing ") + what);
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& tensor) {
  const std::size_t expected = tensor.element_count() * dtype_size(tensor.dtype);
  if (tensor.payload.size() != expected) throw std::invalid_argument("tensor payload does not match its dims");
  std::vector<std::uint8_t> out(magic, magic + 4);
  put<std::uint32_t>(out, tensor_format_version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dtype));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put<std::uint32_t>(out, d);
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw TensorFormatError(TensorFormatError::Kind::bad_magic, "bad magic: not an SMRD tensor file");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(bytes, pos, "version");
  if (version != tensor_format_version)
    throw TensorFormatError(TensorFormatError::Kind::bad_version, "unsupported tensor version " + std::to_string(version));
  const auto tag = get<std::uint32_t>(bytes, pos, "dtype");
  if (tag < 1 || tag > 3) throw TensorFormatError(TensorFormatError::Kind::unknown_dtype, "unknown dtype tag " + std::to_string(tag));
  Tensor t;
  t.dtype = static_cast<DType>(tag);
  const auto rank = get<std::uint32_t>(bytes, pos, "rank");
  for (std::uint32_t i = 0; i < rank; ++i) t.dims.push_back(get<std::uint32_t>(bytes, pos, "dims"));
  const std::size_t expected = t.element_count() * dtype_size(t.dtype);
  const std::size_t available = bytes.size() - pos;
  if (available < expected)
    throw TensorFormatError(TensorFormatError::Kind::truncated_payload,
                            "truncated payload: expected " + std::to_string(expected) + " bytes, found " +
                                std::to_string(available));
  if (available > expected)
    throw TensorFormatError(TensorFormatError::Kind::trailing_bytes, "unexpected bytes after the payload");
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TensorFormatError(TensorFormatError::Kind::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw TensorFormatError(TensorFormatError::Kind::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorFormatError(TensorFormatError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

namespace {

void append_complex128(std::vector<std::uint8_t>& out, const Complex* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    put<double>(out, data[i].real());
    put<double>(out, data[i].imag());
  }
}

Complex read_complex(const Tensor& t, std::size_t index) {
  if (t.dtype == DType::complex128) {
    double re, im;
    std::memcpy(&re, t.payload.data() + 16 * index, 8);
    std::memcpy(&im, t.payload.data() + 16 * index + 8, 8);
    return {re, im};
  }
  if (t.dtype == DType::complex64) {
    float re, im;
    std::memcpy(&re, t.payload.data() + 8 * index, 4);
    std::memcpy(&im, t.payload.data() + 8 * index + 4, 4);
    return {re, im};
  }
  throw std::invalid_argument("tensor is not complex-valued");
}

}  // namespace

Tensor to_tensor(const ComplexImage& img) {
  Tensor t{DType::complex128, {static_cast<std::uint32_t>(img.rows()), static_cast<std::uint32_t>(img.cols())}, {}};
  t.payload.reserve(static_cast<std::size_t>(img.size()) * 16);
  append_complex128(t.payload, img.data(), static_cast<std::size_t>(img.size()));
  return t;
}

Tensor to_tensor(const CoilStack& stack) {
  Tensor t{DType::complex128,
           {static_cast<std::uint32_t>(stack.coils()), static_cast<std::uint32_t>(stack.height()),
            static_cast<std::uint32_t>(stack.width())},
           {}};
  for (const auto& plane : stack) append_complex128(t.payload, plane.data(), static_cast<std::size_t>(plane.size()));
  return t;
}

Tensor to_tensor(const SamplingMask& mask) {
  Tensor t{DType::u8, {static_cast<std::uint32_t>(mask.height()), static_cast<std::uint32_t>(mask.width())}, {}};
  t.payload.assign(mask.keep().data(), mask.keep().data() + mask.keep().size());
  for (auto& b : t.payload) b = b != 0 ? 1 : 0;
  return t;
}

ComplexImage image_from_tensor(const Tensor& t) {
  if (t.dims.size() != 2) throw std::invalid_argument("expected a rank-2 complex tensor");
  ComplexImage img(t.dims[0], t.dims[1]);
  for (std::size_t i = 0; i < t.element_count(); ++i) img.data()[i] = read_complex(t, i);
  return img;
}

CoilStack stack_from_tensor(const Tensor& t) {
  if (t.dims.size() != 3) throw std::invalid_argument("expected a rank-3 complex tensor");
  CoilStack stack(t.dims[0], t.dims[1], t.dims[2]);
  const std::size_t plane = static_cast<std::size_t>(t.dims[1]) * t.dims[2];
  for (std::size_t c = 0; c < t.dims[0]; ++c)
    for (std::size_t i = 0; i < plane; ++i) stack[c].data()[i] = read_complex(t, c * plane + i);
  return stack;
}

MaskArray mask_from_tensor(const Tensor& t) {
  if (t.dtype != DType::u8 || t.dims.size() != 2) throw std::invalid_argument("expected a rank-2 u8 tensor");
  MaskArray keep(t.dims[0], t.dims[1]);
  std::memcpy(keep.data(), t.payload.data(), t.payload.size());
  return keep;
}

}  // namespace smrd
