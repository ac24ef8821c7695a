#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace visco {

using Complex = std::complex<double>;
using Spectrum = std::vector<Complex>;

namespace detail {
struct GridData;
}

/// The N x N periodic box [0, L)^2 together with its wavenumber tables, the
/// 2/3-rule dealiasing mask and shared FFT plans.
///
/// Physical samples are stored row-major: index p = i * n + j is the point
/// (x1, x2) = (i h, j h). Spectra use the real-to-complex layout with the x2
/// axis halved: index s = a * (n/2 + 1) + b.
///
/// Grid2 is a cheap value handle; copies share the immutable tables and plans,
/// so transforms may be called concurrently from any thread.
class Grid2 {
 public:
  explicit Grid2(int n, double length = 2.0 * std::numbers::pi);

  int n() const;
  double length() const;
  double spacing() const { return length() / n(); }
  std::size_t size() const;           ///< n^2
  std::size_t half() const;           ///< n/2 + 1
  std::size_t spectral_size() const;  ///< n (n/2 + 1)
  double coord(std::size_t i) const { return static_cast<double>(i) * spacing(); }

  /// Signed integer mode numbers of spectral row a / column b.
  int mode1(std::size_t a) const;
  int mode2(std::size_t b) const;

  /// Wavenumbers for first derivatives (Nyquist mode mapped to 0).
  double k1(std::size_t a) const;
  double k2(std::size_t b) const;
  /// Full |k|^2, Nyquist included.
  double ksq(std::size_t a, std::size_t b) const;
  /// 2/3 rule: false for every mode with |k_i| > n/3 on either axis.
  bool keep(std::size_t a, std::size_t b) const;
  bool keep(std::size_t s) const;

  /// Normalized forward transform: out[0] is the mean of the samples.
  void forward(std::span<const double> in, std::span<Complex> out) const;
  Spectrum forward(std::span<const double> in) const;
  /// Inverse of forward().
  void inverse(std::span<const Complex> in, std::span<double> out) const;
  std::vector<double> inverse(std::span<const Complex> in) const;

  bool operator==(const Grid2& other) const;

 private:
  std::shared_ptr<const detail::GridData> d_;
};

}  // namespace visco
