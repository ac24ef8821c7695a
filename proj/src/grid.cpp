#include "visco/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <string>

#include "visco/error.hpp"

namespace visco {

namespace {

// The FFTW planner is not re-entrant; plan execution on new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

namespace detail {

struct GridData {
  int n = 0;
  double length = 0.0;
  std::size_t half = 0;
  std::vector<double> k1, k2;      // derivative wavenumbers
  std::vector<double> k1sq, k2sq;  // squared, Nyquist kept
  std::vector<int> m1, m2;
  std::vector<unsigned char> keep;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  GridData(int n_, double length_) : n(n_), length(length_), half(static_cast<std::size_t>(n_ / 2 + 1)) {
    const double scale = 2.0 * std::numbers::pi / length;
    const auto un = static_cast<std::size_t>(n);
    k1.resize(un);
    k1sq.resize(un);
    m1.resize(un);
    for (std::size_t a = 0; a < un; ++a) {
      const int m = static_cast<int>(a) <= n / 2 ? static_cast<int>(a) : static_cast<int>(a) - n;
      m1[a] = m;
      k1sq[a] = scale * scale * m * m;
      k1[a] = (2 * static_cast<int>(a) == n) ? 0.0 : scale * m;
    }
    k2.resize(half);
    k2sq.resize(half);
    m2.resize(half);
    for (std::size_t b = 0; b < half; ++b) {
      const int m = static_cast<int>(b);
      m2[b] = m;
      k2sq[b] = scale * scale * m * m;
      k2[b] = (2 * m == n) ? 0.0 : scale * m;
    }
    keep.resize(un * half);
    const int cut = n / 3;
    for (std::size_t a = 0; a < un; ++a) {
      for (std::size_t b = 0; b < half; ++b) {
        keep[a * half + b] = (std::abs(m1[a]) <= cut && m2[b] <= cut) ? 1 : 0;
      }
    }

    std::vector<double> real(un * un);
    auto* spec = fftw_alloc_complex(un * half);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c = fftw_plan_dft_r2c_2d(n, n, real.data(), spec, flags);
    c2r = fftw_plan_dft_c2r_2d(n, n, spec, real.data(), flags);
    fftw_free(spec);
  }

  GridData(const GridData&) = delete;
  GridData& operator=(const GridData&) = delete;

  ~GridData() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c);
    fftw_destroy_plan(c2r);
  }
};

}  // namespace detail

Grid2::Grid2(int n, double length) {
  if (n < 8 || !is_power_of_two(n)) {
    throw Error(Errc::InvalidArgument, "Grid2: n must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(length > 0.0)) {
    throw Error(Errc::InvalidArgument, "Grid2: box length must be positive");
  }
  static std::mutex cache_mutex;
  static std::map<std::pair<int, double>, std::weak_ptr<const detail::GridData>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{n, length}];
  d_ = slot.lock();
  if (!d_) {
    d_ = std::make_shared<const detail::GridData>(n, length);
    slot = d_;
  }
}

int Grid2::n() const { return d_->n; }
double Grid2::length() const { return d_->length; }
std::size_t Grid2::size() const { return static_cast<std::size_t>(d_->n) * static_cast<std::size_t>(d_->n); }
std::size_t Grid2::half() const { return d_->half; }
std::size_t Grid2::spectral_size() const { return static_cast<std::size_t>(d_->n) * d_->half; }
int Grid2::mode1(std::size_t a) const { return d_->m1[a]; }
int Grid2::mode2(std::size_t b) const { return d_->m2[b]; }
double Grid2::k1(std::size_t a) const { return d_->k1[a]; }
double Grid2::k2(std::size_t b) const { return d_->k2[b]; }
double Grid2::ksq(std::size_t a, std::size_t b) const { return d_->k1sq[a] + d_->k2sq[b]; }
bool Grid2::keep(std::size_t a, std::size_t b) const { return d_->keep[a * d_->half + b] != 0; }
bool Grid2::keep(std::size_t s) const { return d_->keep[s] != 0; }

void Grid2::forward(std::span<const double> in, std::span<Complex> out) const {
  // r2c does not modify its input, but the FFTW signature is non-const
  auto* src = const_cast<double*>(in.data());
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft_r2c(d_->r2c, src, dst);
  const double norm = 1.0 / static_cast<double>(size());
  for (auto& c : out) c *= norm;
}

Spectrum Grid2::forward(std::span<const double> in) const {
  Spectrum out(spectral_size());
  forward(in, out);
  return out;
}

void Grid2::inverse(std::span<const Complex> in, std::span<double> out) const {
  // c2r destroys its input
  Spectrum scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(d_->c2r, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

std::vector<double> Grid2::inverse(std::span<const Complex> in) const {
  std::vector<double> out(size());
  inverse(in, out);
  return out;
}

bool Grid2::operator==(const Grid2& other) const {
  return d_ == other.d_ || (n() == other.n() && length() == other.length());
}

}  // namespace visco
