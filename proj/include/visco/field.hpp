#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "visco/error.hpp"
#include "visco/grid.hpp"
#include "visco/tensor_core.hpp"

namespace visco {

/// Real samples on a Grid2 with a fixed number of components. Scalars have one
/// component, vectors two (v1, v2) and matrices four (M11, M12, M21, M22).
template <std::size_t C>
class Field {
 public:
  static constexpr std::size_t kComponents = C;

  explicit Field(Grid2 grid) : grid_(std::move(grid)) {
    for (auto& c : comps_) c.assign(grid_.size(), 0.0);
  }

  const Grid2& grid() const { return grid_; }
  std::size_t size() const { return grid_.size(); }

  std::vector<double>& comp(std::size_t c) { return comps_[c]; }
  const std::vector<double>& comp(std::size_t c) const { return comps_[c]; }

  /// Matrix entry (r, c), zero-based.
  std::vector<double>& entry(std::size_t r, std::size_t c) requires(C == 4) { return comps_[2 * r + c]; }
  const std::vector<double>& entry(std::size_t r, std::size_t c) const requires(C == 4) {
    return comps_[2 * r + c];
  }

  std::vector<double>& values() requires(C == 1) { return comps_[0]; }
  const std::vector<double>& values() const requires(C == 1) { return comps_[0]; }
  double& operator[](std::size_t p) requires(C == 1) { return comps_[0][p]; }
  double operator[](std::size_t p) const requires(C == 1) { return comps_[0][p]; }

  Vec2 at(std::size_t p) const requires(C == 2) { return {comps_[0][p], comps_[1][p]}; }
  void set(std::size_t p, const Vec2& v) requires(C == 2) {
    comps_[0][p] = v.x;
    comps_[1][p] = v.y;
  }

  Mat2 at(std::size_t p) const requires(C == 4) {
    return {comps_[0][p], comps_[1][p], comps_[2][p], comps_[3][p]};
  }
  void set(std::size_t p, const Mat2& m) requires(C == 4) {
    comps_[0][p] = m.a11;
    comps_[1][p] = m.a12;
    comps_[2][p] = m.a21;
    comps_[3][p] = m.a22;
  }

  void fill(double value) {
    for (auto& c : comps_) std::fill(c.begin(), c.end(), value);
  }

  Field& operator+=(const Field& o) {
    check_same_grid(o);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t p = 0; p < size(); ++p) comps_[c][p] += o.comps_[c][p];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same_grid(o);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t p = 0; p < size(); ++p) comps_[c][p] -= o.comps_[c][p];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& c : comps_)
      for (auto& v : c) v *= s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }

 private:
  void check_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_)) throw Error(Errc::GridMismatch, "field arithmetic across different grids");
  }

  Grid2 grid_;
  std::array<std::vector<double>, C> comps_;
};

using ScalarField = Field<1>;
using VectorField2 = Field<2>;
using MatrixField2 = Field<4>;

/// F filled with the identity matrix.
inline MatrixField2 identity_field(const Grid2& grid) {
  MatrixField2 F(grid);
  std::fill(F.comp(0).begin(), F.comp(0).end(), 1.0);
  std::fill(F.comp(3).begin(), F.comp(3).end(), 1.0);
  return F;
}

}  // namespace visco
