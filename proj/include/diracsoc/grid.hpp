#ifndef DIRACSOC_GRID_HPP
#define DIRACSOC_GRID_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diracsoc/types.hpp"

namespace diracsoc {

// Regular periodic lattice over the first `dims` spacetime coordinates
// (z^0 = ct first). Points are centred: z = -extent/2 + i * spacing.
// Flat storage is row-major, the last active axis varies fastest.
class SpacetimeGrid {
 public:
  SpacetimeGrid(int dims, double extent, int points);
  SpacetimeGrid(std::vector<double> extents, std::vector<int> points);

  int dims() const { return static_cast<int>(points_.size()); }
  bool active(int mu) const { return mu >= 0 && mu < dims(); }
  int points(int axis) const { return points_.at(static_cast<std::size_t>(axis)); }
  double extent(int axis) const { return extents_.at(static_cast<std::size_t>(axis)); }
  double spacing(int axis) const { return extent(axis) / points(axis); }
  Eigen::Index size() const { return size_; }
  Eigen::Index stride(int axis) const { return strides_.at(static_cast<std::size_t>(axis)); }

  // Real coordinates of a flat index; inactive components are zero.
  Upper4 coordinate(Eigen::Index flat) const;
  // Smallest nonzero wavenumber along an axis, 2 pi / extent.
  double fundamental(int axis) const;

  std::string describe() const;

  friend bool operator==(const SpacetimeGrid& a, const SpacetimeGrid& b) {
    return a.extents_ == b.extents_ && a.points_ == b.points_;
  }

 private:
  std::vector<double> extents_;
  std::vector<int> points_;
  std::vector<Eigen::Index> strides_;
  Eigen::Index size_ = 0;
};

enum class Backend { spectral, fd4 };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view name);

// Complex field with NComp components per grid point; one column per component.
template <int NComp>
class Field {
 public:
  using Values = Eigen::Matrix<Complex, Eigen::Dynamic, NComp>;

  explicit Field(const SpacetimeGrid& grid) : grid_(grid), values_(Values::Zero(grid.size(), NComp)) {}
  Field(const SpacetimeGrid& grid, Values values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid_.size()) throw std::invalid_argument("field size does not match grid");
  }

  const SpacetimeGrid& grid() const { return grid_; }
  const Values& values() const { return values_; }
  Values& values() { return values_; }

  auto component(int a) const { return values_.col(a); }
  auto component(int a) { return values_.col(a); }

  bool allFinite() const { return values_.allFinite(); }

  Field& operator+=(const Field& o) { check_same(o); values_ += o.values_; return *this; }
  Field& operator-=(const Field& o) { check_same(o); values_ -= o.values_; return *this; }
  Field& operator*=(Complex s) { values_ *= s; return *this; }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Complex s, Field a) { return a *= s; }
  friend Field operator*(Field a, Complex s) { return a *= s; }

 private:
  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("fields live on different grids");
  }

  SpacetimeGrid grid_;
  Values values_;
};

using ScalarField = Field<1>;
using SpinorField = Field<4>;

// Differentiate every column of `data` in place along axis mu.
// `order` is the derivative order (1 or 2).
void differentiate_columns(const SpacetimeGrid& grid, Eigen::Ref<Eigen::MatrixXcd> data, int mu, int order,
                           Backend backend);

// d_mu f. Throws for inactive mu or non-finite input.
template <int N>
Field<N> partial(const Field<N>& f, int mu, Backend backend = Backend::spectral) {
  Eigen::MatrixXcd work = f.values();
  differentiate_columns(f.grid(), work, mu, 1, backend);
  return Field<N>(f.grid(), work);
}

// d_mu d_mu f in one pass (no sum over mu).
template <int N>
Field<N> second_partial(const Field<N>& f, int mu, Backend backend = Backend::spectral) {
  Eigen::MatrixXcd work = f.values();
  differentiate_columns(f.grid(), work, mu, 2, backend);
  return Field<N>(f.grid(), work);
}

// d^mu d_mu f over the active axes.
template <int N>
Field<N> dalembertian(const Field<N>& f, Backend backend = Backend::spectral) {
  Field<N> out(f.grid());
  for (int mu = 0; mu < f.grid().dims(); ++mu) {
    const double sign = Metric::diag[static_cast<std::size_t>(mu)];
    out.values() += sign * second_partial(f, mu, backend).values();
  }
  return out;
}

ScalarField sample(const SpacetimeGrid& grid, const std::function<Complex(const Upper4&)>& fn);
SpinorField sample_spinor(const SpacetimeGrid& grid, const std::function<Spinor(const Upper4&)>& fn);

// phi(z) = chi exp(-i k_mu z^mu) with k given contravariant.
SpinorField plane_wave(const SpacetimeGrid& grid, const Spinor& chi, const Upper4& k);

// Random band-limited test fields: a sum of Fourier modes with integer
// wavenumbers |n_a| <= max_mode on every active axis and Gaussian complex
// coefficients, drawn from a counter-based stream so that the same seed gives
// the same field everywhere. The mode sum is scaled so that its modulus is at
// most `amplitude`; `offset` is added afterwards. A positive envelope_width w
// multiplies by exp(-|z|^2 / (2 (w L)^2)), which keeps products with
// polynomial potentials smooth and periodic to rounding.
struct RandomFieldOptions {
  int max_mode = 4;
  double amplitude = 1.0;
  Complex offset = 0.0;
  double envelope_width = 0.0;
};

ScalarField random_scalar_field(const SpacetimeGrid& grid, std::uint64_t seed, const RandomFieldOptions& opts = {});
SpinorField random_spinor_field(const SpacetimeGrid& grid, std::uint64_t seed, const RandomFieldOptions& opts = {});

// Root-mean-square norm over grid points of all components.
template <int N>
double rms(const Field<N>& f) {
  return f.values().norm() / std::sqrt(static_cast<double>(f.grid().size()));
}

template <int N>
double max_abs(const Field<N>& f) {
  return f.values().cwiseAbs().maxCoeff();
}

// CSV snapshot: one row per point, coordinates then Re/Im of each component,
// 17 significant digits.
void write_csv(std::ostream& os, const SpacetimeGrid& grid, const Eigen::MatrixXcd& values);

template <int N>
void write_csv(std::ostream& os, const Field<N>& f) {
  write_csv(os, f.grid(), Eigen::MatrixXcd(f.values()));
}

}  // namespace diracsoc

#endif  // DIRACSOC_GRID_HPP
