#ifndef DIRACSOC_TYPES_HPP
#define DIRACSOC_TYPES_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace diracsoc {

using Complex = std::complex<double>;

template <typename Real>
using Matrix4c = Eigen::Matrix<std::complex<Real>, 4, 4>;
template <typename Real>
using Vector4c = Eigen::Matrix<std::complex<Real>, 4, 1>;

using Mat4 = Matrix4c<double>;
using Spinor = Vector4c<double>;

// Minkowski metric diag(+1, -1, -1, -1).
struct Metric {
  static constexpr std::array<int, 4> diag{+1, -1, -1, -1};

  static constexpr int eta(int mu, int nu) { return mu == nu ? diag[static_cast<std::size_t>(mu)] : 0; }
};

inline void check_index(int mu) {
  if (mu < 0 || mu > 3) throw std::out_of_range("spacetime index out of range: " + std::to_string(mu));
}

enum class Index { upper, lower };

constexpr Index opposite(Index p) { return p == Index::upper ? Index::lower : Index::upper; }

// Complex spacetime four-vector with its index position carried in the type.
// Raising and lowering flip the sign of the spatial components.
template <Index Pos, typename Real = double>
class FourVector {
 public:
  using Scalar = std::complex<Real>;
  using Storage = Vector4c<Real>;

  FourVector() : c_(Storage::Zero()) {}
  explicit FourVector(const Storage& c) : c_(c) {}
  FourVector(Scalar c0, Scalar c1, Scalar c2, Scalar c3) : c_(c0, c1, c2, c3) {}

  Scalar& operator[](int mu) { return c_(mu); }
  const Scalar& operator[](int mu) const { return c_(mu); }

  const Storage& components() const { return c_; }
  Storage& components() { return c_; }

  FourVector<opposite(Pos), Real> toggled() const {
    Storage out = c_;
    for (int mu = 1; mu < 4; ++mu) out(mu) = -out(mu);
    return FourVector<opposite(Pos), Real>(out);
  }

  bool allFinite() const { return c_.allFinite(); }

  FourVector& operator+=(const FourVector& o) { c_ += o.c_; return *this; }
  FourVector& operator-=(const FourVector& o) { c_ -= o.c_; return *this; }
  FourVector& operator*=(Scalar s) { c_ *= s; return *this; }

  friend FourVector operator+(FourVector a, const FourVector& b) { return a += b; }
  friend FourVector operator-(FourVector a, const FourVector& b) { return a -= b; }
  friend FourVector operator-(const FourVector& a) { return FourVector(-a.c_); }
  friend FourVector operator*(Scalar s, FourVector a) { return a *= s; }
  friend FourVector operator*(FourVector a, Scalar s) { return a *= s; }
  friend bool operator==(const FourVector& a, const FourVector& b) { return a.c_ == b.c_; }

 private:
  Storage c_;
};

template <typename Real = double>
using Upper = FourVector<Index::upper, Real>;
template <typename Real = double>
using Lower = FourVector<Index::lower, Real>;

using Upper4 = Upper<double>;
using Lower4 = Lower<double>;

template <typename Real>
Lower<Real> lower(const Upper<Real>& v) { return v.toggled(); }
template <typename Real>
Upper<Real> raise(const Lower<Real>& v) { return v.toggled(); }

// Bilinear contraction a^mu b_mu; no complex conjugation anywhere.
template <typename Real>
std::complex<Real> contract(const Upper<Real>& a, const Lower<Real>& b) {
  return a.components().transpose() * b.components();
}
template <typename Real>
std::complex<Real> contract(const Lower<Real>& a, const Upper<Real>& b) {
  return contract(b, a);
}

template <Index Pos, typename Real>
std::complex<Real> minkowski_dot(const FourVector<Pos, Real>& a, const FourVector<Pos, Real>& b) {
  std::complex<Real> s = a[0] * b[0];
  for (int mu = 1; mu < 4; ++mu) s -= a[mu] * b[mu];
  return s;
}

template <Index Pos, typename Real>
std::complex<Real> minkowski_square(const FourVector<Pos, Real>& a) {
  return minkowski_dot(a, a);
}

// Physical constants. epsilon is the charge sign: +1 particle, -1 antiparticle.
struct PhysicalConstants {
  double hbar = 1.0;
  double c = 1.0;
  double m = 1.0;
  double e = 1.0;
  int epsilon = +1;

  void validate() const {
    if (!(hbar > 0.0) || !(c > 0.0) || !(m > 0.0))
      throw std::invalid_argument("hbar, c and m must be strictly positive");
    if (epsilon != 1 && epsilon != -1) throw std::invalid_argument("epsilon must be +1 or -1");
  }

  double mc() const { return m * c; }
};

}  // namespace diracsoc

#endif  // DIRACSOC_TYPES_HPP
