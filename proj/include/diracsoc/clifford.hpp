#ifndef DIRACSOC_CLIFFORD_HPP
#define DIRACSOC_CLIFFORD_HPP

#include <array>

#include "diracsoc/types.hpp"

namespace diracsoc {

// The four gamma matrices gamma^mu together with the metric they realize.
// Entries in the Dirac basis are 0, +-1, +-i, so every product and sum used
// below is exact in floating point and Clifford checks compare with ==.
template <typename Real = double>
class GammaSet {
 public:
  using Matrix = Matrix4c<Real>;

  explicit GammaSet(const std::array<Matrix, 4>& g) : g_(g) {}

  // gamma^0 = diag(I2, -I2), gamma^i = [[0, s_i], [-s_i, 0]] with Pauli s_i.
  static GammaSet dirac() {
    using C = std::complex<Real>;
    const C I(0, 1);
    std::array<Eigen::Matrix<C, 2, 2>, 3> pauli;
    pauli[0] << 0, 1, 1, 0;
    pauli[1] << 0, -I, I, 0;
    pauli[2] << 1, 0, 0, -1;

    std::array<Matrix, 4> g;
    g[0] = Matrix::Zero();
    g[0].diagonal() << 1, 1, -1, -1;
    for (int i = 0; i < 3; ++i) {
      g[i + 1] = Matrix::Zero();
      g[i + 1].template block<2, 2>(0, 2) = pauli[i];
      g[i + 1].template block<2, 2>(2, 0) = -pauli[i];
    }
    return GammaSet(g);
  }

  const Matrix& operator[](int mu) const {
    check_index(mu);
    return g_[static_cast<std::size_t>(mu)];
  }

  const Metric& metric() const { return metric_; }

 private:
  std::array<Matrix, 4> g_;
  Metric metric_{};
};

inline const GammaSet<double>& dirac_gammas() {
  static const GammaSet<double> g = GammaSet<double>::dirac();
  return g;
}

template <typename Real>
Matrix4c<Real> anticommutator(const GammaSet<Real>& g, int mu, int nu) {
  return g[mu] * g[nu] + g[nu] * g[mu];
}

template <typename Real>
Matrix4c<Real> commutator(const GammaSet<Real>& g, int mu, int nu) {
  return g[mu] * g[nu] - g[nu] * g[mu];
}

// sigma^{mu nu} = (i/2) [gamma^mu, gamma^nu]
template <typename Real>
Matrix4c<Real> spin_tensor(const GammaSet<Real>& g, int mu, int nu) {
  return std::complex<Real>(0, Real(0.5)) * commutator(g, mu, nu);
}

template <typename Real = double>
struct SpinTensor {
  std::array<Matrix4c<Real>, 16> sigma;

  explicit SpinTensor(const GammaSet<Real>& g) {
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) sigma[static_cast<std::size_t>(4 * mu + nu)] = spin_tensor(g, mu, nu);
  }

  const Matrix4c<Real>& operator()(int mu, int nu) const {
    check_index(mu);
    check_index(nu);
    return sigma[static_cast<std::size_t>(4 * mu + nu)];
  }
};

// Feynman slash gamma^mu v_mu.
template <typename Real>
Matrix4c<Real> slash(const GammaSet<Real>& g, const Lower<Real>& v) {
  Matrix4c<Real> out = Matrix4c<Real>::Zero();
  for (int mu = 0; mu < 4; ++mu) out += v[mu] * g[mu];
  return out;
}

template <typename Real>
Matrix4c<Real> slash(const GammaSet<Real>& g, const Upper<Real>& v) {
  return slash(g, lower(v));
}

// Number of (mu, nu) pairs for which {gamma^mu, gamma^nu} != 2 eta^{mu nu} I
// under exact comparison.
template <typename Real>
int clifford_defects(const GammaSet<Real>& g) {
  int bad = 0;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      const Matrix4c<Real> expected = Real(2 * Metric::eta(mu, nu)) * Matrix4c<Real>::Identity();
      if (anticommutator(g, mu, nu) != expected) ++bad;
    }
  return bad;
}

}  // namespace diracsoc

#endif  // DIRACSOC_CLIFFORD_HPP
