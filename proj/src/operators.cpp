#include "diracsoc/operators.hpp"

#include <cmath>

namespace diracsoc {

namespace {

const Complex kI(0.0, 1.0);

void require_same_grid(const SpinorField& f, const SampledPotential& A) {
  if (!(f.grid() == A.grid())) throw std::invalid_argument("field and potential are sampled on different grids");
}

}  // namespace

SampledPotential::SampledPotential(const PotentialSpec& spec, const SpacetimeGrid& grid, const GammaSet<double>& gammas)
    : spec_(spec), grid_(grid), lower_(Eigen::Matrix<Complex, Eigen::Dynamic, 4>::Zero(grid.size(), 4)),
      divergence_(Eigen::VectorXcd::Zero(grid.size())) {
  const PotentialModel model(spec);
  const auto varying = model.varying_axes();
  for (int mu = 0; mu < 4; ++mu)
    if (varying[static_cast<std::size_t>(mu)] && !grid.active(mu))
      throw std::invalid_argument("potential " + spec.describe() + " varies along z^" + std::to_string(mu) +
                                  ", which is not an active grid axis");
  free_ = model.is_zero();
  if (free_) return;

  std::array<Mat4, 16> comm;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) comm[static_cast<std::size_t>(4 * mu + nu)] = commutator(gammas, mu, nu);

  strength_.resize(static_cast<std::size_t>(grid.size()));
  contraction_.resize(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Upper4 z = grid.coordinate(p);
    lower_.row(p) = model.value(z).components().transpose();
    const Mat4 J = model.jacobian(z);
    Complex div = 0.0;
    for (int mu = 0; mu < 4; ++mu) div += double(Metric::diag[static_cast<std::size_t>(mu)]) * J(mu, mu);
    divergence_(p) = div;
    const Mat4 F = J - J.transpose();
    Mat4 C = Mat4::Zero();
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu)
        if (F(mu, nu) != 0.0) C += F(mu, nu) * comm[static_cast<std::size_t>(4 * mu + nu)];
    strength_[static_cast<std::size_t>(p)] = F;
    contraction_[static_cast<std::size_t>(p)] = C;
  }
}

SpinorField first_order_apply(const SpinorField& psi, const SampledPotential& A, const PhysicalConstants& k,
                              double mass_sign, Backend backend, const GammaSet<double>& gammas) {
  k.validate();
  require_same_grid(psi, A);
  const SpacetimeGrid& grid = psi.grid();
  SpinorField out(grid, (mass_sign * k.mc()) * psi.values());
  for (int nu = 0; nu < grid.dims(); ++nu) {
    const SpinorField d = partial(psi, nu, backend);
    out.values() += (kI * k.hbar) * (d.values() * gammas[nu].transpose());
  }
  if (!A.is_free()) {
    for (int nu = 0; nu < 4; ++nu) {
      const auto a = A.lower().col(nu);
      if (a.cwiseAbs().maxCoeff() == 0.0) continue;
      const Eigen::MatrixX4cd scaled = (psi.values().array().colwise() * a.array()).matrix();
      out.values() -= k.e * (scaled * gammas[nu].transpose());
    }
  }
  return out;
}

SpinorField dirac_apply(const SpinorField& psi, const SampledPotential& A, const PhysicalConstants& k,
                        Backend backend) {
  return first_order_apply(psi, A, k, -1.0, backend);
}

SpinorField conjugate_apply(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                            Backend backend) {
  return first_order_apply(phi, A, k, +1.0, backend);
}

SpinorField build_spinor(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                         Backend backend) {
  return conjugate_apply(phi, A, k, backend);
}

SpinorField fock_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k, Backend backend) {
  k.validate();
  require_same_grid(phi, A);
  const SpacetimeGrid& grid = phi.grid();
  const double mc = k.mc();

  SpinorField out(grid, -(mc * mc) * phi.values());
  out.values() -= (k.hbar * k.hbar) * dalembertian(phi, backend).values();
  if (A.is_free()) return out;

  // -(i e hbar / 4) [gamma^mu, gamma^nu] F_{mu nu} phi
  const Complex spin = -kI * (k.e * k.hbar / 4.0);
  for (Eigen::Index p = 0; p < grid.size(); ++p)
    out.values().row(p) += spin * (A.commutator_contraction(p) * phi.values().row(p).transpose()).transpose();

  // -2 i e hbar A^mu d_mu phi
  for (int mu = 0; mu < grid.dims(); ++mu) {
    const auto a = A.lower().col(mu);
    if (a.cwiseAbs().maxCoeff() == 0.0) continue;
    const double raise = Metric::diag[static_cast<std::size_t>(mu)];
    const SpinorField d = partial(phi, mu, backend);
    out.values() += ((-2.0 * kI * k.e * k.hbar * raise) * (d.values().array().colwise() * a.array())).matrix();
  }

  // e^2 A^mu A_mu phi
  Eigen::VectorXcd square = Eigen::VectorXcd::Zero(grid.size());
  for (int mu = 0; mu < 4; ++mu)
    square += double(Metric::diag[static_cast<std::size_t>(mu)]) * A.lower().col(mu).cwiseProduct(A.lower().col(mu));
  out.values() += (k.e * k.e) * (phi.values().array().colwise() * square.array()).matrix();
  return out;
}

SpinorField factored_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                         Backend backend) {
  return dirac_apply(conjugate_apply(phi, A, k, backend), A, k, backend);
}

SpinorField legacy_factored_rhs(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                Backend backend) {
  return dirac_apply(first_order_apply(phi, A, k, 0.0, backend), A, k, backend);
}

SpinorField gauge_violation_term(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k) {
  require_same_grid(phi, A);
  SpinorField out(phi.grid());
  out.values() = ((-kI * k.e * k.hbar) * (phi.values().array().colwise() * A.divergence().array())).matrix();
  return out;
}

KleinGordonResidual kg_residual_componentwise(const SpinorField& psi, const SampledPotential& A,
                                              const PhysicalConstants& k, Backend backend) {
  k.validate();
  require_same_grid(psi, A);
  if (!A.is_free()) throw std::invalid_argument("componentwise Klein-Gordon residual is defined for the free potential");

  const double mass_term = (k.mc() / k.hbar) * (k.mc() / k.hbar);
  const SpinorField box = dalembertian(psi, backend);
  const SpinorField residual(psi.grid(), box.values() + mass_term * psi.values());

  std::array<double, 4> norms{};
  double largest = 0.0;
  for (int a = 0; a < 4; ++a) {
    norms[static_cast<std::size_t>(a)] = psi.component(a).norm();
    largest = std::max(largest, norms[static_cast<std::size_t>(a)]);
  }

  KleinGordonResidual out;
  for (int a = 0; a < 4; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (largest == 0.0 || norms[ua] <= 1e-12 * largest) {
      out.degenerate[ua] = true;
      out.residual[ua] = 0.0;
    } else {
      out.residual[ua] = residual.component(a).norm() / norms[ua];
    }
  }
  return out;
}

EquivalenceCheck check_factorization(const SpinorField& phi, const SampledPotential& A, const PhysicalConstants& k,
                                     Backend backend) {
  const SpinorField factored = factored_rhs(phi, A, k, backend);
  const SpinorField fock = fock_rhs(phi, A, k, backend);
  const Eigen::MatrixX4cd diff = factored.values() - fock.values();
  EquivalenceCheck out;
  out.fock_norm = fock.values().norm();
  out.max_abs = diff.cwiseAbs().maxCoeff();
  out.relative = out.fock_norm > 0.0 ? diff.norm() / out.fock_norm : diff.norm();
  return out;
}

}  // namespace diracsoc
