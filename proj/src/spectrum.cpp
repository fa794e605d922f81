#include "diracsoc/spectrum.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace diracsoc {

double FourMomentum::gap(const PhysicalConstants& c) const {
  const double kk = k(0) * k(0) - k(1) * k(1) - k(2) * k(2) - k(3) * k(3);
  return c.hbar * c.hbar * kk - c.mc() * c.mc();
}

bool FourMomentum::on_shell(const PhysicalConstants& c, double rel_tol) const {
  return std::abs(gap(c)) <= rel_tol * c.mc() * c.mc();
}

std::pair<double, double> dispersion_solve(const std::array<double, 3>& spatial_k, const PhysicalConstants& c) {
  c.validate();
  const double rest = c.mc() / c.hbar;
  const double k0 = std::sqrt(spatial_k[0] * spatial_k[0] + spatial_k[1] * spatial_k[1] +
                              spatial_k[2] * spatial_k[2] + rest * rest);
  return {k0, -k0};
}

Mat4 momentum_operator(const Upper4& k, const PhysicalConstants& c, double sign, const GammaSet<double>& gammas) {
  return c.hbar * slash(gammas, k) + (sign * c.mc()) * Mat4::Identity();
}

std::vector<Spinor> nullspace(const Mat4& M, double rel_threshold) {
  Eigen::JacobiSVD<Mat4> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cut = rel_threshold * s(0);
  std::vector<Spinor> basis;
  for (int i = 0; i < 4; ++i)
    if (s(i) <= cut) basis.emplace_back(svd.matrixV().col(i));
  return basis;
}

std::vector<Spinor> nullspace_spinors(const FourMomentum& k, const PhysicalConstants& c,
                                      const GammaSet<double>& gammas) {
  c.validate();
  if (!k.on_shell(c, 1e-10)) throw std::domain_error("no nontrivial nullspace: k is off the mass shell");
  auto basis = nullspace(momentum_operator(k.as_upper(), c, -1.0, gammas));
  if (basis.size() != 2)
    throw std::domain_error("expected a 2-dimensional nullspace, found " + std::to_string(basis.size()));
  return basis;
}

std::vector<ModeState> propertime_evolve(const ModeState& state, const PotentialSpec& A, double dtau, int steps,
                                         const PhysicalConstants& c) {
  c.validate();
  if (!PotentialModel(A).is_zero())
    throw std::invalid_argument("proper-time mode evolution is only supported for the free potential");
  if (!(dtau > 0.0) || steps < 0) throw std::invalid_argument("dtau must be positive and steps non-negative");
  const double delta = state.k.gap(c);
  const double rate = delta / (c.hbar * c.m);
  if (std::abs(rate) * dtau >= 0.1) throw std::invalid_argument("dtau too large for this mode: dtau |Delta|/(hbar m) >= 0.1");

  const Complex step = std::exp(Complex(0.0, c.epsilon * rate * dtau));
  std::vector<ModeState> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(state);
  ModeState cur = state;
  for (int n = 0; n < steps; ++n) {
    cur.chi *= step;
    cur.tau += dtau;
    out.push_back(cur);
  }
  return out;
}

double measured_frequency(const std::vector<ModeState>& trajectory) {
  if (trajectory.size() < 2) throw std::invalid_argument("need at least two states to measure a frequency");
  const Spinor& chi0 = trajectory.front().chi;
  std::vector<double> phase(trajectory.size());
  double prev = 0.0, offset = 0.0;
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    const double raw = std::arg(chi0.dot(trajectory[n].chi));
    if (n > 0) {
      const double jump = raw - prev;
      if (jump > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      if (jump < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
    }
    prev = raw;
    phase[n] = raw + offset;
  }
  // least squares slope of phase against tau
  const double n = static_cast<double>(trajectory.size());
  double st = 0, sp = 0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    st += trajectory[i].tau;
    sp += phase[i];
  }
  const double mt = st / n, mp = sp / n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double dt = trajectory[i].tau - mt;
    num += dt * (phase[i] - mp);
    den += dt * dt;
  }
  return num / den;
}

double max_drift(const std::vector<ModeState>& trajectory) {
  if (trajectory.empty()) return 0.0;
  const Spinor& chi0 = trajectory.front().chi;
  const double norm0 = chi0.norm();
  double worst = 0.0;
  for (const auto& s : trajectory) worst = std::max(worst, (s.chi - chi0).norm());
  return norm0 > 0.0 ? worst / norm0 : worst;
}

LegacyModeReport legacy_mode_condition(const FourMomentum& k, const Spinor& chi, const PhysicalConstants& c,
                                       const GammaSet<double>& gammas, double tol) {
  c.validate();
  const Upper4 ku = k.as_upper();
  const Mat4 dirac = momentum_operator(ku, c, -1.0, gammas);
  const Mat4 conjugate = momentum_operator(ku, c, +1.0, gammas);
  const Mat4 kinetic = momentum_operator(ku, c, 0.0, gammas);

  LegacyModeReport r;
  r.gap = k.gap(c);
  r.on_shell = k.on_shell(c);
  r.new_residual = (dirac * (conjugate * chi)).norm();
  r.legacy_residual = (dirac * (kinetic * chi)).norm();
  const double scale = tol * c.mc() * c.mc() * chi.norm();
  r.new_stationary = r.new_residual <= scale;
  r.legacy_stationary = r.legacy_residual <= scale;
  return r;
}

}  // namespace diracsoc
