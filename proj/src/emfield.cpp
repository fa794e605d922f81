#include "diracsoc/emfield.hpp"

#include <cmath>
#include <sstream>

namespace diracsoc {

namespace {

constexpr std::array<std::pair<PotentialKind, std::string_view>, 5> kKindNames{{
    {PotentialKind::free, "free"},
    {PotentialKind::constant_electric, "constant_electric"},
    {PotentialKind::constant_magnetic, "constant_magnetic"},
    {PotentialKind::em_plane_wave, "em_plane_wave"},
    {PotentialKind::custom_polynomial, "custom_polynomial"},
}};

double required(const PotentialSpec& spec, const std::string& key) {
  auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw std::invalid_argument("potential '" + std::string(to_string(spec.kind)) + "' is missing parameter '" + key +
                                "'");
  return it->second;
}

double optional(const PotentialSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

int parse_digit(char ch, const std::string& key) {
  if (ch < '0' || ch > '3') throw std::invalid_argument("bad index in polynomial coefficient '" + key + "'");
  return ch - '0';
}

void check_known(const PotentialSpec& spec, std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : spec.params) {
    bool ok = false;
    for (auto key : keys) ok = ok || k == key;
    if (!ok)
      throw std::invalid_argument("unknown parameter '" + k + "' for potential '" + std::string(to_string(spec.kind)) +
                                  "'");
  }
}

int axis_param(const PotentialSpec& spec, const std::string& key, int fallback, int lo, int hi) {
  const double v = optional(spec, key, fallback);
  const int a = static_cast<int>(v);
  if (a != v || a < lo || a > hi) throw std::invalid_argument("parameter '" + key + "' out of range");
  return a;
}

}  // namespace

std::string_view to_string(PotentialKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

PotentialKind parse_potential_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown potential name '" + std::string(name) + "'");
}

PotentialSpec PotentialSpec::free_field() { return {}; }

PotentialSpec PotentialSpec::constant_electric(double E, int axis) {
  return {PotentialKind::constant_electric, {{"E", E}, {"axis", axis}}};
}

PotentialSpec PotentialSpec::constant_magnetic(double B, int gauge) {
  return {PotentialKind::constant_magnetic, {{"B", B}, {"gauge", gauge}}};
}

PotentialSpec PotentialSpec::plane_wave(const std::array<double, 4>& k_upper, const std::array<double, 4>& eps_upper,
                                        double amplitude) {
  PotentialSpec s{PotentialKind::em_plane_wave, {{"amplitude", amplitude}}};
  for (int mu = 0; mu < 4; ++mu) {
    s.params["k" + std::to_string(mu)] = k_upper[static_cast<std::size_t>(mu)];
    s.params["eps" + std::to_string(mu)] = eps_upper[static_cast<std::size_t>(mu)];
  }
  return s;
}

PotentialSpec PotentialSpec::custom_polynomial(std::map<std::string, double> coefficients) {
  return {PotentialKind::custom_polynomial, std::move(coefficients)};
}

std::string PotentialSpec::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  if (!params.empty()) {
    os << '(';
    bool first = true;
    for (const auto& [k, v] : params) {
      os << (first ? "" : ",") << k << '=' << v;
      first = false;
    }
    os << ')';
  }
  return os.str();
}

PotentialModel::PotentialModel(const PotentialSpec& spec)
    : constant_(Eigen::Vector4d::Zero()),
      linear_(Eigen::Matrix4d::Zero()),
      wave_k_lower_(Eigen::Vector4d::Zero()),
      wave_eps_lower_(Eigen::Vector4d::Zero()) {
  for (auto& q : quadratic_) q.setZero();

  switch (spec.kind) {
    case PotentialKind::free:
      check_known(spec, {});
      break;
    case PotentialKind::constant_electric: {
      check_known(spec, {"E", "axis"});
      const double E = required(spec, "E");
      const int axis = axis_param(spec, "axis", 1, 1, 3);
      linear_(0, axis) = -E;
      break;
    }
    case PotentialKind::constant_magnetic: {
      check_known(spec, {"B", "gauge"});
      const double B = required(spec, "B");
      const int gauge = axis_param(spec, "gauge", 0, 0, 1);
      if (gauge == 0) {
        linear_(1, 2) = -0.5 * B;
        linear_(2, 1) = 0.5 * B;
      } else {
        linear_(2, 1) = B;
      }
      break;
    }
    case PotentialKind::em_plane_wave: {
      check_known(spec, {"k0", "k1", "k2", "k3", "eps0", "eps1", "eps2", "eps3", "amplitude"});
      wave_ = true;
      wave_amplitude_ = optional(spec, "amplitude", 1.0);
      for (int mu = 0; mu < 4; ++mu) {
        const double sign = Metric::diag[static_cast<std::size_t>(mu)];
        wave_k_lower_(mu) = sign * required(spec, "k" + std::to_string(mu));
        wave_eps_lower_(mu) = sign * required(spec, "eps" + std::to_string(mu));
      }
      break;
    }
    case PotentialKind::custom_polynomial:
      for (const auto& [key, v] : spec.params) {
        if (key.size() == 2 && key[0] == 'c') {
          constant_(parse_digit(key[1], key)) = v;
        } else if (key.size() == 4 && key[0] == 'l' && key[2] == '_') {
          linear_(parse_digit(key[1], key), parse_digit(key[3], key)) = v;
        } else if (key.size() == 5 && key[0] == 'q' && key[2] == '_') {
          int nu = parse_digit(key[3], key), rho = parse_digit(key[4], key);
          if (nu > rho) std::swap(nu, rho);
          quadratic_[static_cast<std::size_t>(parse_digit(key[1], key))](nu, rho) += v;
        } else {
          throw std::invalid_argument("unknown custom_polynomial coefficient '" + key + "'");
        }
      }
      break;
  }
}

Lower4 PotentialModel::value(const Upper4& z) const {
  const Vector4c<double>& x = z.components();
  Vector4c<double> a = constant_.cast<Complex>() + linear_.cast<Complex>() * x;
  for (int mu = 0; mu < 4; ++mu) {
    const auto& q = quadratic_[static_cast<std::size_t>(mu)];
    for (int nu = 0; nu < 4; ++nu)
      for (int rho = nu; rho < 4; ++rho)
        if (q(nu, rho) != 0.0) a(mu) += q(nu, rho) * x(nu) * x(rho);
  }
  if (wave_) {
    const Complex phase = wave_k_lower_.cast<Complex>().dot(x);  // dot() conjugates the first argument; k is real
    a += (wave_amplitude_ * std::cos(phase)) * wave_eps_lower_.cast<Complex>();
  }
  return Lower4(a);
}

Mat4 PotentialModel::jacobian(const Upper4& z) const {
  const Vector4c<double>& x = z.components();
  Mat4 J = linear_.transpose().cast<Complex>();
  for (int mu = 0; mu < 4; ++mu) {
    const auto& q = quadratic_[static_cast<std::size_t>(mu)];
    for (int nu = 0; nu < 4; ++nu)
      for (int rho = nu; rho < 4; ++rho) {
        if (q(nu, rho) == 0.0) continue;
        J(nu, mu) += q(nu, rho) * x(rho);
        J(rho, mu) += q(nu, rho) * x(nu);
      }
  }
  if (wave_) {
    const Complex phase = wave_k_lower_.cast<Complex>().dot(x);
    const Complex s = -wave_amplitude_ * std::sin(phase);
    J += s * (wave_k_lower_ * wave_eps_lower_.transpose()).cast<Complex>();
  }
  return J;
}

std::array<bool, 4> PotentialModel::varying_axes() const {
  std::array<bool, 4> out{};
  for (int nu = 0; nu < 4; ++nu) {
    bool v = linear_.col(nu).cwiseAbs().maxCoeff() > 0.0;
    for (const auto& q : quadratic_) v = v || q.row(nu).cwiseAbs().maxCoeff() > 0.0 || q.col(nu).cwiseAbs().maxCoeff() > 0.0;
    if (wave_ && wave_amplitude_ != 0.0 && wave_eps_lower_.cwiseAbs().maxCoeff() > 0.0) v = v || wave_k_lower_(nu) != 0.0;
    out[static_cast<std::size_t>(nu)] = v;
  }
  return out;
}

bool PotentialModel::is_zero() const {
  if (constant_.cwiseAbs().maxCoeff() > 0.0) return false;
  for (bool v : varying_axes())
    if (v) return false;
  return !(wave_ && wave_amplitude_ != 0.0 && wave_eps_lower_.cwiseAbs().maxCoeff() > 0.0);
}

Lower4 evaluate_potential(const PotentialSpec& spec, const Upper4& z) { return PotentialModel(spec).value(z); }

Mat4 potential_jacobian_fd(const PotentialModel& model, const Upper4& z, const FiniteDifference& fd) {
  if (!(fd.h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (fd.order != 2 && fd.order != 4) throw std::invalid_argument("finite-difference order must be 2 or 4");
  Mat4 J;
  for (int mu = 0; mu < 4; ++mu) {
    auto at = [&](double offset) {
      Upper4 p = z;
      p[mu] += offset;
      return model.value(p).components();
    };
    Vector4c<double> d;
    if (fd.order == 2) {
      d = (at(fd.h) - at(-fd.h)) / (2.0 * fd.h);
    } else {
      d = (-at(2 * fd.h) + 8.0 * at(fd.h) - 8.0 * at(-fd.h) + at(-2 * fd.h)) / (12.0 * fd.h);
    }
    J.row(mu) = d.transpose();
  }
  return J;
}

FieldStrength field_strength(const PotentialModel& model, const Upper4& z, Differentiation method,
                             const FiniteDifference& fd) {
  const Mat4 J = method == Differentiation::analytic ? model.jacobian(z) : potential_jacobian_fd(model, z, fd);
  return J - J.transpose();
}

FieldStrength field_strength(const PotentialSpec& spec, const Upper4& z, Differentiation method,
                             const FiniteDifference& fd) {
  return field_strength(PotentialModel(spec), z, method, fd);
}

Complex lorenz_residual(const PotentialModel& model, const Upper4& z) {
  const Mat4 J = model.jacobian(z);
  Complex div = 0.0;
  for (int mu = 0; mu < 4; ++mu) div += double(Metric::diag[static_cast<std::size_t>(mu)]) * J(mu, mu);
  return div;
}

Complex lorenz_residual(const PotentialSpec& spec, const Upper4& z) { return lorenz_residual(PotentialModel(spec), z); }

Mat4 spin_coupling_matrix(const FieldStrength& F, const GammaSet<double>& gammas, double e, double m, double hbar) {
  Mat4 out = Mat4::Zero();
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu)
      if (mu != nu) out += F(mu, nu) * spin_tensor(gammas, mu, nu);
  return (e * hbar / (2.0 * m)) * out;
}

Mat4 spin_coupling_commutator_form(const FieldStrength& F, const GammaSet<double>& gammas, double e, double m,
                                   double hbar) {
  Mat4 out = Mat4::Zero();
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) out += F(mu, nu) * commutator(gammas, mu, nu);
  return Complex(0.0, e * hbar / (4.0 * m)) * out;
}

}  // namespace diracsoc
