#include "diracsoc/grid.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "diracsoc/philox.hpp"

namespace diracsoc {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Periodic central stencils, fourth order.
void fd4_line(std::vector<Complex>& line, int order, double h) {
  const int n = static_cast<int>(line.size());
  std::vector<Complex> out(line.size());
  auto at = [&](int i) { return line[static_cast<std::size_t>((i % n + n) % n)]; };
  if (order == 1) {
    const double s = 1.0 / (12.0 * h);
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] = s * (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2));
  } else {
    const double s = 1.0 / (12.0 * h * h);
    for (int i = 0; i < n; ++i)
      out[static_cast<std::size_t>(i)] =
          s * (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2));
  }
  line.swap(out);
}

}  // namespace

SpacetimeGrid::SpacetimeGrid(int dims, double extent, int points)
    : SpacetimeGrid(std::vector<double>(static_cast<std::size_t>(std::max(dims, 0)), extent),
                    std::vector<int>(static_cast<std::size_t>(std::max(dims, 0)), points)) {}

SpacetimeGrid::SpacetimeGrid(std::vector<double> extents, std::vector<int> points)
    : extents_(std::move(extents)), points_(std::move(points)) {
  if (points_.empty() || points_.size() > 4) throw std::invalid_argument("grid needs 1 to 4 active axes");
  if (extents_.size() != points_.size()) throw std::invalid_argument("one extent per active axis required");
  for (std::size_t a = 0; a < points_.size(); ++a) {
    if (points_[a] < 8 || !power_of_two(points_[a]))
      throw std::invalid_argument("points per axis must be a power of two >= 8");
    if (!(extents_[a] > 0.0) || !std::isfinite(extents_[a])) throw std::invalid_argument("extent must be positive");
  }
  strides_.assign(points_.size(), 1);
  for (int a = static_cast<int>(points_.size()) - 2; a >= 0; --a)
    strides_[static_cast<std::size_t>(a)] = strides_[static_cast<std::size_t>(a + 1)] * points_[static_cast<std::size_t>(a + 1)];
  size_ = strides_[0] * points_[0];
}

Upper4 SpacetimeGrid::coordinate(Eigen::Index flat) const {
  Upper4 z;
  for (int a = 0; a < dims(); ++a) {
    const Eigen::Index i = (flat / stride(a)) % points(a);
    z[a] = -0.5 * extent(a) + static_cast<double>(i) * spacing(a);
  }
  return z;
}

double SpacetimeGrid::fundamental(int axis) const { return 2.0 * std::numbers::pi / extent(axis); }

std::string SpacetimeGrid::describe() const {
  std::ostringstream os;
  os << std::setprecision(17);
  for (int a = 0; a < dims(); ++a) os << (a ? "x" : "") << points(a);
  os << " over ";
  for (int a = 0; a < dims(); ++a) os << (a ? "x" : "") << extent(a);
  return os.str();
}

std::string_view to_string(Backend b) { return b == Backend::spectral ? "spectral" : "fd4"; }

Backend parse_backend(std::string_view name) {
  if (name == "spectral") return Backend::spectral;
  if (name == "fd4") return Backend::fd4;
  throw std::invalid_argument("unknown backend '" + std::string(name) + "'");
}

void differentiate_columns(const SpacetimeGrid& grid, Eigen::Ref<Eigen::MatrixXcd> data, int mu, int order,
                           Backend backend) {
  if (!grid.active(mu)) throw std::invalid_argument("axis " + std::to_string(mu) + " is not active on this grid");
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  if (data.rows() != grid.size()) throw std::invalid_argument("data does not match grid");
  if (!data.allFinite()) throw std::domain_error("cannot differentiate a field with non-finite values");

  const int n = grid.points(mu);
  const Eigen::Index stride = grid.stride(mu);
  const Eigen::Index block = stride * n;
  const Eigen::Index outer = grid.size() / block;

  // Spectral multiplier (i k)^order; the Nyquist mode is dropped for odd order.
  std::vector<Complex> multiplier(static_cast<std::size_t>(n));
  const double k0 = grid.fundamental(mu);
  for (int j = 0; j < n; ++j) {
    const int m = j < n / 2 ? j : j - n;
    const Complex ik(0.0, k0 * m);
    Complex factor = order == 1 ? ik : ik * ik;
    if (order == 1 && j == n / 2) factor = 0.0;
    multiplier[static_cast<std::size_t>(j)] = factor;
  }

  Eigen::FFT<double> fft;
  std::vector<Complex> line(static_cast<std::size_t>(n)), spec(static_cast<std::size_t>(n));
  for (Eigen::Index col = 0; col < data.cols(); ++col) {
    Complex* base = data.col(col).data();
    for (Eigen::Index o = 0; o < outer; ++o)
      for (Eigen::Index inner = 0; inner < stride; ++inner) {
        Complex* start = base + o * block + inner;
        for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = start[j * stride];
        if (backend == Backend::spectral) {
          fft.fwd(spec, line);
          for (int j = 0; j < n; ++j) spec[static_cast<std::size_t>(j)] *= multiplier[static_cast<std::size_t>(j)];
          fft.inv(line, spec);
        } else {
          fd4_line(line, order, grid.spacing(mu));
        }
        for (int j = 0; j < n; ++j) start[j * stride] = line[static_cast<std::size_t>(j)];
      }
  }
}

ScalarField sample(const SpacetimeGrid& grid, const std::function<Complex(const Upper4&)>& fn) {
  ScalarField f(grid);
  for (Eigen::Index p = 0; p < grid.size(); ++p) f.values()(p, 0) = fn(grid.coordinate(p));
  return f;
}

SpinorField sample_spinor(const SpacetimeGrid& grid, const std::function<Spinor(const Upper4&)>& fn) {
  SpinorField f(grid);
  for (Eigen::Index p = 0; p < grid.size(); ++p) f.values().row(p) = fn(grid.coordinate(p)).transpose();
  return f;
}

SpinorField plane_wave(const SpacetimeGrid& grid, const Spinor& chi, const Upper4& k) {
  const Lower4 kl = lower(k);
  return sample_spinor(grid, [&](const Upper4& z) -> Spinor {
    return std::exp(Complex(0, -1) * contract(z, kl)) * chi;
  });
}

namespace {

Eigen::MatrixXcd random_columns(const SpacetimeGrid& grid, int cols, std::uint64_t seed, const RandomFieldOptions& opts) {
  if (opts.max_mode < 0) throw std::invalid_argument("max_mode must be non-negative");
  if (!(opts.amplitude >= 0.0)) throw std::invalid_argument("amplitude must be non-negative");
  for (int a = 0; a < grid.dims(); ++a)
    if (2 * opts.max_mode >= grid.points(a)) throw std::invalid_argument("max_mode does not fit below the Nyquist mode");

  const int width = 2 * opts.max_mode + 1;
  int modes = 1;
  for (int a = 0; a < grid.dims(); ++a) modes *= width;
  const auto key = Philox4x32::key_from_seed(seed);

  // exp(i n k_a z^a) per axis, point and mode
  std::vector<Eigen::MatrixXcd> table;
  for (int a = 0; a < grid.dims(); ++a) {
    Eigen::MatrixXcd t(grid.points(a), width);
    for (int i = 0; i < grid.points(a); ++i)
      for (int j = 0; j < width; ++j) {
        const double phase = (j - opts.max_mode) * grid.fundamental(a) * (-0.5 * grid.extent(a) + i * grid.spacing(a));
        t(i, j) = Complex(std::cos(phase), std::sin(phase));
      }
    table.push_back(std::move(t));
  }

  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(grid.size(), cols);
  for (int c = 0; c < cols; ++c) {
    std::vector<Complex> coef(static_cast<std::size_t>(modes));
    double total = 0.0;
    for (int j = 0; j < modes; ++j) {
      const auto [re, im] = Philox4x32::normal_pair(key, static_cast<std::uint64_t>(c), static_cast<std::uint32_t>(j), 7);
      coef[static_cast<std::size_t>(j)] = Complex(re, im);
      total += std::abs(coef[static_cast<std::size_t>(j)]);
    }
    const double scale = total > 0.0 ? opts.amplitude / total : 0.0;
    for (Eigen::Index p = 0; p < grid.size(); ++p) {
      const Upper4 z = grid.coordinate(p);
      Complex v = 0.0;
      for (int j = 0; j < modes; ++j) {
        Complex term = coef[static_cast<std::size_t>(j)];
        int rest = j;
        for (int a = 0; a < grid.dims(); ++a) {
          const Eigen::Index i = (p / grid.stride(a)) % grid.points(a);
          term *= table[static_cast<std::size_t>(a)](i, rest % width);
          rest /= width;
        }
        v += term;
      }
      v = scale * v + opts.offset;
      if (opts.envelope_width > 0.0) {
        double r2 = 0.0;
        for (int a = 0; a < grid.dims(); ++a) {
          const double s = z[a].real() / (opts.envelope_width * grid.extent(a));
          r2 += s * s;
        }
        v *= std::exp(-0.5 * r2);
      }
      out(p, c) = v;
    }
  }
  return out;
}

}  // namespace

ScalarField random_scalar_field(const SpacetimeGrid& grid, std::uint64_t seed, const RandomFieldOptions& opts) {
  return ScalarField(grid, random_columns(grid, 1, seed, opts));
}

SpinorField random_spinor_field(const SpacetimeGrid& grid, std::uint64_t seed, const RandomFieldOptions& opts) {
  return SpinorField(grid, random_columns(grid, 4, seed, opts));
}

void write_csv(std::ostream& os, const SpacetimeGrid& grid, const Eigen::MatrixXcd& values) {
  const auto old = os.precision(17);
  for (int a = 0; a < grid.dims(); ++a) os << (a ? "," : "") << 'z' << a;
  for (Eigen::Index c = 0; c < values.cols(); ++c) os << ",re" << c << ",im" << c;
  os << '\n';
  for (Eigen::Index p = 0; p < grid.size(); ++p) {
    const Upper4 z = grid.coordinate(p);
    for (int a = 0; a < grid.dims(); ++a) os << (a ? "," : "") << z[a].real();
    for (Eigen::Index c = 0; c < values.cols(); ++c) os << ',' << values(p, c).real() << ',' << values(p, c).imag();
    os << '\n';
  }
  os.precision(old);
}

}  // namespace diracsoc
