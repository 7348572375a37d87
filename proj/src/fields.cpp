#include "nffd/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "nffd/error.hpp"
#include "parallel.hpp"

namespace nffd {

namespace {

constexpr int kRuleOrder = 8;
constexpr double kRadialSpacing = 0.25 * kWavelength;
constexpr double kAngularSpacing = std::numbers::pi / 12.0;

struct Rule {
  std::array<double, kRuleOrder> x{};
  std::array<double, kRuleOrder> w{};
};

// Gauss-Legendre on [-1, 1]; Boost stores only the non-negative half.
const Rule& gauss_rule() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, kRuleOrder>;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
      r.x[2 * i] = -a[i];
      r.w[2 * i] = w[i];
      r.x[2 * i + 1] = a[i];
      r.w[2 * i + 1] = w[i];
    }
    return r;
  }();
  return rule;
}

// Panel edges on [lo, hi]: uniform spacing plus geometric grading towards
// `focus` at scale `width`.
std::vector<double> panel_edges(double lo, double hi, double spacing, double focus, double width) {
  std::vector<double> e{lo, hi};
  const auto n_uniform = static_cast<std::size_t>(std::floor((hi - lo) / spacing));
  for (std::size_t i = 1; i <= n_uniform; ++i) e.push_back(lo + static_cast<double>(i) * spacing);
  if (focus >= lo && focus <= hi && width > 0.0) {
    e.push_back(focus);
    for (double s = 0.25 * width; s < hi - lo; s *= 2.0) {
      if (focus - s > lo) e.push_back(focus - s);
      if (focus + s < hi) e.push_back(focus + s);
    }
  }
  std::sort(e.begin(), e.end());
  const double merge = 1e-12 * (hi - lo);
  std::vector<double> out;
  for (double v : e)
    if (out.empty() || v - out.back() > merge) out.push_back(v);
  out.back() = hi;
  return out;
}

struct Nodes {
  std::vector<double> x;
  std::vector<double> w;
};

Nodes composite_rule(const std::vector<double>& edges, int level) {
  const Rule& rule = gauss_rule();
  const std::size_t split = std::size_t{1} << level;
  Nodes n;
  n.x.reserve((edges.size() - 1) * split * kRuleOrder);
  n.w.reserve(n.x.capacity());
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double step = (edges[p + 1] - edges[p]) / static_cast<double>(split);
    for (std::size_t s = 0; s < split; ++s) {
      const double a = edges[p] + static_cast<double>(s) * step;
      const double half = 0.5 * step;
      for (int q = 0; q < kRuleOrder; ++q) {
        n.x.push_back(a + half * (rule.x[q] + 1.0));
        n.w.push_back(half * rule.w[q]);
      }
    }
  }
  return n;
}

// rho * (e^{ikr}/r) (z/r) (1/r - ik) with r^2 = r2.
inline std::complex<double> kernel(double rho, double z, double r2) {
  const double r = std::sqrt(r2);
  const double phase = kWaveNumber * r;
  const std::complex<double> wave(std::cos(phase), std::sin(phase));
  return wave * std::complex<double>(1.0 / r, -kWaveNumber) * (rho * z / r2);
}

}  // namespace

ApertureSpec::ApertureSpec(double radius) : radius_(radius) {
  if (!(radius >= kWavelength) || !std::isfinite(radius))
    throw DomainError("aperture radius must be >= 1 wavelength, got " + std::to_string(radius));
}

TrapLaserParams::TrapLaserParams(double e0, double gamma_e, double detuning)
    : e0_(e0), gamma_e_(gamma_e), detuning_(detuning) {
  if (!(detuning < 0.0)) throw DomainError("trap laser must be red detuned (detuning < 0)");
  if (!(gamma_e > 0.0)) throw DomainError("linewidth gamma_e must be positive");
  if (!(e0 > 0.0)) throw DomainError("field amplitude e0 must be positive");
  u0_ = 3.0 / 8.0 * (gamma_e / std::abs(detuning)) * (e0 * e0) /
        (kWaveNumber * kWaveNumber * kWaveNumber);
}

Amplitude rs_amplitude(const Point3& p, const ApertureSpec& ap, const QuadratureOptions& opts) {
  if (!(p.z > 0.0)) throw DomainError("Rayleigh-Sommerfeld field needs z > 0");
  if (!(opts.rel_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");

  const double a = ap.radius();
  const double z = p.z;
  const double r0 = std::hypot(p.x, p.y);
  const bool on_axis = r0 == 0.0;

  // The integrand peaks at the foot of the perpendicular from p (clamped to
  // the disk) with a width set by the distance to that foot.
  const double foot = std::min(r0, a);
  const double width = std::hypot(z, r0 - foot);
  const std::vector<double> rho_edges = panel_edges(0.0, a, kRadialSpacing, foot, width);
  const std::vector<double> phi_edges =
      on_axis ? std::vector<double>{}
              : panel_edges(0.0, std::numbers::pi, kAngularSpacing, 0.0, width / std::max(r0, width));

  std::size_t used = 0;
  std::complex<double> previous;
  double estimate = std::numeric_limits<double>::infinity();
  for (int level = 0;; ++level) {
    const Nodes rho = composite_rule(rho_edges, level);
    Nodes phi;
    std::vector<double> two_cos;
    if (!on_axis) {
      phi = composite_rule(phi_edges, level);
      two_cos.resize(phi.x.size());
      for (std::size_t j = 0; j < phi.x.size(); ++j) two_cos[j] = 2.0 * r0 * std::cos(phi.x[j]);
    }
    const std::size_t cost = rho.x.size() * (on_axis ? 1 : phi.x.size());
    if (used + cost > opts.max_evaluations) {
      throw AccuracyError("Rayleigh-Sommerfeld quadrature did not converge within " +
                              std::to_string(opts.max_evaluations) +
                              " evaluations (estimate " + std::to_string(estimate) + ")",
                          estimate);
    }
    used += cost;

    std::complex<double> sum;
    for (std::size_t i = 0; i < rho.x.size(); ++i) {
      const double s = rho.x[i];
      const double base = s * s + r0 * r0 + z * z;
      if (on_axis) {
        sum += rho.w[i] * kernel(s, z, base);
        continue;
      }
      std::complex<double> ring;
      for (std::size_t j = 0; j < phi.x.size(); ++j)
        ring += phi.w[j] * kernel(s, z, base - s * two_cos[j]);
      sum += rho.w[i] * ring;
    }
    if (!on_axis) sum /= std::numbers::pi;

    if (level > 0) {
      estimate = std::abs(sum - previous);
      if (estimate <= opts.rel_tol * std::max(std::abs(sum), QuadratureOptions::kAmplitudeFloor))
        return {sum, estimate, used};
    }
    previous = sum;
  }
}

double nffd_potential(const Point3& p, const ApertureSpec& ap, const TrapLaserParams& tl,
                      const QuadratureOptions& opts) {
  return -tl.u0() * std::norm(rs_amplitude(p, ap, opts).value);
}

namespace {

double axial_u_over_u0(double z, const ApertureSpec& ap, const QuadratureOptions& opts) {
  return -std::norm(rs_amplitude({0.0, 0.0, z}, ap, opts).value);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + static_cast<double>(i) * step;
  v.back() = hi;
  return v;
}

}  // namespace

AxialProfile axial_profile(const ApertureSpec& ap, double z_lo, double z_hi, std::size_t n,
                           const QuadratureOptions& opts) {
  if (!(z_lo > 0.0) || !(z_hi > z_lo)) throw DomainError("axial range needs 0 < z_lo < z_hi");
  if (n < 2) throw DomainError("axial profile needs at least two samples");
  const std::vector<double> zs = linspace(z_lo, z_hi, n);
  AxialProfile profile{ap, std::vector<AxialSample>(n)};
  detail::parallel_for(n, [&](std::size_t i) {
    profile.samples[i] = {zs[i], axial_u_over_u0(zs[i], ap, opts)};
  });
  return profile;
}

TrapMinimum locate_trap_minimum(const ApertureSpec& ap, const QuadratureOptions& opts) {
  const AxialProfile coarse =
      axial_profile(ap, kMinimumSearchLo, kMinimumSearchHi, kMinimumScanPoints, opts);
  const auto& s = coarse.samples;
  std::size_t best = 0;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const bool local = s[i].u_over_u0 < s[i - 1].u_over_u0 && s[i].u_over_u0 <= s[i + 1].u_over_u0;
    if (local && (best == 0 || s[i].u_over_u0 < s[best].u_over_u0)) best = i;
  }
  if (best == 0) {
    throw NotFoundError("no interior trap minimum in [0.1, 12] for aperture radius " +
                        std::to_string(ap.radius()));
  }

  // Golden-section search on the bracket around the deepest coarse sample.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = s[best - 1].z;
  double hi = s[best + 1].z;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = axial_u_over_u0(c, ap, opts);
  double fd = axial_u_over_u0(d, ap, opts);
  while (hi - lo > kMinimumPositionTol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = axial_u_over_u0(c, ap, opts);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = axial_u_over_u0(d, ap, opts);
    }
  }
  const double z_min = 0.5 * (lo + hi);
  return {z_min, axial_u_over_u0(z_min, ap, opts)};
}

RzGrid RzGrid::uniform(double r_lo, double r_hi, std::size_t n_r, double z_lo, double z_hi,
                       std::size_t n_z) {
  if (n_r == 0 || n_z == 0) throw DomainError("grid needs at least one point per axis");
  if (n_r > 1 && !(r_hi > r_lo)) throw DomainError("grid needs r_lo < r_hi");
  if (n_z > 1 && !(z_hi > z_lo)) throw DomainError("grid needs z_lo < z_hi");
  RzGrid g;
  g.r = n_r == 1 ? std::vector<double>{r_lo} : linspace(r_lo, r_hi, n_r);
  g.z = n_z == 1 ? std::vector<double>{z_lo} : linspace(z_lo, z_hi, n_z);
  return g;
}

PotentialMap potential_map(const ApertureSpec& ap, const TrapLaserParams& tl, const RzGrid& grid,
                           const QuadratureOptions& opts) {
  for (double z : grid.z)
    if (!(z > 0.0)) throw DomainError("potential map needs z > 0 at every grid point");
  PotentialMap map{grid, tl.u0(), std::vector<double>(grid.r.size() * grid.z.size())};
  const std::size_t nz = grid.z.size();
  // Evaluated at |r|: the field is axisymmetric.
  detail::parallel_for(map.u_over_u0.size(), [&](std::size_t idx) {
    const Point3 p{std::abs(grid.r[idx / nz]), 0.0, grid.z[idx % nz]};
    map.u_over_u0[idx] = -std::norm(rs_amplitude(p, ap, opts).value);
  });
  return map;
}

double stark_shift(double omega_eg, double delta_eg) {
  if (delta_eg == 0.0) throw DomainError("AC Stark shift diverges at zero detuning");
  return std::norm(omega_eg) / (4.0 * delta_eg);
}

void LatticeConfig::validate() const {
  for (std::size_t i = 0; i < 3; ++i)
    if (active[i] && !(depth[i] >= 0.0)) throw DomainError("lattice depth must be >= 0");
  if (!(k_lat > 0.0)) throw DomainError("lattice wavenumber must be positive");
}

double lattice_potential(const Point3& x, const LatticeConfig& cfg) {
  const std::array<double, 3> coord{x.x, x.y, x.z};
  double v = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!cfg.active[i]) continue;
    const double c = std::cos(cfg.k_lat * coord[i]);
    v += cfg.depth[i] * c * c;
  }
  return v;
}

}  // namespace nffd
