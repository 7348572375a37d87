#include "nffd/statedep.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "nffd/error.hpp"

namespace nffd {

namespace {

constexpr double kPi = std::numbers::pi;

// w+ e^{-2i theta} + w- e^{2i theta}; its argument fixes the well position.
std::complex<double> lattice_phasor(double theta, const Weights& w) {
  return w.plus * std::polar(1.0, -2.0 * theta) + w.minus * std::polar(1.0, 2.0 * theta);
}

// Asymmetry (w- - w+) / (w+ + w-); tan(phi) = asymmetry * tan(2 theta).
double asymmetry(const Weights& w) {
  const double total = w.plus + w.minus;
  if (!(total > 0.0)) throw DomainError("component weights must have a positive sum");
  return (w.minus - w.plus) / total;
}

// Continuous branch of atan(g tan s) for g > 0, increasing in s.
double unwrapped_atan_tan(double s, double g) {
  const double n = std::round(s / kPi);
  const double u = s - n * kPi;
  if (std::abs(std::abs(u) - 0.5 * kPi) < 1e-15) return s;
  return n * kPi + std::atan(g * std::tan(u));
}

double inverse_unwrapped_atan_tan(double v, double g) {
  const double n = std::round(v / kPi);
  const double u = v - n * kPi;
  if (std::abs(std::abs(u) - 0.5 * kPi) < 1e-15) return v;
  return n * kPi + std::atan(std::tan(u) / g);
}

}  // namespace

WeightScheme WeightScheme::mandel() {
  return {SchemeName::Mandel, {0.75, 0.25}, {0.0, 1.0}};
}

WeightScheme WeightScheme::raman_basis() {
  return {SchemeName::RamanBasis, {0.25, 0.75}, {0.75, 0.25}};
}

WeightScheme WeightScheme::from_name(std::string_view name) {
  if (name == "MANDEL") return mandel();
  if (name == "RAMAN_BASIS") return raman_basis();
  throw DomainError("unknown weight scheme '" + std::string(name) + "'");
}

std::string_view WeightScheme::label() const noexcept {
  return name == SchemeName::Mandel ? "MANDEL" : "RAMAN_BASIS";
}

void StateDepConfig::validate() const {
  if (!(depth >= 0.0)) throw DomainError("state-dependent lattice depth must be >= 0");
  if (!(k_lat > 0.0)) throw DomainError("lattice wavenumber must be positive");
}

ThetaRamp::ThetaRamp(std::vector<RampSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw DomainError("a theta ramp needs at least two samples");
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].t > samples_[i - 1].t))
      throw DomainError("theta ramp times must be strictly increasing");
    if (!(std::abs(samples_[i].theta - samples_[i - 1].theta) < 0.5 * kPi))
      throw DomainError("theta ramp jumps by pi/2 or more between samples");
  }
}

ThetaRamp ThetaRamp::linear(double theta_from, double theta_to, double t_from, double t_to) {
  const double turns = std::abs(theta_to - theta_from) / (0.5 * kPi);
  const auto intervals = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(turns * static_cast<double>(kSamplesPerQuarterTurn))));
  std::vector<RampSample> s(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(intervals);
    s[i] = {t_from + f * (t_to - t_from), theta_from + f * (theta_to - theta_from)};
  }
  s.back() = {t_to, theta_to};
  return ThetaRamp(std::move(s));
}

ThetaRamp ThetaRamp::reversed(double t_from) const {
  std::vector<RampSample> s(samples_.size());
  const std::size_t last = samples_.size() - 1;
  s[0] = {t_from, samples_[last].theta};
  for (std::size_t m = 1; m <= last; ++m) {
    const double dt = samples_[last - m + 1].t - samples_[last - m].t;
    s[m] = {s[m - 1].t + dt, samples_[last - m].theta};
  }
  return ThetaRamp(std::move(s));
}

ThetaRamp ThetaRamp::then(const ThetaRamp& next) const {
  const RampSample& join = next.samples_.front();
  if (join.t != samples_.back().t || join.theta != samples_.back().theta)
    throw DomainError("ramps must join at a common (t, theta) sample");
  std::vector<RampSample> s = samples_;
  s.insert(s.end(), next.samples_.begin() + 1, next.samples_.end());
  return ThetaRamp(std::move(s));
}

SigmaAmplitudes sigma_components(double x, double theta, double k) {
  return {std::cos(k * x - theta), -std::cos(k * x + theta)};
}

PlusMinus v_plus_minus(double x, double theta, const StateDepConfig& cfg) {
  const double cp = std::cos(cfg.k_lat * x - theta);
  const double cm = std::cos(cfg.k_lat * x + theta);
  return {-cfg.depth * cp * cp, -cfg.depth * cm * cm};
}

QubitPotentials qubit_potential(double x, double theta, const StateDepConfig& cfg) {
  const PlusMinus v = v_plus_minus(x, theta, cfg);
  const Weights& w0 = cfg.scheme.zero;
  const Weights& w1 = cfg.scheme.one;
  return {w0.plus * v.plus + w0.minus * v.minus, w1.plus * v.plus + w1.minus * v.minus};
}

double weighted_potential(double x, double theta, const Weights& w, double k, double depth) {
  const double cp = std::cos(k * x - theta);
  const double cm = std::cos(k * x + theta);
  return -depth * (w.plus * cp * cp + w.minus * cm * cm);
}

double component_minimum(double theta, const Weights& w, double k, double branch_hint) {
  if (!(w.plus >= 0.0) || !(w.minus >= 0.0) || !(w.plus + w.minus > 0.0))
    throw DomainError("component weights must be non-negative with a positive sum");
  const std::complex<double> c = lattice_phasor(theta, w);
  if (std::abs(c) <= 1e-12 * (w.plus + w.minus))
    throw DomainError("degenerate lattice: sigma+ and sigma- wells cancel at theta = " +
                      std::to_string(theta));
  const double base = -std::arg(c) / (2.0 * k);
  const double period = kPi / k;
  return base + std::round((branch_hint - base) / period) * period;
}

double unwrapped_displacement(double theta, const Weights& w, double k) {
  const double g = asymmetry(w);
  if (g == 0.0) return 0.0;
  const double phase = (g > 0.0 ? 1.0 : -1.0) * unwrapped_atan_tan(2.0 * theta, std::abs(g));
  return -phase / (2.0 * k);
}

double theta_for_displacement(double d, const Weights& w, double k) {
  const double g = asymmetry(w);
  if (d == 0.0) return 0.0;
  if (g == 0.0) throw SchedulingError("equal sigma+/sigma- weights give no state-dependent motion");
  const double phase = -2.0 * k * d;
  const double s = inverse_unwrapped_atan_tan((g > 0.0 ? 1.0 : -1.0) * phase, std::abs(g));
  return 0.5 * s;
}

std::vector<TrajectoryPoint> transport_trajectory(const ThetaRamp& ramp, const Weights& w, double k,
                                                  double x_start) {
  const auto& s = ramp.samples();
  const double half_period = 0.5 * kPi / k;
  std::vector<TrajectoryPoint> out;
  out.reserve(s.size());

  const double x0 = component_minimum(s.front().theta, w, k, x_start);
  if (std::abs(x0 - x_start) > 1e-9 * std::max(1.0, std::abs(x_start)) + 1e-12)
    throw TrackingError("x_start is not a lattice minimum at the start of the ramp");
  out.push_back({s.front().t, s.front().theta, x0});

  for (std::size_t i = 1; i < s.size(); ++i) {
    const double prev = out.back().x;
    const double direct = component_minimum(s[i].theta, w, k, prev);
    // The same step taken through the angular midpoint must land on the same
    // branch; otherwise the well moved too far to follow unambiguously.
    const double mid = component_minimum(0.5 * (s[i - 1].theta + s[i].theta), w, k, prev);
    const double via_mid = component_minimum(s[i].theta, w, k, mid);
    if (std::abs(direct - prev) >= half_period * (1.0 - 1e-9) ||
        std::abs(direct - via_mid) > 0.5 * half_period) {
      throw TrackingError("lattice minimum jumped between t = " + std::to_string(s[i - 1].t) +
                          " and t = " + std::to_string(s[i].t));
    }
    out.push_back({s[i].t, s[i].theta, direct});
  }
  return out;
}

CollisionSchedule collision_schedule(long site_i, long site_j, double pitch,
                                     const StateDepConfig& cfg, double ramp_duration) {
  cfg.validate();
  if (site_i == site_j) throw SchedulingError("collision needs two distinct lattice sites");
  if (!(ramp_duration > 0.0)) throw DomainError("ramp duration must be positive");
  const double k = cfg.k_lat;
  const double multiple = pitch / cfg.period();
  if (!(pitch > 0.0) || std::abs(multiple - std::round(multiple)) > 1e-9 * std::max(1.0, multiple) ||
      std::round(multiple) < 1.0) {
    throw GeometryError("trap pitch " + std::to_string(pitch) +
                        " is not an integer multiple of the lattice period");
  }
  // Snap to the exact multiple so site positions sit on lattice minima.
  const double snapped = std::round(multiple) * cfg.period();
  const double x_i = static_cast<double>(site_i) * snapped;
  const double x_j = static_cast<double>(site_j) * snapped;
  const double half = 0.5 * (x_j - x_i);

  const Weights& w0 = cfg.scheme.zero;
  const Weights& w1 = cfg.scheme.one;
  const double theta_peak = theta_for_displacement(half, w0, k);
  const double d1 = unwrapped_displacement(theta_peak, w1, k);
  if (std::abs(d1 + half) > kMeetingTolerance) {
    throw SchedulingError(std::string("scheme ") + std::string(cfg.scheme.label()) +
                          " cannot bring |0> and |1> to the midpoint (|1> misses by " +
                          std::to_string(std::abs(d1 + half)) + ")");
  }

  CollisionSchedule sched{ThetaRamp::linear(0.0, theta_peak, 0.0, ramp_duration),
                          ThetaRamp::linear(0.0, theta_peak, 0.0, ramp_duration).reversed(ramp_duration),
                          theta_peak,
                          x_i,
                          x_j,
                          0.5 * (x_i + x_j)};

  const auto t0 = transport_trajectory(sched.forward, w0, k, x_i);
  const auto t1 = transport_trajectory(sched.forward, w1, k, x_j);
  if (std::abs(t0.back().x - sched.meeting_point) > kMeetingTolerance ||
      std::abs(t1.back().x - sched.meeting_point) > kMeetingTolerance) {
    throw SchedulingError("tracked components do not meet at the midpoint");
  }
  const auto b0 = transport_trajectory(sched.reverse, w0, k, t0.back().x);
  const auto b1 = transport_trajectory(sched.reverse, w1, k, t1.back().x);
  if (std::abs(b0.back().x - x_i) > kReturnTolerance || std::abs(b1.back().x - x_j) > kReturnTolerance)
    throw SchedulingError("reverse ramp does not return the components to their sites");
  return sched;
}

}  // namespace nffd
