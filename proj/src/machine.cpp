#include "nffd/machine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "nffd/error.hpp"

namespace nffd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoordTol = 1e-9;

double distance(Vec2 a, Vec2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

Vec2 unit(Vec2 from, Vec2 to) {
  const double d = distance(from, to);
  return {(to.x - from.x) / d, (to.y - from.y) / d};
}

bool whole_periods(double length, double period) {
  const double m = length / period;
  return std::abs(m - std::round(m)) <= 1e-9 * std::max(1.0, m);
}

void require_whole_periods(double length, double period, const char* what) {
  if (!whole_periods(length, period)) {
    throw GeometryError(std::string(what) + " " + std::to_string(length) +
                        " is not an integer multiple of the lattice period " +
                        std::to_string(period));
  }
}

ProtocolStep make_step(int id, std::string description) {
  ProtocolStep s;
  s.id = id;
  s.description = std::move(description);
  return s;
}

const Weights& weights_for(const StateDepConfig& cfg, int component) {
  return component == 0 ? cfg.scheme.zero : cfg.scheme.one;
}

}  // namespace

std::string_view to_string(LayoutKind kind) noexcept {
  switch (kind) {
    case LayoutKind::Square: return "SQUARE";
    case LayoutKind::Arbitrary: return "ARBITRARY";
    case LayoutKind::Radial: return "RADIAL";
  }
  return "?";
}

std::string_view to_string(LatticeRequirement r) noexcept {
  switch (r) {
    case LatticeRequirement::SingleAxis: return "SINGLE_AXIS";
    case LatticeRequirement::TwoOrthogonal: return "TWO_ORTHOGONAL";
    case LatticeRequirement::RadialCenter: return "RADIAL_CENTER";
  }
  return "?";
}

// --- TrapArray -------------------------------------------------------------

TrapArray TrapArray::square(double pitch, std::size_t rows, std::size_t cols,
                            double aperture_radius, double k_lat) {
  if (rows == 0 || cols == 0) throw GeometryError("square array needs at least one row and column");
  if (!(pitch > 0.0)) throw GeometryError("array pitch must be positive");
  if (!(k_lat > 0.0)) throw GeometryError("lattice wavenumber must be positive");
  require_whole_periods(pitch, kPi / k_lat, "square pitch");
  TrapArray a;
  a.kind_ = LayoutKind::Square;
  a.pitch_ = pitch;
  a.k_lat_ = k_lat;
  a.rows_ = rows;
  a.cols_ = cols;
  const ApertureSpec ap(aperture_radius);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      a.sites_.push_back({{static_cast<double>(c) * pitch, static_cast<double>(r) * pitch}, ap, true, r, c});
  return a;
}

TrapArray TrapArray::arbitrary(const std::vector<Vec2>& positions,
                               const std::vector<double>& aperture_radii, bool orthogonal_lattices,
                               double k_lat) {
  if (positions.empty()) throw GeometryError("arbitrary array needs at least one site");
  if (aperture_radii.size() != 1 && aperture_radii.size() != positions.size())
    throw GeometryError("give one aperture radius or one per site");
  if (!(k_lat > 0.0)) throw GeometryError("lattice wavenumber must be positive");
  TrapArray a;
  a.kind_ = LayoutKind::Arbitrary;
  a.k_lat_ = k_lat;
  a.orthogonal_lattices_ = orthogonal_lattices;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double radius = aperture_radii.size() == 1 ? aperture_radii[0] : aperture_radii[i];
    a.sites_.push_back({positions[i], ApertureSpec(radius), true, 0, i});
  }
  a.check_distinct();
  return a;
}

TrapArray TrapArray::radial(std::size_t arms, std::size_t per_arm, double pitch, Vec2 center,
                            double aperture_radius, double k_lat) {
  if (arms == 0 || per_arm == 0) throw GeometryError("radial array needs arms and sites per arm");
  if (!(pitch > 0.0)) throw GeometryError("array pitch must be positive");
  if (!(k_lat > 0.0)) throw GeometryError("lattice wavenumber must be positive");
  require_whole_periods(pitch, kPi / k_lat, "radial pitch");
  TrapArray a;
  a.kind_ = LayoutKind::Radial;
  a.pitch_ = pitch;
  a.k_lat_ = k_lat;
  a.center_ = center;
  a.arms_ = arms;
  const ApertureSpec ap(aperture_radius);
  for (std::size_t arm = 0; arm < arms; ++arm) {
    const double angle = 2.0 * kPi * static_cast<double>(arm) / static_cast<double>(arms);
    for (std::size_t s = 0; s < per_arm; ++s) {
      const double r = static_cast<double>(s + 1) * pitch;
      a.sites_.push_back(
          {{center.x + r * std::cos(angle), center.y + r * std::sin(angle)}, ap, true, arm, s});
    }
  }
  a.check_distinct();
  return a;
}

void TrapArray::check_distinct() const {
  for (std::size_t i = 0; i < sites_.size(); ++i)
    for (std::size_t j = i + 1; j < sites_.size(); ++j)
      if (distance(sites_[i].position, sites_[j].position) <= kCoordTol)
        throw GeometryError("sites " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide");
}

const TrapSite& TrapArray::site(std::size_t i) const {
  if (i >= sites_.size()) throw ValidationError("site index " + std::to_string(i) + " out of range");
  return sites_[i];
}

void TrapArray::set_trap(std::size_t i, bool on) {
  if (i >= sites_.size()) throw ValidationError("site index " + std::to_string(i) + " out of range");
  sites_[i].trap_on = on;
}

// --- Register --------------------------------------------------------------

Register::Register(std::size_t n, std::vector<cplx> amplitudes, std::vector<std::size_t> site_of)
    : n_(n), amps_(std::move(amplitudes)), site_of_(std::move(site_of)) {
  if (n == 0 || n > kMaxQubits) throw DomainError("register size must be in [1, 20]");
  if (amps_.size() != (std::size_t{1} << n)) throw DomainError("amplitude count must be 2^n");
  if (site_of_.empty()) {
    site_of_.resize(n);
    for (std::size_t q = 0; q < n; ++q) site_of_[q] = q;
  }
  if (site_of_.size() != n) throw DomainError("site map must list one site per qubit");
  if (std::set<std::size_t>(site_of_.begin(), site_of_.end()).size() != n)
    throw DomainError("two qubits cannot share a site");
  if (!(std::abs(norm() - 1.0) <= 1e-10)) throw DomainError("register state is not normalized");
}

Register Register::basis(const std::vector<int>& bits, std::vector<std::size_t> site_of) {
  const std::size_t n = bits.size();
  if (n == 0 || n > kMaxQubits) throw DomainError("register size must be in [1, 20]");
  std::size_t index = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (bits[q] != 0 && bits[q] != 1) throw DomainError("basis bits must be 0 or 1");
    if (bits[q] == 1) index |= std::size_t{1} << (n - 1 - q);
  }
  std::vector<cplx> amps(std::size_t{1} << n);
  amps[index] = 1.0;
  return Register(n, std::move(amps), std::move(site_of));
}

std::size_t Register::site_of(std::size_t q) const {
  if (q >= n_) throw DomainError("qubit index " + std::to_string(q) + " out of range");
  return site_of_[q];
}

double Register::norm() const {
  double s = 0.0;
  for (const cplx& a : amps_) s += std::norm(a);
  return std::sqrt(s);
}

Register apply_one_qubit(Register reg, std::size_t q, const TwoLevelUnitary& u) {
  if (q >= reg.n()) throw DomainError("qubit index " + std::to_string(q) + " out of range");
  const std::size_t mask = std::size_t{1} << reg.bit_of(q);
  auto amps = reg.amplitudes();
  const Mat2& m = u.matrix();
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    if (idx & mask) continue;
    const cplx a0 = amps[idx];
    const cplx a1 = amps[idx | mask];
    amps[idx] = m[0] * a0 + m[1] * a1;
    amps[idx | mask] = m[2] * a0 + m[3] * a1;
  }
  return reg;
}

Register apply_two_qubit(Register reg, std::size_t i, std::size_t j, const Mat4& m) {
  if (i >= reg.n() || j >= reg.n() || i == j) throw DomainError("invalid qubit pair");
  const std::size_t mi = std::size_t{1} << reg.bit_of(i);
  const std::size_t mj = std::size_t{1} << reg.bit_of(j);
  auto amps = reg.amplitudes();
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    if (idx & (mi | mj)) continue;
    const std::array<std::size_t, 4> at{idx, idx | mj, idx | mi, idx | mi | mj};
    std::array<cplx, 4> in{};
    for (std::size_t r = 0; r < 4; ++r) in[r] = amps[at[r]];
    for (std::size_t r = 0; r < 4; ++r) {
      cplx v = 0.0;
      for (std::size_t c = 0; c < 4; ++c) v += m[r * 4 + c] * in[c];
      amps[at[r]] = v;
    }
  }
  return reg;
}

State4 pair_state(const Register& reg, std::size_t i, std::size_t j) {
  if (i >= reg.n() || j >= reg.n() || i == j) throw DomainError("invalid qubit pair");
  const std::size_t mi = std::size_t{1} << reg.bit_of(i);
  const std::size_t mj = std::size_t{1} << reg.bit_of(j);
  const auto amps = reg.amplitudes();
  std::vector<std::size_t> rest;
  for (std::size_t idx = 0; idx < amps.size(); ++idx)
    if (!(idx & (mi | mj))) rest.push_back(idx);
  auto column = [&](std::size_t base) {
    return State4{amps[base], amps[base | mj], amps[base | mi], amps[base | mi | mj]};
  };
  std::size_t best = rest.front();
  double best_norm = -1.0;
  for (std::size_t base : rest) {
    const State4 c = column(base);
    double nrm = 0.0;
    for (const cplx& a : c) nrm += std::norm(a);
    if (nrm > best_norm) {
      best_norm = nrm;
      best = base;
    }
  }
  State4 v = column(best);
  const double scale = std::sqrt(best_norm);
  for (cplx& a : v) a /= scale;
  for (std::size_t base : rest) {
    const State4 c = column(base);
    cplx proj = 0.0;
    for (std::size_t r = 0; r < 4; ++r) proj += std::conj(v[r]) * c[r];
    for (std::size_t r = 0; r < 4; ++r)
      if (std::abs(c[r] - proj * v[r]) > 1e-10)
        throw DomainError("qubit pair is entangled with the rest of the register");
  }
  return v;
}

std::vector<cplx> reduced_density(const Register& reg, std::span<const std::size_t> keep) {
  const std::size_t m = keep.size();
  std::vector<std::size_t> masks;
  for (std::size_t q : keep) {
    if (q >= reg.n()) throw DomainError("qubit index out of range");
    masks.push_back(std::size_t{1} << reg.bit_of(q));
  }
  std::size_t keep_mask = 0;
  for (std::size_t mk : masks) keep_mask |= mk;
  const std::size_t dim = std::size_t{1} << m;
  const auto amps = reg.amplitudes();
  // Group amplitudes by the traced-out configuration.
  std::map<std::size_t, std::vector<cplx>> by_rest;
  for (std::size_t idx = 0; idx < amps.size(); ++idx) {
    std::size_t k = 0;
    for (std::size_t b = 0; b < m; ++b)
      if (idx & masks[b]) k |= std::size_t{1} << (m - 1 - b);
    auto& col = by_rest[idx & ~keep_mask];
    if (col.empty()) col.resize(dim);
    col[k] = amps[idx];
  }
  std::vector<cplx> rho(dim * dim);
  for (const auto& [rest, col] : by_rest)
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = 0; b < dim; ++b) rho[a * dim + b] += col[a] * std::conj(col[b]);
  return rho;
}

// --- Geometry and planning --------------------------------------------------

PairGeometry validate_pair(const TrapArray& array, std::size_t i, std::size_t j) {
  if (i == j) throw ValidationError("a two-qubit gate needs two distinct sites");
  const TrapSite& a = array.site(i);
  const TrapSite& b = array.site(j);
  const double period = array.lattice_period();
  const Vec2 pa = a.position;
  const Vec2 pb = b.position;
  const Vec2 mid{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};

  switch (array.kind()) {
    case LayoutKind::Square: {
      if (a.major == b.major || a.minor == b.minor) return {LatticeRequirement::SingleAxis, mid};
      return {LatticeRequirement::TwoOrthogonal, {pb.x, pa.y}};
    }
    case LayoutKind::Radial: {
      const std::size_t arms = array.arms();
      const bool same_arm = a.major == b.major;
      const bool opposite = arms % 2 == 0 && (a.major + arms / 2) % arms == b.major;
      if (same_arm || opposite) {
        require_whole_periods(distance(pa, pb), period, "pair separation");
        return {LatticeRequirement::SingleAxis, mid};
      }
      return {LatticeRequirement::RadialCenter, array.center()};
    }
    case LayoutKind::Arbitrary: {
      const bool same_row = std::abs(pa.y - pb.y) <= kCoordTol;
      const bool same_col = std::abs(pa.x - pb.x) <= kCoordTol;
      if (same_row || same_col) {
        require_whole_periods(distance(pa, pb), period, "pair separation");
        return {LatticeRequirement::SingleAxis, mid};
      }
      if (!array.orthogonal_lattices()) {
        throw ValidationError("sites " + std::to_string(i) + " and " + std::to_string(j) +
                              " share no lattice line and no orthogonal lattices are configured");
      }
      require_whole_periods(std::abs(pb.x - pa.x), period, "x separation");
      require_whole_periods(std::abs(pb.y - pa.y), period, "y separation");
      return {LatticeRequirement::TwoOrthogonal, {pb.x, pa.y}};
    }
  }
  throw ValidationError("unknown layout");
}

namespace {

// Leg in which one component travels `length` from origin along direction.
LatticeLeg travelling_leg(std::string role, Vec2 origin, Vec2 direction, std::size_t site,
                          int component, double length, const StateDepConfig& lattice,
                          double ramp_duration, double t_hold) {
  const double theta =
      theta_for_displacement(length, weights_for(lattice, component), lattice.k_lat);
  ThetaRamp fwd = ThetaRamp::linear(0.0, theta, 0.0, ramp_duration);
  ThetaRamp back = fwd.reversed(ramp_duration + t_hold);
  return {std::move(role), origin, direction, theta, std::move(fwd), std::move(back),
          {{site, component, 0.0, length}}};
}

}  // namespace

GatePlan plan_gate(const TrapArray& array, std::size_t i, std::size_t j, const CollisionParams& cp,
                   const StateDepConfig& lattice, double ramp_duration) {
  cp.validate();
  lattice.validate();
  if (std::abs(lattice.k_lat - array.k_lat()) > 1e-12 * array.k_lat())
    throw ValidationError("state-dependent lattice wavenumber differs from the array's lattice");
  const PairGeometry geo = validate_pair(array, i, j);
  const Vec2 pi = array.site(i).position;
  const Vec2 pj = array.site(j).position;
  GatePlan plan{i, j, geo.requirement, geo.collision_point, {}, cp};

  switch (geo.requirement) {
    case LatticeRequirement::SingleAxis: {
      const double sep = distance(pi, pj);
      const CollisionSchedule s = collision_schedule(0, 1, sep, lattice, ramp_duration);
      plan.legs.push_back({"shared lattice through both sites", pi, unit(pi, pj), s.theta_peak,
                           s.forward, s.forward.reversed(ramp_duration + cp.t_hold),
                           {{i, 0, s.x_i, s.meeting_point}, {j, 1, s.x_j, s.meeting_point}}});
      break;
    }
    case LatticeRequirement::TwoOrthogonal: {
      const Vec2 cross = geo.collision_point;
      plan.legs.push_back(travelling_leg("lattice along the row of site i", pi, unit(pi, cross), i, 0,
                                         distance(pi, cross), lattice, ramp_duration, cp.t_hold));
      plan.legs.push_back(travelling_leg("lattice along the column of site j", pj, unit(pj, cross),
                                         j, 1, distance(pj, cross), lattice, ramp_duration,
                                         cp.t_hold));
      break;
    }
    case LatticeRequirement::RadialCenter: {
      const Vec2 c = array.center();
      plan.legs.push_back(travelling_leg("radial lattice along the arm of site i", pi, unit(pi, c), i,
                                         0, distance(pi, c), lattice, ramp_duration, cp.t_hold));
      plan.legs.push_back(travelling_leg("radial lattice along the arm of site j", pj, unit(pj, c), j,
                                         1, distance(pj, c), lattice, ramp_duration, cp.t_hold));
      break;
    }
  }
  return plan;
}

// --- Protocol ---------------------------------------------------------------

bool trace_is_well_formed(const ProtocolTrace& trace, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (trace.steps.size() != 6) return fail("trace does not have exactly six steps");
  for (std::size_t s = 0; s < 6; ++s)
    if (trace.steps[s].id != static_cast<int>(s + 1)) return fail("steps out of order");
  const auto& fwd = trace.steps[3].ramps;
  const auto& rev = trace.steps[4].ramps;
  if (fwd.size() != rev.size() || fwd.empty()) return fail("STEP 4 and STEP 5 ramp counts differ");
  for (std::size_t l = 0; l < fwd.size(); ++l) {
    const auto& f = fwd[l].samples();
    const auto& r = rev[l].samples();
    if (f.size() != r.size()) return fail("STEP 5 ramp length differs from STEP 4");
    const std::size_t last = f.size() - 1;
    for (std::size_t m = 0; m <= last; ++m) {
      if (r[m].theta != f[last - m].theta) return fail("STEP 5 ramp is not the reverse of STEP 4");
      if (m > 0) {
        const double dt_r = r[m].t - r[m - 1].t;
        const double dt_f = f[last - m + 1].t - f[last - m].t;
        if (std::abs(dt_r - dt_f) > 1e-12 * std::max(1.0, std::abs(dt_f)))
          return fail("STEP 5 ramp timing is not the reverse of STEP 4");
      }
    }
  }
  return true;
}

GateResult run_two_qubit_gate(const Register& reg, const TrapArray& array, std::size_t i,
                              std::size_t j, const CollisionParams& cp, bool pre_hadamard,
                              const ProtocolOptions& opts) {
  if (i >= reg.n() || j >= reg.n()) throw ProtocolError(1, "qubit index out of range");
  if (i == j) throw ProtocolError(1, "a two-qubit gate needs two distinct qubits");
  cp.validate();
  const std::size_t si = reg.site_of(i);
  const std::size_t sj = reg.site_of(j);
  TrapArray hw = array;
  const GatePlan plan = plan_gate(hw, si, sj, cp, opts.lattice, opts.ramp_duration);

  ProtocolTrace trace;
  trace.qubit_i = i;
  trace.qubit_j = j;
  trace.site_i = si;
  trace.site_j = sj;
  trace.requirement = plan.requirement;
  trace.collision_point = plan.collision_point;
  Register out = reg;

  // STEP 1
  {
    ProtocolStep step = make_step(1, "Hadamard on both qubits via their gate-control lasers");
    step.values["hadamard_applied"] = pre_hadamard ? 1.0 : 0.0;
    if (pre_hadamard) {
      const PulseRecipe recipe = hadamard_recipe();
      const TwoLevelUnitary h = hadamard();
      out = apply_one_qubit(std::move(out), i, h);
      out = apply_one_qubit(std::move(out), j, h);
      double total = 0.0;
      for (const Pulse& p : recipe.pulses) total += p.duration;
      step.values["pulse_duration"] = total;
      step.validation = "recipe overlap " + std::to_string(
                                                phase_insensitive_overlap(recipe.product().matrix(), h.matrix()));
    } else {
      step.validation = "skipped";
    }
    trace.steps.push_back(std::move(step));
  }

  // STEP 2
  {
    for (std::size_t s : {si, sj})
      if (!hw.site(s).trap_on)
        throw ProtocolError(2, "trap at site " + std::to_string(s) + " is already off");
    const Adiabaticity ad =
        adiabatic_check(opts.trap_frequency, opts.trap_ramp_time, opts.adiabatic_threshold);
    if (!ad.adiabatic)
      throw ProtocolError(2, "trap turn-off is not adiabatic (eta = " + std::to_string(ad.eta) + ")");
    hw.set_trap(si, false);
    hw.set_trap(sj, false);
    ProtocolStep step = make_step(2, "turn off the two NFFD traps adiabatically");
    step.traps_toggled = {si, sj};
    step.values["eta"] = ad.eta;
    step.validation = "adiabatic";
    trace.steps.push_back(std::move(step));
  }

  // STEP 3
  {
    if (!hw.screen_engaged()) throw ProtocolError(3, "screen is not engaged with the optical lattice");
    const Adiabaticity ad =
        adiabatic_check(opts.trap_frequency, opts.screen_ramp_time, opts.adiabatic_threshold);
    if (!ad.adiabatic)
      throw ProtocolError(3, "screen withdrawal is not adiabatic (eta = " + std::to_string(ad.eta) + ")");
    hw.set_screen_engaged(false);
    ProtocolStep step = make_step(3, "shift the trap screen away; only the two atoms stay in the lattice");
    step.screen_engaged = false;
    step.values["eta"] = ad.eta;
    step.validation = "adiabatic";
    trace.steps.push_back(std::move(step));
  }

  // STEP 4
  std::vector<std::vector<double>> arrived(plan.legs.size());
  {
    ProtocolStep step = make_step(4, "tilt lattice polarization so |0> of qubit i meets |1> of qubit j; hold");
    double worst = 0.0;
    for (std::size_t l = 0; l < plan.legs.size(); ++l) {
      const LatticeLeg& leg = plan.legs[l];
      for (const auto& mv : leg.movers) {
        const auto path = transport_trajectory(leg.forward, weights_for(opts.lattice, mv.component),
                                               opts.lattice.k_lat, mv.start);
        const double miss = std::abs(path.back().x - mv.target);
        worst = std::max(worst, miss);
        if (miss > kMeetingTolerance)
          throw ProtocolError(4, "component misses the collision point by " + std::to_string(miss));
        arrived[l].push_back(path.back().x);
      }
      step.values["theta_peak_" + std::to_string(l)] = leg.theta_peak;
      step.ramps.push_back(leg.forward);
    }
    out = apply_two_qubit(std::move(out), i, j, collision_phase_gate(cp));
    step.values["u_int"] = cp.u_int;
    step.values["t_hold"] = cp.t_hold;
    step.values["phase"] = cp.phase();
    step.values["meeting_error"] = worst;
    step.validation = "components met at the collision point";
    trace.steps.push_back(std::move(step));
  }

  // STEP 5
  {
    ProtocolStep step = make_step(5, "reverse the polarization ramp to return both components");
    double worst = 0.0;
    for (std::size_t l = 0; l < plan.legs.size(); ++l) {
      const LatticeLeg& leg = plan.legs[l];
      for (std::size_t m = 0; m < leg.movers.size(); ++m) {
        const auto& mv = leg.movers[m];
        const auto path = transport_trajectory(leg.reverse, weights_for(opts.lattice, mv.component),
                                               opts.lattice.k_lat, arrived[l][m]);
        const double miss = std::abs(path.back().x - mv.start);
        worst = std::max(worst, miss);
        if (miss > kReturnTolerance)
          throw ProtocolError(5, "component does not return to its site (off by " +
                                     std::to_string(miss) + ")");
      }
      step.ramps.push_back(leg.reverse);
    }
    step.values["return_error"] = worst;
    step.validation = "components returned to their sites";
    trace.steps.push_back(std::move(step));
  }

  // STEP 6
  {
    hw.set_screen_engaged(true);
    hw.set_trap(si, true);
    hw.set_trap(sj, true);
    ProtocolStep step = make_step(6, "re-engage the screen, then turn the two traps back on");
    step.screen_engaged = true;
    step.traps_toggled = {si, sj};
    step.validation = "array restored";
    trace.steps.push_back(std::move(step));
  }
  return {std::move(out), std::move(trace)};
}

// --- Scheduling --------------------------------------------------------------

namespace {

struct LineSet {
  std::vector<double> rows;
  std::vector<double> cols;
};

LineSet lines_of(const TrapArray& array, const SitePair& p) {
  LineSet s;
  for (std::size_t site : {p.i, p.j}) {
    const Vec2 pos = array.site(site).position;
    s.rows.push_back(pos.y);
    s.cols.push_back(pos.x);
  }
  return s;
}

bool share_coordinate(const std::vector<double>& a, const std::vector<double>& b) {
  for (double x : a)
    for (double y : b)
      if (std::abs(x - y) <= kCoordTol) return true;
  return false;
}

}  // namespace

bool pairs_conflict(const TrapArray& array, const SitePair& a, const SitePair& b) {
  if (a.i == b.i || a.i == b.j || a.j == b.i || a.j == b.j) return true;
  if (array.kind() == LayoutKind::Radial) return true;
  const LineSet la = lines_of(array, a);
  const LineSet lb = lines_of(array, b);
  return share_coordinate(la.rows, lb.rows) || share_coordinate(la.cols, lb.cols);
}

std::vector<std::vector<SitePair>> schedule_parallel(const TrapArray& array,
                                                     const std::vector<SitePair>& pairs) {
  for (const SitePair& p : pairs) validate_pair(array, p.i, p.j);
  std::vector<std::size_t> colour(pairs.size());
  std::size_t used = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<bool> taken(used + 1, false);
    for (std::size_t q = 0; q < p; ++q)
      if (pairs_conflict(array, pairs[p], pairs[q])) taken[colour[q]] = true;
    std::size_t c = 0;
    while (taken[c]) ++c;
    colour[p] = c;
    used = std::max(used, c + 1);
  }
  std::vector<std::vector<SitePair>> batches(used);
  for (std::size_t p = 0; p < pairs.size(); ++p) batches[colour[p]].push_back(pairs[p]);
  return batches;
}

BatchResult run_simultaneous(const Register& reg, const TrapArray& array,
                             const std::vector<SitePair>& qubit_pairs, const CollisionParams& cp,
                             bool pre_hadamard, const ProtocolOptions& opts) {
  std::vector<SitePair> site_pairs;
  for (const SitePair& q : qubit_pairs) {
    if (q.i >= reg.n() || q.j >= reg.n()) throw ProtocolError(1, "qubit index out of range");
    site_pairs.push_back({reg.site_of(q.i), reg.site_of(q.j)});
  }
  for (const SitePair& p : site_pairs) validate_pair(array, p.i, p.j);
  for (std::size_t a = 0; a < site_pairs.size(); ++a)
    for (std::size_t b = a + 1; b < site_pairs.size(); ++b)
      if (pairs_conflict(array, site_pairs[a], site_pairs[b])) {
        throw ProtocolError(4, "pairs " + std::to_string(a) + " and " + std::to_string(b) +
                                   " cannot run simultaneously on a " +
                                   std::string(to_string(array.kind())) + " layout");
      }
  BatchResult result{reg, {}};
  for (const SitePair& q : qubit_pairs) {
    GateResult g = run_two_qubit_gate(result.reg, array, q.i, q.j, cp, pre_hadamard, opts);
    result.reg = std::move(g.reg);
    result.traces.push_back(std::move(g.trace));
  }
  return result;
}

Adiabaticity adiabatic_check(double trap_freq, double ramp_time, double threshold) {
  if (!(trap_freq > 0.0) || !(ramp_time > 0.0))
    throw DomainError("adiabaticity needs positive trap frequency and ramp time");
  const double eta = 1.0 / (trap_freq * ramp_time);
  return {eta, eta < threshold};
}

}  // namespace nffd
