#include "nffd/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "nffd/analysis.hpp"
#include "nffd/fields.hpp"
#include "nffd/gates.hpp"
#include "nffd/machine.hpp"
#include "nffd/statedep.hpp"

namespace nffd {

namespace {

constexpr double kPi = std::numbers::pi;
using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

TwoLevelUnitary random_unitary(Rng& rng) {
  const Mat2 m = rz(uniform(rng, -kPi, kPi)) * rx(uniform(rng, 0.0, kPi)) * rz(uniform(rng, -kPi, kPi));
  const cplx phase = std::polar(1.0, uniform(rng, -kPi, kPi));
  return TwoLevelUnitary({phase * m[0], phase * m[1], phase * m[2], phase * m[3]});
}

std::vector<cplx> random_state(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<cplx> v(dim);
  double n = 0.0;
  for (cplx& a : v) {
    a = {g(rng), g(rng)};
    n += std::norm(a);
  }
  for (cplx& a : v) a /= std::sqrt(n);
  return v;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(3);
  s << x;
  return s.str();
}

CheckResult check(std::string name, const std::function<double()>& worst, double tol) {
  CheckResult r{std::move(name), false, {}};
  try {
    const double w = worst();
    r.passed = w <= tol;
    r.detail = "worst " + fmt(w) + ", tolerance " + fmt(tol);
  } catch (const std::exception& e) {
    r.detail = std::string("threw: ") + e.what();
  }
  return r;
}

}  // namespace

std::size_t SelftestReport::passed() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; }));
}

SelftestReport run_selftest(std::uint64_t seed) {
  Rng rng(seed);
  SelftestReport rep;
  const double k = kWaveNumber;

  rep.checks.push_back(check("on-axis field matches the circular-aperture closed form", [&] {
    double worst = 0.0;
    for (double a : {1.0, 1.5, 2.0}) {
      for (int n = 0; n < 4; ++n) {
        const double z = uniform(rng, 0.2, 10.0);
        const double rr = std::hypot(z, a);
        const cplx exact = std::polar(1.0, k * z) - (z / rr) * std::polar(1.0, k * rr);
        const cplx got = rs_amplitude({0.0, 0.0, z}, ApertureSpec(a)).value;
        worst = std::max(worst, std::abs(got - exact) / std::abs(exact));
      }
    }
    return worst;
  }, 1e-6));

  rep.checks.push_back(check("register norm is preserved by gates", [&] {
    Register reg(5, random_state(rng, 32));
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const auto q = static_cast<std::size_t>(rng() % 5);
      reg = apply_one_qubit(std::move(reg), q, random_unitary(rng));
      const auto p = static_cast<std::size_t>((q + 1 + rng() % 4) % 5);
      reg = apply_two_qubit(std::move(reg), q, p, collision_phase_gate({1.0, uniform(rng, 0.0, 7.0)}));
      worst = std::max(worst, std::abs(reg.norm() - 1.0));
    }
    return worst;
  }, 1e-10));

  rep.checks.push_back(check("concurrence is invariant under local unitaries", [&] {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const auto v = random_state(rng, 4);
      const State4 s{v[0], v[1], v[2], v[3]};
      const Mat4 local = kron(random_unitary(rng).matrix(), random_unitary(rng).matrix());
      const double before = concurrence(TwoQubitPureState(s));
      const double after = concurrence(TwoQubitPureState(apply(local, s)));
      worst = std::max(worst, std::abs(before - after));
    }
    return worst;
  }, 1e-10));

  rep.checks.push_back(check("collision output concurrence follows |sin(x/2)|", [&] {
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      const double x = 2.0 * kPi * n / 49.0;
      const double c = concurrence(TwoQubitPureState(mandel_output({x, 1.0})));
      worst = std::max(worst, std::abs(c - std::abs(std::sin(0.5 * x))));
    }
    return worst;
  }, 1e-9));

  rep.checks.push_back(check("balanced Raman drive gives sin^2 Rabi oscillation", [&] {
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      const double w0 = uniform(rng, 0.1, 2.0);
      const double w1 = uniform(rng, 0.1, 2.0);
      const double delta = uniform(rng, 5.0, 50.0) * (rng() % 2 ? 1.0 : -1.0);
      const double t = uniform(rng, 0.0, 200.0);
      // Bare splitting chosen to cancel the differential light shift.
      const RamanParams rp{w0, w1, delta, (w0 * w0 - w1 * w1) / (4.0 * delta)};
      const TwoLevelUnitary u = evolve(effective_hamiltonian(rp), t);
      const double s = std::sin(w0 * w1 * t / (4.0 * delta));
      worst = std::max({worst, std::abs(std::norm(u(1, 0)) - s * s), unitarity_defect(u.matrix())});
    }
    return worst;
  }, 1e-9));

  rep.checks.push_back(check("closed-form lattice minimum matches a dense scan", [&] {
    const double period = kPi / k;
    const int n_scan = 100000;
    const double step = period / n_scan;
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const Weights w{uniform(rng, 0.0, 1.0), uniform(rng, 0.0, 1.0)};
      double theta = uniform(rng, -kPi, kPi);
      // Stay clear of the angles where both polarizations cancel.
      if (std::abs(w.plus * std::polar(1.0, -2 * theta) + w.minus * std::polar(1.0, 2 * theta)) < 0.05)
        theta += 0.3;
      double best = 0.0;
      double best_v = 1e300;
      for (int m = 0; m < n_scan; ++m) {
        const double x = m * step;
        const double v = weighted_potential(x, theta, w, k, 1.0);
        if (v < best_v) {
          best_v = v;
          best = x;
        }
      }
      const double closed = component_minimum(theta, w, k, best);
      worst = std::max(worst, std::abs(closed - best) / step);
    }
    return worst;
  }, 2.0));

  rep.checks.push_back(check("RAMAN_BASIS trajectories are mirror images", [&] {
    const WeightScheme sc = WeightScheme::raman_basis();
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const ThetaRamp ramp = ThetaRamp::linear(0.0, uniform(rng, -kPi, kPi), 0.0, 1.0);
      const auto a = transport_trajectory(ramp, sc.zero, k, 0.0);
      const auto b = transport_trajectory(ramp, sc.one, k, 0.0);
      for (std::size_t m = 0; m < a.size(); ++m) worst = std::max(worst, std::abs(a[m].x + b[m].x));
    }
    return worst;
  }, 1e-9));

  rep.checks.push_back(check("forward then reverse ramp returns both components", [&] {
    const WeightScheme sc = WeightScheme::raman_basis();
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
      const ThetaRamp fwd = ThetaRamp::linear(0.0, uniform(rng, -kPi, kPi), 0.0, 1.0);
      const ThetaRamp back = fwd.reversed(1.0);
      for (const Weights& w : {sc.zero, sc.one}) {
        const auto go = transport_trajectory(fwd, w, k, 0.0);
        const auto ret = transport_trajectory(back, w, k, go.back().x);
        worst = std::max(worst, std::abs(ret.back().x));
      }
    }
    return worst;
  }, 1e-9));

  const TrapArray grid = TrapArray::square(1.0, 3, 3, 1.0);

  rep.checks.push_back(check("gate trace is well formed and spectators are untouched", [&] {
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
      Register reg(4, random_state(rng, 16), {0, 4, 5, 7});
      const std::size_t i = rng() % 4;
      const std::size_t j = (i + 1 + rng() % 3) % 4;
      const GateResult g = run_two_qubit_gate(reg, grid, i, j, {1.0, uniform(rng, 0.0, 7.0)}, rng() % 2);
      if (!trace_is_well_formed(g.trace)) return 1.0;
      std::vector<std::size_t> rest;
      for (std::size_t q = 0; q < 4; ++q)
        if (q != i && q != j) rest.push_back(q);
      const auto before = reduced_density(reg, rest);
      const auto after = reduced_density(g.reg, rest);
      for (std::size_t e = 0; e < before.size(); ++e) worst = std::max(worst, std::abs(before[e] - after[e]));
    }
    return worst;
  }, 1e-10));

  rep.checks.push_back(check("zero-phase gate between Hadamards is the identity", [&] {
    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
      const Register reg(3, random_state(rng, 8), {0, 2, 8});
      const std::size_t i = rng() % 3;
      const std::size_t j = (i + 1 + rng() % 2) % 3;
      Register out = run_two_qubit_gate(reg, grid, i, j, {uniform(rng, 0.0, 5.0), 0.0}, true).reg;
      out = apply_one_qubit(std::move(out), i, hadamard());
      out = apply_one_qubit(std::move(out), j, hadamard());
      for (std::size_t e = 0; e < 8; ++e)
        worst = std::max(worst, std::abs(out.amplitudes()[e] - reg.amplitudes()[e]));
    }
    return worst;
  }, 1e-10));

  rep.checks.push_back(check("parallel batches are conflict free", [&] {
    const TrapArray big = TrapArray::square(1.0, 6, 6, 1.0);
    for (int n = 0; n < 50; ++n) {
      std::vector<SitePair> pairs;
      const std::size_t count = 1 + rng() % 10;
      while (pairs.size() < count) {
        const std::size_t a = rng() % 36;
        const std::size_t b = rng() % 36;
        if (a != b) pairs.push_back({a, b});
      }
      std::size_t total = 0;
      for (const auto& batch : schedule_parallel(big, pairs)) {
        total += batch.size();
        for (std::size_t x = 0; x < batch.size(); ++x)
          for (std::size_t y = x + 1; y < batch.size(); ++y)
            if (pairs_conflict(big, batch[x], batch[y])) return 1.0;
      }
      if (total != pairs.size()) return 1.0;
    }
    return 0.0;
  }, 0.0));

  rep.checks.push_back(check("Hadamard pulse recipe reproduces the gate", [&] {
    return 1.0 - phase_insensitive_overlap(hadamard_recipe().product().matrix(), hadamard().matrix());
  }, 1e-12));

  return rep;
}

}  // namespace nffd
