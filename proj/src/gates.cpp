#include "nffd/gates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nffd/error.hpp"

namespace nffd {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;

template <std::size_t N, std::size_t D>
std::array<cplx, N> matmul(const std::array<cplx, N>& a, const std::array<cplx, N>& b) {
  std::array<cplx, N> c{};
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t k = 0; k < D; ++k)
      for (std::size_t j = 0; j < D; ++j) c[i * D + j] += a[i * D + k] * b[k * D + j];
  return c;
}

template <std::size_t N, std::size_t D>
std::array<cplx, N> dagger(const std::array<cplx, N>& a) {
  std::array<cplx, N> c{};
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) c[j * D + i] = std::conj(a[i * D + j]);
  return c;
}

template <std::size_t N, std::size_t D>
double defect(const std::array<cplx, N>& u) {
  const auto p = matmul<N, D>(dagger<N, D>(u), u);
  double worst = 0.0;
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j)
      worst = std::max(worst, std::abs(p[i * D + j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

template <std::size_t N, std::size_t D>
double overlap(const std::array<cplx, N>& u, const std::array<cplx, N>& v) {
  cplx tr = 0.0;
  for (std::size_t i = 0; i < N; ++i) tr += std::conj(u[i]) * v[i];
  return std::abs(tr) / static_cast<double>(D);
}

// Angle in [0, 2 pi).
double wrap_positive(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

}  // namespace

Mat2 identity2() { return {1.0, 0.0, 0.0, 1.0}; }
Mat2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
Mat2 pauli_y() { return {0.0, -kI, kI, 0.0}; }
Mat2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }

Mat2 operator*(const Mat2& a, const Mat2& b) { return matmul<4, 2>(a, b); }
Mat2 adjoint(const Mat2& a) { return dagger<4, 2>(a); }
Mat4 operator*(const Mat4& a, const Mat4& b) { return matmul<16, 4>(a, b); }
Mat4 adjoint(const Mat4& a) { return dagger<16, 4>(a); }

Mat4 identity4() {
  Mat4 m{};
  for (std::size_t i = 0; i < 4; ++i) m[i * 4 + i] = 1.0;
  return m;
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 m{};
  for (std::size_t ar = 0; ar < 2; ++ar)
    for (std::size_t ac = 0; ac < 2; ++ac)
      for (std::size_t br = 0; br < 2; ++br)
        for (std::size_t bc = 0; bc < 2; ++bc)
          m[(2 * ar + br) * 4 + (2 * ac + bc)] = a[2 * ar + ac] * b[2 * br + bc];
  return m;
}

State4 apply(const Mat4& m, const State4& s) {
  State4 out{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) out[i] += m[i * 4 + j] * s[j];
  return out;
}

double unitarity_defect(const Mat2& u) { return defect<4, 2>(u); }
double unitarity_defect(const Mat4& u) { return defect<16, 4>(u); }
double phase_insensitive_overlap(const Mat2& u, const Mat2& v) { return overlap<4, 2>(u, v); }
double phase_insensitive_overlap(const Mat4& u, const Mat4& v) { return overlap<16, 4>(u, v); }

void RamanParams::validate() const {
  if (delta == 0.0 || !std::isfinite(delta))
    throw DomainError("Raman detuning must be finite and non-zero");
}

double RamanParams::epsilon() const {
  validate();
  return e_split + (omega1 * omega1 - omega0 * omega0) / (4.0 * delta);
}

double RamanParams::coupling() const {
  validate();
  return omega0 * omega1 / (4.0 * delta);
}

RamanValidity raman_validity(const RamanParams& rp) {
  rp.validate();
  const double ad = std::abs(rp.delta);
  const double scale = std::max({std::abs(rp.e_split), rp.omega0 * rp.omega0 / ad,
                                 rp.omega1 * rp.omega1 / ad});
  const double margin = scale == 0.0 ? std::numeric_limits<double>::infinity() : ad / scale;
  return {margin, margin < kRamanValidityFactor};
}

Hermitian2 effective_hamiltonian(const RamanParams& rp) {
  const double eps = rp.epsilon();
  const double g = rp.coupling();
  return {{0.5 * eps, -g, -g, -0.5 * eps}};
}

TwoLevelUnitary::TwoLevelUnitary(const Mat2& m) : m_(m), det_(m[0] * m[3] - m[1] * m[2]) {
  if (!(unitarity_defect(m) <= 1e-10)) throw DomainError("matrix is not unitary");
}

TwoLevelUnitary evolve(const Hermitian2& h, double t) {
  if (!(t >= 0.0)) throw DomainError("evolution time must be non-negative");
  const Mat2& m = h.m;
  const double c = 0.5 * (m[0].real() + m[3].real());
  const double hz = 0.5 * (m[0].real() - m[3].real());
  const double hx = m[2].real();
  const double hy = m[2].imag();
  const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
  const cplx global = std::polar(1.0, -c * t);
  if (norm == 0.0) return TwoLevelUnitary({global, 0.0, 0.0, global});
  const double cs = std::cos(norm * t);
  const double sn = std::sin(norm * t) / norm;
  // cos I - i sin (n . sigma)
  const Mat2 u{cplx(cs, -sn * hz), cplx(-sn * hy, -sn * hx), cplx(sn * hy, -sn * hx),
               cplx(cs, sn * hz)};
  return TwoLevelUnitary({global * u[0], global * u[1], global * u[2], global * u[3]});
}

Mat2 rz(double angle) { return {std::polar(1.0, -0.5 * angle), 0.0, 0.0, std::polar(1.0, 0.5 * angle)}; }

Mat2 rx(double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  return {c, cplx(0.0, -s), cplx(0.0, -s), c};
}

ZxzAngles zxz_decompose(const TwoLevelUnitary& u) {
  // Remove the determinant phase, then read angles off the SU(2) entries:
  //   V = [[e^{-i(a+g)/2} c, -i e^{-i(a-g)/2} s], [-i e^{i(a-g)/2} s, e^{i(a+g)/2} c]].
  const cplx root = std::sqrt(u.det());
  const Mat2& m = u.matrix();
  const Mat2 v{m[0] / root, m[1] / root, m[2] / root, m[3] / root};
  const double c = std::abs(v[0]);
  const double s = std::abs(v[2]);
  const double beta = 2.0 * std::atan2(s, c);
  const double sum = c > 1e-12 ? std::arg(v[3]) - std::arg(v[0]) : 0.0;
  const double diff = s > 1e-12 ? 2.0 * std::arg(v[2]) + kPi : 0.0;
  ZxzAngles out;
  out.alpha = 0.5 * (sum + diff);
  out.gamma = 0.5 * (sum - diff);
  out.beta = beta;
  const Mat2 r = rz(out.alpha) * rx(out.beta) * rz(out.gamma);
  cplx tr = 0.0;
  for (std::size_t i = 0; i < 4; ++i) tr += std::conj(r[i]) * m[i];
  out.phase = std::arg(tr);
  return out;
}

namespace {

// Free precession at two-photon detuning z_split: exp(-i (z_split/2) sigma_z t) = Rz(z_split t).
Pulse z_pulse(double angle, const DriveSettings& d) {
  Pulse p;
  p.axis = 'z';
  p.angle = angle;
  p.params = RamanParams{0.0, 0.0, d.delta, d.z_split};
  p.duration = wrap_positive(angle) / d.z_split;
  return p;
}

// Balanced drive with epsilon = 0: exp(i g t sigma_x) = Rx(-2 g t).
Pulse x_pulse(double angle, const DriveSettings& d) {
  Pulse p;
  p.axis = 'x';
  p.angle = angle;
  p.params = RamanParams{d.omega, d.omega, d.delta, 0.0};
  const double g = p.params.coupling();
  p.duration = wrap_positive(g > 0.0 ? -angle : angle) / (2.0 * std::abs(g));
  return p;
}

}  // namespace

TwoLevelUnitary PulseRecipe::product() const {
  TwoLevelUnitary u(identity2());
  for (const Pulse& p : pulses) u = evolve(effective_hamiltonian(p.params), p.duration) * u;
  return u;
}

PulseRecipe synthesize(const TwoLevelUnitary& target, const DriveSettings& drive) {
  if (!(drive.z_split > 0.0) || !(drive.omega > 0.0) || drive.delta == 0.0)
    throw DomainError("drive settings need positive z_split and omega and non-zero delta");
  PulseRecipe r;
  r.angles = zxz_decompose(target);
  r.pulses = {z_pulse(r.angles.gamma, drive), x_pulse(r.angles.beta, drive),
              z_pulse(r.angles.alpha, drive)};
  return r;
}

TwoLevelUnitary hadamard() {
  const double h = 1.0 / std::numbers::sqrt2;
  return TwoLevelUnitary({h, h, h, -h});
}

PulseRecipe hadamard_recipe(const DriveSettings& drive) { return synthesize(hadamard(), drive); }

void CollisionParams::validate() const {
  if (!(t_hold >= 0.0)) throw DomainError("hold time must be non-negative");
  if (!std::isfinite(u_int)) throw DomainError("interaction energy must be finite");
}

Mat4 collision_phase_gate(const CollisionParams& cp) {
  cp.validate();
  Mat4 m = identity4();
  m[1 * 4 + 1] = std::polar(1.0, -cp.phase());
  return m;
}

State4 mandel_output(const CollisionParams& cp) {
  cp.validate();
  return {0.5, 0.5 * std::polar(1.0, -cp.phase()), 0.5, 0.5};
}

Mat4 controlled_z_from_collision() {
  const Mat4 flip = kron(pauli_x(), identity2());
  return flip * collision_phase_gate({kPi, 1.0}) * flip;
}

}  // namespace nffd
