#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace nffd {

using cplx = std::complex<double>;

/// Row-major 2x2 complex matrix.
using Mat2 = std::array<cplx, 4>;
/// Row-major 4x4 complex matrix, basis (|00>, |01>, |10>, |11>).
using Mat4 = std::array<cplx, 16>;
using State4 = std::array<cplx, 4>;

Mat2 identity2();
Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();
Mat2 operator*(const Mat2& a, const Mat2& b);
Mat2 adjoint(const Mat2& a);
Mat4 operator*(const Mat4& a, const Mat4& b);
Mat4 adjoint(const Mat4& a);
Mat4 identity4();
Mat4 kron(const Mat2& a, const Mat2& b);
State4 apply(const Mat4& m, const State4& s);

/// max |(U^dagger U - I)_{ij}|.
double unitarity_defect(const Mat2& u);
double unitarity_defect(const Mat4& u);

/// |tr(U^dagger V)| / dim; equals 1 iff U and V agree up to global phase.
double phase_insensitive_overlap(const Mat2& u, const Mat2& v);
double phase_insensitive_overlap(const Mat4& u, const Mat4& v);

/// Two-photon Raman drive between |0>, |1> via a far-detuned |e>.
struct RamanParams {
  double omega0 = 0.0;
  double omega1 = 0.0;
  double delta = 1.0;
  /// E1 - E0.
  double e_split = 0.0;

  /// Throws DomainError for zero detuning.
  void validate() const;
  /// E1 - E0 + (Omega1^2 - Omega0^2) / (4 Delta).
  double epsilon() const;
  /// Omega0 Omega1 / (4 Delta).
  double coupling() const;
};

/// How far the adiabatic-elimination regime holds: |Delta| divided by the
/// larger of (E1 - E0) and Omega_i^2 / |Delta|. Below 10 the effective
/// Hamiltonian is flagged (a warning, not an error).
struct RamanValidity {
  double margin = 0.0;
  bool warning = false;
};
RamanValidity raman_validity(const RamanParams& rp);
inline constexpr double kRamanValidityFactor = 10.0;

struct Hermitian2 {
  Mat2 m;
};

/// (1/2) epsilon sigma_z - Omega0 Omega1 / (4 Delta) sigma_x.
Hermitian2 effective_hamiltonian(const RamanParams& rp);

class TwoLevelUnitary {
public:
  /// Throws DomainError if m is not unitary to 1e-10.
  explicit TwoLevelUnitary(const Mat2& m);

  const Mat2& matrix() const noexcept { return m_; }
  cplx det() const noexcept { return det_; }
  cplx operator()(int row, int col) const { return m_[static_cast<std::size_t>(2 * row + col)]; }
  TwoLevelUnitary operator*(const TwoLevelUnitary& rhs) const {
    return TwoLevelUnitary(m_ * rhs.m_);
  }

private:
  Mat2 m_;
  cplx det_;
};

/// exp(-i H t) via the Pauli decomposition of H. Throws DomainError for t < 0.
TwoLevelUnitary evolve(const Hermitian2& h, double t);

/// Rz(a) = diag(e^{-ia/2}, e^{ia/2}), Rx(b) = exp(-i b sigma_x / 2).
Mat2 rz(double angle);
Mat2 rx(double angle);

/// U = e^{i phase} Rz(alpha) Rx(beta) Rz(gamma).
struct ZxzAngles {
  double phase = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};
ZxzAngles zxz_decompose(const TwoLevelUnitary& u);

/// Drive amplitudes used when turning rotation angles into pulses.
struct DriveSettings {
  double omega = 1.0;
  double delta = 10.0;
  /// Two-photon detuning E1 - E0 used for z rotations.
  double z_split = 0.5;
};

struct Pulse {
  char axis = 'z';
  double angle = 0.0;
  RamanParams params;
  double duration = 0.0;
};

/// Pulses in time order; the product of their evolve() outputs reproduces the
/// target up to global phase.
struct PulseRecipe {
  ZxzAngles angles;
  std::vector<Pulse> pulses;

  TwoLevelUnitary product() const;
};

PulseRecipe synthesize(const TwoLevelUnitary& target, const DriveSettings& drive = {});

/// Walsh-Hadamard (1/sqrt 2)[[1, 1], [1, -1]].
TwoLevelUnitary hadamard();
PulseRecipe hadamard_recipe(const DriveSettings& drive = {});

struct CollisionParams {
  double u_int = 0.0;
  double t_hold = 0.0;

  /// Throws DomainError for negative hold time.
  void validate() const;
  double phase() const { return u_int * t_hold; }
};

/// diag(1, e^{-i U t_hold}, 1, 1).
Mat4 collision_phase_gate(const CollisionParams& cp);

/// (1/2)(|00> + e^{-i U t_hold}|01> + |10> + |11>).
State4 mandel_output(const CollisionParams& cp);

/// Local completion of the collision gate at U t_hold = pi into the standard
/// controlled-Z: CZ = (X (x) I) P (X (x) I). Not part of the hardware
/// protocol; provided for circuit-level comparisons.
Mat4 controlled_z_from_collision();

}  // namespace nffd
