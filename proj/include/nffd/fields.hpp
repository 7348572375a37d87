#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace nffd {

// Lengths are in units of the trap-laser wavelength, so k = 2*pi. hbar = 1.
inline constexpr double kWavelength = 1.0;
inline constexpr double kWaveNumber = 2.0 * std::numbers::pi / kWavelength;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Circular aperture in an opaque screen at z = 0, illuminated from -z by a
/// unit plane wave.
class ApertureSpec {
public:
  /// Throws DomainError unless radius >= 1 (Fresnel number at least one).
  explicit ApertureSpec(double radius);

  double radius() const noexcept { return radius_; }
  double fresnel_number() const noexcept { return radius_ / kWavelength; }
  static constexpr double wavenumber() noexcept { return kWaveNumber; }

private:
  double radius_;
};

/// Trap-laser parameters; the trap needs red detuning (detuning < 0).
class TrapLaserParams {
public:
  TrapLaserParams(double e0, double gamma_e, double detuning);

  double e0() const noexcept { return e0_; }
  double gamma_e() const noexcept { return gamma_e_; }
  double detuning() const noexcept { return detuning_; }
  /// U0 = (3/8) (Gamma_e / |Delta|) E0^2 / k^3.
  double u0() const noexcept { return u0_; }

private:
  double e0_;
  double gamma_e_;
  double detuning_;
  double u0_;
};

struct QuadratureOptions {
  /// Refinement stops when successive estimates differ by at most
  /// rel_tol * max(|I|, kAmplitudeFloor).
  double rel_tol = 1e-8;
  std::size_t max_evaluations = std::size_t{1} << 20;

  static constexpr double kAmplitudeFloor = 1e-3;
};

struct Amplitude {
  std::complex<double> value;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

/// Normalized Rayleigh-Sommerfeld field E(p)/E0 behind the aperture.
///
/// Tensor Gauss-Legendre quadrature over the disk in polar coordinates
/// centred on the aperture axis. Panels are graded geometrically towards the
/// foot of the perpendicular from p (where the integrand peaks with width
/// ~p.z) and every panel is bisected per refinement level until the estimate
/// settles. Throws DomainError for p.z <= 0 and AccuracyError when the
/// evaluation budget runs out first.
Amplitude rs_amplitude(const Point3& p, const ApertureSpec& ap,
                       const QuadratureOptions& opts = {});

/// -U0 |E/E0|^2. Always <= 0.
double nffd_potential(const Point3& p, const ApertureSpec& ap, const TrapLaserParams& tl,
                      const QuadratureOptions& opts = {});

struct AxialSample {
  double z = 0.0;
  double u_over_u0 = 0.0;
};

struct AxialProfile {
  ApertureSpec aperture;
  std::vector<AxialSample> samples;
};

/// n equally spaced on-axis samples of the trap potential over [z_lo, z_hi].
AxialProfile axial_profile(const ApertureSpec& ap, double z_lo, double z_hi, std::size_t n,
                           const QuadratureOptions& opts = {});

struct TrapMinimum {
  double z_min = 0.0;
  double depth_over_u0 = 0.0;
};

inline constexpr double kMinimumSearchLo = 0.1;
inline constexpr double kMinimumSearchHi = 12.0;
inline constexpr std::size_t kMinimumScanPoints = 600;
inline constexpr double kMinimumPositionTol = 1e-4;

/// Deepest interior on-axis minimum of the trap potential in [0.1, 12].
///
/// A 600-point coarse scan picks the deepest interior sample; golden-section
/// search on the bracketing interval refines it to 1e-4. Throws NotFoundError
/// if the scan has no interior local minimum.
TrapMinimum locate_trap_minimum(const ApertureSpec& ap, const QuadratureOptions& opts = {});

/// Radial/axial sampling grid. The map is symmetric in r, so r may be negative.
struct RzGrid {
  std::vector<double> r;
  std::vector<double> z;

  static RzGrid uniform(double r_lo, double r_hi, std::size_t n_r, double z_lo, double z_hi,
                        std::size_t n_z);
};

struct PotentialMap {
  RzGrid grid;
  double u0 = 0.0;
  /// Row-major over (r, z): index = ir * z.size() + iz.
  std::vector<double> u_over_u0;

  double at(std::size_t ir, std::size_t iz) const { return u_over_u0[ir * grid.z.size() + iz]; }
  double energy(std::size_t ir, std::size_t iz) const { return u0 * at(ir, iz); }
};

PotentialMap potential_map(const ApertureSpec& ap, const TrapLaserParams& tl, const RzGrid& grid,
                           const QuadratureOptions& opts = {});

/// AC Stark shift |Omega|^2 / (4 Delta). Throws DomainError at zero detuning.
double stark_shift(double omega_eg, double delta_eg);

struct LatticeConfig {
  /// Depth V0 per axis (x, y, z); only active axes contribute.
  std::array<double, 3> depth{0.0, 0.0, 0.0};
  std::array<bool, 3> active{false, false, false};
  double k_lat = kWaveNumber;

  /// Throws DomainError on negative depths or non-positive wavenumber.
  void validate() const;
  double period() const noexcept { return std::numbers::pi / k_lat; }
};

/// Sum over active axes of V0_i cos^2(k x_i).
double lattice_potential(const Point3& x, const LatticeConfig& cfg);

}  // namespace nffd
