#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nffd/fields.hpp"
#include "nffd/gates.hpp"
#include "nffd/statedep.hpp"

namespace nffd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class LayoutKind { Square, Arbitrary, Radial };
std::string_view to_string(LayoutKind kind) noexcept;

struct TrapSite {
  Vec2 position;
  ApertureSpec aperture;
  bool trap_on = true;
  /// Square layouts: grid row/column. Radial layouts: arm and index along it.
  std::size_t major = 0;
  std::size_t minor = 0;
};

/// Layout of NFFD traps on the screen, plus the on/off and screen flags the
/// two-qubit protocol toggles.
class TrapArray {
public:
  /// rows x cols grid with site index r * cols + c at (c * pitch, r * pitch).
  /// The pitch must be an integer multiple of the lattice period pi / k_lat.
  static TrapArray square(double pitch, std::size_t rows, std::size_t cols, double aperture_radius,
                          double k_lat = kWaveNumber);
  /// Free-form sites. Optical lattices run along x and y; with
  /// orthogonal_lattices a pair off a common line meets at a lattice crossing.
  static TrapArray arbitrary(const std::vector<Vec2>& positions,
                             const std::vector<double>& aperture_radii, bool orthogonal_lattices,
                             double k_lat = kWaveNumber);
  /// `arms` straight arms from `center`; site a * per_arm + s sits at
  /// distance (s + 1) * pitch along arm a.
  static TrapArray radial(std::size_t arms, std::size_t per_arm, double pitch, Vec2 center,
                          double aperture_radius, double k_lat = kWaveNumber);

  LayoutKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return sites_.size(); }
  const TrapSite& site(std::size_t i) const;
  const std::vector<TrapSite>& sites() const noexcept { return sites_; }
  double pitch() const noexcept { return pitch_; }
  double k_lat() const noexcept { return k_lat_; }
  double lattice_period() const noexcept { return std::numbers::pi / k_lat_; }
  Vec2 center() const noexcept { return center_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t arms() const noexcept { return arms_; }
  bool orthogonal_lattices() const noexcept { return orthogonal_lattices_; }

  bool screen_engaged() const noexcept { return screen_engaged_; }
  void set_screen_engaged(bool engaged) noexcept { screen_engaged_ = engaged; }
  void set_trap(std::size_t i, bool on);

private:
  TrapArray() = default;
  void check_distinct() const;

  LayoutKind kind_ = LayoutKind::Square;
  std::vector<TrapSite> sites_;
  double pitch_ = 0.0;
  double k_lat_ = kWaveNumber;
  Vec2 center_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t arms_ = 0;
  bool orthogonal_lattices_ = false;
  bool screen_engaged_ = true;
};

inline constexpr std::size_t kMaxQubits = 20;

/// State vector of n qubits. Qubit q is bit (n - 1 - q) of the basis index,
/// so qubit 0 is the leftmost tensor factor.
class Register {
public:
  /// Throws DomainError unless n <= 20, the norm is 1 to 1e-10, and site_of
  /// holds n distinct entries (empty means qubit q sits on site q).
  Register(std::size_t n, std::vector<cplx> amplitudes, std::vector<std::size_t> site_of = {});

  /// Computational basis state; bits[q] is the value of qubit q.
  static Register basis(const std::vector<int>& bits, std::vector<std::size_t> site_of = {});

  std::size_t n() const noexcept { return n_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  std::size_t site_of(std::size_t q) const;
  const std::vector<std::size_t>& site_map() const noexcept { return site_of_; }
  double norm() const;
  std::size_t bit_of(std::size_t q) const { return n_ - 1 - q; }

private:
  std::size_t n_;
  std::vector<cplx> amps_;
  std::vector<std::size_t> site_of_;
};

/// Applies u to qubit q. Throws DomainError if q is out of range.
Register apply_one_qubit(Register reg, std::size_t q, const TwoLevelUnitary& u);

/// Applies a 4x4 gate to qubits (i, j), i being the leftmost factor of m.
Register apply_two_qubit(Register reg, std::size_t i, std::size_t j, const Mat4& m);

/// Two-qubit factor (i, j) of a register in which that pair is unentangled
/// with the rest. Throws DomainError otherwise.
State4 pair_state(const Register& reg, std::size_t i, std::size_t j);

/// Row-major density matrix of the listed qubits with the rest traced out.
std::vector<cplx> reduced_density(const Register& reg, std::span<const std::size_t> keep);

enum class LatticeRequirement { SingleAxis, TwoOrthogonal, RadialCenter };
std::string_view to_string(LatticeRequirement r) noexcept;

/// One optical lattice used by a gate: an axis through `origin` along the
/// unit vector `direction`. Positions on the axis are measured from origin.
struct LatticeLeg {
  std::string role;
  Vec2 origin;
  Vec2 direction;
  double theta_peak = 0.0;
  ThetaRamp forward;
  ThetaRamp reverse;

  struct Mover {
    std::size_t site = 0;
    int component = 0;
    double start = 0.0;
    double target = 0.0;
  };
  std::vector<Mover> movers;
};

struct PairGeometry {
  LatticeRequirement requirement = LatticeRequirement::SingleAxis;
  Vec2 collision_point;
};

struct GatePlan {
  std::size_t site_i = 0;
  std::size_t site_j = 0;
  LatticeRequirement requirement = LatticeRequirement::SingleAxis;
  Vec2 collision_point;
  std::vector<LatticeLeg> legs;
  CollisionParams collision;
};

/// Which lattices a gate between sites i and j needs, and where |0> of i
/// meets |1> of j. Throws ValidationError for unsupported geometry and
/// GeometryError when a transport distance is not a whole number of lattice
/// periods.
PairGeometry validate_pair(const TrapArray& array, std::size_t i, std::size_t j);

/// Lattice ramps that bring |0> of site i and |1> of site j together.
GatePlan plan_gate(const TrapArray& array, std::size_t i, std::size_t j, const CollisionParams& cp,
                   const StateDepConfig& lattice, double ramp_duration = 1.0);

struct ProtocolStep {
  int id = 0;
  std::string description;
  std::map<std::string, double> values;
  std::vector<std::size_t> traps_toggled;
  std::optional<bool> screen_engaged;
  std::vector<ThetaRamp> ramps;
  bool ok = true;
  std::string validation;
};

struct ProtocolTrace {
  std::size_t qubit_i = 0;
  std::size_t qubit_j = 0;
  std::size_t site_i = 0;
  std::size_t site_j = 0;
  LatticeRequirement requirement = LatticeRequirement::SingleAxis;
  Vec2 collision_point;
  std::vector<ProtocolStep> steps;
};

/// Checks that steps 1..6 appear once each, in order, and that the STEP 5
/// ramps are the exact reverse of the STEP 4 ramps.
bool trace_is_well_formed(const ProtocolTrace& trace, std::string* why = nullptr);

struct ProtocolOptions {
  StateDepConfig lattice;
  double ramp_duration = 1.0;
  double trap_frequency = 100.0;
  double trap_ramp_time = 1.0;
  double screen_ramp_time = 1.0;
  double adiabatic_threshold = 0.1;
};

struct GateResult {
  Register reg;
  ProtocolTrace trace;
};

/// Six-step selective two-qubit gate between qubits i and j.
///
/// The array is copied; its flags are toggled in the copy and restored by
/// STEP 6. Precondition failures throw ProtocolError naming the step.
GateResult run_two_qubit_gate(const Register& reg, const TrapArray& array, std::size_t i,
                              std::size_t j, const CollisionParams& cp, bool pre_hadamard,
                              const ProtocolOptions& opts = {});

struct SitePair {
  std::size_t i = 0;
  std::size_t j = 0;
};

/// True when two gates cannot share a batch: a common site, a common optical
/// lattice line, or any two pairs on a radial layout.
bool pairs_conflict(const TrapArray& array, const SitePair& a, const SitePair& b);

/// Greedy colouring of the pair conflict graph, pairs visited in input order,
/// each taking the lowest free batch. Batch count is not guaranteed minimal.
std::vector<std::vector<SitePair>> schedule_parallel(const TrapArray& array,
                                                     const std::vector<SitePair>& pairs);

struct BatchResult {
  Register reg;
  std::vector<ProtocolTrace> traces;
};

/// Runs several gates in one simultaneous batch; throws ProtocolError if any
/// two pairs conflict. Pairs are given as qubit indices.
BatchResult run_simultaneous(const Register& reg, const TrapArray& array,
                             const std::vector<SitePair>& qubit_pairs, const CollisionParams& cp,
                             bool pre_hadamard, const ProtocolOptions& opts = {});

struct Adiabaticity {
  double eta = 0.0;
  bool adiabatic = false;
};

/// eta = 1 / (trap_freq * ramp_time), adiabatic when eta < threshold.
Adiabaticity adiabatic_check(double trap_freq, double ramp_time, double threshold = 0.1);

}  // namespace nffd
