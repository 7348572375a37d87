#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "nffd/fields.hpp"

namespace nffd {

/// Weights of the sigma+ / sigma- Stark shifts seen by one qubit component.
struct Weights {
  double plus = 0.0;
  double minus = 0.0;
};

enum class SchemeName { Mandel, RamanBasis };

/// Weight pair for |0> and |1>.
struct WeightScheme {
  SchemeName name = SchemeName::RamanBasis;
  Weights zero;
  Weights one;

  /// |0>: 3/4 V+ + 1/4 V-,  |1>: V-.
  static WeightScheme mandel();
  /// |0>: 1/4 V+ + 3/4 V-,  |1>: 3/4 V+ + 1/4 V-.
  static WeightScheme raman_basis();
  /// "MANDEL" or "RAMAN_BASIS"; anything else throws DomainError.
  static WeightScheme from_name(std::string_view name);
  std::string_view label() const noexcept;
};

struct StateDepConfig {
  double depth = 1.0;
  double k_lat = kWaveNumber;
  WeightScheme scheme = WeightScheme::raman_basis();

  void validate() const;
  /// Lattice period pi / k.
  double period() const noexcept { return std::numbers::pi / k_lat; }
};

struct RampSample {
  double t = 0.0;
  double theta = 0.0;
};

/// Piecewise-linear polarization-angle schedule. Times strictly increase and
/// consecutive angles differ by less than pi/2.
class ThetaRamp {
public:
  /// Throws DomainError if the samples break either invariant.
  explicit ThetaRamp(std::vector<RampSample> samples);

  /// Linear ramp with at least 64 intervals per pi/2 of angle change.
  static ThetaRamp linear(double theta_from, double theta_to, double t_from, double t_to);
  static constexpr std::size_t kSamplesPerQuarterTurn = 64;

  const std::vector<RampSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double start_time() const { return samples_.front().t; }
  double end_time() const { return samples_.back().t; }

  /// Same angles in reverse order, re-timed to start at t_from with the same
  /// interval lengths.
  ThetaRamp reversed(double t_from) const;
  /// Appends `next`, which must start at this ramp's final (t, theta).
  ThetaRamp then(const ThetaRamp& next) const;

private:
  std::vector<RampSample> samples_;
};

struct SigmaAmplitudes {
  double plus = 0.0;
  double minus = 0.0;
};

/// sigma+/sigma- envelopes (cos(kx - theta), -cos(kx + theta)).
SigmaAmplitudes sigma_components(double x, double theta, double k = kWaveNumber);

struct PlusMinus {
  double plus = 0.0;
  double minus = 0.0;
};

/// (-V_L cos^2(kx - theta), -V_L cos^2(kx + theta)).
PlusMinus v_plus_minus(double x, double theta, const StateDepConfig& cfg);

struct QubitPotentials {
  double v0 = 0.0;
  double v1 = 0.0;
};

QubitPotentials qubit_potential(double x, double theta, const StateDepConfig& cfg);

/// w+ V+ + w- V- for a single component, with unit depth.
double weighted_potential(double x, double theta, const Weights& w, double k, double depth = 1.0);

/// Minimum of w+ V+ + w- V- nearest to branch_hint.
///
/// x = -phi / (2k) + n pi / k with phi = arg(w+ e^{-2i theta} + w- e^{2i theta}).
/// Throws DomainError when the combined lattice has zero modulation.
double component_minimum(double theta, const Weights& w, double k, double branch_hint);

/// Continuous displacement of the minimum that starts at x = 0 when theta = 0,
/// following theta monotonically from 0.
double unwrapped_displacement(double theta, const Weights& w, double k);

/// Inverse of unwrapped_displacement: the theta that moves the minimum by d.
/// Throws SchedulingError if the weights give no state dependence.
double theta_for_displacement(double d, const Weights& w, double k);

struct TrajectoryPoint {
  double t = 0.0;
  double theta = 0.0;
  double x = 0.0;
};

/// Follows one lattice minimum along the ramp. Throws TrackingError when the
/// branch becomes ambiguous between consecutive samples.
std::vector<TrajectoryPoint> transport_trajectory(const ThetaRamp& ramp, const Weights& w, double k,
                                                  double x_start);

struct CollisionSchedule {
  ThetaRamp forward;
  ThetaRamp reverse;
  double theta_peak = 0.0;
  double x_i = 0.0;
  double x_j = 0.0;
  double meeting_point = 0.0;

  /// forward followed by reverse.
  ThetaRamp full() const { return forward.then(reverse); }
};

inline constexpr double kMeetingTolerance = 1e-6;
inline constexpr double kReturnTolerance = 1e-9;

/// Ramp that brings |0> from lattice site site_i and |1> from site_j to their
/// midpoint, then back. Sites sit at index * pitch along the lattice axis.
///
/// Throws GeometryError when pitch is not an integer multiple of the lattice
/// period and SchedulingError when the scheme cannot meet at the midpoint.
CollisionSchedule collision_schedule(long site_i, long site_j, double pitch,
                                     const StateDepConfig& cfg, double ramp_duration = 1.0);

}  // namespace nffd
