#pragma once

#include <complex>
#include <span>

#include "nffd/gates.hpp"

namespace nffd {

/// Normalized two-qubit pure state in the basis (|00>, |01>, |10>, |11>).
class TwoQubitPureState {
public:
  /// Throws DomainError unless the squared amplitudes sum to 1 within 1e-10.
  explicit TwoQubitPureState(const State4& amplitudes);

  const State4& amplitudes() const noexcept { return a_; }

private:
  State4 a_;
};

inline constexpr double kNormTolerance = 1e-10;

/// 2 |a00 a11 - a01 a10|.
double concurrence(const TwoQubitPureState& s);

/// |<t|s>|^2. Throws DomainError on dimension mismatch or unnormalized input.
double state_fidelity(std::span<const cplx> s, std::span<const cplx> t);

}  // namespace nffd
