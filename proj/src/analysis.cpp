#include "nffd/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "nffd/error.hpp"

namespace nffd {

namespace {

double norm_squared(std::span<const cplx> v) {
  double n = 0.0;
  for (const cplx& a : v) n += std::norm(a);
  return n;
}

}  // namespace

TwoQubitPureState::TwoQubitPureState(const State4& amplitudes) : a_(amplitudes) {
  if (!(std::abs(norm_squared(a_) - 1.0) <= kNormTolerance))
    throw DomainError("two-qubit state is not normalized");
}

double concurrence(const TwoQubitPureState& s) {
  const State4& a = s.amplitudes();
  return std::min(1.0, 2.0 * std::abs(a[0] * a[3] - a[1] * a[2]));
}

double state_fidelity(std::span<const cplx> s, std::span<const cplx> t) {
  if (s.size() != t.size()) throw DomainError("fidelity needs states of equal dimension");
  if (!(std::abs(norm_squared(s) - 1.0) <= kNormTolerance) ||
      !(std::abs(norm_squared(t) - 1.0) <= kNormTolerance))
    throw DomainError("fidelity needs normalized states");
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) overlap += std::conj(t[i]) * s[i];
  return std::clamp(std::norm(overlap), 0.0, 1.0);
}

}  // namespace nffd
