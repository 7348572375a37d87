#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nffd {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<CheckResult> checks;
  std::size_t passed() const;
  std::size_t failed() const { return checks.size() - passed(); }
};

/// Invariant suites over randomized inputs drawn from `seed`.
SelftestReport run_selftest(std::uint64_t seed);

}  // namespace nffd
