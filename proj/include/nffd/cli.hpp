#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nffd/machine.hpp"
#include "nffd/statedep.hpp"

namespace nffd::cli {

enum class Format { Csv, Json };

struct GridSpec {
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t n_r = 1;
  double z_lo = 1.0;
  double z_hi = 1.0;
  std::size_t n_z = 1;
};

struct RampSpec {
  double theta_from = 0.0;
  double theta_to = 0.0;
  double t_from = 0.0;
  double t_to = 1.0;
};

struct LaserSpec {
  double e0 = 1.0;
  double gamma_e = 1.0;
  double detuning = -1.0;
};

/// Everything one invocation needs. Built from a JSON document; every
/// section is optional and falls back to the defaults below.
struct RunConfig {
  std::string experiment;
  std::vector<double> radii;
  double aperture_radius = 1.0;
  LaserSpec laser;
  GridSpec grid;
  StateDepConfig lattice;
  RampSpec ramp;
  double x_start = 0.0;
  std::optional<TrapArray> array;
  std::vector<int> initial_bits;
  std::vector<std::size_t> site_of;
  std::vector<SitePair> pairs;
  CollisionParams collision;
  bool pre_hadamard = true;
  ProtocolOptions protocol;
  std::string output;
  Format format = Format::Csv;
  bool format_given = false;
  double tolerance = 1e-8;
  std::uint64_t seed = 1;
};

/// Parses a JSON config. Unknown keys, wrong types and parameters that break
/// a module invariant throw ConfigError; array layouts whose pitch breaks the
/// lattice rule throw GeometryError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitProtocol = 4;

/// Exit status for an exception escaping a command.
int exit_status_for(const std::exception& e) noexcept;

/// Shortest decimal string that reads back to exactly x.
std::string format_double(double x);

/// Writes to a sibling temp file, then renames over path.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Each command writes its data to cfg.output (stdout when empty), logs to
// `log`, and returns an exit status; errors are reported, not thrown.
int cmd_trap_scan(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_potential_map(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_transport(const RunConfig& cfg, std::ostream& out, std::ostream& log);
/// Needs cfg.output: the trace goes there and the final state to
/// <output stem>.state.json. Prints one concurrence line per pair.
int cmd_protocol_run(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_schedule(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// JSON document of a set of traces, schema_version 1.
std::string traces_to_json(const std::vector<ProtocolTrace>& traces, const CollisionParams& cp,
                           bool pre_hadamard);
/// One row per step of every trace.
std::string traces_to_csv(const std::vector<ProtocolTrace>& traces);

/// Full command line: `nffd <subcommand> [--config p] [--out p] [--format f] [--tol x] [--seed n]`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nffd::cli
