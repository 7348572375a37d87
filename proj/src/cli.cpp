#include "nffd/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nffd/analysis.hpp"
#include "nffd/error.hpp"
#include "nffd/fields.hpp"
#include "nffd/selftest.hpp"

namespace nffd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// --- config reading ----------------------------------------------------------

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

bool flag(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
  return v.get<bool>();
}

std::string text(const json& obj, const char* key, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string("'") + what + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(std::string("'") + what + "' must hold numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

Vec2 point(const json& v, const char* what) {
  const auto xy = numbers(v, what);
  if (xy.size() != 2) throw ConfigError(std::string("'") + what + "' must be an [x, y] pair");
  return {xy[0], xy[1]};
}

SitePair index_pair(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned())
    throw ConfigError("a pair must be [i, j] with non-negative integer indices");
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("format must be 'csv' or 'json', got '" + s + "'");
}

TrapArray parse_array(const json& a, double k_lat) {
  const std::string layout = text(a, "layout", "");
  if (layout == "SQUARE") {
    check_keys(a, {"layout", "pitch", "rows", "cols", "aperture_radius"}, "array");
    return TrapArray::square(number(a, "pitch", 1.0), count(a, "rows", 1), count(a, "cols", 1),
                             number(a, "aperture_radius", 1.0), k_lat);
  }
  if (layout == "ARBITRARY") {
    check_keys(a, {"layout", "sites", "aperture_radius", "aperture_radii", "orthogonal_lattices"},
               "array");
    if (!a.contains("sites") || !a.at("sites").is_array())
      throw ConfigError("ARBITRARY layout needs a 'sites' list of [x, y] pairs");
    std::vector<Vec2> sites;
    for (const json& s : a.at("sites")) sites.push_back(point(s, "sites"));
    std::vector<double> radii{number(a, "aperture_radius", 1.0)};
    if (a.contains("aperture_radii")) {
      if (a.contains("aperture_radius"))
        throw ConfigError("give either 'aperture_radius' or 'aperture_radii', not both");
      radii = numbers(a.at("aperture_radii"), "aperture_radii");
    }
    return TrapArray::arbitrary(sites, radii, flag(a, "orthogonal_lattices", false), k_lat);
  }
  if (layout == "RADIAL") {
    check_keys(a, {"layout", "arms", "per_arm", "pitch", "center", "aperture_radius"}, "array");
    const Vec2 center = a.contains("center") ? point(a.at("center"), "center") : Vec2{};
    return TrapArray::radial(count(a, "arms", 2), count(a, "per_arm", 1), number(a, "pitch", 1.0),
                             center, number(a, "aperture_radius", 1.0), k_lat);
  }
  throw ConfigError("array layout must be SQUARE, ARBITRARY or RADIAL");
}

RunConfig parse_document(const json& doc) {
  check_keys(doc,
             {"experiment", "radii", "aperture_radius", "laser", "grid", "lattice", "ramp", "x_start",
              "array", "initial_bits", "site_of", "pair", "pairs", "collision", "pre_hadamard",
              "protocol", "output", "format", "tolerance", "seed"},
             "config");
  RunConfig cfg;
  cfg.experiment = text(doc, "experiment", "");
  if (doc.contains("radii")) {
    cfg.radii = numbers(doc.at("radii"), "radii");
    for (double a : cfg.radii) (void)ApertureSpec(a);
  }
  cfg.aperture_radius = number(doc, "aperture_radius", cfg.aperture_radius);
  (void)ApertureSpec(cfg.aperture_radius);

  if (doc.contains("laser")) {
    const json& l = doc.at("laser");
    check_keys(l, {"e0", "gamma_e", "detuning"}, "laser");
    cfg.laser = {number(l, "e0", 1.0), number(l, "gamma_e", 1.0), number(l, "detuning", -1.0)};
  }
  (void)TrapLaserParams(cfg.laser.e0, cfg.laser.gamma_e, cfg.laser.detuning);

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    check_keys(g, {"r_lo", "r_hi", "n_r", "z_lo", "z_hi", "n_z"}, "grid");
    cfg.grid = {number(g, "r_lo", 0.0), number(g, "r_hi", 0.0), count(g, "n_r", 1),
                number(g, "z_lo", 1.0), number(g, "z_hi", 1.0), count(g, "n_z", 1)};
  }
  (void)RzGrid::uniform(cfg.grid.r_lo, cfg.grid.r_hi, cfg.grid.n_r, cfg.grid.z_lo, cfg.grid.z_hi,
                  cfg.grid.n_z);
  if (!(cfg.grid.z_lo > 0.0)) throw ConfigError("grid z_lo must be > 0");

  if (doc.contains("lattice")) {
    const json& l = doc.at("lattice");
    check_keys(l, {"scheme", "depth", "k_lat"}, "lattice");
    cfg.lattice.scheme = WeightScheme::from_name(text(l, "scheme", "RAMAN_BASIS"));
    cfg.lattice.depth = number(l, "depth", cfg.lattice.depth);
    cfg.lattice.k_lat = number(l, "k_lat", cfg.lattice.k_lat);
  }
  cfg.lattice.validate();
  cfg.protocol.lattice = cfg.lattice;

  if (doc.contains("ramp")) {
    const json& r = doc.at("ramp");
    check_keys(r, {"theta_from", "theta_to", "t_from", "t_to"}, "ramp");
    cfg.ramp = {number(r, "theta_from", 0.0), number(r, "theta_to", 0.0), number(r, "t_from", 0.0),
                number(r, "t_to", 1.0)};
  }
  if (!(cfg.ramp.t_to > cfg.ramp.t_from)) throw ConfigError("ramp needs t_to > t_from");
  if (!std::isfinite(cfg.ramp.theta_from) || !std::isfinite(cfg.ramp.theta_to))
    throw ConfigError("ramp angles must be finite");
  cfg.x_start = number(doc, "x_start", 0.0);

  if (doc.contains("array")) cfg.array = parse_array(doc.at("array"), cfg.lattice.k_lat);

  if (doc.contains("initial_bits")) {
    const json& b = doc.at("initial_bits");
    if (!b.is_array()) throw ConfigError("'initial_bits' must be an array of 0/1");
    for (const json& e : b) {
      if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1))
        throw ConfigError("'initial_bits' entries must be 0 or 1");
      cfg.initial_bits.push_back(e.get<int>());
    }
    if (cfg.initial_bits.empty() || cfg.initial_bits.size() > kMaxQubits)
      throw ConfigError("'initial_bits' must list between 1 and 20 qubits");
  }
  if (doc.contains("site_of")) {
    const json& s = doc.at("site_of");
    if (!s.is_array()) throw ConfigError("'site_of' must be an array of site indices");
    for (const json& e : s) {
      if (!e.is_number_unsigned()) throw ConfigError("'site_of' entries must be site indices");
      cfg.site_of.push_back(e.get<std::size_t>());
    }
  }
  if (doc.contains("pair") && doc.contains("pairs"))
    throw ConfigError("give either 'pair' or 'pairs', not both");
  if (doc.contains("pair")) cfg.pairs.push_back(index_pair(doc.at("pair")));
  if (doc.contains("pairs")) {
    if (!doc.at("pairs").is_array()) throw ConfigError("'pairs' must be a list of [i, j]");
    for (const json& p : doc.at("pairs")) cfg.pairs.push_back(index_pair(p));
  }

  if (doc.contains("collision")) {
    const json& c = doc.at("collision");
    check_keys(c, {"u_int", "t_hold"}, "collision");
    cfg.collision = {number(c, "u_int", 0.0), number(c, "t_hold", 0.0)};
  }
  cfg.collision.validate();
  cfg.pre_hadamard = flag(doc, "pre_hadamard", cfg.pre_hadamard);

  if (doc.contains("protocol")) {
    const json& p = doc.at("protocol");
    check_keys(p,
               {"ramp_duration", "trap_frequency", "trap_ramp_time", "screen_ramp_time",
                "adiabatic_threshold"},
               "protocol");
    ProtocolOptions& o = cfg.protocol;
    o.ramp_duration = number(p, "ramp_duration", o.ramp_duration);
    o.trap_frequency = number(p, "trap_frequency", o.trap_frequency);
    o.trap_ramp_time = number(p, "trap_ramp_time", o.trap_ramp_time);
    o.screen_ramp_time = number(p, "screen_ramp_time", o.screen_ramp_time);
    o.adiabatic_threshold = number(p, "adiabatic_threshold", o.adiabatic_threshold);
  }
  {
    const ProtocolOptions& o = cfg.protocol;
    if (!(o.ramp_duration > 0.0) || !(o.trap_frequency > 0.0) || !(o.trap_ramp_time > 0.0) ||
        !(o.screen_ramp_time > 0.0) || !(o.adiabatic_threshold > 0.0))
      throw ConfigError("protocol times, frequency and threshold must be positive");
  }

  cfg.output = text(doc, "output", "");
  if (doc.contains("format")) {
    cfg.format = parse_format(text(doc, "format", "csv"));
    cfg.format_given = true;
  }
  cfg.tolerance = number(doc, "tolerance", cfg.tolerance);
  if (!(cfg.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  return cfg;
}

// --- output ------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string render(const Table& t, Format f) {
  if (f == Format::Json) {
    json doc{{"schema_version", 1}, {"columns", t.columns}, {"rows", t.rows}};
    return doc.dump(2) + "\n";
  }
  std::string s;
  for (std::size_t c = 0; c < t.columns.size(); ++c) s += (c ? "," : "") + t.columns[c];
  s += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ',';
      s += format_double(row[c]);
    }
    s += '\n';
  }
  return s;
}

void emit(const RunConfig& cfg, const std::string& content, std::ostream& out, std::ostream& log,
          std::size_t rows) {
  if (cfg.output.empty()) {
    out << content;
    return;
  }
  write_atomic(cfg.output, content);
  log << "wrote " << rows << " rows to " << cfg.output << "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

template <std::size_t N>
json matrix_json(const std::array<cplx, N>& m) {
  json a = json::array();
  for (const cplx& z : m) a.push_back({z.real(), z.imag()});
  return a;
}

template <class Body>
int guarded(std::ostream& log, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_status_for(e);
  }
}

QuadratureOptions quadrature(const RunConfig& cfg) {
  QuadratureOptions q;
  q.rel_tol = cfg.tolerance;
  return q;
}

}  // namespace

RunConfig parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_document(doc);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

int exit_status_for(const std::exception& e) noexcept {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const ProtocolError*>(&e) || dynamic_cast<const GeometryError*>(&e) ||
      dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const SchedulingError*>(&e))
    return kExitProtocol;
  if (dynamic_cast<const json::exception*>(&e)) return kExitConfig;
  return kExitNumerical;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at " + path.string());
  }
}

int cmd_trap_scan(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (cfg.radii.empty()) throw ConfigError("trap-scan needs a non-empty 'radii' list");
    Table t{{"a", "z_min", "depth_over_u0"}, {}};
    for (double a : cfg.radii) {
      const TrapMinimum m = locate_trap_minimum(ApertureSpec(a), quadrature(cfg));
      t.rows.push_back({a, m.z_min, m.depth_over_u0});
    }
    emit(cfg, render(t, cfg.format), out, log, t.rows.size());
    return kExitOk;
  });
}

int cmd_potential_map(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const GridSpec& g = cfg.grid;
    const RzGrid grid = RzGrid::uniform(g.r_lo, g.r_hi, g.n_r, g.z_lo, g.z_hi, g.n_z);
    const TrapLaserParams tl(cfg.laser.e0, cfg.laser.gamma_e, cfg.laser.detuning);
    const PotentialMap map = potential_map(ApertureSpec(cfg.aperture_radius), tl, grid, quadrature(cfg));
    Table t{{"r", "z", "u_over_u0"}, {}};
    for (std::size_t ir = 0; ir < grid.r.size(); ++ir)
      for (std::size_t iz = 0; iz < grid.z.size(); ++iz)
        t.rows.push_back({grid.r[ir], grid.z[iz], map.at(ir, iz)});
    emit(cfg, render(t, cfg.format), out, log, t.rows.size());
    return kExitOk;
  });
}

int cmd_transport(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const double k = cfg.lattice.k_lat;
    const ThetaRamp ramp =
        ThetaRamp::linear(cfg.ramp.theta_from, cfg.ramp.theta_to, cfg.ramp.t_from, cfg.ramp.t_to);
    const Weights& w0 = cfg.lattice.scheme.zero;
    const Weights& w1 = cfg.lattice.scheme.one;
    // x_start is a hint; each component starts in its nearest well.
    const auto p0 = transport_trajectory(ramp, w0, k, component_minimum(cfg.ramp.theta_from, w0, k, cfg.x_start));
    const auto p1 = transport_trajectory(ramp, w1, k, component_minimum(cfg.ramp.theta_from, w1, k, cfg.x_start));
    Table t{{"t", "theta", "x0", "x1"}, {}};
    for (std::size_t m = 0; m < p0.size(); ++m) t.rows.push_back({p0[m].t, p0[m].theta, p0[m].x, p1[m].x});
    emit(cfg, render(t, cfg.format), out, log, t.rows.size());
    return kExitOk;
  });
}

std::string traces_to_json(const std::vector<ProtocolTrace>& traces, const CollisionParams& cp,
                           bool pre_hadamard) {
  json list = json::array();
  for (const ProtocolTrace& tr : traces) {
    json steps = json::array();
    for (const ProtocolStep& s : tr.steps) {
      json ramps = json::array();
      for (const ThetaRamp& r : s.ramps) {
        json ts = json::array();
        json th = json::array();
        for (const RampSample& p : r.samples()) {
          ts.push_back(p.t);
          th.push_back(p.theta);
        }
        ramps.push_back({{"t", ts}, {"theta", th}});
      }
      json values = json::object();
      for (const auto& [key, v] : s.values) values[key] = v;
      steps.push_back({{"step", s.id},
                       {"description", s.description},
                       {"values", values},
                       {"traps_toggled", s.traps_toggled},
                       {"screen_engaged", s.screen_engaged ? json(*s.screen_engaged) : json(nullptr)},
                       {"ramps", ramps},
                       {"ok", s.ok},
                       {"validation", s.validation}});
    }
    json gates{{"collision_phase", matrix_json(collision_phase_gate(cp))}};
    if (pre_hadamard) gates["hadamard"] = matrix_json(hadamard().matrix());
    list.push_back({{"qubits", {tr.qubit_i, tr.qubit_j}},
                    {"sites", {tr.site_i, tr.site_j}},
                    {"requirement", std::string(to_string(tr.requirement))},
                    {"collision_point", {tr.collision_point.x, tr.collision_point.y}},
                    {"collision", {{"u_int", cp.u_int}, {"t_hold", cp.t_hold}, {"phase", cp.phase()}}},
                    {"gates", gates},
                    {"steps", steps}});
  }
  json doc{{"schema_version", 1}, {"traces", list}};
  return doc.dump(2) + "\n";
}

std::string traces_to_csv(const std::vector<ProtocolTrace>& traces) {
  std::string s = "gate,qubit_i,qubit_j,step,description,traps_toggled,screen_engaged,ramps,ok,validation\n";
  for (std::size_t g = 0; g < traces.size(); ++g) {
    const ProtocolTrace& tr = traces[g];
    for (const ProtocolStep& st : tr.steps) {
      std::string toggled;
      for (std::size_t k = 0; k < st.traps_toggled.size(); ++k)
        toggled += (k ? ";" : "") + std::to_string(st.traps_toggled[k]);
      const std::string screen = st.screen_engaged ? (*st.screen_engaged ? "engaged" : "withdrawn") : "";
      s += std::to_string(g) + "," + std::to_string(tr.qubit_i) + "," + std::to_string(tr.qubit_j) +
           "," + std::to_string(st.id) + "," + csv_field(st.description) + "," + toggled + "," +
           screen + "," + std::to_string(st.ramps.size()) + "," + (st.ok ? "1" : "0") + "," +
           csv_field(st.validation) + "\n";
    }
  }
  return s;
}

int cmd_protocol_run(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (!cfg.array) throw ConfigError("protocol-run needs an 'array' section");
    if (cfg.pairs.empty()) throw ConfigError("protocol-run needs a 'pair' or 'pairs' entry");
    if (cfg.output.empty()) throw ConfigError("protocol-run needs an output path (--out)");
    const TrapArray& array = *cfg.array;

    std::vector<int> bits = cfg.initial_bits;
    if (bits.empty()) {
      if (array.size() > kMaxQubits)
        throw ConfigError("array has more than 20 sites; give 'initial_bits' and 'site_of'");
      bits.assign(array.size(), 0);
    }
    for (std::size_t s : cfg.site_of)
      if (s >= array.size()) throw ConfigError("'site_of' names a site outside the array");
    const Register reg = Register::basis(bits, cfg.site_of);

    BatchResult result{reg, {}};
    if (cfg.pairs.size() == 1) {
      GateResult g = run_two_qubit_gate(reg, array, cfg.pairs[0].i, cfg.pairs[0].j, cfg.collision,
                                        cfg.pre_hadamard, cfg.protocol);
      result.reg = std::move(g.reg);
      result.traces.push_back(std::move(g.trace));
    } else {
      result = run_simultaneous(reg, array, cfg.pairs, cfg.collision, cfg.pre_hadamard, cfg.protocol);
    }

    const Format f = cfg.format_given ? cfg.format : Format::Json;
    write_atomic(cfg.output, f == Format::Json
                                 ? traces_to_json(result.traces, cfg.collision, cfg.pre_hadamard)
                                 : traces_to_csv(result.traces));

    json amps = json::array();
    for (const cplx& a : result.reg.amplitudes()) amps.push_back({a.real(), a.imag()});
    json pairs = json::array();
    char line[128];
    for (const SitePair& p : cfg.pairs) {
      const std::array<std::size_t, 2> keep{p.i, p.j};
      const auto rho = reduced_density(result.reg, keep);
      json rho_json = json::array();
      for (const cplx& z : rho) rho_json.push_back({z.real(), z.imag()});
      json c = nullptr;
      try {
        const double value = concurrence(TwoQubitPureState(pair_state(result.reg, p.i, p.j)));
        c = value;
        std::snprintf(line, sizeof line, "concurrence(%zu,%zu) = %.6f\n", p.i, p.j, value);
      } catch (const DomainError&) {
        std::snprintf(line, sizeof line, "concurrence(%zu,%zu) = n/a (pair entangled with other qubits)\n",
                      p.i, p.j);
      }
      out << line;
      pairs.push_back({{"qubits", {p.i, p.j}}, {"reduced_density", rho_json}, {"concurrence", c}});
    }
    json state{{"schema_version", 1}, {"qubits", result.reg.n()}, {"amplitudes", amps}, {"pairs", pairs}};
    fs::path state_path = cfg.output;
    state_path.replace_extension(".state.json");
    write_atomic(state_path, state.dump(2) + "\n");
    log << "wrote trace to " << cfg.output << " and final state to " << state_path.string() << "\n";
    return kExitOk;
  });
}

int cmd_schedule(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    if (!cfg.array) throw ConfigError("schedule needs an 'array' section");
    if (cfg.pairs.empty()) throw ConfigError("schedule needs a 'pairs' list of site pairs");
    const auto batches = schedule_parallel(*cfg.array, cfg.pairs);
    Table t{{"batch", "i", "j"}, {}};
    for (std::size_t b = 0; b < batches.size(); ++b)
      for (const SitePair& p : batches[b])
        t.rows.push_back({static_cast<double>(b), static_cast<double>(p.i), static_cast<double>(p.j)});
    std::string content;
    if (cfg.format == Format::Json) {
      json list = json::array();
      for (const auto& batch : batches) {
        json b = json::array();
        for (const SitePair& p : batch) b.push_back({p.i, p.j});
        list.push_back(b);
      }
      content = json{{"schema_version", 1}, {"batches", list}}.dump(2) + "\n";
    } else {
      content = render(t, Format::Csv);
    }
    emit(cfg, content, out, log, t.rows.size());
    return kExitOk;
  });
}

int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  return guarded(log, [&] {
    const SelftestReport report = run_selftest(cfg.seed);
    std::string csv = "check,passed,detail\n";
    for (const CheckResult& c : report.checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) out << "  (" << c.detail << ")";
      out << "\n";
      csv += csv_field(c.name) + "," + (c.passed ? "1" : "0") + "," + csv_field(c.detail) + "\n";
    }
    out << "selftest: " << report.passed() << " passed, " << report.failed() << " failed\n";
    if (!cfg.output.empty()) write_atomic(cfg.output, csv);
    return report.failed() == 0 ? kExitOk : kExitNumerical;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-field Fresnel diffraction trap and gate simulator", "nffd"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out_path;
  std::string format;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_path, "output file (stdout when omitted)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", tol, "relative quadrature tolerance");
  app.add_option("--seed", seed, "seed for randomized suites");
  app.add_subcommand("trap-scan", "trap minimum position and depth per aperture radius");
  app.add_subcommand("potential-map", "trap potential on an (r, z) grid");
  app.add_subcommand("transport", "state-dependent transport trajectory of both components");
  app.add_subcommand("protocol-run", "six-step two-qubit gate with trace and final state");
  app.add_subcommand("schedule", "batch gate pairs for simultaneous execution");
  app.add_subcommand("selftest", "run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!cfg.experiment.empty() && cfg.experiment != command)
      throw ConfigError("config is for '" + cfg.experiment + "', not '" + command + "'");
    if (!out_path.empty()) cfg.output = out_path;
    if (!format.empty()) {
      cfg.format = parse_format(format);
      cfg.format_given = true;
    }
    if (tol) {
      if (!(*tol > 0.0)) throw ConfigError("--tol must be positive");
      cfg.tolerance = *tol;
    }
    if (seed) cfg.seed = *seed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_status_for(e);
  }

  if (command == "trap-scan") return cmd_trap_scan(cfg, out, err);
  if (command == "potential-map") return cmd_potential_map(cfg, out, err);
  if (command == "transport") return cmd_transport(cfg, out, err);
  if (command == "protocol-run") return cmd_protocol_run(cfg, out, err);
  if (command == "schedule") return cmd_schedule(cfg, out, err);
  return cmd_selftest(cfg, out, err);
}

}  // namespace nffd::cli
