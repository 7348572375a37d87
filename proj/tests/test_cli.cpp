#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "nffd/cli.hpp"
#include "nffd/error.hpp"

using namespace nffd;
using namespace nffd::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nffd_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

int run_args(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::vector<const char*> argv{"nffd"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

RunConfig cfg_with_output(const std::string& json_text, const fs::path& out) {
  RunConfig c = parse_config(json_text);
  c.output = out.string();
  return c;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(parse_config("{\"radii\": [1], \"colour\": 3}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"laser\": {\"e0\": 1, \"phase\": 0}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"radii\": \"1\"}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"radii\": [0.5]}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"laser\": {\"detuning\": 1}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"lattice\": {\"scheme\": \"OTHER\"}}"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"format\": \"xml\"}"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("{\"array\": {\"layout\": \"SQUARE\", \"pitch\": 0.3}}"), GeometryError);
  const RunConfig c = parse_config(R"({"radii": [1, 2], "lattice": {"scheme": "MANDEL"}, "seed": 9,
      "array": {"layout": "RADIAL", "arms": 3, "per_arm": 2, "pitch": 1}, "pairs": [[0, 2], [1, 4]]})");
  CHECK(c.radii.size() == 2);
  CHECK(c.lattice.scheme.name == SchemeName::Mandel);
  CHECK(c.protocol.lattice.scheme.name == SchemeName::Mandel);
  CHECK(c.seed == 9);
  REQUIRE(c.array);
  CHECK(c.array->size() == 6);
  CHECK(c.pairs.size() == 2);
}

TEST_CASE("exit status mapping") {
  CHECK(exit_status_for(ConfigError("x")) == 2);
  CHECK(exit_status_for(AccuracyError("x", 1.0)) == 3);
  CHECK(exit_status_for(TrackingError("x")) == 3);
  CHECK(exit_status_for(NotFoundError("x")) == 3);
  CHECK(exit_status_for(ProtocolError(2, "x")) == 4);
  CHECK(exit_status_for(GeometryError("x")) == 4);
  CHECK(exit_status_for(ValidationError("x")) == 4);
}

TEST_CASE("number formatting and atomic writes") {
  for (double x : {0.1, 1.0 / 3.0, -2.7184786775281293, 1e-300, 123456789.0, 0.0})
    CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
  TempDir tmp;
  const fs::path p = tmp.path / "a.txt";
  write_atomic(p, "first");
  write_atomic(p, "second");
  CHECK(slurp(p) == "second");
  CHECK_FALSE(fs::exists(tmp.path / "a.txt.tmp"));
  CHECK_THROWS_AS(write_atomic(tmp.path / "missing" / "b.txt", "x"), ConfigError);
}

TEST_CASE("trap-scan") {
  TempDir tmp;
  std::ostringstream out, log;
  const RunConfig c = cfg_with_output(R"({"radii": [1, 1.5, 2]})", tmp.path / "scan.csv");
  REQUIRE(cmd_trap_scan(c, out, log) == 0);
  std::string header;
  const std::string first = slurp(tmp.path / "scan.csv");
  const auto rows = parse_csv(first, &header);
  CHECK(header == "a,z_min,depth_over_u0");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][1] < rows[1][1]);
  CHECK(rows[1][1] < rows[2][1]);
  REQUIRE(cmd_trap_scan(c, out, log) == 0);
  CHECK(slurp(tmp.path / "scan.csv") == first);
  CHECK(cmd_trap_scan(parse_config(R"({"radii": []})"), out, log) == 2);
  CHECK(run_args({"trap-scan", "--config", (tmp.path / "none.json").string()}) == 2);
}

TEST_CASE("potential-map") {
  std::ostringstream out, log;
  SUBCASE("1x1 grid gives a single row") {
    REQUIRE(cmd_potential_map(parse_config(R"({"grid": {"r_lo": 0.2, "z_lo": 0.8}})"), out, log) == 0);
    std::string header;
    const auto rows = parse_csv(out.str(), &header);
    CHECK(header == "r,z,u_over_u0");
    CHECK(rows.size() == 1);
  }
  SUBCASE("symmetric grid and axial minimum near z = 1") {
    REQUIRE(cmd_potential_map(parse_config(R"({"aperture_radius": 1,
        "grid": {"r_lo": -1, "r_hi": 1, "n_r": 5, "z_lo": 0.2, "z_hi": 3, "n_z": 29}})"),
                              out, log) == 0);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 5 * 29);
    for (std::size_t ir = 0; ir < 5; ++ir)
      for (std::size_t iz = 0; iz < 29; ++iz)
        CHECK(std::abs(rows[ir * 29 + iz][2] - rows[(4 - ir) * 29 + iz][2]) <= 1e-10);
    std::size_t best = 0;
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k][2] < rows[best][2]) best = k;
    CHECK(rows[best][0] == 0.0);
    CHECK(rows[best][1] == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("transport") {
  std::ostringstream out, log;
  SUBCASE("basis-rotated scheme gives mirror-image columns") {
    REQUIRE(cmd_transport(parse_config(R"({"ramp": {"theta_to": 0.6}})"), out, log) == 0);
    std::string header;
    const auto rows = parse_csv(out.str(), &header);
    CHECK(header == "t,theta,x0,x1");
    for (const auto& r : rows) CHECK(std::abs(r[2] + r[3]) <= 1e-9);
  }
  SUBCASE("zero-length ramp") {
    REQUIRE(cmd_transport(parse_config(R"({"ramp": {"theta_from": 0.2, "theta_to": 0.2}, "x_start": 0})"),
                          out, log) == 0);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][2] == rows[1][2]);
    CHECK(rows[0][3] == rows[1][3]);
  }
  SUBCASE("|1> under the original scheme follows the sigma- lattice") {
    REQUIRE(cmd_transport(parse_config(R"({"lattice": {"scheme": "MANDEL"}, "ramp": {"theta_to": 0.7}})"), out,
                          log) == 0);
    for (const auto& r : parse_csv(out.str())) CHECK(std::abs(r[3] + r[1] / kWaveNumber) <= 1e-15);
  }
  SUBCASE("JSON table") {
    std::ostringstream o2;
    RunConfig c = parse_config(R"({"ramp": {"theta_to": 0.1}, "format": "json"})");
    REQUIRE(cmd_transport(c, o2, log) == 0);
    const auto doc = nlohmann::json::parse(o2.str());
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["columns"][3] == "x1");
  }
}

TEST_CASE("protocol-run") {
  TempDir tmp;
  const std::string base = R"("array": {"layout": "SQUARE", "pitch": 1, "rows": 3, "cols": 3},
                               "initial_bits": [0, 0, 0], "pair": [0, 1], "pre_hadamard": true)";
  SUBCASE("phase pi prints unit concurrence") {
    std::ostringstream out, log;
    const auto c = cfg_with_output("{" + base + R"(, "collision": {"u_int": 1, "t_hold": 3.141592653589793}})",
                                   tmp.path / "t.json");
    REQUIRE(cmd_protocol_run(c, out, log) == 0);
    CHECK(out.str() == "concurrence(0,1) = 1.000000\n");
    const auto trace = nlohmann::json::parse(slurp(tmp.path / "t.json"));
    CHECK(trace["schema_version"] == 1);
    CHECK(trace["traces"][0]["steps"].size() == 6);
    CHECK(trace["traces"][0]["gates"]["collision_phase"][5][0] == -1.0);
    const auto state = nlohmann::json::parse(slurp(tmp.path / "t.state.json"));
    CHECK(state["pairs"][0]["concurrence"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("zero hold time returns the input") {
    std::ostringstream out, log;
    const auto c = cfg_with_output(R"({"array": {"layout": "SQUARE", "pitch": 1, "rows": 2, "cols": 2},
        "initial_bits": [1, 0, 1, 1], "pair": [1, 2], "pre_hadamard": false,
        "collision": {"u_int": 3, "t_hold": 0}, "format": "csv"})",
                                   tmp.path / "z.csv");
    REQUIRE(cmd_protocol_run(c, out, log) == 0);
    const auto state = nlohmann::json::parse(slurp(tmp.path / "z.state.json"));
    const auto& amps = state["amplitudes"];
    for (std::size_t k = 0; k < 16; ++k) CHECK(amps[k][0].get<double>() == (k == 0b1011 ? 1.0 : 0.0));
    std::istringstream csv(slurp(tmp.path / "z.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(csv, line)) ++lines;
    CHECK(lines == 7);
  }
  SUBCASE("radial layout refuses simultaneous pairs") {
    std::ostringstream out, log;
    const auto c = cfg_with_output(R"({"array": {"layout": "RADIAL", "arms": 4, "per_arm": 1, "pitch": 1},
        "pairs": [[0, 1], [2, 3]], "collision": {"u_int": 1, "t_hold": 1}})",
                                   tmp.path / "r.json");
    CHECK(cmd_protocol_run(c, out, log) == 4);
    CHECK(log.str().find("STEP") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "r.json"));
  }
  SUBCASE("missing pieces are config errors") {
    std::ostringstream out, log;
    CHECK(cmd_protocol_run(parse_config("{" + base + "}"), out, log) == 2);
    CHECK(cmd_protocol_run(cfg_with_output(R"({"pair": [0, 1]})", tmp.path / "x.json"), out, log) == 2);
  }
}

TEST_CASE("schedule") {
  std::ostringstream out, log;
  REQUIRE(cmd_schedule(parse_config(R"({"array": {"layout": "SQUARE", "pitch": 1, "rows": 6, "cols": 6},
      "pairs": [[0, 1], [14, 21], [2, 3]]})"),
                       out, log) == 0);
  CHECK(out.str() == "batch,i,j\n0,0,1\n0,14,21\n1,2,3\n");
}

TEST_CASE("command line") {
  std::string out, err;
  CHECK(run_args({"selftest", "--seed", "5"}, &out, &err) == 0);
  CHECK(out.find("selftest: 12 passed, 0 failed") != std::string::npos);
  CHECK(run_args({"frobnicate"}) == 2);
  CHECK(run_args({}) == 2);
  CHECK(run_args({"transport", "--format", "xml"}) == 2);
  CHECK(run_args({"transport", "--tol", "-1"}) == 2);
  CHECK(run_args({"--help"}) == 0);
  TempDir tmp;
  {
    std::ofstream f(tmp.path / "c.json");
    f << R"({"experiment": "trap-scan", "radii": [1]})";
  }
  CHECK(run_args({"transport", "--config", (tmp.path / "c.json").string()}) == 2);
  CHECK(run_args({"trap-scan", "--config", (tmp.path / "c.json").string(), "--out",
                  (tmp.path / "o.json").string(), "--format", "json", "--tol", "1e-9"}) == 0);
  const auto doc = nlohmann::json::parse(slurp(tmp.path / "o.json"));
  CHECK(doc["rows"].size() == 1);
}

}  // TEST_SUITE
