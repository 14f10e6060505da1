#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "ivsensa/data.hpp"
#include "ivsensa/discrete_bounds.hpp"
#include "ivsensa/distribution.hpp"
#include "ivsensa/emit.hpp"

namespace {

using namespace ivsensa;

// Spawns the installed binary and captures exit code plus stdout.  The
// binary path comes from the IVSENSA_CLI environment variable the build
// exports to ctest; running the tests from the build directory works too.
struct CliRunner {
  std::string cli;
  std::filesystem::path dir;

  CliRunner() {
    const char* env = std::getenv("IVSENSA_CLI");
    if (env != nullptr)
      cli = env;
    else if (std::filesystem::exists("./ivsensa"))
      cli = "./ivsensa";
    else
      cli = "build/ivsensa";
    dir = std::filesystem::temp_directory_path() /
          ("ivsensa_cli_" + std::to_string(static_cast<long>(::getpid())));
    std::filesystem::create_directories(dir);
  }
  ~CliRunner() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  struct Result {
    int code = -1;
    std::string out;
  };

  Result run(const std::string& args) const {
    const std::string out_path = path("stdout.txt");
    const std::string cmd =
        cli + " " + args + " >" + out_path + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    Result r;
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    std::ifstream in(out_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    return r;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// One weighted row per probability cell, so frequency estimation rebuilds
// the distribution from the file exactly.
void write_dist_csv(const JointDiscreteDist& d, const std::string& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "y,x,z,w\n";
  for (int z = 0; z < d.n_z(); ++z)
    for (int x = 0; x < d.n_x(); ++x)
      for (int iy = 0; iy < d.n_y(x); ++iy) {
        const double w = d.pz[static_cast<std::size_t>(z)] * d.cell(z, x, iy);
        if (w <= 0.0) continue;
        out << d.y_support[static_cast<std::size_t>(x)][static_cast<std::size_t>(iy)] << ','
            << d.x_support[static_cast<std::size_t>(x)] << ','
            << d.z_support[static_cast<std::size_t>(z)] << ',' << w << '\n';
      }
}

// Deterministic continuous sample: identical outcome grids in all four
// (x,z) strata, so the instrument carries no outcome information.
void write_continuous_csv(const std::string& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "y,x,z\n";
  for (int z = 0; z < 2; ++z)
    for (int x = 0; x < 2; ++x)
      for (int i = 0; i < 40; ++i) out << (i + 0.5) / 40.0 << ',' << x << ',' << z << '\n';
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("curve csv bytes equal the library rendering") {
  CliRunner cli;
  const std::string csv = cli.path("d1.csv");
  write_dist_csv(fixtures::d1(), csv);

  const auto r = cli.run("curve --input " + csv + " --model ks --theta-grid 0:1:0.25 --target ate");
  REQUIRE(r.code == 0);

  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "theta,lower,upper,feasible");
  CHECK(lines[1] == "0,-0.2,0.5,true");

  // same input through the library, rendered by the same emitter
  const JointDiscreteDist dist = estimate_discrete(read_csv(csv));
  const SensitivityCurve direct =
      sensitivity_curve(dist, ModelTag::ks, {0.0, 0.25, 0.5, 0.75, 1.0}, {});
  CHECK(r.out == curve_to_csv(direct));
}

TEST_CASE("curve json bytes equal the library rendering") {
  CliRunner cli;
  const std::string csv = cli.path("d1.csv");
  write_dist_csv(fixtures::d1(), csv);

  const auto r = cli.run("curve --input " + csv +
                         " --model ks --theta-grid 0:1:0.25 --target ate --format json");
  REQUIRE(r.code == 0);

  const JointDiscreteDist dist = estimate_discrete(read_csv(csv));
  const SensitivityCurve direct =
      sensitivity_curve(dist, ModelTag::ks, {0.0, 0.25, 0.5, 0.75, 1.0}, {});
  CHECK(r.out == curve_to_json(direct));
  CHECK(r.out.find("\"feasible\":true") != std::string::npos);
}

TEST_CASE("infeasible curve rows leave the bound fields empty") {
  CliRunner cli;
  const std::string csv = cli.path("d2.csv");
  write_dist_csv(fixtures::d2(), csv);

  // d2 violates the ks model below theta ~ 0.05, so this grid is all empty
  const auto r = cli.run("curve --input " + csv + " --model ks --theta-grid 0:0.04:0.02 --target ate");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[1] == "0,,,false");
  CHECK(lines[2] == "0.02,,,false");
  CHECK(lines[3] == "0.04,,,false");
}

TEST_CASE("emitted curve parses back to the same intervals") {
  CliRunner cli;
  const std::string csv = cli.path("d1.csv");
  write_dist_csv(fixtures::d1(), csv);

  const auto r = cli.run("curve --input " + csv + " --model cdep --theta-grid 0:1:0.1 --target ate");
  REQUIRE(r.code == 0);
  const SensitivityCurve parsed = parse_curve_csv(r.out);

  const JointDiscreteDist dist = estimate_discrete(read_csv(csv));
  REQUIRE(parsed.rows.size() == 11);
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    const IdentifiedInterval direct =
        bounds_for_target(dist, {ModelTag::cdep, parsed.rows[i].theta}, {});
    REQUIRE(parsed.rows[i].interval.feasible == direct.feasible);
    CHECK(parsed.rows[i].interval.lower == doctest::Approx(direct.lower).epsilon(1e-5));
    CHECK(parsed.rows[i].interval.upper == doctest::Approx(direct.upper).epsilon(1e-5));
  }
}

TEST_CASE("bounds prints the library interval verbatim") {
  CliRunner cli;
  const std::string csv = cli.path("d1.csv");
  write_dist_csv(fixtures::d1(), csv);

  const auto r = cli.run("bounds --input " + csv + " --model cdep --theta 0 --target ate");
  REQUIRE(r.code == 0);
  CHECK(r.out == "[-0.2, 0.5]\n");

  const JointDiscreteDist dist = estimate_discrete(read_csv(csv));
  const IdentifiedInterval direct = ate_bounds(dist, {ModelTag::cdep, 0.0});
  CHECK(r.out ==
        "[" + render_number(direct.lower) + ", " + render_number(direct.upper) + "]\n");
}

TEST_CASE("exit codes distinguish usage, data, and refuted runs") {
  CliRunner cli;
  const std::string d1 = cli.path("d1.csv");
  const std::string d2 = cli.path("d2.csv");
  write_dist_csv(fixtures::d1(), d1);
  write_dist_csv(fixtures::d2(), d2);

  CHECK(cli.run("bounds --input " + d1 + " --model msm --theta 0 --target ate").code == 0);
  CHECK(cli.run("bounds --input " + d1 + " --model bogus --theta 0").code == 1);
  CHECK(cli.run("bounds --model msm --theta 0").code == 1);  // missing required input
  CHECK(cli.run("bounds --input " + cli.path("absent.csv") + " --model msm --theta 0").code == 1);
  CHECK(cli.run("curve --input " + d1 + " --model msm --theta-grid 1:0:0.1").code == 1);

  const auto refuted = cli.run("bounds --input " + d2 + " --model ks --theta 0 --target ate");
  CHECK(refuted.code == 2);
  CHECK(refuted.out == "infeasible\n");
}

TEST_CASE("output file carries the exact stdout bytes") {
  CliRunner cli;
  const std::string csv = cli.path("d1.csv");
  write_dist_csv(fixtures::d1(), csv);
  const std::string artifact = cli.path("curve.csv");

  const auto direct = cli.run("curve --input " + csv + " --model ks --theta-grid 0:1:0.5 --target ate");
  const auto filed = cli.run("curve --input " + csv + " --model ks --theta-grid 0:1:0.5 --target ate" +
                             " --output " + artifact);
  REQUIRE(filed.code == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(artifact) == direct.out);
  CHECK_FALSE(std::filesystem::exists(artifact + ".tmp"));
}

TEST_CASE("discretize binarizes the outcome at the requested quantile") {
  CliRunner cli;
  const std::string csv = cli.path("raw.csv");
  {
    std::ofstream out(csv);
    out << "y,x,z\n1,a,0\n2,a,1\n3,b,0\n4,b,1\n";
  }
  const auto r = cli.run("discretize --input " + csv + " --quantile 0.25");
  REQUIRE(r.code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "y,x,z");
  CHECK(lines[1] == "1,a,0");
  CHECK(lines[2] == "0,a,1");
  CHECK(lines[3] == "0,b,0");
  CHECK(lines[4] == "0,b,1");
}

TEST_CASE("continuous subcommands run end to end") {
  CliRunner cli;
  const std::string csv = cli.path("cont.csv");
  write_continuous_csv(csv);
  const std::string sieve = " --degree 6 --grid-size 12 --quadrature 128";

  const auto refute = cli.run("refute --input " + csv + " --degree 6");
  CHECK(refute.code == 0);
  CHECK(refute.out.rfind("refuted=false\n", 0) == 0);

  const auto qte = cli.run("qte --input " + csv + " --model cdep --theta 0 --tau 0.5 --points 9" + sieve);
  CHECK(qte.code == 0);
  CHECK(qte.out.front() == '[');

  const auto band = cli.run("cdf-band --input " + csv + " --model msm --theta 0.3 --arm 1 --points 3" + sieve);
  CHECK(band.code == 0);
  const auto lines = lines_of(band.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "a,lower,upper");

  const auto fp = cli.run("falsification-point --input " + csv + " --model msm --pipeline continuous" + sieve);
  CHECK(fp.code == 0);
  CHECK(fp.out.rfind("theta=0\n", 0) == 0);
}
