#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "test_helpers.hpp"

using namespace samred;
using oracle::rng;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, bool raw_command = false) {
  const std::string cmd =
      (raw_command ? args : std::string(SAMRED_CLI_PATH) + " " + args) +
      " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("samred_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("system files round-trip bit for bit") {
  auto r = rng(301);
  SystemFile file;
  file.kind = SystemFile::Kind::lti;
  ContinuousLtid plant = random_stable_plant<double>(5, 2, 1, r);
  // Exercise awkward magnitudes.
  plant.A(0, 0) = 1.0 / 3.0;
  plant.A(1, 1) = 1e-17;
  plant.B(0, 0) = -0.1;
  file.lti = plant;
  file.grid = SamplingGridd({0.1, 0.30000000000000004, 2.0});

  const std::string text = serialize_system_file(file);
  const SystemFile back = parse_system_file(text);
  REQUIRE(back.kind == SystemFile::Kind::lti);
  CHECK((back.lti->A - plant.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.lti->B - plant.B).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.lti->C - plant.C).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.grid.has_value());
  for (Index i = 0; i < 3; ++i) {
    CHECK(back.grid->intervals()[static_cast<std::size_t>(i)] ==
          file.grid->intervals()[static_cast<std::size_t>(i)]);
  }
  // Serialization is a fixed point.
  CHECK(serialize_system_file(back) == text);
}

TEST_CASE("switched system files round-trip") {
  auto r = rng(302);
  SystemFile file;
  file.kind = SystemFile::Kind::ls;
  file.ls = random_contractive_switched<double>(3, 1, 2, 2, r);
  const SystemFile back = parse_system_file(serialize_system_file(file));
  REQUIRE(back.kind == SystemFile::Kind::ls);
  REQUIRE(back.ls->mode_count() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK((back.ls->A[i] - file.ls->A[i]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.ls->B[i] - file.ls->B[i]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("syntax errors report line and column") {
  const std::string bad = "{\n  \"kind\": \"lti\",\n  \"A\": [[1, ]]\n}\n";
  try {
    parse_system_file(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column > 0);
  }
}

TEST_CASE("structural problems are parse errors") {
  CHECK_THROWS_AS(parse_system_file("{\"kind\": \"what\"}"), ParseError);
  CHECK_THROWS_AS(parse_system_file("{\"kind\": \"lti\", \"A\": [[1]]}"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_system_file(
          "{\"kind\": \"lti\", \"A\": [[1], [2, 3]], \"B\": [[1]], "
          "\"C\": [[1]]}"),
      ParseError);
}

TEST_CASE("cli: generate, discretize, certify round trip") {
  const fs::path dir = fresh_dir("flow");
  const std::string plant = (dir / "plant.json").string();
  const std::string ls = (dir / "ls.json").string();

  CHECK(run_cli("generate --states 6 --seed 5 --grid 0.5,1.0,2.0 -o " +
                plant) == 0);
  CHECK(run_cli("discretize " + plant + " -o " + ls) == 0);
  CHECK(run_cli("certify " + ls + " --plant " + plant) == 0);
}

TEST_CASE("cli: malformed json exits 2") {
  const fs::path dir = fresh_dir("badjson");
  const std::string path = (dir / "broken.json").string();
  std::ofstream(path) << "{ not json";
  CHECK(run_cli("discretize " + path + " -o " + (dir / "out.json").string()) ==
        2);
}

TEST_CASE("cli: invalid grid exits 3") {
  const fs::path dir = fresh_dir("badgrid");
  const std::string plant = (dir / "plant.json").string();
  CHECK(run_cli("generate --states 3 --seed 2 -o " + plant) == 0);
  CHECK(run_cli("discretize " + plant + " --grid 0.0,1.0 -o " +
                (dir / "out.json").string()) == 3);
}

TEST_CASE("cli: infeasible order request exits 4") {
  const fs::path dir = fresh_dir("infeasible");
  const std::string plant = (dir / "plant.json").string();
  CHECK(run_cli("generate --states 5 --seed 3 --grid 1.0,2.0 -o " + plant) ==
        0);
  CHECK(run_cli("reduce " + plant + " --approach 2 --order 0 -o " +
                (dir / "red.json").string()) == 4);
}

TEST_CASE("cli: refuted certificate exits 5") {
  const fs::path dir = fresh_dir("refuted");
  // Hand-written expanding mode: A = 2 I.
  const std::string ls = (dir / "bad_ls.json").string();
  std::ofstream(ls) << R"({
    "kind": "ls",
    "A_i": [[[2.0, 0.0], [0.0, 2.0]]],
    "B_i": [[[1.0], [1.0]]],
    "C": [[1.0, 0.0]]
  })";
  const std::string pfile = (dir / "p.json").string();
  std::ofstream(pfile) << R"({"P": [[1.0, 0.0], [0.0, 1.0]]})";
  CHECK(run_cli("certify " + ls + " --p-file " + pfile) == 5);
}

TEST_CASE("cli: unstable plant hypothesis exits 6") {
  const fs::path dir = fresh_dir("unstable");
  const std::string plant = (dir / "plant.json").string();
  const std::string ls = (dir / "ls.json").string();
  CHECK(run_cli("generate --states 6 --unstable --seed 7 --grid 0.2,0.4 -o " +
                plant) == 0);
  CHECK(run_cli("discretize " + plant + " -o " + ls) == 0);
  CHECK(run_cli("certify " + ls + " --plant " + plant) == 6);
}

TEST_CASE("cli: prescribed spectrum generation") {
  const fs::path dir = fresh_dir("spectrum");
  const std::string plant = (dir / "plant.json").string();
  CHECK(run_cli(
            "generate --states 3 --spectrum -0.5+2i,-0.5-2i,-3 --seed 1 -o " +
            plant) == 0);
  const SystemFile file = load_system_file(plant);
  REQUIRE(file.kind == SystemFile::Kind::lti);
  const auto hw = is_hurwitz(*file.lti);
  CHECK(hw.hurwitz);
  CHECK(hw.abscissa == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("cli: reduce writes a loadable switched model and report") {
  const fs::path dir = fresh_dir("reduce");
  const std::string plant = (dir / "plant.json").string();
  const std::string red = (dir / "red.json").string();
  const std::string report = (dir / "report.json").string();
  CHECK(run_cli("generate --states 10 --seed 11 --grid 0.1,0.15,0.2,0.3 -o " +
                plant) == 0);
  CHECK(run_cli("reduce " + plant + " --approach 2 --order 4 -o " + red +
                " --report " + report) == 0);
  const SystemFile file = load_system_file(red);
  REQUIRE(file.kind == SystemFile::Kind::ls);
  CHECK(file.ls->order() == 4);
  CHECK(file.ls->mode_count() == 4);
  const auto rep = nlohmann::json::parse(read_file(report));
  CHECK(rep["r"] == 4);
  CHECK(rep["certificate_present"] == true);
}

TEST_CASE("cli: a reduced model re-certifies from its reported P") {
  const fs::path dir = fresh_dir("recertify");
  const std::string plant = (dir / "plant.json").string();
  const std::string red = (dir / "red.json").string();
  const std::string report = (dir / "report.json").string();
  CHECK(run_cli("generate --states 8 --seed 17 --grid 0.3,0.9 -o " + plant) ==
        0);
  CHECK(run_cli("reduce " + plant + " --approach 2 --order 3 -o " + red +
                " --report " + report) == 0);
  const auto rep = nlohmann::json::parse(read_file(report));
  REQUIRE(rep["certificate_present"] == true);
  nlohmann::json pfile;
  pfile["P"] = rep["certificate"]["P"];
  std::ofstream((dir / "p.json")) << pfile.dump();
  CHECK(run_cli("certify " + red + " --p-file " + (dir / "p.json").string()) ==
        0);
  // The full plant's P has the wrong order for the reduced model.
  CHECK(run_cli("certify " + red + " --plant " + plant) == 3);
}

TEST_CASE("cli: seventeen moments of a 50-state plant give order 18") {
  const fs::path dir = fresh_dir("moments");
  const std::string plant = (dir / "plant.json").string();
  const std::string red = (dir / "red.json").string();
  const std::string report = (dir / "report.json").string();
  CHECK(run_cli("generate --states 50 --seed 13 --grid 1,1.5,2,3 -o " +
                plant) == 0);
  CHECK(run_cli("reduce " + plant + " --approach 1 --moments 17 -o " + red +
                " --report " + report) == 0);
  const auto rep = nlohmann::json::parse(read_file(report));
  CHECK(rep["N"] == 17);
  CHECK(rep["r"] == 18);
}

TEST_CASE("cli: forcing the stable inverse on an unstable plant exits 6") {
  const fs::path dir = fresh_dir("forced");
  const std::string plant = (dir / "plant.json").string();
  CHECK(run_cli("generate --states 5 --unstable --seed 21 --grid 0.2 -o " +
                plant) == 0);
  CHECK(run_cli("reduce " + plant + " --approach 2 --order 2 "
                "--stable-inverse -o " + (dir / "red.json").string()) == 6);
}

TEST_CASE("cli: campaign outputs are byte-identical across reruns") {
  const fs::path dir = fresh_dir("campaign");
  const std::string plant = (dir / "plant.json").string();
  CHECK(run_cli("generate --states 6 --seed 9 --grid 0.4,0.8 -o " + plant) ==
        0);
  const std::string out1 = (dir / "run1").string();
  const std::string out2 = (dir / "run2").string();
  const std::string base = "campaign " + plant +
                           " --order 3 --count 6 --seed 12345 --horizon 6"
                           " --out-dir ";
  // Different worker counts must not change a single byte.
  CHECK(run_cli("SAMRED_THREADS=1 " + std::string(SAMRED_CLI_PATH) + " " +
                    base + out1,
                true) == 0);
  CHECK(run_cli("SAMRED_THREADS=4 " + std::string(SAMRED_CLI_PATH) + " " +
                    base + out2,
                true) == 0);
  for (const char* name :
       {"summary.json", "representative_approach1.csv",
        "representative_approach2.csv", "representative_approach1.dat",
        "representative_approach2.dat"}) {
    const std::string a = read_file(fs::path(out1) / name);
    const std::string b = read_file(fs::path(out2) / name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }
  // CSV header carries the documented column layout.
  const std::string csv =
      read_file(fs::path(out1) / "representative_approach1.csv");
  CHECK(csv.rfind("k,t,y_1,ybar1_1,ybar2_1", 0) == 0);
}
