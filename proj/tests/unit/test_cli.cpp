#include <doctest.h>

#include "commands.hpp"
#include "subind/io.hpp"
#include "subind/oracle.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace subind;

namespace {

const std::string kData = SUBIND_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "subind");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "subind_cli_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("solve the two-chain problem") {
  const auto out = scratch("two_solution.json");
  for (std::string engine : {"exhaustive", "mnp"}) {
    const auto r = run({"solve", "-i", kData + "/two_chain_problem.json", "--engine", engine, "-o", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("value -0.15 z=[1,0]") == 0);
    const auto json = io::read_json(out);
    CHECK(json["value"].get<double>() == doctest::Approx(-0.15));
    CHECK(json["z"] == io::Json::array({1, 0}));
    CHECK(json["engine"] == engine);
  }
}

TEST_CASE("the MRF encoding of the two-chain adds its constant") {
  const auto r = run({"solve", "-i", kData + "/two_chain_instance.json"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("value 0.35 z=[1,0]") == 0);

  const auto e = run({"eval", "-i", kData + "/two_chain_instance.json", "--z", "0", "0"});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("v(z) = 0.5,") == 0);
}

TEST_CASE("exit codes") {
  const auto bad = scratch("bad.json");
  std::ofstream(bad) << "{\"mode\": ";
  CHECK(run({"solve", "-i", bad}).code == 1);
  CHECK(run({"solve", "-i", kData + "/two_chain_problem.json", "--engine", "flow"}).code == 1);
  CHECK(run({"solve"}).code == 1);
  CHECK(run({"eval", "-i", kData + "/two_chain_problem.json", "--z", "1"}).code == 1);
  CHECK(run({"bench", "--sizes", "1"}).code == 1);
  CHECK(run({"bench", "--reps", "2"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
}

TEST_CASE("generate writes the instance and its truth") {
  const auto path = scratch("gen.json");
  const auto r = run({"generate", "--mode", "robust", "--dims", "3", "3", "--topology", "grid2d", "--outliers",
                      "0.2", "--seed", "9", "-o", path});
  REQUIRE(r.code == 0);
  const auto inst = io::read_instance(path);
  CHECK(inst.size() == 9);
  CHECK(inst.mode == Mode::robust);
  const auto truth = io::read_json(io::truth_path(path));
  CHECK(truth["outliers"].size() == 2);

  // same seed, same bytes
  const auto again = scratch("gen2.json");
  run({"generate", "--mode", "robust", "--dims", "3", "3", "--topology", "grid2d", "--outliers", "0.2", "--seed",
       "9", "-o", again});
  std::ifstream a(path), b(again);
  CHECK(std::string(std::istreambuf_iterator<char>(a), {}) == std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST_CASE("trace, verify and check") {
  const auto out = scratch("trace.json");
  REQUIRE(run({"trace", "-i", kData + "/two_chain_problem.json", "--order", "1", "0", "-o", out}).code == 0);
  const auto json = io::read_json(out);
  CHECK(json["order"] == io::Json::array({1, 0}));
  CHECK(json["values"][2].get<double>() == doctest::Approx(-1.0 / 3.0));

  CHECK(run({"verify", "--trials", "5", "--n", "5", "--seed", "2"}).code == 0);
  CHECK(run({"check", "-i", kData + "/two_chain_problem.json"}).code == 0);
}

TEST_CASE("a recorded witness replays its failure") {
  InstanceSampler s;
  s.n = 3;
  s.adversarial_rate = 1.0;
  const auto report = run_property_suite(s, 1);
  REQUIRE(report.tallies.front().witness.has_value());
  const auto path = scratch("witness.json");
  io::write_json(path, *report.tallies.front().witness);
  CHECK(run({"check", "--witness", path}).code == 3);
}
