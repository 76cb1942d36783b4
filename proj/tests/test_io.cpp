#include <doctest.h>

#include <fstream>
#include <sstream>

#include "thermoform/experiment.hpp"

using namespace thermoform;
using io::Json;

namespace {

std::string error_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("thermoform_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("number formatting keeps 12 significant digits") {
  CHECK(io::format_number(0.1 + 0.2) == "0.3");
  CHECK(io::format_number(std::log(2.0)) == "0.69314718056");
  CHECK(io::format_number(-1.0 / 0.0) == "-inf");
  CHECK(io::format_number(1e-20) == "1e-20");
  CHECK(io::round12(-0.0) == 0.0);
  CHECK(io::json_number(std::log(2.0)).dump() == "0.69314718056");
  CHECK(io::json_extended(Extended::pos_inf()).dump() == "\"inf\"");
}

TEST_CASE("csv quoting follows RFC 4180") {
  io::CsvWriter w({"a", "b"});
  w.row({"[0.8,1]", "say \"hi\""});
  CHECK(w.str() == "a,b\r\n\"[0.8,1]\",\"say \"\"hi\"\"\"\r\n");
  CHECK_THROWS_AS(w.row({"x"}), Error);
}

TEST_CASE("config validation names the offending field") {
  const Json base = Json::parse(R"({"task": "equilibrium", "space": {"k": 2, "matrix": [[1, 1], [1, 0]]}})");
  CHECK(error_of(base).empty());

  Json j = base;
  j["space"]["matrix"] = Json::parse("[[1, 1], [0, 0]]");
  CHECK(error_of(j).find("space.matrix: transition matrix row 1 is zero") == 0);

  j = base;
  j["space"]["matrix"][0][1] = 2;
  CHECK(error_of(j).find("space.matrix[0][1]") == 0);

  j = base;
  j["task"] = "sing";
  CHECK(error_of(j).find("task: unknown task") == 0);

  j = base;
  j["colour"] = "blue";
  CHECK(error_of(j).find("colour: unknown field") == 0);

  j = base;
  j["potential"] = Json::parse(R"({"window": 2, "values": {"00": 1, "01": 2, "11": 3}})");
  CHECK(error_of(j).find("potential.values") == 0);

  j = base;
  j["dual"] = Json::parse(R"({"gradient_tolerance": 0.5})");
  CHECK(error_of(j).find("dual.gradient_tolerance: must be in") == 0);

  j = Json::parse(R"({"task": "ldp-report", "space": {"k": 2}, "observables": [{"indicator": "1"}],
                      "parameters": {"variant": "gibbs", "n": [4], "box": {"lo": [0.9], "hi": [0.1]}}})");
  CHECK(error_of(j).find("parameters.box") == 0);

  j = Json::parse(R"({"task": "ldp-report", "space": {"k": 2}, "observables": [{"indicator": "1"}],
                      "parameters": {"variant": "periodic", "n": [4, 30], "box": {"lo": [0.9], "hi": [1]}}})");
  CHECK(error_of(j).find("parameters.n[1]: periodic points of period 30 has 1073741824 items") == 0);

  j = Json::parse(R"({"task": "2d-pressure", "space": {"k": 2, "dimension": 2},
                      "parameters": {"interaction": {"potts": 1}, "widths": [7]}})");
  CHECK(error_of(j).find("parameters.widths[0]: must be in [2, 6]") == 0);

  j = Json::parse(R"({"task": "entropy-approx", "space": {"k": 2, "matrix": [[1, 1], [1, 0]]},
                      "parameters": {"max_window": 3, "target": {"periodic_orbit": "11"}}})");
  CHECK(error_of(j).find("parameters.target.periodic_orbit") == 0);
}

TEST_CASE("measure specs") {
  const auto gm = ShiftSpace::sft(2, {{1, 1}, {1, 0}});
  const Json spec = Json::parse(R"({"components": [{"weight": 1, "order": 1, "transition": [[0.5, 0.5], [1, 0]]}]})");
  const InvariantMeasure mu = io::parse_measure(gm, io::Field(spec, "m"), {});
  CHECK(mu.components()[0].measure.stationary()(0) == doctest::Approx(2.0 / 3));
  const Json out = io::to_json(mu);
  CHECK(out["components"][0]["stationary"][0].get<double>() == doctest::Approx(2.0 / 3));
  const Json bad = Json::parse(R"({"components": [{"order": 1, "transition": [[0.5, 0.5], [0.5, 0.5]]}]})");
  CHECK_THROWS_AS(io::parse_measure(gm, io::Field(bad, "m"), {}), ValidationError);
}

TEST_CASE("shipped configs validate and run") {
  const auto out = scratch("configs");
  for (const auto& entry : std::filesystem::directory_iterator(THERMOFORM_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    const ExperimentConfig c = load_config(entry.path());
    const RunReport r = run_experiment(c, out, 2);
    CHECK_FALSE(r.non_convergence.has_value());
    for (const auto& a : r.artifacts) CHECK(std::filesystem::exists(a));
  }

  SUBCASE("pressure sweep error shrinks") {
    const std::string csv = slurp(out / "golden_pressure_sweep_periodic.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,estimate,spectral_reference,abs_error\r");
    double prev = 1e9;
    while (std::getline(in, line)) {
      const double err = std::stod(line.substr(line.rfind(',') + 1));
      CHECK(err < prev);
      prev = err;
    }
  }
  SUBCASE("equilibrium of the biased coin") {
    const Json doc = io::read_json_file(out / "biased_coin_equilibrium.json");
    CHECK(doc["measure"]["stationary"][0].get<double>() == 0.25);
    CHECK(doc["measure"]["stationary"][1].get<double>() == 0.75);
    CHECK(doc["config"]["task"] == "equilibrium");
    std::vector<std::string> keys;
    for (auto it = doc.begin(); it != doc.end(); ++it) keys.push_back(it.key());
    CHECK(keys[0] == "task");
    CHECK(keys[1] == "name");
    CHECK(keys[2] == "config");
  }
}
