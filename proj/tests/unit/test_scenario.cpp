#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "swnet/error.hpp"
#include "swnet/scenario.hpp"
#include "swnet/sim.hpp"

using namespace swnet;

namespace {

std::string schema_message(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) return e.what();
    return std::string("other: ") + e.what();
  }
  return "no error";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("swnet_unit_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("parse the basic analyze scenario") {
  const ScenarioConfig c = parse_scenario_text(R"({"preset":"ex2","experiment":{"kind":"analyze"},"lambda":[1,1]})");
  REQUIRE(c.model.has_value());
  CHECK(c.model->n_queues == 2);
  CHECK(c.experiment.kind == ExperimentKind::kAnalyze);
  CHECK((*c.lambda)[0] == 1);

  const ScenarioConfig s = parse_scenario_text(R"({"preset":"iq_switch","M":3,"experiment":{"kind":"analyze"}})");
  CHECK(s.model->n_queues == 9);
  CHECK(s.model->schedules.size() == 6);
}

TEST_CASE("schema errors carry a JSON pointer") {
  CHECK(schema_message(R"({"preset":"ex2","lambda":[1,1]})").find("/experiment") != std::string::npos);
  CHECK(schema_message(R"({"preset":"ex2","experiment":{"kind":"analyze"},"colour":1})").find("/colour") !=
        std::string::npos);
  CHECK(schema_message(R"({"preset":"ex2","experiment":{"kind":"analyze","hh":1}})").find("/experiment/hh") !=
        std::string::npos);
  CHECK(schema_message(R"({"preset":"ex2","lambda":[1],"experiment":{"kind":"analyze"}})").find("/lambda") !=
        std::string::npos);
  CHECK(schema_message(R"({"preset":"ex2","lambda":[1,"x/y"],"experiment":{"kind":"analyze"}})").find("/lambda/1") !=
        std::string::npos);
  CHECK(schema_message(R"({"preset":"ex2","lambda":[1.5,1],"experiment":{"kind":"analyze"}})").find("/arrivals") !=
        std::string::npos);
  try {
    parse_scenario_text(R"({"preset":"hypercube","experiment":{"kind":"analyze"}})");
    FAIL("expected PresetUnknown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPresetUnknown);
  }
}

TEST_CASE("rationals from strings and floats") {
  const ScenarioConfig c =
      parse_scenario_text(R"({"preset":"ex2","lambda":["1/3",0.1],"experiment":{"kind":"analyze"}})");
  CHECK((*c.lambda)[0] == parse_rational("1/3"));
  CHECK((*c.lambda)[1] == parse_rational("1/10"));
}

TEST_CASE("custom network with routing") {
  const ScenarioConfig c = parse_scenario_text(
      R"({"network":{"queues":2,"schedules":[[1,1]],"routing":[[1,2]],"monotone_closure":true},
          "lambda":["1/2",0],"experiment":{"kind":"lift","q":[1,1]}})");
  CHECK(c.model->hop_kind == HopKind::kMulti);
  CHECK(c.model->schedules.size() == 4);
  CHECK(c.policy.kind == PolicyKind::kBackpressure);
}

TEST_CASE("analyze writes the virtual resources") {
  ScenarioConfig c = parse_scenario_text(R"({"preset":"ex2","experiment":{"kind":"analyze"},"lambda":[1,1]})");
  c.out = scratch("analyze").string();
  std::ostringstream log;
  CHECK(execute(c, log) == 0);
  const std::string a = slurp(std::filesystem::path(c.out) / "analysis.json");
  CHECK(a.find("\"s_star\": [\n    [\n      \"0\",\n      \"1\"\n    ],\n    [\n      \"1/3\",\n      \"2/3\"") !=
        std::string::npos);
  CHECK(std::filesystem::exists(std::filesystem::path(c.out) / "manifest.json"));
}

TEST_CASE("simulate audits a corrupted fixture") {
  const auto dir = scratch("fixture");
  std::filesystem::create_directories(dir);
  {
    const SystemPath p = run(presets::ex2(), Policy::mw(WeightFunction::power(1)),
                             ArrivalModel::deterministic({1, 1}), Vec{2, 2}, 20, 1);
    std::ostringstream csv;
    write_csv(csv, p);
    std::string text = csv.str();
    // Row for tau = 5 starts with "5,"; bump its first queue entry.
    const auto pos = text.find("\n5,");
    REQUIRE(pos != std::string::npos);
    text.insert(pos + 3, "1");
    std::ofstream(dir / "bad.csv") << text;
  }
  ScenarioConfig c = parse_scenario_text(R"({"preset":"ex2","experiment":{"kind":"simulate","audit_csv":")" +
                                         (dir / "bad.csv").string() + R"("}})");
  c.out = (dir / "out").string();
  std::ostringstream log;
  CHECK(execute(c, log) == 2);
  const std::string audit = slurp(dir / "out" / "audit.json");
  CHECK(audit.find("\"ok\": false") != std::string::npos);
  CHECK(audit.find("\"tau\": 5") != std::string::npos);
}

TEST_CASE("identical config and seed give identical files") {
  const std::string text =
      R"({"preset":"iq_switch","M":2,"lambda":[0.5,0.5,0.5,0.5],"seed":7,
          "experiment":{"kind":"collapse","q0":[1,0.5,0.5,0],"r":[5,10],"reps":3}})";
  ScenarioConfig a = parse_scenario_text(text);
  ScenarioConfig b = parse_scenario_text(text, CliOverrides{std::nullopt, std::nullopt, std::size_t{2}});
  a.out = scratch("det_a").string();
  b.out = scratch("det_b").string();
  std::ostringstream log;
  execute(a, log);
  execute(b, log);
  for (const char* f : {"mssc.csv", "summary.json", "manifest.json"}) {
    CHECK(slurp(std::filesystem::path(a.out) / f) == slurp(std::filesystem::path(b.out) / f));
  }
  ScenarioConfig c = parse_scenario_text(text, CliOverrides{std::nullopt, std::uint64_t{8}, std::nullopt});
  c.out = scratch("det_c").string();
  execute(c, log);
  CHECK(slurp(std::filesystem::path(a.out) / "mssc.csv") != slurp(std::filesystem::path(c.out) / "mssc.csv"));
}
