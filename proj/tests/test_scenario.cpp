#include <LocoManip/Batch.h>
#include <LocoManip/Errors.h>
#include <LocoManip/Scenario.h>
#include <LocoManip/Trace.h>

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace locomanip;

namespace
{

const std::vector<std::string> BUNDLED = {"nominal", "testcase1", "testcase2", "testcase3", "cart"};

std::string scenarioPath(const std::string & name)
{
  return std::string(LOCOMANIP_SCENARIO_DIR) + "/" + name + ".yaml";
}

std::string errorOf(const std::string & yaml, const std::vector<std::string> & overrides = {})
{
  try
  {
    parseScenario(yaml, overrides);
  }
  catch(const ConfigError & e)
  {
    return e.what();
  }
  return "";
}

ScenarioConfig shortNominal(double duration = 2.0)
{
  auto config = loadScenario(scenarioPath("nominal"));
  config.duration = duration;
  return config;
}

} // namespace

TEST(ScenarioParse, BundledFilesLoadAndRoundTrip)
{
  for(const auto & name : BUNDLED)
  {
    const auto config = loadScenario(scenarioPath(name));
    EXPECT_EQ(config.name, name);
    const auto again = parseScenario(toYaml(config));
    EXPECT_TRUE(again == config) << name;
  }
}

TEST(ScenarioParse, Defaults)
{
  const auto config = parseScenario("name: bare\nduration_s: 1.0\n");
  EXPECT_EQ(config.robot, RobotParams{});
  EXPECT_EQ(config.controller.dt, 0.002);
  EXPECT_EQ(config.stepping.mode, SteppingConfig::Mode::InPlace);
  EXPECT_TRUE(config.disturbances.empty());
}

TEST(ScenarioParse, Overrides)
{
  const auto config = loadScenario(scenarioPath("testcase3"),
                                   {"robot.mass_kg=80", "disturbances.1.period_s=4.0", "name=renamed",
                                    "plant.initial_com_offset_m=[0.01, 0.02]"});
  EXPECT_EQ(config.robot.mass, 80.0);
  EXPECT_EQ(config.disturbances.at(1).period, 4.0);
  EXPECT_EQ(config.name, "renamed");
  EXPECT_EQ(config.initial_com_offset, Eigen::Vector2d(0.01, 0.02));
  EXPECT_THROW(loadScenario(scenarioPath("nominal"), {"no_equals_sign"}), ConfigError);
  EXPECT_THROW(loadScenario(scenarioPath("nominal"), {"disturbances.3.period_s=1"}), ConfigError);
}

TEST(ScenarioParse, ErrorsNameTheField)
{
  const std::string bad_mass = "name: x\nduration_s: 1\nrobot:\n  mass_kg: -3\n";
  const auto msg = errorOf(bad_mass);
  EXPECT_NE(msg.find("robot.mass_kg"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;

  const auto unknown = errorOf("name: x\nduration_s: 1\nrobot:\n  height: 1\n");
  EXPECT_NE(unknown.find("robot.height"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("unknown"), std::string::npos) << unknown;

  EXPECT_NE(errorOf("name: x\nduration_s: abc\n").find("duration_s"), std::string::npos);
  EXPECT_NE(errorOf("name: x\nduration_s: 1\nstepping: {mode: hopping}\n").find("stepping.mode"),
            std::string::npos);
  EXPECT_NE(errorOf("name: x\nduration_s: 1\ndisturbances: [{contact: 2, kind: constant, force_n: [1, 0, 0]}]\n")
                .find("disturbances"),
            std::string::npos);
  EXPECT_FALSE(errorOf("name: [unterminated\n").empty());
  EXPECT_THROW(loadScenario("/nonexistent/file.yaml"), ConfigError);
}

TEST(ScenarioParse, UnknownThresholdMetric)
{
  auto config = shortNominal(0.5);
  config.metrics.thresholds.push_back({"no_such_metric", std::nullopt, 1.0});
  EXPECT_THROW(runScenario(config), ConfigError);
}

TEST(Trace, CsvRoundTripIsExact)
{
  const auto result = runScenario(shortNominal());
  std::stringstream ss;
  writeTraceCsv(result.trace, ss);
  const auto back = readTraceCsv(ss);
  ASSERT_EQ(back.rows.size(), result.trace.rows.size());
  for(size_t k = 0; k < back.rows.size(); ++k)
  {
    ASSERT_EQ(back.rows[k], result.trace.rows[k]) << "row " << k;
  }
  EXPECT_NEAR(back.dt, 0.002, 1e-12);

  std::string text = ss.str();
  std::stringstream header_only("time,foo\n0,1\n");
  EXPECT_THROW(readTraceCsv(header_only), SchemaMismatchError);
}

TEST(Trace, HeaderColumns)
{
  const auto & cols = traceColumns();
  EXPECT_EQ(cols.front(), "time");
  EXPECT_EQ(cols.size(), 26u);
}

TEST(Trace, CompareIdenticalAndMismatched)
{
  const auto a = runScenario(shortNominal()).trace;
  const auto report = compareRuns(a, a, {"rms_zmp_dev", "rms_com_dev"});
  EXPECT_EQ(report.verdict, "identical");
  for(const auto & e : report.entries)
  {
    EXPECT_EQ(e.ratio, 1.0);
  }

  auto coarse = shortNominal();
  coarse.controller.dt = 0.004;
  const auto b = runScenario(coarse).trace;
  EXPECT_THROW(compareRuns(a, b, {"rms_zmp_dev"}), SchemaMismatchError);

  const auto longer = runScenario(shortNominal(3.0)).trace;
  EXPECT_THROW(compareRuns(a, longer, {"rms_zmp_dev"}), SchemaMismatchError);
  EXPECT_NO_THROW(compareRuns(a, longer, {"rms_zmp_dev"}, {}, true));
  EXPECT_THROW(compareRuns(a, a, {"not_a_metric"}), SchemaMismatchError);
}

TEST(Trace, MetricsFileFormat)
{
  const auto result = runScenario(shortNominal());
  std::stringstream ss;
  writeScenarioMetrics(result, ss);
  const std::string text = ss.str();
  EXPECT_NE(text.find("rms_zmp_dev="), std::string::npos);
  EXPECT_NE(text.find("check.max_dcm_err=pass"), std::string::npos);
  EXPECT_NE(text.find("checks=pass"), std::string::npos);
  std::stringstream in(text);
  const auto parsed = readMetrics(in);
  EXPECT_EQ(parsed.at("rms_zmp_dev"), result.metrics.at("rms_zmp_dev"));
  EXPECT_EQ(parsed.at("checks"), 1.0);
}

TEST(Scenario, OutputsWritten)
{
  const auto dir = std::filesystem::temp_directory_path() / "locomanip_test_outputs";
  std::filesystem::remove_all(dir);
  const auto result = runScenario(shortNominal(1.0));
  writeScenarioOutputs(result, dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "nominal.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "nominal.metrics"));
  std::filesystem::remove_all(dir);
}

TEST(Batch, ParallelMatchesSerial)
{
  std::vector<ScenarioConfig> configs;
  for(int i = 0; i < 6; ++i)
  {
    auto c = loadScenario(scenarioPath(i % 2 ? "cart" : "testcase1"));
    c.duration = 3.0;
    c.name += std::to_string(i);
    c.com_noise = 1e-4 * i;
    c.seed = static_cast<uint64_t>(i);
    configs.push_back(c);
  }
  auto broken = configs.front();
  broken.robot.mass = -1.0;
  configs.push_back(broken);

  const auto serial = runScenariosSerial(configs);
  const auto parallel = runScenarios(configs, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for(size_t i = 0; i < serial.size(); ++i)
  {
    ASSERT_EQ(serial[i].result.has_value(), parallel[i].result.has_value());
    EXPECT_EQ(serial[i].error, parallel[i].error);
    if(!serial[i].result)
    {
      continue;
    }
    const auto & a = serial[i].result->trace.rows;
    const auto & b = parallel[i].result->trace.rows;
    ASSERT_EQ(a.size(), b.size());
    for(size_t k = 0; k < a.size(); ++k)
    {
      ASSERT_EQ(a[k], b[k]) << configs[i].name << " row " << k;
    }
    EXPECT_EQ(serial[i].result->metrics, parallel[i].result->metrics);
  }
  EXPECT_FALSE(serial.back().result);
  EXPECT_FALSE(serial.back().error.empty());
}
