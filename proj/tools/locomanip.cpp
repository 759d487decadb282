#include <LocoManip/Batch.h>
#include <LocoManip/Errors.h>
#include <LocoManip/Scenario.h>

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <iomanip>
#include <iostream>

using namespace locomanip;

namespace
{

constexpr int EXIT_OK = 0;
constexpr int EXIT_ERROR = 1;
constexpr int EXIT_DIVERGED = 2;

void printChecks(const ScenarioResult & r)
{
  for(const auto & c : r.checks)
  {
    std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << c.threshold.metric << " = " << c.value;
    if(c.threshold.min)
    {
      std::cout << " (min " << *c.threshold.min << ")";
    }
    if(c.threshold.max)
    {
      std::cout << " (max " << *c.threshold.max << ")";
    }
    std::cout << "\n";
  }
}

ScenarioConfig loadWithSeed(const std::string & path, const std::vector<std::string> & overrides,
                            const std::optional<uint64_t> & seed)
{
  auto config = loadScenario(path, overrides);
  if(seed)
  {
    config.seed = *seed;
  }
  return config;
}

int runCommand(const std::string & config_path, const std::string & out_dir,
               const std::optional<uint64_t> & seed, const std::vector<std::string> & overrides)
{
  const auto config = loadWithSeed(config_path, overrides, seed);
  const auto result = runScenario(config);
  const std::string dir = out_dir.empty() ? config.output_directory : out_dir;
  writeScenarioOutputs(result, dir);
  std::cout << config.name << ": " << result.trace.rows.size() << " steps, trace and metrics in " << dir << "\n";
  std::cout << "  rms_zmp_dev = " << result.metrics.at("rms_zmp_dev")
            << " m, max_dcm_err = " << result.metrics.at("max_dcm_err") << " m\n";
  printChecks(result);
  if(result.diverged())
  {
    std::cerr << config.name << ": diverged at t = " << result.trace.rows.back().time << " s\n";
    return EXIT_DIVERGED;
  }
  return EXIT_OK;
}

int gainsCommand(const std::string & config_path, const std::vector<std::string> & overrides)
{
  const auto config = loadScenario(config_path, overrides);
  const double omega = naturalFrequency(config.robot);
  const auto & ctl = config.controller;
  const auto gains = synthesizeGains(ctl.weights, omega, ctl.dt, ctl.preview_window);
  std::cout << std::setprecision(12);
  std::cout << "omega=" << omega << "\n";
  std::cout << "dt=" << gains.dt << "\n";
  std::cout << "n_horizon=" << gains.n_horizon << "\n";
  std::cout << "riccati_iterations=" << gains.riccati_iterations << "\n";
  std::cout << "k_fb=" << gains.k_fb(0) << "," << gains.k_fb(1) << "," << gains.k_fb(2) << "\n";
  double ff_sum = 0.0;
  for(double k : gains.k_ff)
  {
    ff_sum += k;
  }
  std::cout << "k_ff_sum=" << ff_sum << "\n";
  std::cout << "k_ff_first=" << gains.k_ff.front() << "\n";
  std::cout << "k_ff_last=" << gains.k_ff.back() << "\n";

  const auto sys = discretize(omega, ctl.dt);
  const Eigen::Matrix3d closed = sys.A - sys.B * gains.k_fb;
  const Eigen::Vector3cd pg_eig = closed.eigenvalues();
  for(int i = 0; i < 3; ++i)
  {
    std::cout << "pg_eigenvalue_" << i << "=" << pg_eig(i).real() << "," << pg_eig(i).imag() << "\n";
  }
  std::cout << "pg_spectral_radius=" << gains.closedLoopSpectralRadius() << "\n";

  const auto & st = ctl.stabilizer;
  const Eigen::Matrix3d st_matrix = dcmErrorClosedLoop(1.0, st.rho, omega, Eigen::Vector3d(st.k_i, st.k_p, st.k_d));
  const Eigen::Vector3cd st_eig = st_matrix.eigenvalues();
  for(int i = 0; i < 3; ++i)
  {
    std::cout << "st_eigenvalue_" << i << "=" << st_eig(i).real() << "," << st_eig(i).imag() << "\n";
  }
  return EXIT_OK;
}

std::vector<std::string> splitList(const std::string & text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while(std::getline(ss, item, ','))
  {
    if(!item.empty())
    {
      out.push_back(item);
    }
  }
  return out;
}

TraceLog readTraceFile(const std::string & path)
{
  std::ifstream in(path);
  if(!in)
  {
    throw ConfigError(path + ": cannot open trace");
  }
  return readTraceCsv(in);
}

int compareCommand(const std::string & a_path, const std::string & b_path, const std::string & metrics,
                   double window_start, bool allow_truncated, const std::string & out_path)
{
  const auto a = readTraceFile(a_path);
  const auto b = readTraceFile(b_path);
  EvalWindow window;
  window.start = window_start;
  const auto report = compareRuns(a, b, splitList(metrics), window, allow_truncated);
  if(out_path.empty())
  {
    writeComparison(report, std::cout);
  }
  else
  {
    std::ofstream out(out_path);
    writeComparison(report, out);
  }
  return EXIT_OK;
}

int batchCommand(const std::vector<std::string> & configs, const std::string & out_dir,
                 const std::vector<std::string> & overrides, int threads, bool serial)
{
  std::vector<ScenarioConfig> loaded;
  for(const auto & path : configs)
  {
    loaded.push_back(loadScenario(path, overrides));
  }
  const auto entries = serial ? runScenariosSerial(loaded) : runScenarios(loaded, threads);
  int status = EXIT_OK;
  for(size_t i = 0; i < entries.size(); ++i)
  {
    const auto & e = entries[i];
    if(!e.result)
    {
      std::cerr << configs[i] << ": " << e.error << "\n";
      status = EXIT_ERROR;
      continue;
    }
    writeScenarioOutputs(*e.result, out_dir.empty() ? loaded[i].output_directory : out_dir);
    std::cout << e.result->name << ": " << (e.result->diverged() ? "diverged" : "completed") << ", checks "
              << (e.result->allChecksPass() ? "pass" : "fail") << "\n";
    if(e.result->diverged() && status == EXIT_OK)
    {
      status = EXIT_DIVERGED;
    }
  }
  return status;
}

} // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Loco-manipulation pattern generator, stabilizer and point-mass simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::vector<std::string> overrides;

  auto * run = app.add_subcommand("run", "Run one scenario and write its CSV trace and metrics");
  run->add_option("--config", config_path, "Scenario YAML file")->required();
  run->add_option("--out", out_dir, "Output directory (default: output.directory of the scenario)");
  run->add_option("--seed", seed, "Seed of the measurement noise");
  run->add_option("--override", overrides, "Replace a config value, dotted.key=value (repeatable)");

  auto * gains = app.add_subcommand("gains", "Print the preview gains and closed-loop eigenvalues");
  gains->add_option("--config", config_path, "Scenario YAML file")->required();
  gains->add_option("--override", overrides, "Replace a config value, dotted.key=value (repeatable)");

  std::string trace_a, trace_b, metric_list = "rms_zmp_dev,rms_com_dev", report_path;
  double window_start = 0.0;
  bool allow_truncated = false;
  auto * compare = app.add_subcommand("compare", "Compare two traces metric by metric");
  compare->add_option("trace_a", trace_a, "Reference trace CSV")->required();
  compare->add_option("trace_b", trace_b, "Compared trace CSV")->required();
  compare->add_option("--metrics", metric_list, "Comma-separated metric names");
  compare->add_option("--window-start", window_start, "Ignore samples before this time [s]");
  compare->add_flag("--allow-truncated", allow_truncated,
                    "Compare on the common span when one run stopped early on divergence");
  compare->add_option("--out", report_path, "Write the report to this file instead of stdout");

  std::vector<std::string> batch_configs;
  int threads = 0;
  bool serial = false;
  auto * batch = app.add_subcommand("batch", "Run several scenarios in parallel");
  batch->add_option("--config", batch_configs, "Scenario YAML files")->required();
  batch->add_option("--out", out_dir, "Output directory");
  batch->add_option("--override", overrides, "Override applied to every scenario (repeatable)");
  batch->add_option("--threads", threads, "Worker threads (default: OpenMP default)");
  batch->add_flag("--serial", serial, "Use the serial reference runner");

  try
  {
    app.parse(argc, argv);
  }
  catch(const CLI::ParseError & e)
  {
    const int code = app.exit(e);
    return code == 0 ? EXIT_OK : EXIT_ERROR;
  }

  try
  {
    if(*run)
    {
      return runCommand(config_path, out_dir, seed, overrides);
    }
    if(*gains)
    {
      return gainsCommand(config_path, overrides);
    }
    if(*compare)
    {
      return compareCommand(trace_a, trace_b, metric_list, window_start, allow_truncated, report_path);
    }
    if(*batch)
    {
      return batchCommand(batch_configs, out_dir, overrides, threads, serial);
    }
  }
  catch(const std::exception & e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return EXIT_ERROR;
  }
  return EXIT_ERROR;
}
