#include <LocoManip/Errors.h>
#include <LocoManip/Trace.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace locomanip
{

namespace
{

constexpr size_t N_COLUMNS = 26;

std::string formatDouble(double value)
{
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parseDouble(std::string_view text, size_t line)
{
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if(res.ec != std::errc() || res.ptr != text.data() + text.size())
  {
    throw SchemaMismatchError("line " + std::to_string(line) + ": cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

std::array<double, N_COLUMNS> flatten(const TraceRow & r)
{
  return {r.time,          r.com_des.x(),    r.com_des.y(),    r.com_act.x(),    r.com_act.y(),
          r.dcm_des.x(),   r.dcm_des.y(),    r.dcm_act.x(),    r.dcm_act.y(),    r.zmp_des.x(),
          r.zmp_des.y(),   r.zmp_cmd.x(),    r.zmp_cmd.y(),    r.zmp_act.x(),    r.zmp_act.y(),
          r.ext_zmp_ref.x(), r.ext_zmp_ref.y(), r.gamma_err.x(), r.gamma_err.y(),  r.gamma_high.x(),
          r.gamma_high.y(), r.gamma_low.x(),   r.gamma_low.y(),  r.fext_sum.x(),   r.fext_sum.y(),
          r.fext_sum.z()};
}

TraceRow unflatten(const std::array<double, N_COLUMNS> & v)
{
  TraceRow r;
  r.time = v[0];
  r.com_des = {v[1], v[2]};
  r.com_act = {v[3], v[4]};
  r.dcm_des = {v[5], v[6]};
  r.dcm_act = {v[7], v[8]};
  r.zmp_des = {v[9], v[10]};
  r.zmp_cmd = {v[11], v[12]};
  r.zmp_act = {v[13], v[14]};
  r.ext_zmp_ref = {v[15], v[16]};
  r.gamma_err = {v[17], v[18]};
  r.gamma_high = {v[19], v[20]};
  r.gamma_low = {v[21], v[22]};
  r.fext_sum = {v[23], v[24], v[25]};
  return r;
}

struct Accumulator
{
  double sum_sq = 0.0;
  size_t n = 0;

  void add(double v)
  {
    sum_sq += v * v;
    ++n;
  }

  double rms() const
  {
    return n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n));
  }
};

struct Range
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v)
  {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  double halfSpan() const
  {
    return hi >= lo ? 0.5 * (hi - lo) : 0.0;
  }
};

} // namespace

const std::vector<std::string> & traceColumns()
{
  static const std::vector<std::string> columns = {
      "time",        "c_x^d",       "c_y^d",       "c_x^a",    "c_y^a",    "xi_x^d",   "xi_y^d",
      "xi_x^a",      "xi_y^a",      "z_x^d",       "z_y^d",    "z_x^c",    "z_y^c",    "z_x^a",
      "z_y^a",       "extzmp_x^ref", "extzmp_y^ref", "gamma_err_x", "gamma_err_y", "gammaH_x", "gammaH_y",
      "gammaL_x",    "gammaL_y",    "fext_sum_x",  "fext_sum_y", "fext_sum_z"};
  return columns;
}

void writeTraceCsv(const TraceLog & log, std::ostream & os)
{
  const auto & cols = traceColumns();
  for(size_t i = 0; i < cols.size(); ++i)
  {
    os << (i ? "," : "") << cols[i];
  }
  os << '\n';
  for(const auto & row : log.rows)
  {
    const auto values = flatten(row);
    for(size_t i = 0; i < values.size(); ++i)
    {
      os << (i ? "," : "") << formatDouble(values[i]);
    }
    os << '\n';
  }
}

TraceLog readTraceCsv(std::istream & is)
{
  std::string line;
  if(!std::getline(is, line))
  {
    throw SchemaMismatchError("trace is empty");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while(std::getline(ss, cell, ','))
    {
      header.push_back(cell);
    }
  }
  if(header != traceColumns())
  {
    throw SchemaMismatchError("trace header does not match the expected column set");
  }

  TraceLog log;
  size_t line_no = 1;
  while(std::getline(is, line))
  {
    ++line_no;
    if(line.empty())
    {
      continue;
    }
    std::array<double, N_COLUMNS> values{};
    size_t col = 0;
    size_t pos = 0;
    while(pos <= line.size())
    {
      const size_t next = std::min(line.find(',', pos), line.size());
      if(col >= N_COLUMNS)
      {
        throw SchemaMismatchError("line " + std::to_string(line_no) + ": too many columns");
      }
      values[col++] = parseDouble(std::string_view(line).substr(pos, next - pos), line_no);
      pos = next + 1;
    }
    if(col != N_COLUMNS)
    {
      throw SchemaMismatchError("line " + std::to_string(line_no) + ": expected " + std::to_string(N_COLUMNS)
                                + " columns, got " + std::to_string(col));
    }
    log.rows.push_back(unflatten(values));
  }
  if(log.rows.size() >= 2)
  {
    log.dt = log.rows[1].time - log.rows[0].time;
  }
  return log;
}

bool EvalWindow::contains(double t) const
{
  if(t < start || t >= end)
  {
    return false;
  }
  return std::none_of(exclude.begin(), exclude.end(),
                      [t](const auto & interval) { return t >= interval.first && t < interval.second; });
}

Metrics traceMetrics(const TraceLog & log, const EvalWindow & window, const std::vector<MetricBand> & bands)
{
  Accumulator zmp_dev, zmp_cmd_dev, com_dev, dcm_err;
  double max_dcm = 0.0;
  double ahead_sum = 0.0;
  double energy_high = 0.0;
  double energy_low = 0.0;
  for(const auto & r : log.rows)
  {
    if(!window.contains(r.time))
    {
      continue;
    }
    zmp_dev.add((r.zmp_act - r.zmp_des).norm());
    zmp_cmd_dev.add((r.zmp_cmd - r.zmp_des).norm());
    com_dev.add((r.com_act - r.com_des).norm());
    const double e = (r.dcm_act - r.dcm_des).norm();
    dcm_err.add(e);
    max_dcm = std::max(max_dcm, e);
    ahead_sum += r.com_act.x() - r.zmp_act.x();
    energy_high += r.gamma_high.squaredNorm() * log.dt;
    energy_low += r.gamma_low.squaredNorm() * log.dt;
  }

  Metrics m;
  m["samples"] = static_cast<double>(zmp_dev.n);
  m["rms_zmp_dev"] = zmp_dev.rms();
  m["rms_zmp_cmd_dev"] = zmp_cmd_dev.rms();
  m["rms_com_dev"] = com_dev.rms();
  m["rms_dcm_err"] = dcm_err.rms();
  m["max_dcm_err"] = max_dcm;
  m["mean_com_ahead_x"] = zmp_dev.n ? ahead_sum / static_cast<double>(zmp_dev.n) : 0.0;
  m["energy_gamma_high"] = energy_high;
  m["energy_gamma_low"] = energy_low;
  m["diverged"] = log.diverged ? 1.0 : 0.0;
  m["zmp_clamp_events"] = static_cast<double>(log.zmp_clamp_events);
  m["zmp_saturation_events"] = static_cast<double>(log.zmp_saturation_events);
  m["duration"] = log.rows.empty() ? 0.0 : log.rows.back().time;

  for(const auto & band : bands)
  {
    Range zmp_strategy, com_strategy;
    Accumulator band_com, band_zmp;
    double band_high = 0.0;
    double band_low = 0.0;
    for(const auto & r : log.rows)
    {
      if(r.time < band.start || r.time >= band.end)
      {
        continue;
      }
      zmp_strategy.add(r.zmp_cmd.x() - r.zmp_des.x());
      com_strategy.add(-r.gamma_low.x());
      band_com.add((r.com_act - r.com_des).norm());
      band_zmp.add((r.zmp_act - r.zmp_des).norm());
      band_high += r.gamma_high.squaredNorm() * log.dt;
      band_low += r.gamma_low.squaredNorm() * log.dt;
    }
    const std::string prefix = "band." + band.name + ".";
    m[prefix + "amp_zmp_strategy_x"] = zmp_strategy.halfSpan();
    m[prefix + "amp_com_strategy_x"] = com_strategy.halfSpan();
    m[prefix + "rms_com_dev"] = band_com.rms();
    m[prefix + "rms_zmp_dev"] = band_zmp.rms();
    m[prefix + "energy_gamma_high"] = band_high;
    m[prefix + "energy_gamma_low"] = band_low;
    m[prefix + "samples"] = static_cast<double>(band_com.n);
  }
  return m;
}

void writeMetrics(const Metrics & metrics, std::ostream & os)
{
  for(const auto & [key, value] : metrics)
  {
    os << key << '=' << formatDouble(value) << '\n';
  }
}

Metrics readMetrics(std::istream & is)
{
  Metrics m;
  std::string line;
  size_t line_no = 0;
  while(std::getline(is, line))
  {
    ++line_no;
    if(line.empty() || line.front() == '#')
    {
      continue;
    }
    const auto eq = line.find('=');
    if(eq == std::string::npos)
    {
      throw SchemaMismatchError("metrics line " + std::to_string(line_no) + " has no '='");
    }
    const std::string value = line.substr(eq + 1);
    if(value == "pass" || value == "fail")
    {
      m[line.substr(0, eq)] = value == "pass" ? 1.0 : 0.0;
      continue;
    }
    m[line.substr(0, eq)] = parseDouble(value, line_no);
  }
  return m;
}

ComparisonReport compareRuns(const TraceLog & a,
                             const TraceLog & b,
                             const std::vector<std::string> & metrics,
                             const EvalWindow & window,
                             bool allow_truncated)
{
  if(a.rows.empty() || b.rows.empty())
  {
    throw SchemaMismatchError("cannot compare empty traces");
  }
  if(std::abs(a.dt - b.dt) > 1e-12)
  {
    throw SchemaMismatchError("traces have different dt: " + formatDouble(a.dt) + " vs " + formatDouble(b.dt));
  }
  const double end_a = a.rows.back().time;
  const double end_b = b.rows.back().time;
  if(std::abs(end_a - end_b) > 1e-9 && !allow_truncated)
  {
    throw SchemaMismatchError("traces have different durations: " + formatDouble(end_a) + " vs "
                              + formatDouble(end_b));
  }

  ComparisonReport report;
  report.common_end = std::min(end_a, end_b);
  EvalWindow common = window;
  common.end = std::min(window.end, std::nextafter(report.common_end, std::numeric_limits<double>::infinity()));
  const auto ma = traceMetrics(a, common);
  const auto mb = traceMetrics(b, common);

  bool all_equal = true;
  bool all_ge = true;
  bool all_le = true;
  for(const auto & name : metrics)
  {
    const auto ia = ma.find(name);
    const auto ib = mb.find(name);
    if(ia == ma.end() || ib == mb.end())
    {
      throw SchemaMismatchError("unknown metric '" + name + "'");
    }
    ComparisonEntry entry{name, ia->second, ib->second, 1.0};
    if(entry.a != 0.0)
    {
      entry.ratio = entry.b / entry.a;
    }
    else if(entry.b != 0.0)
    {
      entry.ratio = std::numeric_limits<double>::infinity();
    }
    all_equal = all_equal && entry.ratio == 1.0;
    all_ge = all_ge && entry.ratio >= 1.0;
    all_le = all_le && entry.ratio <= 1.0;
    report.entries.push_back(entry);
  }
  report.verdict = all_equal ? "identical" : all_ge ? "b_larger" : all_le ? "a_larger" : "mixed";
  return report;
}

void writeComparison(const ComparisonReport & report, std::ostream & os)
{
  os << "common_end=" << formatDouble(report.common_end) << '\n';
  for(const auto & e : report.entries)
  {
    os << e.metric << ".a=" << formatDouble(e.a) << '\n';
    os << e.metric << ".b=" << formatDouble(e.b) << '\n';
    os << e.metric << ".ratio=" << formatDouble(e.ratio) << '\n';
  }
  os << "verdict=" << report.verdict << '\n';
}

} // namespace locomanip
