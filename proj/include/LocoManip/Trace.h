#pragma once

#include <LocoManip/ClosedLoop.h>

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace locomanip
{

/** \brief Column names of the trace CSV, in file order. */
const std::vector<std::string> & traceColumns();

/** \brief Write the trace as CSV with a header row, shortest round-trip number formatting. */
void writeTraceCsv(const TraceLog & log, std::ostream & os);

/** \brief Read a trace CSV. Throws SchemaMismatchError on a header that differs from traceColumns(). */
TraceLog readTraceCsv(std::istream & is);

/** \brief Samples used by a metric: [start, end) minus the excluded intervals. */
struct EvalWindow
{
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> exclude;

  bool contains(double t) const;

  bool operator==(const EvalWindow &) const = default;
};

struct MetricBand
{
  std::string name;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const MetricBand &) const = default;
};

using Metrics = std::map<std::string, double>;

/** \brief Tracking metrics of a closed-loop trace.
 *
 * Window metrics: rms_zmp_dev |z^a - z^d|, rms_zmp_cmd_dev |z^c - z^d|, rms_com_dev |c^a - c^d|, rms_dcm_err,
 * max_dcm_err and mean_com_ahead_x (c^a_x - z^a_x). Per band: half peak-to-peak of the ZMP strategy (z^c_x - z^d_x)
 * and of the CoM strategy (c'^d_x - c^d_x = -gammaL_x), and the energies of gammaH and gammaL.
 */
Metrics traceMetrics(const TraceLog & log, const EvalWindow & window, const std::vector<MetricBand> & bands = {});

/** \brief Flat key=value metrics file, keys sorted. */
void writeMetrics(const Metrics & metrics, std::ostream & os);

Metrics readMetrics(std::istream & is);

struct ComparisonEntry
{
  std::string metric;
  double a = 0.0;
  double b = 0.0;
  /** b / a, with 0 / 0 defined as 1. */
  double ratio = 1.0;
};

struct ComparisonReport
{
  std::vector<ComparisonEntry> entries;
  /** identical, b_larger, a_larger or mixed. */
  std::string verdict;
  /** End of the common window the metrics were evaluated on. */
  double common_end = 0.0;
};

/** \brief Compare two traces metric by metric on their common time span.
 *
 * Throws SchemaMismatchError if the traces have a different dt, or a different duration unless allow_truncated is
 * set (one run stopped early on divergence). Metric names are the keys of traceMetrics().
 */
ComparisonReport compareRuns(const TraceLog & a,
                             const TraceLog & b,
                             const std::vector<std::string> & metrics,
                             const EvalWindow & window = {},
                             bool allow_truncated = false);

void writeComparison(const ComparisonReport & report, std::ostream & os);

} // namespace locomanip
