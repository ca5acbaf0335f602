#ifndef QCOMB_IO_HPP
#define QCOMB_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "qcomb/sim.hpp"

namespace qcomb {

struct ColumnMapping {
  std::string response;
  std::vector<std::string> z_columns;  // intercept prepended automatically
  std::vector<std::string> x_columns;  // must be nonempty
};

struct IngestResult {
  Vector Y;
  Matrix Z;  // with leading intercept column
  Matrix X;
  std::vector<std::size_t> rejected_rows;  // 1-based data row numbers
};

/// Parse a headered CSV and assemble (Y, Z, X). Rows with an empty mapped
/// cell are dropped and listed in rejected_rows; a non-numeric mapped cell
/// raises BadValue.
IngestResult ingest_csv(const std::string& path, const ColumnMapping& mapping);

Dataset to_dataset(const IngestResult& ingest, double tau);

struct SubsampleProtocol {
  Eigen::Index subsample_size = 500;
  Eigen::Index replications = 1000;
  std::vector<double> tau_grid;
  double alpha = 0.05;
  std::uint64_t master_seed = 1;
};

struct SubsampleRow {
  double tau = 0.0;
  std::string test_name;
  double rejection_rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Eigen::Index replications = 0;
  Eigen::Index failures = 0;
};

/// Wilson score interval for a binomial proportion at 95%.
std::pair<double, double> wilson_interval(Eigen::Index hits,
                                          Eigen::Index total);

std::vector<SubsampleRow> run_subsample_study(const IngestResult& data,
                                              const SubsampleProtocol& protocol,
                                              CombinationRule rule,
                                              int threads = 1);

/// Fixed 12-significant-digit CSV number format.
std::string format_number(double v);

/// Single-row CSV for one dataset-level test.
std::string test_result_csv(const TestResult& res, Eigen::Index q,
                            CombinationRule rule);

std::string subsample_table_csv(const std::vector<SubsampleRow>& rows);

std::string size_report_csv(const ExperimentReport& report);

/// Long-format (s, test_name, power, se) table from power reports sharing a
/// config except s; throws InconsistentConfigs otherwise.
std::string power_table_csv(const std::vector<ExperimentReport>& reports);

std::string probe_report_csv(const ProbeReport& report);

void write_file(const std::string& path, const std::string& contents);

}  // namespace qcomb

#endif  // QCOMB_IO_HPP
