#include "qcomb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace qcomb {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace and a possible trailing CR
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? std::string()
                                            : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw MissingColumn("missing column: " + name);
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

IngestResult ingest_csv(const std::string& path,
                        const ColumnMapping& mapping) {
  if (mapping.x_columns.empty())
    throw DataError("ingest: x_columns must be nonempty");
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("ingest: empty file: " + path);
  const auto header = split_csv_line(line);

  const std::size_t y_idx = column_index(header, mapping.response);
  std::vector<std::size_t> z_idx, x_idx;
  for (const auto& c : mapping.z_columns) z_idx.push_back(column_index(header, c));
  for (const auto& c : mapping.x_columns) x_idx.push_back(column_index(header, c));

  {
    std::vector<std::size_t> all{y_idx};
    all.insert(all.end(), z_idx.begin(), z_idx.end());
    all.insert(all.end(), x_idx.begin(), x_idx.end());
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end())
      throw DataError("ingest: response/z/x column groups must be disjoint");
  }

  auto parse_cell = [&](const std::vector<std::string>& fields,
                        std::size_t idx, std::size_t row,
                        const std::string& name, double& out) -> bool {
    if (idx >= fields.size() || fields[idx].empty()) return false;
    char* end = nullptr;
    out = std::strtod(fields[idx].c_str(), &end);
    if (end == fields[idx].c_str() || *end != '\0' || !std::isfinite(out))
      throw BadValue("bad value at row " + std::to_string(row) + ", column " +
                     name);
    return true;
  };

  std::vector<double> ys;
  std::vector<std::vector<double>> zs, xs;
  IngestResult out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    double y = 0;
    std::vector<double> zrow(z_idx.size()), xrow(x_idx.size());
    bool complete = parse_cell(fields, y_idx, row, mapping.response, y);
    for (std::size_t k = 0; complete && k < z_idx.size(); ++k)
      complete = parse_cell(fields, z_idx[k], row, mapping.z_columns[k], zrow[k]);
    for (std::size_t k = 0; complete && k < x_idx.size(); ++k)
      complete = parse_cell(fields, x_idx[k], row, mapping.x_columns[k], xrow[k]);
    if (!complete) {
      out.rejected_rows.push_back(row);
      continue;
    }
    ys.push_back(y);
    zs.push_back(std::move(zrow));
    xs.push_back(std::move(xrow));
  }
  if (ys.empty()) throw EmptyAfterFiltering("ingest: no usable rows in " + path);

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto q = static_cast<Eigen::Index>(z_idx.size()) + 1;
  const auto p = static_cast<Eigen::Index>(x_idx.size());
  out.Y.resize(n);
  out.Z.resize(n, q);
  out.X.resize(n, p);
  out.Z.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    out.Y[i] = ys[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 1; j < q; ++j)
      out.Z(i, j) = zs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
    for (Eigen::Index j = 0; j < p; ++j)
      out.X(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

Dataset to_dataset(const IngestResult& ingest, double tau) {
  Dataset data;
  data.Y = ingest.Y;
  data.Z = ingest.Z;
  data.X = ingest.X;
  data.tau = tau;
  data.validate();
  return data;
}

std::pair<double, double> wilson_interval(Eigen::Index hits,
                                          Eigen::Index total) {
  const double z = 1.959963984540054;  // Phi^{-1}(0.975)
  const double n = static_cast<double>(total);
  const double ph = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (ph + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  // center - half underflows to ~1e-17 instead of 0 when hits == 0
  const double lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = hits == total ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

std::vector<SubsampleRow> run_subsample_study(const IngestResult& data,
                                              const SubsampleProtocol& protocol,
                                              CombinationRule rule,
                                              int threads) {
  (void)threads;  // replication cost dominates; kept serial per tau
  const auto n_total = data.Y.size();
  if (protocol.subsample_size > n_total)
    throw SubsampleTooLarge("subsample: size exceeds dataset rows");
  if (protocol.tau_grid.empty()) throw DataError("subsample: empty tau grid");
  for (const double t : protocol.tau_grid)
    if (!(t > 0.0 && t < 1.0))
      throw TauOutOfRange("subsample: tau grid entries must be in (0,1)");

  std::vector<SubsampleRow> table;
  for (std::size_t ti = 0; ti < protocol.tau_grid.size(); ++ti) {
    const double tau = protocol.tau_grid[ti];
    Eigen::Index ok = 0, failures = 0, cc = 0, mx = 0, sm = 0;
    for (Eigen::Index r = 0; r < protocol.replications; ++r) {
      auto g = make_stream(protocol.master_seed, StreamPurpose::Subsample,
                           (static_cast<std::uint64_t>(ti) << 32) |
                               static_cast<std::uint64_t>(r));
      // Partial Fisher-Yates draw without replacement.
      std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_total));
      std::iota(idx.begin(), idx.end(), 0);
      for (Eigen::Index k = 0; k < protocol.subsample_size; ++k) {
        const auto j =
            k + static_cast<Eigen::Index>(g() % static_cast<std::uint64_t>(
                                                    n_total - k));
        std::swap(idx[static_cast<std::size_t>(k)],
                  idx[static_cast<std::size_t>(j)]);
      }

      Dataset sub;
      sub.tau = tau;
      sub.Y.resize(protocol.subsample_size);
      sub.Z.resize(protocol.subsample_size, data.Z.cols());
      sub.X.resize(protocol.subsample_size, data.X.cols());
      for (Eigen::Index k = 0; k < protocol.subsample_size; ++k) {
        const auto src = idx[static_cast<std::size_t>(k)];
        sub.Y[k] = data.Y[src];
        sub.Z.row(k) = data.Z.row(src);
        sub.X.row(k) = data.X.row(src);
      }

      try {
        const TestResult res = run_full_test(sub, rule, TraceMode::Estimate);
        ++ok;
        cc += res.p_cc <= protocol.alpha;
        mx += res.p_max <= protocol.alpha;
        sm += res.p_sum <= protocol.alpha;
      } catch (const Error&) {
        ++failures;
      }
    }
    if (ok == 0)
      throw AllReplicationsFailed("subsample: every replication errored");

    const auto emit = [&](const char* name, Eigen::Index hits) {
      SubsampleRow row;
      row.tau = tau;
      row.test_name = name;
      row.rejection_rate = static_cast<double>(hits) / static_cast<double>(ok);
      std::tie(row.ci_low, row.ci_high) = wilson_interval(hits, ok);
      row.replications = ok;
      row.failures = failures;
      table.push_back(row);
    };
    emit("t_cc", cc);
    emit("t_max", mx);
    emit("t_sum", sm);
  }
  return table;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string test_result_csv(const TestResult& res, Eigen::Index q,
                            CombinationRule rule) {
  std::ostringstream os;
  os << "tau,t_sum,z_sum,p_sum,t_max,t_max_centered,p_max,t_cc,p_cc,"
        "trace_estimate,n,p,q,rule\n";
  os << format_number(res.tau) << ',' << format_number(res.t_sum) << ','
     << format_number(res.z_sum) << ',' << format_number(res.p_sum) << ','
     << format_number(res.t_max) << ',' << format_number(res.t_max_centered)
     << ',' << format_number(res.p_max) << ',' << format_number(res.t_cc)
     << ',' << format_number(res.p_cc) << ','
     << format_number(res.trace_estimate) << ',' << res.n << ',' << res.p_dim
     << ',' << q << ',' << combination_rule_name(rule) << '\n';
  return os.str();
}

std::string subsample_table_csv(const std::vector<SubsampleRow>& rows) {
  std::ostringstream os;
  os << "tau,test_name,rejection_rate,ci_low,ci_high,replications,failures\n";
  for (const auto& r : rows)
    os << format_number(r.tau) << ',' << r.test_name << ','
       << format_number(r.rejection_rate) << ',' << format_number(r.ci_low)
       << ',' << format_number(r.ci_high) << ',' << r.replications << ','
       << r.failures << '\n';
  return os.str();
}

namespace {

void append_config_echo(std::ostringstream& os, const ExperimentConfig& c) {
  os << "# n=" << c.n << " p=" << c.p_dim << " q=" << c.q
     << " tau=" << format_number(c.tau) << " dist=" << distribution_name(c.dist)
     << " err_dist=" << distribution_name(c.err_dist)
     << " cov=" << covariance_case_name(c.cov_case) << " s=" << c.s
     << " beta_norm_sq=" << format_number(c.beta_norm_sq)
     << " replications=" << c.replications
     << " alpha=" << format_number(c.alpha) << " seed=" << c.master_seed
     << " rule=" << combination_rule_name(c.rule) << " trace="
     << (c.trace_mode == TraceMode::Oracle ? "oracle" : "estimate") << '\n';
}

}  // namespace

std::string size_report_csv(const ExperimentReport& report) {
  std::ostringstream os;
  append_config_echo(os, report.config);
  os << "test_name,rate,se,replications,failures\n";
  const auto line = [&](const char* name, const RateWithSE& r) {
    os << name << ',' << format_number(r.rate) << ',' << format_number(r.se)
       << ',' << report.replications << ',' << report.failures << '\n';
  };
  line("t_cc", report.cc);
  line("t_max", report.max);
  line("t_sum", report.sum);
  return os.str();
}

std::string power_table_csv(const std::vector<ExperimentReport>& reports) {
  if (reports.empty()) throw DataError("power table: no reports");
  const auto& ref = reports.front().config;
  for (const auto& rep : reports) {
    const auto& c = rep.config;
    if (c.n != ref.n || c.p_dim != ref.p_dim || c.q != ref.q ||
        c.tau != ref.tau || c.dist != ref.dist || c.cov_case != ref.cov_case ||
        c.replications != ref.replications || c.master_seed != ref.master_seed)
      throw InconsistentConfigs("power table: reports differ beyond s");
  }

  std::vector<const ExperimentReport*> sorted;
  for (const auto& r : reports) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ExperimentReport* a, const ExperimentReport* b) {
                     return a->config.s < b->config.s;
                   });

  std::ostringstream os;
  os << "s,test_name,power,se\n";
  for (const auto* rep : sorted) {
    const auto line = [&](const char* name, const RateWithSE& r) {
      os << rep->config.s << ',' << name << ',' << format_number(r.rate) << ','
         << format_number(r.se) << '\n';
    };
    // alphabetical within each s
    line("t_cc", rep->cc);
    line("t_max", rep->max);
    line("t_sum", rep->sum);
  }
  return os.str();
}

std::string probe_report_csv(const ProbeReport& report) {
  std::ostringstream os;
  os << "# correlation=" << format_number(report.correlation)
     << " replications=" << report.replications
     << " failures=" << report.failures << '\n';
  os << "x,y,joint_cdf,product_of_marginals,gap\n";
  for (const auto& r : report.rows)
    os << format_number(r.x) << ',' << format_number(r.y) << ','
       << format_number(r.joint) << ',' << format_number(r.product) << ','
       << format_number(r.gap) << '\n';
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write: " + path);
  out << contents;
}

}  // namespace qcomb
