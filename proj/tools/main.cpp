#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "qcomb/io.hpp"

namespace {

using nlohmann::json;
using namespace qcomb;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open config: " + path);
  json j;
  in >> j;
  return j;
}

// Config file supplies defaults; flags passed on the command line win.
void apply_experiment_config(const json& j, ExperimentConfig& cfg) {
  if (j.contains("n")) cfg.n = j["n"].get<Eigen::Index>();
  if (j.contains("p")) cfg.p_dim = j["p"].get<Eigen::Index>();
  if (j.contains("q")) cfg.q = j["q"].get<Eigen::Index>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
  if (j.contains("dist")) cfg.dist = parse_distribution(j["dist"].get<std::string>());
  if (j.contains("err_dist"))
    cfg.err_dist = parse_distribution(j["err_dist"].get<std::string>());
  if (j.contains("cov"))
    cfg.cov_case = parse_covariance_case(j["cov"].get<std::string>());
  if (j.contains("s")) cfg.s = j["s"].get<Eigen::Index>();
  if (j.contains("beta_norm_sq")) cfg.beta_norm_sq = j["beta_norm_sq"].get<double>();
  if (j.contains("replications"))
    cfg.replications = j["replications"].get<Eigen::Index>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
  if (j.contains("rule"))
    cfg.rule = parse_combination_rule(j["rule"].get<std::string>());
  if (j.contains("trace_mode"))
    cfg.trace_mode = j["trace_mode"].get<std::string>() == "oracle"
                         ? TraceMode::Oracle
                         : TraceMode::Estimate;
}

void apply_mapping_config(const json& j, ColumnMapping& mapping) {
  if (j.contains("response")) mapping.response = j["response"].get<std::string>();
  if (j.contains("z_columns"))
    mapping.z_columns = j["z_columns"].get<std::vector<std::string>>();
  if (j.contains("x_columns"))
    mapping.x_columns = j["x_columns"].get<std::vector<std::string>>();
}

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  double tau = -1;
  double alpha = -1;
  std::int64_t replications = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string rule;
  std::string trace;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_sim_flags = true) {
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--out", f.out_path, "output CSV path (default: stdout)");
  cmd->add_option("--tau", f.tau, "quantile level in (0,1)");
  cmd->add_option("--alpha", f.alpha, "nominal test level");
  cmd->add_option("--rule", f.rule, "combination rule: cauchy|cauchy-paper|minp");
  if (with_sim_flags) {
    cmd->add_option("--seed", f.seed, "master seed")->each([&](const std::string&) {
      f.seed_set = true;
    });
    cmd->add_option("--replications", f.replications, "Monte Carlo replications");
    cmd->add_option("--trace", f.trace, "trace mode: estimate|oracle");
    cmd->add_option("--threads", f.threads, "worker threads");
  }
}

void merge_flags(const CommonFlags& f, ExperimentConfig& cfg) {
  if (f.tau > 0) cfg.tau = f.tau;
  if (f.alpha > 0) cfg.alpha = f.alpha;
  if (f.replications > 0) cfg.replications = f.replications;
  if (f.seed_set) cfg.master_seed = f.seed;
  if (!f.rule.empty()) cfg.rule = parse_combination_rule(f.rule);
  if (!f.trace.empty())
    cfg.trace_mode = f.trace == "oracle" ? TraceMode::Oracle : TraceMode::Estimate;
}

void emit(const std::string& out_path, const std::string& contents) {
  if (out_path.empty())
    std::cout << contents;
  else
    write_file(out_path, contents);
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Adaptive sum/max/Cauchy-combination tests for "
               "high-dimensional quantile regression coefficients"};
  app.require_subcommand(1);

  // ---- test: single dataset run ----
  auto* test_cmd = app.add_subcommand("test", "run all tests on a CSV dataset");
  CommonFlags tf;
  std::string data_path, response;
  std::vector<std::string> z_cols, x_cols;
  add_common(test_cmd, tf, false);
  test_cmd->add_option("--data", data_path, "input CSV")->required();
  test_cmd->add_option("--response", response, "response column");
  test_cmd->add_option("--z-columns", z_cols, "nuisance columns (intercept is implicit)")->delimiter(',');
  test_cmd->add_option("--x-columns", x_cols, "high-dimensional columns")->delimiter(',');
  test_cmd->callback([&] {
    const json j = load_config(tf.config_path);
    ColumnMapping mapping;
    apply_mapping_config(j, mapping);
    if (!response.empty()) mapping.response = response;
    if (!z_cols.empty()) mapping.z_columns = z_cols;
    if (!x_cols.empty()) mapping.x_columns = x_cols;
    double tau = j.value("tau", 0.5);
    if (tf.tau > 0) tau = tf.tau;
    CombinationRule rule = CombinationRule::CauchyEqualWeights;
    if (j.contains("rule")) rule = parse_combination_rule(j["rule"].get<std::string>());
    if (!tf.rule.empty()) rule = parse_combination_rule(tf.rule);

    const IngestResult ingest = ingest_csv(data_path, mapping);
    for (const auto r : ingest.rejected_rows)
      std::cerr << "warning: rejected row " << r << " (missing mapped value)\n";
    const Dataset data = to_dataset(ingest, tau);
    const double nd = static_cast<double>(data.n());
    if (nd * tau * (1.0 - tau) < 5.0)
      std::cerr << "warning: extreme quantile (n*tau*(1-tau) < 5); "
                   "asymptotics may be unreliable\n";
    const TestResult res = run_full_test(data, rule, TraceMode::Estimate);
    emit(tf.out_path, test_result_csv(res, data.q(), rule));
  });

  // ---- simulate-size ----
  auto* size_cmd = app.add_subcommand("simulate-size", "empirical size study");
  CommonFlags sf;
  add_common(size_cmd, sf);
  size_cmd->callback([&] {
    ExperimentConfig cfg;
    apply_experiment_config(load_config(sf.config_path), cfg);
    merge_flags(sf, cfg);
    cfg.s = 0;
    emit(sf.out_path, size_report_csv(run_size_experiment(cfg, sf.threads)));
  });

  // ---- simulate-power ----
  auto* power_cmd = app.add_subcommand("simulate-power", "empirical power over s grid");
  CommonFlags pf;
  std::vector<std::int64_t> s_grid;
  add_common(power_cmd, pf);
  power_cmd->add_option("--s-grid", s_grid, "sparsity levels")->delimiter(',');
  power_cmd->callback([&] {
    const json j = load_config(pf.config_path);
    ExperimentConfig cfg;
    apply_experiment_config(j, cfg);
    merge_flags(pf, cfg);
    std::vector<Eigen::Index> grid(s_grid.begin(), s_grid.end());
    if (grid.empty() && j.contains("s_grid"))
      for (const auto& v : j["s_grid"]) grid.push_back(v.get<Eigen::Index>());
    if (grid.empty()) throw DataError("simulate-power: an s grid is required");
    emit(pf.out_path,
         power_table_csv(run_power_experiment(cfg, grid, pf.threads)));
  });

  // ---- independence-probe ----
  auto* probe_cmd = app.add_subcommand(
      "independence-probe", "joint-law probe of (z_sum, t_max_centered)");
  CommonFlags qf;
  add_common(probe_cmd, qf);
  probe_cmd->callback([&] {
    ExperimentConfig cfg;
    apply_experiment_config(load_config(qf.config_path), cfg);
    merge_flags(qf, cfg);
    cfg.s = 0;
    // 5x5 grid at marginal quantile levels of the two limit laws
    const std::vector<double> levels{0.15, 0.325, 0.5, 0.675, 0.85};
    std::vector<std::pair<double, double>> grid;
    for (const double lx : levels)
      for (const double ly : levels)
        grid.emplace_back(std_normal_quantile(lx), gumbel_quantile(ly));
    emit(qf.out_path,
         probe_report_csv(run_independence_probe(cfg, grid, qf.threads)));
  });

  // ---- subsample-study ----
  auto* sub_cmd = app.add_subcommand(
      "subsample-study", "repeated subsample testing across a tau grid");
  CommonFlags uf;
  std::string sub_data, sub_response;
  std::vector<std::string> sub_z_cols, sub_x_cols;
  std::vector<double> tau_grid;
  std::int64_t subsample_size = -1;
  add_common(sub_cmd, uf);
  sub_cmd->add_option("--data", sub_data, "input CSV")->required();
  sub_cmd->add_option("--response", sub_response, "response column");
  sub_cmd->add_option("--z-columns", sub_z_cols,
                      "nuisance columns (intercept is implicit)")
      ->delimiter(',');
  sub_cmd->add_option("--x-columns", sub_x_cols, "high-dimensional columns")
      ->delimiter(',');
  sub_cmd->add_option("--tau-grid", tau_grid, "quantile levels")->delimiter(',');
  sub_cmd->add_option("--subsample-size", subsample_size, "rows per subsample");
  sub_cmd->callback([&] {
    const json j = load_config(uf.config_path);
    ColumnMapping mapping;
    apply_mapping_config(j, mapping);
    if (!sub_response.empty()) mapping.response = sub_response;
    if (!sub_z_cols.empty()) mapping.z_columns = sub_z_cols;
    if (!sub_x_cols.empty()) mapping.x_columns = sub_x_cols;
    SubsampleProtocol protocol;
    if (j.contains("subsample_size"))
      protocol.subsample_size = j["subsample_size"].get<Eigen::Index>();
    if (j.contains("replications"))
      protocol.replications = j["replications"].get<Eigen::Index>();
    if (j.contains("tau_grid"))
      protocol.tau_grid = j["tau_grid"].get<std::vector<double>>();
    if (j.contains("alpha")) protocol.alpha = j["alpha"].get<double>();
    if (j.contains("master_seed"))
      protocol.master_seed = j["master_seed"].get<std::uint64_t>();
    if (subsample_size > 0) protocol.subsample_size = subsample_size;
    if (uf.replications > 0) protocol.replications = uf.replications;
    if (!tau_grid.empty()) protocol.tau_grid = tau_grid;
    if (uf.alpha > 0) protocol.alpha = uf.alpha;
    if (uf.seed_set) protocol.master_seed = uf.seed;
    std::sort(protocol.tau_grid.begin(), protocol.tau_grid.end());
    CombinationRule rule = CombinationRule::CauchyEqualWeights;
    if (j.contains("rule")) rule = parse_combination_rule(j["rule"].get<std::string>());
    if (!uf.rule.empty()) rule = parse_combination_rule(uf.rule);

    const IngestResult ingest = ingest_csv(sub_data, mapping);
    emit(uf.out_path, subsample_table_csv(run_subsample_study(
                          ingest, protocol, rule, uf.threads)));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors exit 1
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const qcomb::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const qcomb::Error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
