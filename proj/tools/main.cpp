#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "abcmc/harness.hpp"

namespace {

struct SharedFlags {
  std::uint64_t seed = 0;
  int workers = 1;
  std::uint64_t budget = abcmc::kDefaultMaxSimulations;
  std::string out_dir;
  bool resume = false;
};

struct ConfigFlags {
  std::string model = "toy";
  std::string algorithm = "apmc";
  std::map<std::string, std::string> tokens;  // raw config values as typed
};

void add_shared(CLI::App* cmd, SharedFlags& shared, bool with_resume) {
  cmd->add_option("--seed", shared.seed, "base seed");
  cmd->add_option("--workers", shared.workers, "thread count (0 = all cores)");
  cmd->add_option("--budget", shared.budget, "total simulation cap");
  cmd->add_option("--out-dir", shared.out_dir, "output directory");
  if (with_resume)
    cmd->add_flag("--resume", shared.resume, "skip runs already in results.csv");
}

void add_config(CLI::App* cmd, ConfigFlags& config) {
  cmd->add_option("--model", config.model, "model name");
  cmd->add_option("--algorithm", config.algorithm,
                  "rejection, pmc, rsmc, smc or apmc");
  static const std::pair<const char*, const char*> kKeys[] = {
      {"--n", "n"},
      {"--alpha", "alpha"},
      {"--p-acc-min", "p_acc_min"},
      {"--epsilon", "epsilon"},
      {"--epsilon-initial", "epsilon_initial"},
      {"--schedule", "schedule"},
      {"--m", "m"},
      {"--n-t", "n_t"},
      {"--c", "c"},
      {"--r-init", "r_init"},
      {"--kernel", "kernel"},
      {"--init", "init"},
  };
  for (const auto& [flag, key] : kKeys) {
    const std::string key_copy = key;
    cmd->add_option_function<std::string>(
        flag,
        [&config, key_copy](const std::string& value) {
          config.tokens[key_copy] = value;
        },
        std::string("config value ") + key);
  }
}

abcmc::ExperimentPlan single_cell_plan(const ConfigFlags& config,
                                       const SharedFlags& shared) {
  abcmc::ExperimentPlan plan;
  plan.model = config.model;
  plan.algorithm = config.algorithm;
  for (const auto& [key, value] : config.tokens) plan.axes[key] = {value};
  plan.replicates = 1;
  plan.seed = shared.seed;
  plan.budget = shared.budget;
  plan.workers = shared.workers;
  plan.out_dir = shared.out_dir.empty() ? "." : shared.out_dir;
  return plan;
}

int status_exit_code(const std::string& status) {
  if (status == "ok") return 0;
  std::cerr << "run failed: " << status << '\n';
  return 2;
}

abcmc::RunOutcome execute_flags(const ConfigFlags& config, const SharedFlags& shared) {
  abcmc::ExperimentPlan plan = single_cell_plan(config, shared);
  // validate algorithm/model names the same way plan files do
  {
    std::string text = "model = " + plan.model + "\nalgorithm = " + plan.algorithm + "\n";
    abcmc::parse_plan_text(text);
  }
  const auto cells = abcmc::expand_grid(plan);
  const abcmc::ModelInfo& model = abcmc::find_model(plan.model);
  return abcmc::execute_cell(model, cells.at(0), 0, 0,
                             abcmc::mix_seed(plan.seed, 0), plan.budget,
                             plan.workers);
}

int cmd_run(const ConfigFlags& config, const SharedFlags& shared) {
  abcmc::RunOutcome outcome = execute_flags(config, shared);
  const std::string dir = shared.out_dir.empty() ? "." : shared.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw abcmc::IoError("cannot create output directory '" + dir + "'");

  std::ofstream results(dir + "/results.csv");
  if (!results) throw abcmc::IoError("cannot write '" + dir + "/results.csv'");
  results << abcmc::csv_header() << '\n' << abcmc::csv_row(outcome.row) << '\n';

  if (outcome.row.status == "ok") {
    std::ofstream sample(dir + "/sample.csv");
    if (!sample) throw abcmc::IoError("cannot write '" + dir + "/sample.csv'");
    abcmc::write_sample_csv(outcome.sample, sample);
    std::ofstream trace(dir + "/trace.jsonl");
    if (!trace) throw abcmc::IoError("cannot write '" + dir + "/trace.jsonl'");
    abcmc::write_trace_jsonl(outcome.trace, trace);
  }
  std::cout << dir << "/results.csv: " << outcome.row.status
            << ", simulations=" << outcome.row.n_sims << '\n';
  return status_exit_code(outcome.row.status);
}

int cmd_trace(const ConfigFlags& config, const SharedFlags& shared) {
  abcmc::RunOutcome outcome = execute_flags(config, shared);
  if (outcome.row.status != "ok") return status_exit_code(outcome.row.status);
  if (shared.out_dir.empty()) {
    abcmc::write_trace_jsonl(outcome.trace, std::cout);
  } else {
    std::error_code ec;
    std::filesystem::create_directories(shared.out_dir, ec);
    if (ec)
      throw abcmc::IoError("cannot create output directory '" + shared.out_dir + "'");
    std::ofstream out(shared.out_dir + "/trace.jsonl");
    if (!out)
      throw abcmc::IoError("cannot write '" + shared.out_dir + "/trace.jsonl'");
    abcmc::write_trace_jsonl(outcome.trace, out);
    std::cout << shared.out_dir << "/trace.jsonl: " << outcome.trace.records.size()
              << " records\n";
  }
  return 0;
}

int cmd_sweep(const std::string& plan_path, const SharedFlags& shared,
              const CLI::App* cmd) {
  abcmc::ExperimentPlan plan = abcmc::parse_plan_file(plan_path);
  if (cmd->count("--seed")) plan.seed = shared.seed;
  if (cmd->count("--workers")) plan.workers = shared.workers;
  if (cmd->count("--budget")) plan.budget = shared.budget;
  if (cmd->count("--out-dir")) plan.out_dir = shared.out_dir;
  const auto rows = abcmc::run_plan(plan, shared.resume);
  int failed = 0;
  for (const auto& row : rows) failed += row.status == "ok" ? 0 : 1;
  std::cout << plan.out_dir << "/results.csv: " << rows.size() << " new rows";
  if (failed > 0) std::cout << ", " << failed << " failed";
  std::cout << '\n';
  return 0;
}

int cmd_summary(const std::vector<std::string>& inputs, const SharedFlags& shared) {
  std::vector<abcmc::ResultRow> rows;
  for (const auto& path : inputs) {
    auto part = abcmc::read_results_csv(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string dir = shared.out_dir.empty() ? "." : shared.out_dir;
  abcmc::emit_summary(rows, dir);
  std::cout << dir << "/summary.csv, scatter.svg, heatmap.svg written\n";
  return 0;
}

int cmd_posterior(const std::string& model, int bins, double lo, double hi,
                  const SharedFlags& shared) {
  abcmc::GridSpec grid;
  grid.box = {{lo, hi}};
  grid.bins = {bins};
  const auto table = abcmc::export_exact_posterior(model, grid);
  const auto write = [&table](std::ostream& out) {
    out << "theta,density\n";
    char buf[64];
    for (const auto& [center, density] : table) {
      auto r1 = std::to_chars(buf, buf + sizeof buf, center);
      out << std::string(buf, r1.ptr) << ',';
      auto r2 = std::to_chars(buf, buf + sizeof buf, density);
      out << std::string(buf, r2.ptr) << '\n';
    }
  };
  if (shared.out_dir.empty()) {
    write(std::cout);
  } else {
    std::error_code ec;
    std::filesystem::create_directories(shared.out_dir, ec);
    if (ec)
      throw abcmc::IoError("cannot create output directory '" + shared.out_dir + "'");
    std::ofstream out(shared.out_dir + "/posterior.csv");
    if (!out)
      throw abcmc::IoError("cannot write '" + shared.out_dir + "/posterior.csv'");
    write(out);
    std::cout << shared.out_dir << "/posterior.csv: " << table.size() << " rows\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABC samplers over simulation models: run, sweep, summarize"};
  app.require_subcommand(1);

  SharedFlags run_shared, trace_shared, sweep_shared, summary_shared, post_shared;
  ConfigFlags run_config, trace_config;
  std::string plan_path;
  std::vector<std::string> summary_inputs;
  std::string post_model = "toy";
  int post_bins = 300;
  double post_lo = -10.0, post_hi = 10.0;

  CLI::App* run_cmd = app.add_subcommand("run", "run one algorithm configuration");
  add_config(run_cmd, run_config);
  add_shared(run_cmd, run_shared, false);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run every cell of a plan file");
  sweep_cmd->add_option("plan", plan_path, "plan file")->required();
  add_shared(sweep_cmd, sweep_shared, true);

  CLI::App* summary_cmd =
      app.add_subcommand("summary", "summarize result tables into csv + charts");
  summary_cmd->add_option("results", summary_inputs, "results.csv files")
      ->required()
      ->expected(-1);
  add_shared(summary_cmd, summary_shared, false);

  CLI::App* post_cmd =
      app.add_subcommand("posterior", "export the exact posterior table");
  post_cmd->add_option("--model", post_model, "model name");
  post_cmd->add_option("--bins", post_bins, "bin count");
  post_cmd->add_option("--lo", post_lo, "lower edge");
  post_cmd->add_option("--hi", post_hi, "upper edge");
  add_shared(post_cmd, post_shared, false);

  CLI::App* trace_cmd =
      app.add_subcommand("trace", "run one configuration and dump its trace");
  add_config(trace_cmd, trace_config);
  add_shared(trace_cmd, trace_shared, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_config, run_shared);
    if (sweep_cmd->parsed()) return cmd_sweep(plan_path, sweep_shared, sweep_cmd);
    if (summary_cmd->parsed()) return cmd_summary(summary_inputs, summary_shared);
    if (post_cmd->parsed())
      return cmd_posterior(post_model, post_bins, post_lo, post_hi, post_shared);
    if (trace_cmd->parsed()) return cmd_trace(trace_config, trace_shared);
  } catch (const abcmc::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const abcmc::BudgetExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const abcmc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const abcmc::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
