#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "abcmc/algorithms.hpp"
#include "abcmc/metrics.hpp"
#include "abcmc/models.hpp"

namespace abcmc {

/// Bad plan, bad flag, unknown name. Reported before any run starts.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading a plan or writing results.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One fully resolved algorithm configuration (a single grid cell).
/// Fields that do not apply to the chosen algorithm keep their defaults and
/// are left blank in result tables.
struct AlgoParams {
  std::string algorithm;
  int n = 1000;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double p_acc_min = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double epsilon_initial = std::numeric_limits<double>::infinity();
  std::string schedule_token;    // canonical form, "|" separated or "geom:a:b:k"
  std::vector<double> schedule;  // resolved levels (pmc only)
  int m = 1;
  int n_t = 0;  // 0 means n/2
  double c = 0.01;
  int r_init = 10;
  std::string kernel = "auto";  // auto | diag | full
  std::string init = "auto";    // auto | iid | lhs
};

/// Parsed experiment plan. Algorithm-config keys may carry several
/// ";"-separated values; the run grid is their cross product.
struct ExperimentPlan {
  std::string model;
  std::string algorithm;
  std::map<std::string, std::vector<std::string>> axes;
  int replicates = 1;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultMaxSimulations;
  std::string out_dir = ".";
  int workers = 1;
  bool traces = false;
};

ExperimentPlan parse_plan_text(const std::string& text);
ExperimentPlan parse_plan_file(const std::string& path);

/// All grid cells of a plan in canonical order (fixed key order, first axis
/// slowest). Validates every cell against the chosen algorithm; throws
/// ConfigError on the first invalid one.
std::vector<AlgoParams> expand_grid(const ExperimentPlan& plan);

struct ResultRow {
  std::uint64_t run_id = 0;
  std::string model;
  AlgoParams params;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::string status;  // ok | budget | stagnation | degenerate
  std::uint64_t n_sims = 0;
  double final_epsilon = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double l2 = std::numeric_limits<double>::quiet_NaN();
  double criterion = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0.0;
};

/// Fixed column order shared by the writer, the resume scanner and the
/// summary reader. wall_seconds is deliberately last: it is the one column
/// excluded from the determinism contract.
std::string csv_header();
std::string csv_row(const ResultRow& row);
ResultRow parse_csv_row(const std::string& line);

struct RunOutcome {
  ResultRow row;
  RunTrace trace;
  WeightedSample sample;
};

/// Runs one cell replicate end to end: dispatch, timing, posterior quality
/// against the model's exact density when it has one. Budget exhaustion,
/// stagnation and kernel collapse are reported through row.status, not
/// thrown.
RunOutcome execute_cell(const ModelInfo& model, const AlgoParams& params,
                        std::uint64_t run_id, int replicate, std::uint64_t seed,
                        std::uint64_t budget, int workers);

/// Executes a whole plan. Rows land in <out_dir>/results.csv in run-id order,
/// flushed as soon as they are contiguous, so a killed sweep keeps what it
/// finished. With resume, run ids already present in the file are skipped.
std::vector<ResultRow> run_plan(const ExperimentPlan& plan, bool resume);

/// Per-cell mean and standard deviation of cost and quality, plus the two
/// charts. Writes summary.csv, scatter.svg and heatmap.svg under out_dir.
void emit_summary(const std::vector<ResultRow>& rows, const std::string& out_dir);

/// (bin center, exact density) pairs; only models with a closed-form
/// posterior support this.
std::vector<std::pair<double, double>> export_exact_posterior(const std::string& model_name,
                                                              const GridSpec& grid);

void write_trace_jsonl(const RunTrace& trace, std::ostream& out);
void write_sample_csv(const WeightedSample& sample, std::ostream& out);
std::vector<ResultRow> read_results_csv(const std::string& path);

}  // namespace abcmc
