#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "abcmc/harness.hpp"
#include "parallel.hpp"
#include "svg.hpp"

namespace abcmc {
namespace {

KernelKind resolve_kernel(const std::string& token, int dimension) {
  if (token == "diag") return KernelKind::UnivariateDiagonal;
  if (token == "full") return KernelKind::MultivariateFull;
  return dimension == 1 ? KernelKind::UnivariateDiagonal
                        : KernelKind::MultivariateFull;
}

InitMode resolve_init(const std::string& token) {
  if (token == "iid") return InitMode::Iid;
  if (token == "lhs") return InitMode::LatinHypercube;
  return InitMode::Auto;
}

RunResult dispatch(const ModelInfo& model, const AlgoParams& p, std::uint64_t seed,
                   std::uint64_t budget, int workers) {
  const KernelKind kind = resolve_kernel(p.kernel, model.prior.dimension());
  const SimulatorInterface& sim = *model.simulator;
  if (p.algorithm == "rejection") {
    RejectionConfig c;
    c.n = p.n;
    c.epsilon = p.epsilon;
    c.seed = seed;
    c.max_simulations = budget;
    c.workers = workers;
    return run_rejection(model.prior, sim, c);
  }
  if (p.algorithm == "pmc") {
    PmcConfig c;
    c.n = p.n;
    c.schedule = p.schedule;
    c.kernel = kind;
    c.seed = seed;
    c.max_simulations = budget;
    c.workers = workers;
    return run_pmc(model.prior, sim, c);
  }
  if (p.algorithm == "rsmc") {
    RsmcConfig c;
    c.n = p.n;
    c.alpha = p.alpha;
    c.epsilon_initial = p.epsilon_initial;
    c.epsilon_target = p.epsilon;
    c.c = p.c;
    c.r_init = p.r_init;
    c.kernel = kind;
    c.seed = seed;
    c.max_simulations = budget;
    c.workers = workers;
    return run_rsmc(model.prior, sim, c);
  }
  if (p.algorithm == "smc") {
    SmcConfig c;
    c.n = p.n;
    c.m = p.m;
    c.alpha = p.alpha;
    c.epsilon_target = p.epsilon;
    c.n_t = p.n_t;
    c.kernel = kind;
    c.seed = seed;
    c.max_simulations = budget;
    c.workers = workers;
    return run_smc(model.prior, sim, c);
  }
  if (p.algorithm == "apmc") {
    ApmcConfig c;
    c.n = p.n;
    c.alpha = p.alpha;
    c.p_acc_min = p.p_acc_min;
    c.kernel = kind;
    c.init = resolve_init(p.init);
    c.seed = seed;
    c.max_simulations = budget;
    c.workers = workers;
    return run_apmc(model.prior, sim, c);
  }
  throw ConfigError("unknown algorithm '" + p.algorithm + "'");
}

WeightedSample positive_weight_part(const WeightedSample& sample) {
  WeightedSample out;
  out.epsilon = sample.epsilon;
  out.iteration = sample.iteration;
  for (const auto& particle : sample.particles)
    if (particle.weight > 0.0) out.particles.push_back(particle);
  return out;
}

std::string fmt_short(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

RunOutcome execute_cell(const ModelInfo& model, const AlgoParams& params,
                        std::uint64_t run_id, int replicate, std::uint64_t seed,
                        std::uint64_t budget, int workers) {
  RunOutcome out;
  ResultRow& row = out.row;
  row.run_id = run_id;
  row.model = model.name;
  row.params = params;
  row.replicate = replicate;
  row.seed = seed;

  const auto started = std::chrono::steady_clock::now();
  try {
    RunResult result = dispatch(model, params, seed, budget, workers);
    row.status = "ok";
    row.n_sims = result.trace.total_simulations;
    row.final_epsilon = result.sample.epsilon;
    row.iterations = static_cast<int>(result.trace.records.size());
    if (model.exact_density) {
      const WeightedSample positive = positive_weight_part(result.sample);
      const HistogramGrid hist = weighted_histogram(positive, model.default_grid);
      const auto& density = model.exact_density;
      row.l2 = l2_distance(
          hist, [&density](const ParamVector& theta) { return density(theta[0]); });
      row.criterion = efficiency_criterion(row.n_sims, row.l2);
    }
    out.trace = std::move(result.trace);
    out.sample = std::move(result.sample);
  } catch (const BudgetExhausted& e) {
    row.status = "budget";
    row.n_sims = std::min(e.used, e.budget);
  } catch (const StagnationError&) {
    row.status = "stagnation";
  } catch (const DegenerateKernel&) {
    row.status = "degenerate";
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return out;
}

std::vector<ResultRow> run_plan(const ExperimentPlan& plan, bool resume) {
  const ModelInfo& model = find_model(plan.model);
  const std::vector<AlgoParams> cells = expand_grid(plan);
  if (cells.empty()) throw ConfigError("plan grid is empty");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(plan.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + plan.out_dir + "'");
  const std::string results_path = plan.out_dir + "/results.csv";

  std::set<std::uint64_t> done;
  if (resume && fs::exists(results_path))
    for (const auto& row : read_results_csv(results_path)) done.insert(row.run_id);

  std::ofstream file;
  const bool fresh = !resume || !fs::exists(results_path);
  file.open(results_path, fresh ? std::ios::trunc : std::ios::app);
  if (!file) throw IoError("cannot open '" + results_path + "' for writing");
  if (fresh) {
    file << csv_header() << '\n';
    file.flush();
  }

  const std::uint64_t total_runs =
      cells.size() * static_cast<std::uint64_t>(plan.replicates);
  std::vector<std::uint64_t> pending;
  for (std::uint64_t id = 0; id < total_runs; ++id)
    if (!done.count(id)) pending.push_back(id);

  // Cells run concurrently up to the plan worker count; each run then keeps
  // its internal parallelism at one. A single run (or one worker) gets the
  // full width instead.
  const bool parallel_cells = plan.workers > 1 && pending.size() > 1;
  const int outer = parallel_cells ? plan.workers : 1;
  const int inner = parallel_cells ? 1 : plan.workers;

  std::vector<ResultRow> rows(pending.size());
  std::mutex writer_mutex;
  std::map<std::uint64_t, const ResultRow*> ready;
  std::size_t next_flush = 0;  // index into `pending`

  detail::parallel_for(pending.size(), outer, [&](std::size_t k) {
    const std::uint64_t id = pending[k];
    const std::uint64_t cell = id / plan.replicates;
    const int replicate = static_cast<int>(id % plan.replicates);
    const std::uint64_t seed = mix_seed(plan.seed, id);
    RunOutcome outcome =
        execute_cell(model, cells[cell], id, replicate, seed, plan.budget, inner);
    if (plan.traces && !outcome.trace.records.empty()) {
      std::ofstream tf(plan.out_dir + "/trace-" + std::to_string(id) + ".jsonl");
      if (tf) write_trace_jsonl(outcome.trace, tf);
    }
    std::lock_guard<std::mutex> lock(writer_mutex);
    rows[k] = std::move(outcome.row);
    ready[id] = &rows[k];
    // flush the contiguous prefix so an aborted sweep keeps completed rows
    while (next_flush < pending.size()) {
      const auto it = ready.find(pending[next_flush]);
      if (it == ready.end()) break;
      file << csv_row(*it->second) << '\n';
      file.flush();
      ++next_flush;
    }
  });
  if (!file.good()) throw IoError("write to '" + results_path + "' failed");
  return rows;
}

void emit_summary(const std::vector<ResultRow>& rows, const std::string& out_dir) {
  if (rows.empty()) throw ConfigError("no result rows to summarize");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");

  // group rows by configuration (all columns up to the replicate index)
  const auto group_key = [](const ResultRow& row) {
    ResultRow blank = row;
    blank.run_id = 0;
    blank.replicate = 0;
    blank.seed = 0;
    blank.status.clear();
    blank.n_sims = 0;
    blank.final_epsilon = std::numeric_limits<double>::quiet_NaN();
    blank.iterations = 0;
    blank.l2 = std::numeric_limits<double>::quiet_NaN();
    blank.criterion = std::numeric_limits<double>::quiet_NaN();
    blank.wall_seconds = 0.0;
    return csv_row(blank);
  };

  struct Group {
    const ResultRow* exemplar = nullptr;
    std::vector<double> n_sims, l2, criterion;
    int failed = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, Group> groups;
  for (const auto& row : rows) {
    const std::string key = group_key(row);
    auto it = groups.find(key);
    if (it == groups.end()) {
      order.push_back(key);
      it = groups.emplace(key, Group{}).first;
      it->second.exemplar = &row;
    }
    if (row.status != "ok") {
      ++it->second.failed;
      continue;
    }
    it->second.n_sims.push_back(static_cast<double>(row.n_sims));
    if (std::isfinite(row.l2)) it->second.l2.push_back(row.l2);
    if (std::isfinite(row.criterion)) it->second.criterion.push_back(row.criterion);
  }

  const auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const auto sd_of = [&](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (v.size() == 1) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
  };

  std::ofstream out(out_dir + "/summary.csv");
  if (!out) throw IoError("cannot write '" + out_dir + "/summary.csv'");
  out << "model,algorithm,n,alpha,p_acc_min,epsilon,schedule,m,n_t,c,r_init,"
         "kernel,init,replicates,failed,mean_n_sims,sd_n_sims,mean_l2,sd_l2,"
         "mean_criterion,sd_criterion\n";
  std::vector<svg::ScatterPoint> points;
  std::vector<svg::HeatCell> heat;
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    const AlgoParams& p = g.exemplar->params;
    const std::string& a = p.algorithm;
    const bool has_alpha = a == "apmc" || a == "rsmc" || a == "smc";
    const int replicates = static_cast<int>(g.n_sims.size()) + g.failed;
    out << g.exemplar->model << ',' << a << ',' << p.n << ','
        << (has_alpha ? fmt_short(p.alpha) : "") << ','
        << (a == "apmc" ? fmt_short(p.p_acc_min) : "") << ','
        << (a == "apmc" || a == "pmc" ? "" : fmt_short(p.epsilon)) << ','
        << (a == "pmc" ? p.schedule_token : "") << ','
        << (a == "smc" ? std::to_string(p.m) : "") << ','
        << (a == "smc" ? std::to_string(p.n_t) : "") << ','
        << (a == "rsmc" ? fmt_short(p.c) : "") << ','
        << (a == "rsmc" ? std::to_string(p.r_init) : "") << ',' << p.kernel << ','
        << (a == "apmc" ? p.init : "") << ',' << replicates << ',' << g.failed
        << ',' << fmt_short(mean_of(g.n_sims)) << ',' << fmt_short(sd_of(g.n_sims))
        << ',' << fmt_short(mean_of(g.l2)) << ',' << fmt_short(sd_of(g.l2)) << ','
        << fmt_short(mean_of(g.criterion)) << ',' << fmt_short(sd_of(g.criterion))
        << '\n';

    if (!g.n_sims.empty() && !g.l2.empty()) {
      svg::ScatterPoint pt;
      pt.x = mean_of(g.n_sims);
      pt.y = mean_of(g.l2);
      pt.dx = sd_of(g.n_sims);
      pt.dy = sd_of(g.l2);
      pt.series = a;
      points.push_back(pt);
    }
    if (a == "apmc" && std::isfinite(p.alpha) && std::isfinite(p.p_acc_min) &&
        !g.criterion.empty())
      heat.push_back(svg::HeatCell{p.alpha, p.p_acc_min, mean_of(g.criterion)});
  }
  if (!out.good()) throw IoError("write to '" + out_dir + "/summary.csv' failed");
  out.close();

  svg::write_scatter(out_dir + "/scatter.svg", points, "simulations",
                     "posterior L2 error", "cost against quality");
  svg::write_heatmap(out_dir + "/heatmap.svg", heat, "alpha", "p_acc_min",
                     "mean efficiency criterion");
}

std::vector<std::pair<double, double>> export_exact_posterior(
    const std::string& model_name, const GridSpec& grid) {
  const ModelInfo& model = find_model(model_name);
  if (!model.exact_density)
    throw ConfigError("model '" + model_name + "' has no closed-form posterior");
  grid.validate();
  if (grid.dimension() != 1)
    throw ConfigError("exact posterior export is one-dimensional");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.bins[0]);
  const auto [lo, hi] = grid.box[0];
  const double step = (hi - lo) / grid.bins[0];
  for (int i = 0; i < grid.bins[0]; ++i) {
    const double center = lo + (i + 0.5) * step;
    out.emplace_back(center, model.exact_density(center));
  }
  return out;
}

void write_trace_jsonl(const RunTrace& trace, std::ostream& out) {
  for (const auto& rec : trace.records) {
    nlohmann::json j{{"iteration", rec.iteration},
                     {"epsilon", rec.epsilon},
                     {"accept_rate", rec.accept_rate},
                     {"cum_simulations", rec.cum_simulations},
                     {"distinct", rec.distinct},
                     {"ess", rec.ess},
                     {"r_used", rec.r_used},
                     {"resampled", rec.resampled},
                     {"wall_seconds", rec.wall_seconds},
                     {"note", rec.note}};
    out << j.dump() << '\n';
  }
}

void write_sample_csv(const WeightedSample& sample, std::ostream& out) {
  const int d = sample.particles.empty()
                    ? 0
                    : static_cast<int>(sample.particles[0].theta.size());
  for (int k = 0; k < d; ++k) out << "theta_" << k << ',';
  out << "weight,distance\n";
  for (const auto& p : sample.particles) {
    for (double v : p.theta) out << fmt_short(v) << ',';
    out << fmt_short(p.weight) << ',' << fmt_short(p.distance) << '\n';
  }
}

}  // namespace abcmc
