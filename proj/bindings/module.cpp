#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "abcmc/harness.hpp"

namespace py = pybind11;

namespace {

py::dict record_to_dict(const abcmc::IterationRecord& rec) {
  py::dict d;
  d["iteration"] = rec.iteration;
  d["epsilon"] = rec.epsilon;
  d["accept_rate"] = rec.accept_rate;
  d["cum_simulations"] = rec.cum_simulations;
  d["distinct"] = rec.distinct;
  d["ess"] = rec.ess;
  d["r_used"] = rec.r_used;
  d["resampled"] = rec.resampled;
  d["note"] = rec.note;
  return d;
}

py::dict run(const std::string& model_name, const std::string& algorithm,
             const py::kwargs& kwargs) {
  abcmc::ExperimentPlan plan;
  plan.model = model_name;
  plan.algorithm = algorithm;
  std::uint64_t seed = 0, budget = abcmc::kDefaultMaxSimulations;
  int workers = 1;
  for (const auto& item : kwargs) {
    const std::string key = py::cast<std::string>(item.first);
    const std::string value = py::cast<std::string>(py::str(item.second));
    if (key == "seed")
      seed = py::cast<std::uint64_t>(item.second);
    else if (key == "budget")
      budget = py::cast<std::uint64_t>(item.second);
    else if (key == "workers")
      workers = py::cast<int>(item.second);
    else
      plan.axes[key] = {value};
  }
  // name validation, same path as plan files
  abcmc::parse_plan_text("model = " + plan.model + "\nalgorithm = " + algorithm +
                         "\n");
  const auto cells = abcmc::expand_grid(plan);
  const abcmc::ModelInfo& model = abcmc::find_model(plan.model);

  abcmc::RunOutcome outcome;
  {
    py::gil_scoped_release release;
    outcome = abcmc::execute_cell(model, cells.at(0), 0, 0,
                                  abcmc::mix_seed(seed, 0), budget, workers);
  }

  py::dict result;
  result["status"] = outcome.row.status;
  result["total_simulations"] = outcome.row.n_sims;
  result["epsilon"] = outcome.row.final_epsilon;
  result["iterations"] = outcome.row.iterations;
  if (std::isfinite(outcome.row.l2)) result["l2"] = outcome.row.l2;
  std::vector<std::vector<double>> thetas;
  std::vector<double> weights, distances;
  for (const auto& p : outcome.sample.particles) {
    thetas.push_back(p.theta);
    weights.push_back(p.weight);
    distances.push_back(p.distance);
  }
  result["thetas"] = thetas;
  result["weights"] = weights;
  result["distances"] = distances;
  py::list records;
  for (const auto& rec : outcome.trace.records) records.append(record_to_dict(rec));
  result["records"] = records;
  return result;
}

std::vector<std::pair<double, double>> exact_posterior(const std::string& model,
                                                       int bins, double lo,
                                                       double hi) {
  abcmc::GridSpec grid;
  grid.box = {{lo, hi}};
  grid.bins = {bins};
  return abcmc::export_exact_posterior(model, grid);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ABC samplers: adaptive population Monte Carlo and friends";

  py::register_exception<abcmc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<abcmc::ContractViolation>(m, "ContractViolation",
                                                   PyExc_ValueError);
  py::register_exception<abcmc::BudgetExhausted>(m, "BudgetError",
                                                 PyExc_RuntimeError);

  m.def("run", &run, py::arg("model"), py::arg("algorithm"),
        "Run one algorithm configuration; config keys are keyword arguments "
        "(n, alpha, p_acc_min, epsilon, schedule, ..., seed, budget, workers). "
        "Returns a dict with the weighted sample and per-iteration records.");
  m.def("exact_posterior", &exact_posterior, py::arg("model") = "toy",
        py::arg("bins") = 300, py::arg("lo") = -10.0, py::arg("hi") = 10.0,
        "(bin center, exact density) pairs for models with a closed form.");
  m.def("model_names", &abcmc::model_names, "registered model names");
  m.def(
      "ess",
      [](const std::vector<double>& weights) { return abcmc::ess(weights); },
      py::arg("weights"), "effective sample size of a weight vector");
}
