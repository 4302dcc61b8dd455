#include "abcmc/algorithms.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "abcmc/metrics.hpp"
#include "abcmc/sampling.hpp"
#include "parallel.hpp"

namespace abcmc {
namespace {

// stream ids reserved for whole-population draws (outside particle indices)
constexpr std::uint64_t kLhsStream = 1ULL << 40;
constexpr std::uint64_t kResampleStream = (1ULL << 40) + 1;

struct WallClock {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void require(bool ok, const char* message) {
  if (!ok) throw ContractViolation(message);
}

std::int64_t floor_fraction(double alpha, int n) {
  return static_cast<std::int64_t>(std::floor(alpha * static_cast<double>(n)));
}

/// Runs one repeat-until-accept task per particle with a deterministic
/// per-task attempt cap so budget failures do not depend on scheduling.
/// `attempt` returns true when the particle is done; it is called with the
/// particle index and its stream until it succeeds or the cap is hit.
void repeat_batch(std::size_t count, int workers, std::uint64_t seed,
                  std::uint64_t iteration, std::uint64_t cap,
                  std::uint64_t& total_simulations, std::uint64_t budget,
                  const std::function<bool(std::size_t, RngStream&)>& attempt) {
  std::vector<std::uint64_t> attempts(count, 0);
  std::atomic<bool> capped{false};
  detail::parallel_for(count, workers, [&](std::size_t i) {
    RngStream rng = RngStream::derive(seed, iteration, i);
    std::uint64_t tries = 0;
    for (;;) {
      if (capped.load(std::memory_order_relaxed)) return;
      if (tries >= cap) {
        capped.store(true, std::memory_order_relaxed);
        return;
      }
      ++tries;
      if (attempt(i, rng)) break;
    }
    attempts[i] = tries;
  });
  std::uint64_t batch = 0;
  for (std::uint64_t a : attempts) batch += a;
  total_simulations += batch;
  if (capped.load() || total_simulations > budget)
    throw BudgetExhausted(capped.load() ? budget + 1 : total_simulations, budget);
}

void charge(std::uint64_t& total, std::uint64_t batch, std::uint64_t budget) {
  if (total + batch > budget) throw BudgetExhausted(total + batch, budget);
  total += batch;
}

/// Tolerance-boundary selection: keep everything strictly inside, then fill
/// up to n_keep from the particles sitting exactly on the boundary, in input
/// order.
std::vector<Particle> select_survivors(const std::vector<Particle>& combined,
                                       double eps, std::int64_t n_keep) {
  std::int64_t strict = 0;
  for (const auto& p : combined) strict += p.distance < eps ? 1 : 0;
  std::int64_t tie_budget = n_keep - strict;
  std::vector<Particle> kept;
  kept.reserve(n_keep);
  for (const auto& p : combined) {
    if (p.distance < eps) {
      kept.push_back(p);
    } else if (p.distance == eps && tie_budget > 0) {
      kept.push_back(p);
      --tie_budget;
    }
    if (static_cast<std::int64_t>(kept.size()) == n_keep && tie_budget <= 0) break;
  }
  return kept;
}

std::vector<double> distances_of(const std::vector<Particle>& particles) {
  std::vector<double> out(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) out[i] = particles[i].distance;
  return out;
}

void notify(const IterationObserver& observer, const WeightedSample& sample,
            const IterationRecord& rec) {
  if (observer) observer(sample, rec);
}

}  // namespace

double ess(const std::vector<double>& weights) {
  if (weights.empty()) throw ContractViolation("ess of an empty weight vector");
  double sum = 0.0, sum_sq = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w))
      throw ContractViolation("ess needs finite nonnegative weights");
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0)) throw ContractViolation("ess needs a positive total weight");
  return sum * sum / sum_sq;
}

double p_acc(const std::vector<double>& distances, double epsilon_prev) {
  if (distances.empty()) throw ContractViolation("p_acc of an empty batch");
  std::int64_t hits = 0;
  for (double d : distances) hits += d < epsilon_prev ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(distances.size());
}

std::int64_t rsmc_update_r(double c, double pacc) {
  require(c > 0.0 && c < 1.0, "rsmc_update_r needs c in (0, 1)");
  require(pacc > 0.0 && pacc <= 1.0, "rsmc_update_r needs pacc in (0, 1]");
  const double raw = std::ceil(std::log(c) / std::log(1.0 - pacc));
  if (!(raw >= 1.0)) return 1;
  if (raw >= 9.0e18) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(raw);
}

std::vector<double> geometric_schedule(double first, double last, int levels) {
  require(levels >= 1, "schedule needs at least one level");
  require(first >= last && last > 0.0, "schedule must run from first >= last > 0");
  if (levels == 1) {
    require(first == last, "a one-level schedule needs first == last");
    return {last};
  }
  std::vector<double> schedule(levels);
  const double ratio = std::pow(last / first, 1.0 / (levels - 1));
  for (int i = 0; i < levels; ++i) schedule[i] = first * std::pow(ratio, i);
  schedule.front() = first;
  schedule.back() = last;
  return schedule;
}

RunResult run_rejection(const PriorSpec& prior, const SimulatorInterface& simulator,
                        const RejectionConfig& config, const IterationObserver& observer) {
  require(config.n >= 1, "rejection needs n >= 1");
  require(config.epsilon > 0.0, "rejection needs epsilon > 0");
  require(config.max_simulations >= 1, "budget must be positive");
  WallClock clock;

  RunResult result;
  result.sample.particles.resize(config.n);
  result.sample.epsilon = config.epsilon;
  result.sample.iteration = 1;
  repeat_batch(
      config.n, config.workers, config.seed, /*iteration=*/0,
      config.max_simulations, result.trace.total_simulations, config.max_simulations,
      [&](std::size_t i, RngStream& rng) {
        ParamVector theta = prior.sample_one(rng);
        const double rho = simulator.distance(theta, rng);
        if (rho < config.epsilon) {
          result.sample.particles[i] = Particle{std::move(theta), 1.0, rho};
          return true;
        }
        return false;
      });

  IterationRecord rec;
  rec.iteration = 1;
  rec.epsilon = config.epsilon;
  rec.accept_rate = static_cast<double>(config.n) /
                    static_cast<double>(result.trace.total_simulations);
  rec.cum_simulations = result.trace.total_simulations;
  rec.distinct = distinct_count(result.sample);
  rec.ess = static_cast<double>(config.n);
  rec.wall_seconds = clock.seconds();
  result.trace.records.push_back(rec);
  notify(observer, result.sample, rec);
  return result;
}

RunResult run_pmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                  const PmcConfig& config, const IterationObserver& observer) {
  require(config.n >= 2, "pmc needs n >= 2");
  require(!config.schedule.empty(), "pmc needs a tolerance schedule");
  for (std::size_t t = 0; t < config.schedule.size(); ++t) {
    require(config.schedule[t] > 0.0, "pmc tolerances must be positive");
    if (t > 0)
      require(config.schedule[t] <= config.schedule[t - 1],
              "pmc schedule must be non-increasing");
  }
  WallClock clock;
  const int n = config.n;

  RunResult result;
  WeightedSample current;
  current.particles.resize(n);

  for (std::size_t gen = 0; gen < config.schedule.size(); ++gen) {
    const double eps_t = config.schedule[gen];
    const std::uint64_t iteration = gen + 1;
    std::uint64_t underflows_before = result.trace.weight_underflows;

    if (gen == 0) {
      repeat_batch(n, config.workers, config.seed, iteration,
                   config.max_simulations - std::min(config.max_simulations,
                                                     result.trace.total_simulations),
                   result.trace.total_simulations, config.max_simulations,
                   [&](std::size_t i, RngStream& rng) {
                     ParamVector theta = prior.sample_one(rng);
                     const double rho = simulator.distance(theta, rng);
                     if (rho < eps_t) {
                       current.particles[i] = Particle{std::move(theta), 1.0 / n, rho};
                       return true;
                     }
                     return false;
                   });
    } else {
      const WeightedSample previous = std::move(current);
      const KernelSpec kernel = kernel_from_sample(previous, config.kernel);
      const CumulativeWeights table(previous);
      current = WeightedSample{};
      current.particles.resize(n);
      std::vector<std::uint8_t> underflow(n, 0);
      repeat_batch(n, config.workers, config.seed, iteration,
                   config.max_simulations - std::min(config.max_simulations,
                                                     result.trace.total_simulations),
                   result.trace.total_simulations, config.max_simulations,
                   [&](std::size_t i, RngStream& rng) {
                     const std::size_t j = table.pick(rng);
                     ParamVector theta = perturb(previous.particles[j].theta, kernel, rng);
                     const double rho = simulator.distance(theta, rng);
                     if (rho >= eps_t) return false;
                     const WeightResult w =
                         apmc_weight_checked(theta, previous, kernel, prior);
                     underflow[i] = w.underflow ? 1 : 0;
                     current.particles[i] = Particle{std::move(theta), w.value, rho};
                     return true;
                   });
      for (auto flag : underflow) result.trace.weight_underflows += flag;
      // per-generation renormalization
      double total = total_weight(current);
      if (!(total > 0.0)) throw ContractViolation("pmc generation weights sum to zero");
      for (auto& p : current.particles) p.weight /= total;
    }
    current.epsilon = eps_t;
    current.iteration = static_cast<int>(iteration);

    IterationRecord rec;
    rec.iteration = static_cast<int>(iteration);
    rec.epsilon = eps_t;
    rec.cum_simulations = result.trace.total_simulations;
    rec.accept_rate = static_cast<double>(n) /
                      static_cast<double>(rec.cum_simulations -
                                          (result.trace.records.empty()
                                               ? 0
                                               : result.trace.records.back().cum_simulations));
    rec.distinct = distinct_count(current);
    rec.ess = ess(normalized_weights(current));
    rec.wall_seconds = clock.seconds();
    if (result.trace.weight_underflows > underflows_before)
      rec.note = "proposal density underflow";
    result.trace.records.push_back(rec);
    notify(observer, current, rec);
  }
  result.sample = std::move(current);
  return result;
}

RunResult run_apmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                   const ApmcConfig& config, const IterationObserver& observer) {
  require(config.n >= 2, "apmc needs n >= 2");
  require(config.alpha > 0.0 && config.alpha < 1.0, "apmc needs alpha in (0, 1)");
  const std::int64_t n_alpha = floor_fraction(config.alpha, config.n);
  require(n_alpha >= 1 && n_alpha < config.n,
          "apmc needs 1 <= floor(alpha * n) < n");
  require(config.p_acc_min >= 0.0 && config.p_acc_min < 1.0,
          "apmc needs p_acc_min in [0, 1)");
  WallClock clock;
  const int n = config.n;
  const int n_new = n - static_cast<int>(n_alpha);

  RunResult result;
  RunTrace& trace = result.trace;

  // initial design: i.i.d. prior draws in one dimension, Latin hypercube
  // otherwise (unless forced)
  std::vector<ParamVector> design;
  const bool use_lhs = config.init == InitMode::LatinHypercube ||
                       (config.init == InitMode::Auto && prior.dimension() > 1);
  if (use_lhs) {
    RngStream lhs_rng = RngStream::derive(config.seed, 0, kLhsStream);
    design = latin_hypercube(prior, n, lhs_rng);
  }
  std::vector<Particle> combined(n);
  charge(trace.total_simulations, n, config.max_simulations);
  detail::parallel_for(n, config.workers, [&](std::size_t i) {
    RngStream rng = RngStream::derive(config.seed, 0, i);
    ParamVector theta = use_lhs ? design[i] : prior.sample_one(rng);
    const double rho = simulator.distance(theta, rng);
    combined[i] = Particle{std::move(theta), 1.0, rho};
  });

  double eps_t = alpha_quantile(distances_of(combined), config.alpha);
  WeightedSample survivors;
  survivors.particles = select_survivors(combined, eps_t, n_alpha);
  survivors.epsilon = eps_t;
  survivors.iteration = 1;

  {
    IterationRecord rec;
    rec.iteration = 1;
    rec.epsilon = eps_t;
    rec.accept_rate = 1.0;  // convention for the initial generation
    rec.cum_simulations = trace.total_simulations;
    rec.distinct =
        distinct_count(WeightedSample{combined, eps_t, 1});
    rec.ess = ess(normalized_weights(survivors));
    rec.wall_seconds = clock.seconds();
    trace.records.push_back(rec);
    notify(observer, survivors, rec);
  }

  KernelSpec kernel = kernel_from_sample(survivors, config.kernel);
  double p_acc_cur = 1.0;
  int t = 2;
  while (p_acc_cur > config.p_acc_min) {
    charge(trace.total_simulations, n_new, config.max_simulations);
    std::vector<Particle> fresh(n_new);
    std::vector<std::uint8_t> underflow(n_new, 0);
    const CumulativeWeights table(survivors);
    detail::parallel_for(n_new, config.workers, [&](std::size_t j) {
      RngStream rng = RngStream::derive(config.seed, t, j);
      const std::size_t pick = table.pick(rng);
      ParamVector theta = perturb(survivors.particles[pick].theta, kernel, rng);
      const double rho = simulator.distance(theta, rng);
      const WeightResult w = apmc_weight_checked(theta, survivors, kernel, prior);
      underflow[j] = w.underflow ? 1 : 0;
      fresh[j] = Particle{std::move(theta), w.value, rho};
    });
    std::uint64_t new_underflows = 0;
    for (auto flag : underflow) new_underflows += flag;
    trace.weight_underflows += new_underflows;

    p_acc_cur = p_acc(distances_of(fresh), survivors.epsilon);

    combined = survivors.particles;
    combined.insert(combined.end(), fresh.begin(), fresh.end());
    eps_t = alpha_quantile(distances_of(combined), config.alpha);
    survivors.particles = select_survivors(combined, eps_t, n_alpha);
    survivors.epsilon = eps_t;
    survivors.iteration = t;
    kernel = kernel_from_sample(survivors, config.kernel);

    IterationRecord rec;
    rec.iteration = t;
    rec.epsilon = eps_t;
    rec.accept_rate = p_acc_cur;
    rec.cum_simulations = trace.total_simulations;
    rec.distinct = distinct_count(WeightedSample{combined, eps_t, t});
    rec.ess = ess(normalized_weights(survivors));
    rec.wall_seconds = clock.seconds();
    if (new_underflows > 0) rec.note = "proposal density underflow";
    trace.records.push_back(rec);
    notify(observer, survivors, rec);
    ++t;
  }
  result.sample = std::move(survivors);
  return result;
}

RunResult run_rsmc(const PriorSpec& prior, const SimulatorInterface& simulator,
                   const RsmcConfig& config, const IterationObserver& observer) {
  require(config.n >= 2, "rsmc needs n >= 2");
  require(config.alpha > 0.0 && config.alpha < 1.0, "rsmc needs alpha in (0, 1)");
  const std::int64_t n_alpha = floor_fraction(config.alpha, config.n);
  require(n_alpha >= 1 && n_alpha < config.n, "rsmc needs 1 <= floor(alpha * n) < n");
  require(config.epsilon_target > 0.0, "rsmc needs epsilon_target > 0");
  require(config.epsilon_initial >= config.epsilon_target,
          "rsmc needs epsilon_initial >= epsilon_target");
  require(config.c > 0.0 && config.c < 1.0, "rsmc needs c in (0, 1)");
  require(config.r_init >= 1, "rsmc needs r_init >= 1");
  WallClock clock;
  const int n = config.n;
  const int keep = n - static_cast<int>(n_alpha);

  RunResult result;
  RunTrace& trace = result.trace;
  std::vector<Particle> population(n);
  repeat_batch(n, config.workers, config.seed, /*iteration=*/0,
               config.max_simulations, trace.total_simulations, config.max_simulations,
               [&](std::size_t i, RngStream& rng) {
                 ParamVector theta = prior.sample_one(rng);
                 const double rho = simulator.distance(theta, rng);
                 if (rho <= config.epsilon_initial) {
                   population[i] = Particle{std::move(theta), 1.0, rho};
                   return true;
                 }
                 return false;
               });

  std::int64_t r_trials = config.r_init;
  int stagnant_rounds = 0;
  int round = 1;
  double eps_next = config.epsilon_initial;
  for (;;) {
    std::stable_sort(population.begin(), population.end(),
                     [](const Particle& a, const Particle& b) {
                       return a.distance < b.distance;
                     });
    if (population.back().distance <= config.epsilon_target) break;

    population.resize(keep);  // drop the n_alpha worst
    eps_next = population.back().distance;
    WeightedSample survivors{population, eps_next, round};
    const KernelSpec kernel = kernel_from_sample(survivors, config.kernel);

    const std::uint64_t remaining = config.max_simulations - trace.total_simulations;
    if (static_cast<std::uint64_t>(r_trials) >
        remaining / static_cast<std::uint64_t>(n_alpha))
      throw BudgetExhausted(config.max_simulations + 1, config.max_simulations);
    const std::uint64_t batch = static_cast<std::uint64_t>(n_alpha) *
                                static_cast<std::uint64_t>(r_trials);
    charge(trace.total_simulations, batch, config.max_simulations);

    std::vector<Particle> replenished(n_alpha);
    std::vector<std::int64_t> accepted(n_alpha, 0);
    detail::parallel_for(n_alpha, config.workers, [&](std::size_t j) {
      RngStream rng = RngStream::derive(config.seed, round, j);
      const std::size_t pick =
          std::min(static_cast<std::size_t>(rng.uniform01() * keep),
                   static_cast<std::size_t>(keep - 1));
      Particle cur = survivors.particles[pick];
      for (std::int64_t k = 0; k < r_trials; ++k) {
        ParamVector theta_star = perturb(cur.theta, kernel, rng);
        const double rho_star = simulator.distance(theta_star, rng);
        const double u = rng.uniform01();
        // symmetric Gaussian proposal: the q terms cancel
        const double ratio = prior.density(theta_star) / prior.density(cur.theta);
        const double a = rho_star <= eps_next ? std::min(1.0, ratio) : 0.0;
        if (a > 0.0 && u <= a) {
          cur = Particle{std::move(theta_star), 1.0, rho_star};
          ++accepted[j];
        }
      }
      replenished[j] = std::move(cur);
    });
    std::int64_t i_acc = 0;
    for (auto a : accepted) i_acc += a;
    const double pacc = static_cast<double>(i_acc) /
                        (static_cast<double>(r_trials) * static_cast<double>(n_alpha));

    population.insert(population.end(), replenished.begin(), replenished.end());

    IterationRecord rec;
    rec.iteration = round;
    rec.epsilon = eps_next;
    rec.accept_rate = pacc;
    rec.cum_simulations = trace.total_simulations;
    rec.distinct = distinct_count(WeightedSample{population, eps_next, round});
    rec.ess = static_cast<double>(n);
    rec.r_used = r_trials;
    rec.wall_seconds = clock.seconds();
    if (i_acc == 0) {
      ++stagnant_rounds;
      rec.note = "stagnant round";
    } else {
      stagnant_rounds = 0;
      r_trials = rsmc_update_r(config.c, pacc);
    }
    trace.records.push_back(rec);
    notify(observer, WeightedSample{population, eps_next, round}, rec);
    if (stagnant_rounds >= 3)
      throw StagnationError("no accepted move in three consecutive replenishment rounds");
    ++round;
  }

  result.sample.particles = std::move(population);
  result.sample.epsilon = result.sample.particles.empty()
                              ? config.epsilon_target
                              : result.sample.particles.back().distance;
  result.sample.iteration = round;
  return result;
}

namespace {

struct SmcParticle {
  ParamVector theta;
  std::vector<double> distances;
  double weight = 0.0;
};

std::int64_t hits_below(const std::vector<double>& distances, double eps) {
  std::int64_t count = 0;
  for (double d : distances) count += d < eps ? 1 : 0;
  return count;
}

}  // namespace

RunResult run_smc(const PriorSpec& prior, const SimulatorInterface& simulator,
                  const SmcConfig& config, const IterationObserver& observer) {
  require(config.n >= 2, "smc needs n >= 2");
  require(config.m >= 1, "smc needs m >= 1");
  require(config.alpha > 0.0 && config.alpha < 1.0, "smc needs alpha in (0, 1)");
  require(config.epsilon_target > 0.0, "smc needs epsilon_target > 0");
  const int n_t = config.n_t == 0 ? config.n / 2 : config.n_t;
  require(n_t >= 1 && n_t <= config.n, "smc needs 1 <= n_t <= n");
  WallClock clock;
  const int n = config.n;
  const int m = config.m;

  RunResult result;
  RunTrace& trace = result.trace;

  std::vector<SmcParticle> population(n);
  charge(trace.total_simulations, static_cast<std::uint64_t>(n) * m,
         config.max_simulations);
  detail::parallel_for(n, config.workers, [&](std::size_t i) {
    RngStream rng = RngStream::derive(config.seed, 0, i);
    SmcParticle p;
    p.theta = prior.sample_one(rng);
    p.distances.resize(m);
    for (int k = 0; k < m; ++k) p.distances[k] = simulator.distance(p.theta, rng);
    p.weight = 1.0 / n;
    population[i] = std::move(p);
  });

  double eps_prev = std::numeric_limits<double>::infinity();
  int t = 1;
  while (eps_prev > config.epsilon_target) {
    // hit counts under the previous tolerance (all m at t = 1)
    std::vector<std::int64_t> hits_prev(n);
    for (int i = 0; i < n; ++i)
      hits_prev[i] = hits_below(population[i].distances, eps_prev);

    const auto weights_at = [&](double eps) {
      std::vector<double> w(n, 0.0);
      for (int i = 0; i < n; ++i) {
        if (population[i].weight <= 0.0 || hits_prev[i] == 0) continue;
        w[i] = population[i].weight *
               static_cast<double>(hits_below(population[i].distances, eps)) /
               static_cast<double>(hits_prev[i]);
      }
      return w;
    };
    const auto ess_at = [&](double eps) {
      const std::vector<double> w = weights_at(eps);
      double sum = 0.0, sum_sq = 0.0;
      for (double v : w) {
        sum += v;
        sum_sq += v * v;
      }
      return sum > 0.0 ? sum * sum / sum_sq : 0.0;
    };

    std::vector<double> current_weights(n);
    for (int i = 0; i < n; ++i) current_weights[i] = population[i].weight;
    const double target_ess = config.alpha * ess(current_weights);

    double lo = std::numeric_limits<double>::infinity();
    double max_stored = 0.0;
    for (const auto& p : population)
      for (double d : p.distances) {
        lo = std::min(lo, d);
        max_stored = std::max(max_stored, d);
      }
    double hi = std::min(eps_prev, std::nextafter(max_stored,
                                                  std::numeric_limits<double>::infinity()));
    std::string note;
    double eps_t;
    if (ess_at(hi) < target_ess) {
      // ESS target unreachable; fall back to the smallest tolerance that
      // keeps any mass and record the event
      std::vector<double> all;
      for (const auto& p : population)
        all.insert(all.end(), p.distances.begin(), p.distances.end());
      std::sort(all.begin(), all.end());
      all.erase(std::unique(all.begin(), all.end()), all.end());
      eps_t = hi;
      for (double candidate : all) {
        const double c = std::nextafter(candidate,
                                        std::numeric_limits<double>::infinity());
        if (ess_at(c) > 0.0) {
          eps_t = std::min(c, hi);
          break;
        }
      }
      note = "ess target unreachable";
    } else {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ess_at(mid) >= target_ess)
          hi = mid;
        else
          lo = mid;
      }
      eps_t = hi;
    }
    if (eps_t < config.epsilon_target) eps_t = config.epsilon_target;  // clamp

    // reweight at the accepted tolerance and normalize
    std::vector<double> w = weights_at(eps_t);
    double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0)) throw ContractViolation("smc weights vanished");
    for (int i = 0; i < n; ++i) population[i].weight = w[i] / total;
    std::vector<double> normalized(n);
    for (int i = 0; i < n; ++i) normalized[i] = population[i].weight;
    const double ess_t = ess(normalized);

    const bool resample = ess_t < static_cast<double>(n_t);
    if (resample) {
      std::vector<double> cumulative(n);
      double running = 0.0;
      for (int i = 0; i < n; ++i) {
        running += population[i].weight;
        cumulative[i] = running;
      }
      RngStream rng = RngStream::derive(config.seed, t, kResampleStream);
      std::vector<SmcParticle> resampled(n);
      for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01() * running;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t j = it - cumulative.begin();
        j = std::min(j, static_cast<std::size_t>(n - 1));
        resampled[i] = population[j];
        resampled[i].weight = 1.0 / n;
      }
      population = std::move(resampled);
    }

    // move kernel from the alive particles
    std::vector<std::int64_t> alive;
    WeightedSample alive_sample;
    for (int i = 0; i < n; ++i)
      if (population[i].weight > 0.0) {
        alive.push_back(i);
        alive_sample.particles.push_back(
            Particle{population[i].theta, population[i].weight, 0.0});
      }
    const KernelSpec kernel = kernel_from_sample(alive_sample, config.kernel);

    charge(trace.total_simulations,
           static_cast<std::uint64_t>(alive.size()) * static_cast<std::uint64_t>(m),
           config.max_simulations);
    std::vector<std::int64_t> hits_t(n, 0);
    for (int i = 0; i < n; ++i) hits_t[i] = hits_below(population[i].distances, eps_t);
    std::atomic<std::int64_t> accepted{0};
    detail::parallel_for(alive.size(), config.workers, [&](std::size_t a) {
      const std::int64_t i = alive[a];
      RngStream rng = RngStream::derive(config.seed, t, static_cast<std::uint64_t>(i));
      SmcParticle& p = population[i];
      ParamVector theta_star = perturb(p.theta, kernel, rng);
      std::vector<double> dist_star(m);
      for (int k = 0; k < m; ++k) dist_star[k] = simulator.distance(theta_star, rng);
      const std::int64_t n_star = hits_below(dist_star, eps_t);
      // symmetric Gaussian move kernel: the kernel ratio cancels
      const double ratio = static_cast<double>(n_star) * prior.density(theta_star) /
                           (static_cast<double>(hits_t[i]) * prior.density(p.theta));
      const double u = rng.uniform01();
      const double a_prob = std::min(1.0, ratio);
      if (a_prob > 0.0 && u <= a_prob) {
        p.theta = std::move(theta_star);
        p.distances = std::move(dist_star);
        accepted.fetch_add(1, std::memory_order_relaxed);
      }
    });

    WeightedSample snapshot;
    snapshot.epsilon = eps_t;
    snapshot.iteration = t;
    for (const auto& p : population)
      snapshot.particles.push_back(Particle{
          p.theta, p.weight,
          p.distances.empty() ? 0.0 : *std::min_element(p.distances.begin(),
                                                        p.distances.end())});

    IterationRecord rec;
    rec.iteration = t;
    rec.epsilon = eps_t;
    rec.accept_rate = alive.empty() ? 0.0
                                    : static_cast<double>(accepted.load()) /
                                          static_cast<double>(alive.size());
    rec.cum_simulations = trace.total_simulations;
    rec.distinct = distinct_count(snapshot);
    rec.ess = ess_t;
    rec.resampled = resample;
    rec.note = note;
    rec.wall_seconds = clock.seconds();
    trace.records.push_back(rec);
    notify(observer, snapshot, rec);

    eps_prev = eps_t;
    ++t;
  }

  // final posterior sample: positive-weight particles, normalized
  WeightedSample final_sample;
  final_sample.epsilon = eps_prev;
  final_sample.iteration = t - 1;
  double total = 0.0;
  for (const auto& p : population) total += p.weight;
  for (const auto& p : population) {
    if (p.weight <= 0.0) continue;
    final_sample.particles.push_back(Particle{
        p.theta, p.weight / total,
        *std::min_element(p.distances.begin(), p.distances.end())});
  }
  if (final_sample.particles.empty())
    throw ContractViolation("smc finished with no positive-weight particles");
  result.sample = std::move(final_sample);
  return result;
}

}  // namespace abcmc
