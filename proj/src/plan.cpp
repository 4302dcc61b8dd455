#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "abcmc/harness.hpp"

namespace abcmc {
namespace {

// canonical axis order; cell enumeration never depends on file layout
const std::vector<std::string> kAxisKeys = {
    "n", "alpha", "p_acc_min", "epsilon", "epsilon_initial", "schedule",
    "m",  "n_t",   "c",         "r_init",  "kernel",          "init"};

const std::vector<std::string> kAlgorithms = {"rejection", "pmc", "rsmc", "smc",
                                              "apmc"};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

double parse_double(const std::string& token, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("plan key '" + key + "': '" + token + "' is not a number");
  }
}

std::int64_t parse_int(const std::string& token, const std::string& key) {
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("plan key '" + key + "': '" + token + "' is not an integer");
  }
}

std::uint64_t parse_u64(const std::string& token, const std::string& key) {
  if (!token.empty() && token[0] == '-')
    throw ConfigError("plan key '" + key + "' must be nonnegative");
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("plan key '" + key + "': '" + token + "' is not an integer");
  }
}

/// "geom:first:last:levels" or a comma list of levels.
std::vector<double> parse_schedule(const std::string& token) {
  if (token.rfind("geom:", 0) == 0) {
    const auto parts = split(token, ':');
    if (parts.size() != 4)
      throw ConfigError("schedule '" + token + "': expected geom:first:last:levels");
    const double first = parse_double(parts[1], "schedule");
    const double last = parse_double(parts[2], "schedule");
    const std::int64_t levels = parse_int(parts[3], "schedule");
    if (levels < 1 || levels > 100000)
      throw ConfigError("schedule '" + token + "': bad level count");
    return geometric_schedule(first, last, static_cast<int>(levels));
  }
  std::vector<double> levels;
  for (const auto& part : split(token, ','))
    levels.push_back(parse_double(part, "schedule"));
  if (levels.empty()) throw ConfigError("schedule is empty");
  return levels;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

}  // namespace

ExperimentPlan parse_plan_text(const std::string& text) {
  ExperimentPlan plan;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("plan line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ConfigError("plan key '" + key + "' has no value");

    if (key == "model") {
      plan.model = value;
    } else if (key == "algorithm") {
      plan.algorithm = value;
    } else if (key == "replicates") {
      plan.replicates = static_cast<int>(parse_int(value, key));
    } else if (key == "seed") {
      plan.seed = parse_u64(value, key);
    } else if (key == "budget") {
      plan.budget = parse_u64(value, key);
    } else if (key == "out_dir") {
      plan.out_dir = value;
    } else if (key == "workers") {
      plan.workers = static_cast<int>(parse_int(value, key));
    } else if (key == "traces") {
      if (value != "on" && value != "off")
        throw ConfigError("plan key 'traces' must be on or off");
      plan.traces = value == "on";
    } else if (std::find(kAxisKeys.begin(), kAxisKeys.end(), key) !=
               kAxisKeys.end()) {
      auto tokens = split(value, ';');
      tokens.erase(std::remove(tokens.begin(), tokens.end(), std::string()),
                   tokens.end());
      if (tokens.empty())
        throw ConfigError("plan key '" + key + "' has no usable values");
      plan.axes[key] = std::move(tokens);
    } else {
      throw ConfigError("unknown plan key '" + key + "'");
    }
  }
  if (plan.model.empty()) throw ConfigError("plan is missing 'model'");
  if (plan.algorithm.empty()) throw ConfigError("plan is missing 'algorithm'");
  if (plan.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (plan.workers < 0) throw ConfigError("workers must be >= 0");
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), plan.algorithm) ==
      kAlgorithms.end())
    throw ConfigError("unknown algorithm '" + plan.algorithm + "'");
  try {
    find_model(plan.model);
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  return plan;
}

ExperimentPlan parse_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open plan file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_plan_text(buffer.str());
}

namespace {

void validate_cell(const AlgoParams& p) {
  const std::string& a = p.algorithm;
  if (p.n < 2) throw ConfigError("n must be >= 2");
  if (a == "rejection") {
    if (!(p.epsilon > 0)) throw ConfigError("rejection needs epsilon > 0");
  } else if (a == "pmc") {
    if (p.schedule.empty()) throw ConfigError("pmc needs a schedule");
    for (std::size_t t = 0; t < p.schedule.size(); ++t) {
      if (!(p.schedule[t] > 0))
        throw ConfigError("pmc tolerances must be positive");
      if (t > 0 && p.schedule[t] > p.schedule[t - 1])
        throw ConfigError("pmc schedule must be non-increasing");
    }
  } else if (a == "rsmc") {
    if (!(p.epsilon > 0)) throw ConfigError("rsmc needs epsilon > 0");
    if (!(p.alpha > 0 && p.alpha < 1)) throw ConfigError("rsmc needs alpha in (0, 1)");
    if (!(p.c > 0 && p.c < 1)) throw ConfigError("rsmc needs c in (0, 1)");
    if (p.r_init < 1) throw ConfigError("rsmc needs r_init >= 1");
  } else if (a == "smc") {
    if (!(p.epsilon > 0)) throw ConfigError("smc needs epsilon > 0");
    if (!(p.alpha > 0 && p.alpha < 1)) throw ConfigError("smc needs alpha in (0, 1)");
    if (p.m < 1) throw ConfigError("smc needs m >= 1");
    if (p.n_t < 0 || p.n_t > p.n) throw ConfigError("smc needs 0 <= n_t <= n");
  } else if (a == "apmc") {
    if (!(p.alpha > 0 && p.alpha < 1)) throw ConfigError("apmc needs alpha in (0, 1)");
    if (!(p.p_acc_min >= 0 && p.p_acc_min < 1))
      throw ConfigError("apmc needs p_acc_min in [0, 1)");
  }
  if (p.kernel != "auto" && p.kernel != "diag" && p.kernel != "full")
    throw ConfigError("kernel must be auto, diag or full");
  if (p.init != "auto" && p.init != "iid" && p.init != "lhs")
    throw ConfigError("init must be auto, iid or lhs");
}

void apply_axis(AlgoParams& p, const std::string& key, const std::string& token) {
  if (key == "n") {
    p.n = static_cast<int>(parse_int(token, key));
  } else if (key == "alpha") {
    p.alpha = parse_double(token, key);
  } else if (key == "p_acc_min") {
    p.p_acc_min = parse_double(token, key);
  } else if (key == "epsilon") {
    p.epsilon = parse_double(token, key);
  } else if (key == "epsilon_initial") {
    p.epsilon_initial = parse_double(token, key);
  } else if (key == "schedule") {
    p.schedule = parse_schedule(token);
    p.schedule_token = token;
    std::replace(p.schedule_token.begin(), p.schedule_token.end(), ',', '|');
  } else if (key == "m") {
    p.m = static_cast<int>(parse_int(token, key));
  } else if (key == "n_t") {
    p.n_t = static_cast<int>(parse_int(token, key));
  } else if (key == "c") {
    p.c = parse_double(token, key);
  } else if (key == "r_init") {
    p.r_init = static_cast<int>(parse_int(token, key));
  } else if (key == "kernel") {
    p.kernel = token;
  } else if (key == "init") {
    p.init = token;
  }
}

AlgoParams defaults_for(const std::string& algorithm) {
  AlgoParams p;
  p.algorithm = algorithm;
  if (algorithm == "apmc" || algorithm == "rsmc") p.alpha = 0.5;
  if (algorithm == "smc") p.alpha = 0.95;
  if (algorithm == "apmc") p.p_acc_min = 0.01;
  return p;
}

}  // namespace

std::vector<AlgoParams> expand_grid(const ExperimentPlan& plan) {
  for (const auto& [key, values] : plan.axes) {
    (void)values;
    if (std::find(kAxisKeys.begin(), kAxisKeys.end(), key) == kAxisKeys.end())
      throw ConfigError("unknown config key '" + key + "'");
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const auto& key : kAxisKeys) {
    const auto it = plan.axes.find(key);
    if (it != plan.axes.end()) axes.emplace_back(key, it->second);
  }
  std::size_t cells = 1;
  for (const auto& [key, values] : axes) {
    (void)key;
    cells *= values.size();
    if (cells > 1000000) throw ConfigError("grid has more than 1e6 cells");
  }
  std::vector<AlgoParams> out;
  out.reserve(cells);
  for (std::size_t index = 0; index < cells; ++index) {
    AlgoParams p = defaults_for(plan.algorithm);
    std::size_t rest = index;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {  // last axis fastest
      const auto& values = it->second;
      apply_axis(p, it->first, values[rest % values.size()]);
      rest /= values.size();
    }
    validate_cell(p);
    out.push_back(std::move(p));
  }
  return out;
}

std::string csv_header() {
  return "run_id,model,algorithm,n,alpha,p_acc_min,epsilon,epsilon_initial,"
         "schedule,m,n_t,c,r_init,kernel,init,replicate,seed,status,n_sims,"
         "final_epsilon,iterations,l2,criterion,wall_seconds";
}

std::string csv_row(const ResultRow& row) {
  const AlgoParams& p = row.params;
  const std::string& a = p.algorithm;
  const bool has_alpha = a == "apmc" || a == "rsmc" || a == "smc";
  std::ostringstream out;
  out << row.run_id << ',' << row.model << ',' << a << ',' << p.n << ','
      << (has_alpha ? fmt(p.alpha) : "") << ','
      << (a == "apmc" ? fmt(p.p_acc_min) : "") << ','
      << (a == "apmc" || a == "pmc" ? "" : fmt(p.epsilon)) << ','
      << (a == "rsmc" && std::isfinite(p.epsilon_initial) ? fmt(p.epsilon_initial)
                                                          : "")
      << ',' << (a == "pmc" ? p.schedule_token : "") << ','
      << (a == "smc" ? std::to_string(p.m) : "") << ','
      << (a == "smc" ? std::to_string(p.n_t) : "") << ','
      << (a == "rsmc" ? fmt(p.c) : "") << ','
      << (a == "rsmc" ? std::to_string(p.r_init) : "") << ',' << p.kernel << ','
      << (a == "apmc" ? p.init : "") << ',' << row.replicate << ',' << row.seed
      << ',' << row.status << ',' << row.n_sims << ',' << fmt(row.final_epsilon)
      << ',' << (row.iterations > 0 ? std::to_string(row.iterations) : "") << ','
      << fmt(row.l2) << ',' << fmt(row.criterion) << ','
      << fmt_fixed(row.wall_seconds, 3);
  return out.str();
}

ResultRow parse_csv_row(const std::string& line) {
  const auto fields = split(line, ',');
  if (fields.size() != 24)
    throw ConfigError("result row has " + std::to_string(fields.size()) +
                      " fields, expected 24");
  const auto num = [](const std::string& s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : std::stod(s);
  };
  ResultRow row;
  row.run_id = parse_u64(fields[0], "run_id");
  row.model = fields[1];
  row.params.algorithm = fields[2];
  row.params.n = static_cast<int>(parse_int(fields[3], "n"));
  row.params.alpha = num(fields[4]);
  row.params.p_acc_min = num(fields[5]);
  row.params.epsilon = num(fields[6]);
  row.params.epsilon_initial =
      fields[7].empty() ? std::numeric_limits<double>::infinity() : num(fields[7]);
  row.params.schedule_token = fields[8];
  row.params.m = fields[9].empty() ? 1 : static_cast<int>(parse_int(fields[9], "m"));
  row.params.n_t =
      fields[10].empty() ? 0 : static_cast<int>(parse_int(fields[10], "n_t"));
  row.params.c = fields[11].empty() ? 0.01 : num(fields[11]);
  row.params.r_init =
      fields[12].empty() ? 10 : static_cast<int>(parse_int(fields[12], "r_init"));
  row.params.kernel = fields[13];
  row.params.init = fields[14].empty() ? "auto" : fields[14];
  row.replicate = static_cast<int>(parse_int(fields[15], "replicate"));
  row.seed = parse_u64(fields[16], "seed");
  row.status = fields[17];
  row.n_sims = parse_u64(fields[18], "n_sims");
  row.final_epsilon = num(fields[19]);
  row.iterations =
      fields[20].empty() ? 0 : static_cast<int>(parse_int(fields[20], "iterations"));
  row.l2 = num(fields[21]);
  row.criterion = num(fields[22]);
  row.wall_seconds = num(fields[23]);
  return row;
}

std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results file '" + path + "'");
  std::vector<ResultRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == csv_header()) continue;  // tolerate headerless files
    }
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

}  // namespace abcmc
