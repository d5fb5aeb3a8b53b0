#include "wpmec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "wpmec/oracle.hpp"
#include "wpmec/subproblem.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

std::uint64_t realization_seed(std::uint64_t master, std::size_t realization) {
  return mix_seed(master, realization);
}

ChannelSet gen_channels(std::uint64_t seed, std::size_t antennas, std::span<const double> distances,
                        double reference_gain, double exponent) {
  std::vector<ComplexVector> down, up;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0)) throw InvalidParameters("gen_channels: distances must be > 0");
    const double amp = std::sqrt(reference_gain * std::pow(distances[i], -exponent) / 2.0);
    Rng rng(mix_seed(seed, i));
    ComplexVector h(antennas), g(antennas);
    for (std::size_t n = 0; n < antennas; ++n) h[n] = amp * Complex(rng.normal(), rng.normal());
    for (std::size_t n = 0; n < antennas; ++n) g[n] = amp * Complex(rng.normal(), rng.normal());
    down.push_back(std::move(h));
    up.push_back(std::move(g));
  }
  return ChannelSet(std::move(down), std::move(up));
}

ChannelSet gen_channels(std::uint64_t seed, const SystemParams& params) {
  std::vector<double> d;
  for (const auto& u : params.users) d.push_back(u.distance);
  return gen_channels(seed, params.antennas, d);
}

// ---------------------------------------------------------------- config

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(trim(v));
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError("bad number for '" + std::string(key) + "': " + s);
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  const std::string s(trim(v));
  char* end = nullptr;
  const unsigned long long x = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size())
    throw ConfigError("bad integer for '" + std::string(key) + "': " + s);
  return x;
}

bool set_user_field(UserParams& u, std::string_view field, double v) {
  if (field == "task_bits") u.task_bits = v;
  else if (field == "cycles_per_bit") u.cycles_per_bit = v;
  else if (field == "capacitance") u.capacitance = v;
  else if (field == "circuit_power") u.circuit_power = v;
  else if (field == "max_frequency") u.max_frequency = v;
  else if (field == "distance") u.distance = v;
  else return false;
  return true;
}

// Keys applied before everything else so per-user settings land on the right count.
int key_rank(std::string_view key) {
  if (key == "num_users") return 0;
  if (key.starts_with("user.")) return 2;
  UserParams probe;
  if (set_user_field(probe, key, 0.0)) return 1;
  return 3;
}

void resize_users(SystemParams& p, std::size_t k) {
  if (k == 0) throw ConfigError("num_users must be >= 1");
  const UserParams proto = p.users.empty() ? UserParams{} : p.users.front();
  p.users.resize(k, proto);
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  auto& p = cfg.base;
  if (key == "num_users") resize_users(p, to_u64(key, value));
  else if (key == "antennas") p.antennas = to_u64(key, value);
  else if (key == "block_length") p.block_length = to_double(key, value);
  else if (key == "bandwidth") p.bandwidth = to_double(key, value);
  else if (key == "noise_power") p.noise_power = to_double(key, value);
  else if (key == "eh_efficiency") p.eh_efficiency = to_double(key, value);
  else if (key == "energy_per_bit") p.energy_per_bit = to_double(key, value);
  else if (key == "capacity_gap") p.capacity_gap = to_double(key, value);
  else if (key == "sweep_var") cfg.sweep_var = std::string(trim(value));
  else if (key == "sweep_values") {
    cfg.sweep_values.clear();
    for (const auto& s : split_list(value)) cfg.sweep_values.push_back(to_double(key, s));
  } else if (key == "realizations") cfg.realizations = to_u64(key, value);
  else if (key == "seed") cfg.seed = to_u64(key, value);
  else if (key == "schemes") cfg.schemes = split_list(value);
  else if (key == "output") cfg.output = std::string(trim(value));
  else if (key == "tol") cfg.tol = to_double(key, value);
  else if (key == "threads") cfg.threads = static_cast<unsigned>(to_u64(key, value));
  else if (key.starts_with("user.")) {
    const auto rest = key.substr(5);
    const auto dot = rest.find('.');
    if (dot == std::string_view::npos) throw ConfigError("malformed key: " + std::string(key));
    const auto i = to_u64(key, rest.substr(0, dot));
    if (i < 1 || i > p.users.size())
      throw ConfigError("user index out of range (1-based, K = " + std::to_string(p.users.size()) +
                        "): " + std::string(key));
    if (!set_user_field(p.users[i - 1], rest.substr(dot + 1), to_double(key, value)))
      throw ConfigError("unknown user field: " + std::string(key));
  } else {
    const double v = to_double(key, value);
    bool any = false;
    for (auto& u : p.users) any = set_user_field(u, key, v);
    if (!any) throw ConfigError("unknown key: " + std::string(key));
  }
}

ExperimentConfig parse_config(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = std::string_view(line);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    entries.emplace_back(std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return key_rank(a.first) < key_rank(b.first); });
  ExperimentConfig cfg;
  for (const auto& [k, v] : entries) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> vars = {"T", "K", "R", "B", "d2", "R2"};
  if (std::find(vars.begin(), vars.end(), sweep_var) == vars.end())
    throw ConfigError("sweep_var must be one of T, K, R, B, d2, R2");
  if (sweep_values.empty()) throw ConfigError("sweep_values must not be empty");
  if (realizations < 1) throw ConfigError("realizations must be >= 1");
  if (schemes.empty()) throw ConfigError("schemes must not be empty");
  for (const auto& s : schemes)
    if (!is_scheme_id(s)) throw ConfigError("unknown scheme: " + s);
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  try {
    for (double v : sweep_values) apply_sweep(base, sweep_var, v).validate();
  } catch (const InvalidParameters& e) {
    throw ConfigError(e.what());
  }
}

SystemParams apply_sweep(const SystemParams& base, std::string_view var, double value) {
  SystemParams p = base;
  if (var == "T") p.block_length = value;
  else if (var == "B") p.bandwidth = value;
  else if (var == "R") for (auto& u : p.users) u.task_bits = value;
  else if (var == "K") {
    if (!(value >= 1.0) || value != std::floor(value)) throw InvalidParameters("K must be a positive integer");
    resize_users(p, static_cast<std::size_t>(value));
  } else if (var == "d2" || var == "R2") {
    if (p.users.size() < 2) throw InvalidParameters("sweeping d2/R2 needs at least two users");
    (var == "d2" ? p.users[1].distance : p.users[1].task_bits) = value;
  } else {
    throw InvalidParameters("unknown sweep variable: " + std::string(var));
  }
  return p;
}

// ---------------------------------------------------------------- sweeps

RealizationRecord run_point(const SystemParams& params, const ChannelSet& channels,
                            std::span<const std::string> schemes, const SolveOptions& options) {
  auto guarded = [&](std::string_view id) {
    try {
      return run_scheme(id, params, channels, options);
    } catch (const InvalidParameters&) {
      throw;
    } catch (const std::exception& e) {
      SchemeResult r;
      r.scheme = std::string(id);
      r.feasible = false;
      r.status = SolveStatus::degenerate;
      r.objective = std::nan("");
      r.diagnostics = e.what();
      return r;
    }
  };
  RealizationRecord rec;
  const auto joint = guarded("joint");
  for (const auto& s : schemes) {
    rec.results.push_back(s == "joint" ? joint : guarded(s));
    const auto& r = rec.results.back();
    if (joint.feasible && r.feasible && r.objective < joint.objective - 1e-6 * (1.0 + joint.objective))
      rec.dominance_ok = false;
  }
  return rec;
}

const SchemeSummary* SweepOutcome::find(double sweep_value, std::string_view scheme) const {
  for (const auto& s : summary)
    if (s.sweep_value == sweep_value && s.scheme == scheme) return &s;
  return nullptr;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct Task {
  std::size_t value_index;
  std::size_t realization;
};

struct Done {
  bool ready = false;
  RealizationRecord record;
  std::exception_ptr error;
};

// Computes records on a pool of workers and hands them to `consume` strictly in task order.
template <class Consume>
void run_ordered(const ExperimentConfig& cfg, const std::vector<Task>& tasks,
                 std::span<const std::string> schemes, Consume&& consume) {
  SolveOptions opts;
  opts.dual.tol = cfg.tol;
  auto compute = [&](const Task& t) {
    const auto params = apply_sweep(cfg.base, cfg.sweep_var, cfg.sweep_values[t.value_index]);
    const auto seed = realization_seed(cfg.seed, t.realization);
    auto rec = run_point(params, gen_channels(seed, params), schemes, opts);
    rec.realization = t.realization;
    rec.seed = seed;
    return rec;
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, tasks.size()));
  if (threads <= 1) {
    for (const auto& t : tasks) consume(t, compute(t));
    return;
  }

  std::vector<Done> done(tasks.size());
  std::mutex m;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; !stop && (i = next++) < tasks.size();) {
        Done d;
        try {
          d.record = compute(tasks[i]);
        } catch (...) {
          d.error = std::current_exception();
        }
        d.ready = true;
        {
          std::lock_guard lock(m);
          done[i] = std::move(d);
        }
        cv.notify_all();
      }
    });

  std::exception_ptr failure;
  for (std::size_t i = 0; i < tasks.size() && !failure; ++i) {
    Done d;
    {
      std::unique_lock lock(m);
      cv.wait(lock, [&] { return done[i].ready; });
      d = std::move(done[i]);
    }
    if (d.error) failure = d.error;
    else consume(tasks[i], std::move(d.record));
  }
  stop = true;
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Accumulator {
  SchemeSummary s;
  double sum = 0.0;
  std::vector<double> l, res;
  void add(const SchemeResult& r) {
    if (r.status != SolveStatus::converged) ++s.flagged;
    if (!r.feasible) return;
    ++s.feasible;
    sum += r.objective;
    const auto& a = r.allocation;
    l.resize(std::max(l.size(), a.offloaded.size()), 0.0);
    res.resize(l.size(), 0.0);
    for (std::size_t i = 0; i < a.offloaded.size(); ++i) {
      l[i] += a.offloaded[i];
      res[i] += a.energy[i].residual();
    }
  }
  SchemeSummary finish() {
    const double n = static_cast<double>(s.feasible);
    s.mean_objective = s.feasible ? sum / n : std::nan("");
    for (double& x : l) x = s.feasible ? x / n : std::nan("");
    for (double& x : res) x = s.feasible ? x / n : std::nan("");
    s.mean_offloaded = l;
    s.mean_residual = res;
    return s;
  }
};

std::size_t max_users(const ExperimentConfig& cfg) {
  std::size_t k = 0;
  for (double v : cfg.sweep_values) k = std::max(k, apply_sweep(cfg.base, cfg.sweep_var, v).num_users());
  return k;
}

std::vector<Task> all_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (std::size_t v = 0; v < cfg.sweep_values.size(); ++v)
    for (std::size_t r = 0; r < cfg.realizations; ++r) tasks.push_back({v, r});
  return tasks;
}

}  // namespace

SweepOutcome run_sweep(const ExperimentConfig& cfg, std::ostream& csv, std::ostream* summary_csv) {
  cfg.validate();
  const std::size_t kmax = max_users(cfg);
  csv << "sweep_var,sweep_value,realization,seed,scheme,objective_J,status";
  for (const char* col : {"l_opt_bits_user", "t_opt_s_user", "residual_J_user"})
    for (std::size_t i = 1; i <= kmax; ++i) csv << ',' << col << i;
  csv << '\n';

  SweepOutcome out;
  std::map<std::pair<std::size_t, std::string>, Accumulator> acc;
  run_ordered(cfg, all_tasks(cfg), cfg.schemes, [&](const Task& t, RealizationRecord rec) {
    const double value = cfg.sweep_values[t.value_index];
    if (!rec.dominance_ok) ++out.dominance_violations;
    for (const auto& r : rec.results) {
      const auto& a = r.allocation;
      std::string row = cfg.sweep_var + ',' + num(value) + ',' + std::to_string(rec.realization) + ',' +
                        std::to_string(rec.seed) + ',' + r.scheme + ',' + num(r.objective) + ',' +
                        std::to_string(static_cast<int>(r.status));
      auto column = [&](auto get) {
        for (std::size_t i = 0; i < kmax; ++i) {
          row += ',';
          if (r.feasible && i < a.offloaded.size()) row += num(get(i));
        }
      };
      column([&](std::size_t i) { return a.offloaded[i]; });
      column([&](std::size_t i) { return a.time[i]; });
      column([&](std::size_t i) { return a.energy[i].residual(); });
      csv << row << '\n';
      ++out.rows;
      if (r.status != SolveStatus::converged) ++out.flagged;
      if (!r.feasible) ++out.infeasible;
      auto& slot = acc[{t.value_index, r.scheme}];
      slot.s.sweep_value = value;
      slot.s.scheme = r.scheme;
      slot.add(r);
    }
    csv.flush();
  });

  for (std::size_t v = 0; v < cfg.sweep_values.size(); ++v)
    for (const auto& s : cfg.schemes)
      if (auto it = acc.find({v, s}); it != acc.end()) out.summary.push_back(it->second.finish());

  if (summary_csv) {
    auto& o = *summary_csv;
    o << "sweep_var,sweep_value,scheme,realizations,feasible,flagged,mean_objective_J";
    for (std::size_t i = 1; i <= kmax; ++i) o << ",mean_l_opt_bits_user" << i;
    for (std::size_t i = 1; i <= kmax; ++i) o << ",mean_residual_J_user" << i;
    o << '\n';
    for (const auto& s : out.summary) {
      o << cfg.sweep_var << ',' << num(s.sweep_value) << ',' << s.scheme << ',' << cfg.realizations << ','
        << s.feasible << ',' << s.flagged << ',' << num(s.mean_objective);
      for (std::size_t i = 0; i < kmax; ++i) o << ',' << (i < s.mean_offloaded.size() ? num(s.mean_offloaded[i]) : "");
      for (std::size_t i = 0; i < kmax; ++i) o << ',' << (i < s.mean_residual.size() ? num(s.mean_residual[i]) : "");
      o << '\n';
    }
  }
  return out;
}

SweepOutcome run_sweep(const ExperimentConfig& cfg) {
  std::ofstream csv(cfg.output);
  if (!csv) throw std::runtime_error("cannot write " + cfg.output);
  const std::filesystem::path out(cfg.output);
  const auto summary_path = out.parent_path() / (out.stem().string() + "_summary.csv");
  std::ofstream summary(summary_path);
  if (!summary) throw std::runtime_error("cannot write " + summary_path.string());
  auto res = run_sweep(cfg, csv, &summary);
  if (!csv || !summary) throw std::runtime_error("I/O error while writing sweep output");
  return res;
}

ExperimentConfig table_config(TableKind kind, std::size_t realizations, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.base = SystemParams::homogeneous(2, 0.2, 2e4);
  cfg.base.users[0].distance = 2.0;
  cfg.base.users[1].distance = 6.0;
  cfg.realizations = realizations;
  cfg.seed = seed;
  cfg.schemes = {"joint"};
  if (kind == TableKind::distance) {
    cfg.sweep_var = "d2";
    cfg.sweep_values = {2, 3, 4, 5, 6, 7, 8};
    cfg.output = "table_distance.csv";
  } else {
    cfg.sweep_var = "R2";
    cfg.sweep_values = {1e4, 2e4, 3e4, 4e4};
    cfg.output = "table_task_size.csv";
  }
  return cfg;
}

SweepOutcome run_tables(const ExperimentConfig& cfg_in, std::ostream& csv) {
  ExperimentConfig cfg = cfg_in;
  cfg.schemes = {"joint"};
  cfg.validate();
  if (cfg.base.num_users() != 2) throw ConfigError("tables need exactly two users");
  std::ostringstream rows;
  auto out = run_sweep(cfg, rows, nullptr);
  csv << "sweep_var,sweep_value,realizations,feasible,mean_l1_bits,mean_l2_bits,mean_residual1_J,mean_residual2_J\n";
  for (const auto& s : out.summary) {
    csv << cfg.sweep_var << ',' << num(s.sweep_value) << ',' << cfg.realizations << ',' << s.feasible;
    for (std::size_t i = 0; i < 2; ++i) csv << ',' << num(i < s.mean_offloaded.size() ? s.mean_offloaded[i] : std::nan(""));
    for (std::size_t i = 0; i < 2; ++i) csv << ',' << num(i < s.mean_residual.size() ? s.mean_residual[i] : std::nan(""));
    csv << '\n';
  }
  csv.flush();
  return out;
}

// ---------------------------------------------------------------- oracle

std::vector<OracleComparison> oracle_cross_check(std::size_t instances, std::uint64_t seed,
                                                 const SolveOptions& options) {
  std::vector<OracleComparison> out;
  Rng rng(mix_seed(seed, 0x6f7261636c65));
  for (std::size_t k = 0; k < instances; ++k) {
    OracleComparison c;
    c.index = k;
    const double T = rng.uniform(0.05, 0.5);
    const double R = rng.uniform(5e3, 5e4);
    c.params = SystemParams::homogeneous(1, T, R);
    c.params.antennas = 1 + k % 2;
    c.params.users[0].distance = rng.uniform(2.0, 6.0);
    const auto ch = gen_channels(realization_seed(seed, k), c.params);
    const auto rep = solve_joint(c.params, ch, options);
    const auto ora = grid_oracle_k1(c.params, ch);
    c.joint = rep.primal_objective;
    c.oracle = ora.objective;
    c.status = rep.status;
    c.relative = std::abs(c.joint - c.oracle) / std::max(std::abs(c.oracle), 1e-12);
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------- selftest

bool run_selftest(std::ostream& log, std::uint64_t seed) {
  bool all = true;
  auto check = [&](const char* name, bool ok, double worst) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s %-28s worst=%.3e\n", ok ? "ok" : "FAIL", name, worst);
    log << buf;
    all = all && ok;
  };
  Rng rng(mix_seed(seed, 0x73656c66));

  {
    const double B = 2e6, s2 = 1e-9;
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double x = rng.uniform(1e-6, 10.0) * B;
      const double y = beta(x, s2, B) - x * beta_prime(x, s2, B);
      worst = std::max(worst, std::abs(inverse_beta_gap(y, s2, B) - x) / x);
    }
    check("inverse beta gap", worst <= 1e-9, worst);
  }
  {
    const double r = jensen_sampler(10, 0.5, 1e-28, 20000, seed);
    check("uniform frequency ratio", r >= 1.0 - 1e-9, r);
  }

  SolveOptions opts;
  double kkt = 0.0, gap = 0.0, dom = 0.0;
  bool weak = true;
  for (std::size_t r = 0; r < 4; ++r) {
    const auto p = SystemParams::homogeneous(3, 0.05 + 0.1 * static_cast<double>(r), 2e4);
    const auto ch = gen_channels(realization_seed(seed, r), p);
    const auto rep = solve_joint(p, ch, opts);
    kkt = std::max(kkt, rep.kkt.max_product());
    gap = std::max(gap, rep.relative_gap);
    for (const auto& id : kSchemeIds) {
      if (id == "joint") continue;
      const auto s = run_scheme(id, p, ch, opts);
      if (s.feasible) dom = std::max(dom, rep.primal_objective - s.objective - 1e-6 * (1.0 + rep.primal_objective));
    }
    DualPoint z = rep.dual.point;
    for (double& l : z.lambda) l *= 0.5;
    weak = weak && weak_duality_sampler(p, ch, z, 200, seed + r).holds;
  }
  check("joint kkt products", kkt <= 1e-5, kkt);
  check("joint duality gap", gap <= opts.gap_tol, gap);
  check("scheme dominance", dom <= 0.0, dom);
  check("weak duality", weak, 0.0);

  double orc = 0.0;
  for (const auto& c : oracle_cross_check(6, seed, opts)) orc = std::max(orc, c.relative);
  check("single-user grid oracle", orc <= 1e-3, orc);

  ExperimentConfig cfg;
  cfg.base = SystemParams::homogeneous(2, 0.1, 2e4);
  cfg.sweep_values = {0.1, 0.2};
  cfg.realizations = 3;
  cfg.seed = seed;
  cfg.schemes = {"joint", "local_only"};
  std::ostringstream a, b;
  run_sweep(cfg, a);
  cfg.threads = 1;
  run_sweep(cfg, b);
  check("sweep determinism", a.str() == b.str(), 0.0);
  return all;
}

}  // namespace wpmec
