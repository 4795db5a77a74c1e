#include "stlsmooth/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <limits>
#include <mutex>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "stlsmooth/text.hpp"

namespace stlsmooth {

using json = nlohmann::json;

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  auto same_regions = [](const RegionTable& a, const RegionTable& b) {
    if (a.size() != b.size()) return false;
    for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
      if (ia->first != ib->first || ia->second.bounds != ib->second.bounds) return false;
    }
    return true;
  };
  return name == o.name && model == o.model && dt == o.dt && T == o.T && semantics == o.semantics && k1 == o.k1 &&
         k2 == o.k2 && control_weight == o.control_weight && control_bounds == o.control_bounds &&
         hard_clamp == o.hard_clamp && same_regions(regions, o.regions) && spec == o.spec && x0 == o.x0 &&
         x0_box == o.x0_box && theta0_range == o.theta0_range && restarts == o.restarts &&
         zero_baseline == o.zero_baseline && seed == o.seed && obstacle_inflation == o.obstacle_inflation &&
         max_iters == o.max_iters && tolerance == o.tolerance;
}

namespace {

Box box2(double x0, double x1, double y0, double y1) {
  Box b;
  b.bounds[0] = {x0, x1};
  b.bounds[1] = {y0, y1};
  return b;
}

bool is_obstacle(const std::string& name) {
  if (name.size() < 3) return false;
  std::string head = name.substr(0, 3);
  std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
  return head == "obs";
}

ScenarioConfig two_target() {
  ScenarioConfig cfg;
  cfg.name = "two_target";
  cfg.T = 10;
  cfg.k1 = cfg.k2 = 2.0;
  cfg.control_bounds = Bounds{{-2.0, 2.0}, {-2.0, 2.0}};
  cfg.regions["obs"] = box2(2.0, 4.0, 2.0, 4.0);
  cfg.regions["target1"] = box2(0.0, 2.0, 4.0, 6.0);
  cfg.regions["target2"] = box2(4.0, 6.0, 0.0, 2.0);
  cfg.regions["goal"] = box2(5.0, 7.0, 5.0, 7.0);
  cfg.spec =
      "G[0,10] not obs and F[0,10] (target1 or target2) and F[0,10] goal"
      " and G[0,10] (-2 <= y2 <= 2 and -2 <= y3 <= 2)";
  cfg.x0 = std::vector<double>{0.0, 0.0};
  return cfg;
}

ScenarioConfig tunnel() {
  ScenarioConfig cfg;
  cfg.name = "tunnel";
  cfg.T = 20;
  cfg.k1 = cfg.k2 = 10.0;
  cfg.control_bounds = Bounds{{-1.0, 1.0}, {-1.0, 1.0}};
  // Two walls with a one-unit gap at 4.5 <= y <= 5.5.
  cfg.regions["obs1"] = box2(4.0, 6.0, -2.0, 4.5);
  cfg.regions["obs2"] = box2(4.0, 6.0, 5.5, 12.0);
  cfg.regions["goal"] = box2(7.0, 8.0, 4.5, 5.5);
  cfg.spec = "G[0,20] not (obs1 or obs2) and F[0,20] goal and G[0,10] (-1 <= y2 <= 1 and -1 <= y3 <= 1)";
  cfg.x0 = std::vector<double>{0.5, 5.0};
  return cfg;
}

ScenarioConfig table2_diffdrive() {
  ScenarioConfig cfg = two_target();
  cfg.name = "table2_diffdrive";
  cfg.model = "differential_drive";
  cfg.T = 11;
  cfg.k1 = cfg.k2 = 1.0;
  cfg.control_bounds.reset();
  cfg.spec = "G[0,11] not obs and F[0,11] (target1 or target2) and F[0,11] goal";
  cfg.x0.reset();
  cfg.x0_box = Bounds{{0.0, 1.0}, {0.0, 1.0}};
  cfg.theta0_range = std::pair{0.0, 2.0 * std::numbers::pi};
  cfg.restarts = 1;
  cfg.zero_baseline = false;
  return cfg;
}

std::size_t scaled(std::size_t value, std::size_t N) {
  return static_cast<std::size_t>(std::lround(static_cast<double>(value) * static_cast<double>(N) / 30.0));
}

}  // namespace

ScenarioConfig charging_scenario(std::size_t N, std::size_t P) {
  if (N < 2) throw std::invalid_argument("charging horizon N must be at least 2");
  if (P < 1 || P > 10) throw std::invalid_argument("charging station count P must be in [1, 10]");
  ScenarioConfig cfg;
  cfg.name = "charging";
  cfg.T = N;
  cfg.k1 = cfg.k2 = 5.0;
  cfg.control_bounds = Bounds{{-1.0, 1.0}, {-1.0, 1.0}};
  cfg.x0_box = Bounds{{0.0, 1.0}, {0.0, 1.0}};
  cfg.restarts = 4;

  struct Cluster {
    std::size_t lo, hi, dwell;
    std::vector<std::pair<double, double>> corners;  // lower-left of 1x1 stations
  };
  const std::vector<Cluster> clusters = {
      {1, 10, 3, {{2.0, 1.0}, {1.0, 3.0}, {3.5, 2.5}, {2.5, 4.5}}},
      {12, 17, 5, {{6.0, 5.0}, {7.5, 6.0}, {5.5, 7.0}}},
      {20, 25, 3, {{9.0, 2.0}, {10.5, 3.5}, {9.5, 0.5}}},
  };
  const std::vector<std::pair<double, double>> obstacles = {{4.5, 0.0}, {0.0, 6.0}, {4.5, 4.0},
                                                            {8.0, 8.5}, {11.5, 6.0}, {7.0, 2.5}};
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto [x, y] = obstacles[i];
    cfg.regions["obs" + std::to_string(i + 1)] = box2(x, x + 1.0, y, y + 1.0);
  }
  cfg.regions["goal"] = box2(11.0, 12.0, 10.0, 11.0);

  std::string obs_list;
  for (std::size_t i = 0; i < obstacles.size(); ++i) obs_list += (i ? " or obs" : "obs") + std::to_string(i + 1);
  std::string spec = "G[0," + std::to_string(N) + "] not (" + obs_list + ") and F[0," + std::to_string(N) + "] goal";

  std::size_t remaining = P;
  for (std::size_t c = 0; c < clusters.size() && remaining > 0; ++c) {
    const auto& cl = clusters[c];
    const std::size_t count = std::min(remaining, cl.corners.size());
    remaining -= count;
    std::size_t lo = std::min(scaled(cl.lo, N), N);
    std::size_t hi = std::clamp(scaled(cl.hi, N), lo, N);
    const std::size_t dwell = std::min(cl.dwell, N - hi);
    std::string stations;
    for (std::size_t j = 0; j < count; ++j) {
      const std::string name = "chg" + std::to_string(c + 1) + "_" + std::to_string(j + 1);
      const auto [x, y] = cl.corners[j];
      cfg.regions[name] = box2(x, x + 1.0, y, y + 1.0);
      stations += (j ? " or " : "") + name;
    }
    spec += " and F[" + std::to_string(lo) + "," + std::to_string(hi) + "] G[0," + std::to_string(dwell) + "] (" +
            stations + ")";
  }
  spec += " and G[0," + std::to_string(N) + "] (-1 <= y2 <= 1 and -1 <= y3 <= 1)";
  cfg.spec = spec;
  return cfg;
}

std::vector<std::string> builtin_scenario_names() { return {"two_target", "tunnel", "charging", "table2_diffdrive"}; }

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "two_target") return two_target();
  if (name == "tunnel") return tunnel();
  if (name == "charging") return charging_scenario();
  if (name == "table2_diffdrive") return table2_diffdrive();
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected two_target, tunnel, charging or table2_diffdrive)");
}

RegionTable effective_regions(const ScenarioConfig& cfg) {
  RegionTable out = cfg.regions;
  if (cfg.obstacle_inflation == 0.0) return out;
  for (auto& [name, box] : out) {
    if (!is_obstacle(name)) continue;
    for (auto& [dim, range] : box.bounds) {
      range.first -= cfg.obstacle_inflation;
      range.second += cfg.obstacle_inflation;
    }
  }
  return out;
}

Formula scenario_formula(const ScenarioConfig& cfg) {
  const auto model = builtin_model(cfg.model, cfg.dt);
  Formula phi = to_nnf(parse(cfg.spec, effective_regions(cfg), model.p));
  if (horizon(phi) > cfg.T) {
    throw std::invalid_argument("spec horizon " + std::to_string(horizon(phi)) + " exceeds T=" +
                                std::to_string(cfg.T));
  }
  return phi;
}

void validate_scenario(const ScenarioConfig& cfg) {
  const auto model = builtin_model(cfg.model, cfg.dt);
  if (cfg.semantics != "ef" && cfg.semantics != "lse") throw std::invalid_argument("semantics must be ef or lse");
  if (!(cfg.k1 > 0.0)) throw std::invalid_argument("k1 must be positive");
  if (!(cfg.k2 >= 0.0)) throw std::invalid_argument("k2 must be nonnegative");
  if (!(cfg.control_weight >= 0.0)) throw std::invalid_argument("control_weight must be nonnegative");
  if (cfg.control_bounds) {
    if (cfg.control_bounds->size() != model.m) throw std::invalid_argument("control_bounds needs one pair per input");
    for (const auto& [lo, hi] : *cfg.control_bounds) {
      if (!(lo < hi)) throw std::invalid_argument("control_bounds: lo must be below hi");
    }
  }
  if (cfg.hard_clamp && !cfg.control_bounds) throw std::invalid_argument("hard_clamp needs control_bounds");
  if (!(cfg.obstacle_inflation >= 0.0)) throw std::invalid_argument("obstacle_inflation must be nonnegative");
  if (cfg.restarts == 0) throw std::invalid_argument("restarts must be at least 1");
  validate_regions(cfg.regions);
  if (cfg.x0 && cfg.x0_box) throw std::invalid_argument("x0 and x0_box are mutually exclusive");
  if (!cfg.x0 && !cfg.x0_box) throw std::invalid_argument("one of x0 or x0_box is required");
  if (cfg.x0 && cfg.x0->size() != model.n) {
    throw std::invalid_argument("x0 has length " + std::to_string(cfg.x0->size()) + ", model expects " +
                                std::to_string(model.n));
  }
  if (cfg.x0_box) {
    if (cfg.x0_box->size() != 2) throw std::invalid_argument("x0_box needs two (lo, hi) pairs for the position");
    for (const auto& [lo, hi] : *cfg.x0_box) {
      if (!(lo <= hi)) throw std::invalid_argument("x0_box: lo must not exceed hi");
    }
  }
  if (cfg.theta0_range && !(cfg.theta0_range->first <= cfg.theta0_range->second)) {
    throw std::invalid_argument("theta0_range: lo must not exceed hi");
  }
  scenario_formula(cfg);
}

Eigen::VectorXd sample_x0(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  const auto model = builtin_model(cfg.model, cfg.dt);
  if (cfg.x0) return Eigen::Map<const Eigen::VectorXd>(cfg.x0->data(), static_cast<Eigen::Index>(cfg.x0->size()));
  if (!cfg.x0_box) throw std::invalid_argument("scenario has neither x0 nor x0_box");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.n));
  for (std::size_t d = 0; d < cfg.x0_box->size(); ++d) {
    const auto [lo, hi] = (*cfg.x0_box)[d];
    x(static_cast<Eigen::Index>(d)) = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  if (model.n == 3 && cfg.theta0_range) {
    const auto [lo, hi] = *cfg.theta0_range;
    x(2) = lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return x;
}

SynthesisProblem make_problem(const ScenarioConfig& cfg, const Eigen::VectorXd& x0) {
  SynthesisProblem problem(builtin_model(cfg.model, cfg.dt), x0, scenario_formula(cfg), cfg.T);
  problem.cfg = cfg.semantics == "lse" ? SemanticsConfig::lse(cfg.k1) : SemanticsConfig::ef(cfg.k1, cfg.k2);
  problem.control_weight = cfg.control_weight;
  problem.control_bounds = cfg.control_bounds;
  problem.hard_clamp = cfg.hard_clamp;
  problem.restarts = cfg.restarts;
  problem.seed = cfg.seed;
  problem.max_iters = cfg.max_iters;
  problem.tolerance = cfg.tolerance;
  problem.zero_baseline = cfg.zero_baseline;
  return problem;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': " + what);
}

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    key_error(key, e.what());
  }
}

template <typename T>
void get_opt(const json& j, const std::string& key, T& out) {
  if (j.contains(key)) out = get<T>(j, key);
}

std::pair<double, double> get_pair(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    key_error(key, "expected [lo, hi]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Bounds get_bounds(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_array()) key_error(key, "expected a list of [lo, hi] pairs");
  Bounds out;
  for (const auto& item : v) out.push_back(get_pair(item, key));
  return out;
}

json bounds_json(const Bounds& b) {
  json out = json::array();
  for (const auto& [lo, hi] : b) out.push_back({lo, hi});
  return out;
}

RegionTable regions_from_json(const json& regions) {
  if (!regions.is_object()) key_error("regions", "expected an object of name -> {dim: [lo, hi]}");
  RegionTable out;
  for (const auto& [name, box] : regions.items()) {
    const std::string key = "regions." + name;
    if (!box.is_object()) key_error(key, "expected an object of dim -> [lo, hi]");
    Box b;
    for (const auto& [dim, range] : box.items()) {
      std::size_t index = 0;
      std::size_t used = 0;
      try {
        index = std::stoul(dim, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != dim.size()) key_error(key, "dimension '" + dim + "' is not a nonnegative integer");
      b.bounds[index] = get_pair(range, key + "." + dim);
    }
    out[name] = std::move(b);
  }
  return out;
}

}  // namespace

RegionTable regions_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("regions file is not valid JSON: ") + e.what());
  }
  auto regions = regions_from_json(j.is_object() && j.contains("regions") ? j["regions"] : j);
  validate_regions(regions);
  return regions;
}

ScenarioConfig scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known = {
      "name",     "model",     "dt",         "T",          "semantics",    "k1",       "k2",
      "control_weight", "control_bounds", "hard_clamp", "regions", "spec", "x0", "x0_box",
      "theta0_range", "restarts", "zero_baseline", "seed", "obstacle_inflation", "max_iters", "tolerance"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) key_error(key, "unknown key");
  }
  for (const char* key : {"model", "T", "regions", "spec"}) {
    if (!j.contains(key)) key_error(key, "missing");
  }

  ScenarioConfig cfg;
  get_opt(j, "name", cfg.name);
  cfg.model = get<std::string>(j, "model");
  get_opt(j, "dt", cfg.dt);
  cfg.T = get<std::size_t>(j, "T");
  get_opt(j, "semantics", cfg.semantics);
  get_opt(j, "k1", cfg.k1);
  cfg.k2 = cfg.k1;
  get_opt(j, "k2", cfg.k2);
  get_opt(j, "control_weight", cfg.control_weight);
  if (j.contains("control_bounds") && !j["control_bounds"].is_null()) cfg.control_bounds = get_bounds(j, "control_bounds");
  get_opt(j, "hard_clamp", cfg.hard_clamp);

  cfg.regions = regions_from_json(j.at("regions"));
  cfg.spec = get<std::string>(j, "spec");
  if (j.contains("x0") && !j["x0"].is_null()) cfg.x0 = get<std::vector<double>>(j, "x0");
  if (j.contains("x0_box") && !j["x0_box"].is_null()) cfg.x0_box = get_bounds(j, "x0_box");
  if (j.contains("theta0_range") && !j["theta0_range"].is_null()) {
    cfg.theta0_range = get_pair(j["theta0_range"], "theta0_range");
  }
  get_opt(j, "restarts", cfg.restarts);
  get_opt(j, "zero_baseline", cfg.zero_baseline);
  get_opt(j, "seed", cfg.seed);
  get_opt(j, "obstacle_inflation", cfg.obstacle_inflation);
  get_opt(j, "max_iters", cfg.max_iters);
  get_opt(j, "tolerance", cfg.tolerance);

  try {
    validate_scenario(cfg);
  } catch (const ParseError& e) {
    key_error("spec", e.what());
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    if (msg.rfind("config key", 0) == 0) throw;
    throw std::invalid_argument("config: " + msg);
  }
  return cfg;
}

std::string scenario_to_json_text(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["model"] = cfg.model;
  j["dt"] = cfg.dt;
  j["T"] = cfg.T;
  j["semantics"] = cfg.semantics;
  j["k1"] = cfg.k1;
  j["k2"] = cfg.k2;
  j["control_weight"] = cfg.control_weight;
  if (cfg.control_bounds) j["control_bounds"] = bounds_json(*cfg.control_bounds);
  j["hard_clamp"] = cfg.hard_clamp;
  json regions = json::object();
  for (const auto& [name, box] : cfg.regions) {
    json b = json::object();
    for (const auto& [dim, range] : box.bounds) b[std::to_string(dim)] = {range.first, range.second};
    regions[name] = b;
  }
  j["regions"] = regions;
  j["spec"] = cfg.spec;
  if (cfg.x0) j["x0"] = *cfg.x0;
  if (cfg.x0_box) j["x0_box"] = bounds_json(*cfg.x0_box);
  if (cfg.theta0_range) j["theta0_range"] = {cfg.theta0_range->first, cfg.theta0_range->second};
  j["restarts"] = cfg.restarts;
  j["zero_baseline"] = cfg.zero_baseline;
  j["seed"] = cfg.seed;
  j["obstacle_inflation"] = cfg.obstacle_inflation;
  j["max_iters"] = cfg.max_iters;
  j["tolerance"] = cfg.tolerance;
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << scenario_to_json_text(cfg);
}

// ---------------------------------------------------------------------------
// Bench

namespace {

using Clock = std::chrono::steady_clock;

BenchRecord run_trial(const ScenarioConfig& cfg, std::size_t trial) {
  BenchRecord rec;
  rec.trial = trial;
  rec.seed = cfg.seed + trial;
  std::seed_seq seq{static_cast<std::uint32_t>(rec.seed), static_cast<std::uint32_t>(rec.seed >> 32), 0x78u};
  std::mt19937_64 rng(seq);
  const Eigen::VectorXd x0 = sample_x0(cfg, rng);
  rec.x0.assign(x0.data(), x0.data() + x0.size());
  auto problem = make_problem(cfg, x0);
  problem.seed = rec.seed;
  const auto start = Clock::now();
  const auto result = synthesize(problem);
  rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  if (!result.ok) {
    rec.failed = true;
    rec.rho_exact = std::numeric_limits<double>::quiet_NaN();
    rec.rho_smooth = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }
  rec.rho_exact = result.rho_exact;
  rec.rho_smooth = result.rho_smooth;
  rec.satisfied = result.satisfied;
  rec.iters = result.iterations;
  return rec;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

void summarize(BenchSummary& summary) {
  std::vector<double> rho, secs;
  summary.satisfied = 0;
  for (const auto& r : summary.records) {
    secs.push_back(r.wall_ms / 1000.0);
    if (r.failed) continue;
    rho.push_back(r.rho_exact);
    if (r.satisfied) ++summary.satisfied;
  }
  std::tie(summary.rho_mean, summary.rho_std) = mean_std(rho);
  std::tie(summary.wall_mean_s, summary.wall_std_s) = mean_std(secs);
  if (rho.empty()) {
    summary.rho_median = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::sort(rho.begin(), rho.end());
    const std::size_t n = rho.size();
    summary.rho_median = n % 2 ? rho[n / 2] : 0.5 * (rho[n / 2 - 1] + rho[n / 2]);
  }
}

BenchSummary run_bench(const ScenarioConfig& cfg, const BenchOptions& options) {
  if (options.trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (!(options.budget_s >= 0.0)) throw std::invalid_argument("budget must be nonnegative");
  validate_scenario(cfg);

  const auto start = Clock::now();
  auto elapsed_s = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  // Trial i may start only if this returns true; the decision depends on the
  // index and the clock, so a trial that is already running always finishes.
  auto may_start = [&](std::size_t i) {
    const bool count_left = i < options.trials;
    const bool time_left = elapsed_s() < options.budget_s;
    return options.at_least ? (count_left || time_left) : (count_left && time_left);
  };

  std::mutex mu;
  std::vector<BenchRecord> records;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      // Trial 0 always runs so every bench yields at least one record.
      if (i > 0 && !may_start(i)) {
        stop = true;
        break;
      }
      auto rec = run_trial(cfg, i);
      std::lock_guard lock(mu);
      records.push_back(std::move(rec));
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, options.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
  // With several workers a later index can finish after an earlier one was
  // refused; keep only the contiguous prefix so the result is a run of trials.
  std::size_t keep = 0;
  while (keep < records.size() && records[keep].trial == keep) ++keep;
  records.resize(keep);
  BenchSummary summary;
  summary.records = std::move(records);
  summarize(summary);
  return summary;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  for (auto& c : out) {
    if (!c.empty() && c.back() == '\r') c.pop_back();
  }
  return out;
}

double number_cell(const std::string& cell, std::size_t line, const std::string& column) {
  const auto v = parse_double(cell);
  if (!v) {
    throw std::invalid_argument("line " + std::to_string(line) + ", column " + column + ": '" + cell +
                                "' is not a number");
  }
  return *v;
}

std::uint64_t integer_cell(const std::string& cell, std::size_t line, const std::string& column) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) {
    throw std::invalid_argument("line " + std::to_string(line) + ", column " + column + ": '" + cell +
                                "' is not a nonnegative integer");
  }
  return value;
}

}  // namespace

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  const std::size_t n = records.empty() ? 0 : records.front().x0.size();
  out << "trial,seed";
  for (std::size_t d = 0; d < n; ++d) out << ",x0_" << d;
  out << ",rho_exact,rho_smooth,satisfied,iters,wall_ms\n";
  for (const auto& r : records) {
    if (r.x0.size() != n) throw std::invalid_argument("bench records have different state sizes");
    out << r.trial << ',' << r.seed;
    for (double v : r.x0) out << ',' << format_double(v);
    out << ',' << format_double(r.rho_exact) << ',' << format_double(r.rho_smooth) << ',' << (r.satisfied ? 1 : 0)
        << ',' << r.iters << ',' << format_double(r.wall_ms) << '\n';
  }
}

std::vector<BenchRecord> read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("bench CSV is empty");
  const auto header = split_csv(line);
  if (header.size() < 7 || header[0] != "trial" || header[1] != "seed") {
    throw std::invalid_argument("bench CSV header must start with trial,seed");
  }
  const std::size_t n = header.size() - 7;
  for (std::size_t d = 0; d < n; ++d) {
    if (header[2 + d] != "x0_" + std::to_string(d)) throw std::invalid_argument("bench CSV header: bad x0 column");
  }
  const std::vector<std::string> tail = {"rho_exact", "rho_smooth", "satisfied", "iters", "wall_ms"};
  for (std::size_t i = 0; i < tail.size(); ++i) {
    if (header[2 + n + i] != tail[i]) throw std::invalid_argument("bench CSV header: expected " + tail[i]);
  }
  std::vector<BenchRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                                  " fields");
    }
    BenchRecord r;
    r.trial = integer_cell(cells[0], lineno, "trial");
    r.seed = integer_cell(cells[1], lineno, "seed");
    for (std::size_t d = 0; d < n; ++d) r.x0.push_back(number_cell(cells[2 + d], lineno, header[2 + d]));
    r.rho_exact = number_cell(cells[2 + n], lineno, "rho_exact");
    r.rho_smooth = number_cell(cells[3 + n], lineno, "rho_smooth");
    const auto sat = integer_cell(cells[4 + n], lineno, "satisfied");
    if (sat > 1) throw std::invalid_argument("line " + std::to_string(lineno) + ": satisfied must be 0 or 1");
    r.satisfied = sat == 1;
    r.iters = integer_cell(cells[5 + n], lineno, "iters");
    r.wall_ms = number_cell(cells[6 + n], lineno, "wall_ms");
    r.failed = std::isnan(r.rho_exact);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling

std::uint64_t objective_op_count(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const auto problem = make_problem(cfg, sample_x0(cfg, rng));
  OpCounter counter;
  const auto u = ControlSequence::Zero(static_cast<Eigen::Index>(cfg.T + 1),
                                       static_cast<Eigen::Index>(problem.model.m));
  objective(problem, u, &counter);
  return counter.scalar_args;
}

std::vector<ScalingRecord> run_scaling(const ScenarioConfig& base, const std::vector<std::size_t>& N_values,
                                       const std::vector<std::size_t>& P_values) {
  auto configure = [&](std::size_t N, std::size_t P) {
    ScenarioConfig cfg = charging_scenario(N, P);
    cfg.semantics = base.semantics;
    cfg.k1 = base.k1;
    cfg.k2 = base.k2;
    cfg.control_weight = base.control_weight;
    cfg.restarts = base.restarts;
    cfg.seed = base.seed;
    cfg.max_iters = base.max_iters;
    cfg.tolerance = base.tolerance;
    cfg.obstacle_inflation = base.obstacle_inflation;
    return cfg;
  };
  auto measure = [&](const std::string& sweep, std::size_t value, const ScenarioConfig& cfg) {
    ScalingRecord rec;
    rec.sweep = sweep;
    rec.value = value;
    rec.op_count = objective_op_count(cfg);
    std::mt19937_64 rng(cfg.seed);
    const auto problem = make_problem(cfg, sample_x0(cfg, rng));
    const auto start = Clock::now();
    const auto result = synthesize(problem);
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    for (const auto& r : result.restarts) rec.iterations += r.iterations;
    rec.ms_per_iter = rec.wall_ms / static_cast<double>(std::max<std::size_t>(1, rec.iterations));
    return rec;
  };

  std::vector<ScalingRecord> out;
  for (std::size_t N : N_values) out.push_back(measure("N", N, configure(N, 1)));
  for (std::size_t P : P_values) out.push_back(measure("P", P, configure(29, P)));
  return out;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRecord>& records) {
  out << "sweep,value,wall_ms,op_count,iters,ms_per_iter\n";
  for (const auto& r : records) {
    out << r.sweep << ',' << r.value << ',' << format_double(r.wall_ms) << ',' << r.op_count << ',' << r.iterations
        << ',' << format_double(r.ms_per_iter) << '\n';
  }
}

std::vector<ScalingRecord> read_scaling_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("scaling CSV is empty");
  const auto header = split_csv(line);
  const std::vector<std::string> expected = {"sweep", "value", "wall_ms", "op_count", "iters", "ms_per_iter"};
  if (header != expected) throw std::invalid_argument("scaling CSV header must be sweep,value,wall_ms,op_count,iters,ms_per_iter");
  std::vector<ScalingRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != expected.size()) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 6 fields");
    ScalingRecord r;
    r.sweep = cells[0];
    if (r.sweep != "N" && r.sweep != "P") throw std::invalid_argument("line " + std::to_string(lineno) + ": sweep must be N or P");
    r.value = integer_cell(cells[1], lineno, "value");
    r.wall_ms = number_cell(cells[2], lineno, "wall_ms");
    r.op_count = integer_cell(cells[3], lineno, "op_count");
    r.iterations = integer_cell(cells[4], lineno, "iters");
    r.ms_per_iter = number_cell(cells[5], lineno, "ms_per_iter");
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace stlsmooth
