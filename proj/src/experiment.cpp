#include "ddetc/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace ddetc {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

[[noreturn]] void fail(const std::string& key, const Entry& e,
                       const std::string& why) {
  throw ConfigError("config line " + std::to_string(e.line) + ": " + key +
                    ": " + why);
}

double to_double(const std::string& key, const Entry& e) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(e.value, &pos);
  } catch (const std::exception&) {
    fail(key, e, "expected a number, got '" + e.value + "'");
  }
  if (trim(e.value.substr(pos)) != "" || !std::isfinite(v)) {
    fail(key, e, "expected a finite number, got '" + e.value + "'");
  }
  return v;
}

long to_long(const std::string& key, const Entry& e) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(e.value, &pos);
  } catch (const std::exception&) {
    fail(key, e, "expected an integer, got '" + e.value + "'");
  }
  if (trim(e.value.substr(pos)) != "") {
    fail(key, e, "expected an integer, got '" + e.value + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const Entry& e) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  if (!e.value.empty() && e.value.front() == '-') {
    fail(key, e, "expected a non-negative integer");
  }
  try {
    v = std::stoull(e.value, &pos);
  } catch (const std::exception&) {
    fail(key, e, "expected a non-negative integer, got '" + e.value + "'");
  }
  if (trim(e.value.substr(pos)) != "") {
    fail(key, e, "expected a non-negative integer, got '" + e.value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const Entry& e) {
  const auto v = lower(e.value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(key, e, "expected true or false, got '" + e.value + "'");
}

// Rows separated by ';', entries by whitespace or ','.
Mat to_matrix(const std::string& key, const Entry& e) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(e.value);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::replace(row.begin(), row.end(), ',', ' ');
    std::stringstream rs(row);
    std::vector<double> vals;
    std::string tok;
    while (rs >> tok) vals.push_back(to_double(key, Entry{tok, e.line}));
    if (vals.empty()) fail(key, e, "empty matrix row");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) fail(key, e, "empty matrix");
  Mat m(static_cast<Eigen::Index>(rows.size()),
        static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) {
      fail(key, e, "ragged matrix rows");
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return m;
}

Vec to_vector(const std::string& key, const Entry& e) {
  Mat m = to_matrix(key, e);
  if (m.rows() != 1 && m.cols() != 1) fail(key, e, "expected a vector");
  return Eigen::Map<Vec>(m.data(), m.size());
}

PlantKind to_kind(const std::string& key, const Entry& e) {
  const auto v = lower(e.value);
  if (v == "switching") return PlantKind::Switching;
  if (v == "sinusoidal") return PlantKind::Sinusoidal;
  if (v == "vanishing") return PlantKind::VanishingPerturbation;
  if (v == "piecewise") return PlantKind::PiecewiseFile;
  if (v == "constant") return PlantKind::ConstantLti;
  fail(key, e, "unknown plant kind '" + e.value + "'");
}

ControllerMode to_mode(const std::string& key, const Entry& e) {
  const auto v = lower(e.value);
  if (v == "event") return ControllerMode::EventTriggered;
  if (v == "fixed") return ControllerMode::Fixed;
  if (v == "time") return ControllerMode::TimeTriggered;
  fail(key, e, "unknown controller mode '" + e.value + "'");
}

int to_int(const std::string& key, const Entry& e) {
  const long v = to_long(key, e);
  if (v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    fail(key, e, "integer out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const fs::path& base_dir) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = lower(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside of any [section]");
    }
    const auto key = section + "." + trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + key +
                        ": empty value");
    }
    if (!entries.emplace(key, Entry{value, lineno}).second) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key " + key);
    }
  }

  ScenarioConfig cfg;
  cfg.run.window = 0;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const Entry* {
    const auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };

  if (auto e = get("scenario.name")) cfg.name = e->value;

  auto& p = cfg.plant;
  if (auto e = get("plant.kind")) p.kind = to_kind("plant.kind", *e);
  if (auto e = get("plant.A0")) p.a0 = to_matrix("plant.A0", *e);
  if (auto e = get("plant.B0")) p.b0 = to_matrix("plant.B0", *e);
  if (auto e = get("plant.B_alt")) p.b_alt = to_matrix("plant.B_alt", *e);
  if (auto e = get("plant.ell")) p.ell = to_double("plant.ell", *e);
  if (auto e = get("plant.period")) p.period = to_int("plant.period", *e);
  if (auto e = get("plant.delta")) p.delta = to_double("plant.delta", *e);
  if (auto e = get("plant.t_delta")) p.t_delta = to_int("plant.t_delta", *e);
  if (auto e = get("plant.delta0")) p.delta0 = to_double("plant.delta0", *e);
  if (auto e = get("plant.file")) {
    const fs::path f(e->value);
    p.file = (f.is_absolute() ? f : base_dir / f).string();
  }

  auto& r = cfg.run;
  if (auto e = get("controller.mode")) r.mode = to_mode("controller.mode", *e);
  if (auto e = get("controller.n_p")) r.n_p = to_int("controller.n_p", *e);
  if (auto e = get("controller.eps_F")) {
    r.trigger.synthesis.eps_F = to_double("controller.eps_F", *e);
  }
  if (auto e = get("controller.c_sigma")) {
    r.trigger.c_sigma = to_double("controller.c_sigma", *e);
  }
  if (auto e = get("controller.tie_tol")) {
    r.trigger.tie_tol = to_double("controller.tie_tol", *e);
  }
  if (auto e = get("controller.window")) {
    r.window = to_int("controller.window", *e);
  }
  if (auto e = get("controller.normalize_data")) {
    r.trigger.synthesis.normalize_data =
        to_bool("controller.normalize_data", *e);
  }
  if (auto e = get("controller.reject_low_rank")) {
    r.trigger.synthesis.reject_low_rank =
        to_bool("controller.reject_low_rank", *e);
  }
  if (auto e = get("controller.fallback_gain")) {
    r.fallback_gain = to_matrix("controller.fallback_gain", *e);
  }

  if (auto e = get("run.horizon")) r.horizon = to_long("run.horizon", *e);
  if (auto e = get("run.seed")) r.seed = to_u64("run.seed", *e);
  if (auto e = get("run.x0")) r.x0 = to_vector("run.x0", *e);
  if (auto e = get("run.kappa0")) r.kappa0 = to_long("run.kappa0", *e);
  if (auto e = get("run.divergence_threshold")) {
    r.divergence_threshold = to_double("run.divergence_threshold", *e);
  }

  auto& s = r.trigger.synthesis.solver;
  if (auto e = get("solver.strict_margin")) {
    s.strict_margin = to_double("solver.strict_margin", *e);
  }
  if (auto e = get("solver.max_newton_steps")) {
    s.max_newton_steps = to_int("solver.max_newton_steps", *e);
  }
  if (auto e = get("solver.kkt_tol")) s.kkt_tol = to_double("solver.kkt_tol", *e);
  if (auto e = get("solver.trace")) s.trace_path = e->value;

  if (auto e = get("diagnostics.lambda_c")) {
    cfg.lambda_c = to_double("diagnostics.lambda_c", *e);
  }
  if (auto e = get("diagnostics.lambda_d")) {
    cfg.lambda_d = to_double("diagnostics.lambda_d", *e);
  }
  if (auto e = get("diagnostics.corollary_tstar")) {
    cfg.corollary_tstar = to_long("diagnostics.corollary_tstar", *e);
  }

  if (auto e = get("output.dir")) cfg.out_dir = e->value;
  if (auto e = get("output.svg")) cfg.svg = to_bool("output.svg", *e);

  for (const auto& [key, e] : entries) {
    if (!used.count(key)) {
      throw ConfigError("config line " + std::to_string(e.line) +
                        ": unknown key " + key);
    }
  }
  finalize_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  auto cfg = parse_config(in, path.parent_path());
  return cfg;
}

LtvPlant build_plant(const PlantSpec& spec) {
  try {
    switch (spec.kind) {
      case PlantKind::Switching:
        return LtvPlant::switching(
            spec.a0, spec.b0,
            spec.b_alt ? *spec.b_alt : flipped_input_matrix(spec.b0, spec.ell),
            spec.period);
      case PlantKind::Sinusoidal:
        return LtvPlant::sinusoidal(spec.a0, spec.b0, spec.period, spec.delta);
      case PlantKind::VanishingPerturbation:
        return LtvPlant::vanishing(spec.a0, spec.b0, spec.period, spec.t_delta,
                                   spec.delta0);
      case PlantKind::ConstantLti:
        return LtvPlant::constant(spec.a0, spec.b0);
      case PlantKind::PiecewiseFile:
        if (spec.file.empty()) {
          throw ConfigError("plant.file is required for kind = piecewise");
        }
        return LtvPlant::load_piecewise(spec.file);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown plant kind");
}

void finalize_config(ScenarioConfig& cfg) {
  const auto plant = build_plant(cfg.plant);
  auto& r = cfg.run;
  if (r.window <= 0) r.window = plant.nx() + plant.nu();
  if (r.x0.size() == 0) r.x0 = Vec::Ones(plant.nx());
  if (r.x0.size() != plant.nx()) {
    throw ConfigError("run.x0 has " + std::to_string(r.x0.size()) +
                      " entries, the plant has " + std::to_string(plant.nx()) +
                      " states");
  }
  if (r.horizon < r.window) {
    throw ConfigError("run.horizon must be >= the window width");
  }
  if (r.kappa0 < 0) throw ConfigError("run.kappa0 must be >= 0");
  if (r.n_p < 1) throw ConfigError("controller.n_p must be >= 1");
  const double eps_f = r.trigger.synthesis.eps_F;
  if (!(eps_f > 0.0 && eps_f < 1.0)) {
    throw ConfigError("controller.eps_F must lie in (0, 1)");
  }
  const double cs = r.trigger.c_sigma;
  if (!(cs > 0.0 && cs < 1.0)) {
    throw ConfigError("controller.c_sigma must lie in (0, 1)");
  }
  if (!(r.trigger.tie_tol >= 0.0)) {
    throw ConfigError("controller.tie_tol must be >= 0");
  }
  if (r.fallback_gain && (r.fallback_gain->rows() != plant.nu() ||
                          r.fallback_gain->cols() != plant.nx())) {
    throw ConfigError("controller.fallback_gain must be nu x nx");
  }
  if (!(r.divergence_threshold > 0.0)) {
    throw ConfigError("run.divergence_threshold must be positive");
  }
  const auto& s = r.trigger.synthesis.solver;
  if (!(s.strict_margin > 0.0)) {
    throw ConfigError("solver.strict_margin must be positive");
  }
  if (s.max_newton_steps < 1) {
    throw ConfigError("solver.max_newton_steps must be >= 1");
  }
  if (!(s.kkt_tol > 0.0)) throw ConfigError("solver.kkt_tol must be positive");
  if (cfg.lambda_c && !(*cfg.lambda_c > 0.0)) {
    throw ConfigError("diagnostics.lambda_c must be positive");
  }
  if (cfg.lambda_d && !(*cfg.lambda_d >= 1.0)) {
    throw ConfigError("diagnostics.lambda_d must be >= 1");
  }
  if (!cfg.corollary_tstar &&
      cfg.plant.kind == PlantKind::VanishingPerturbation) {
    cfg.corollary_tstar = static_cast<long>(cfg.plant.t_delta) + r.window;
  }
  if (cfg.name.empty()) throw ConfigError("scenario.name must not be empty");
}

ScenarioOutcome simulate_scenario(ScenarioConfig cfg) {
  finalize_config(cfg);
  const auto plant = build_plant(cfg.plant);
  ScenarioOutcome o;
  o.traj = run(plant, cfg.run);
  o.diag = thm_diagnostics(o.traj, plant, cfg.lambda_c, cfg.lambda_d,
                           cfg.corollary_tstar);

  auto& s = o.summary;
  s.name = cfg.name;
  s.mode = to_string(cfg.run.mode);
  s.seed = cfg.run.seed;
  s.status = o.traj.status == RunStatus::Completed ? "completed" : "diverged";
  s.episodes = o.traj.episodes;
  s.warnings = static_cast<int>(o.traj.warnings.size());
  const auto& recs = o.traj.records;
  s.final_norm = recs.back().q.x.norm();
  for (const auto& r : recs) s.max_norm = std::max(s.max_norm, r.q.x.norm());
  s.converged = o.traj.status == RunStatus::Completed;
  const double late_from = 0.8 * static_cast<double>(cfg.run.horizon);
  for (const auto& r : recs) {
    if (static_cast<double>(r.t.k) >= late_from &&
        !(r.q.x.norm() <= 1e-2 * s.max_norm)) {
      s.converged = false;
    }
  }
  s.bound_ok = true;
  s.databased_dominates = true;
  for (std::size_t r = o.diag.exact.origin; r < recs.size(); ++r) {
    if (!o.diag.bound_ok[r]) s.bound_ok = false;
    if (o.diag.databased.pi[r] < o.diag.exact.pi[r] * (1.0 - 1e-9)) {
      s.databased_dominates = false;
    }
  }
  s.corollary = o.diag.corollary_membership;
  for (const auto& rep : o.traj.syntheses) {
    if (rep.breakdown) s.breakdown = true;
  }
  o.config = std::move(cfg);
  return o;
}

void write_summary(std::ostream& out, const Summary& s) {
  out << std::setprecision(17);
  out << "name = " << s.name << "\n";
  out << "mode = " << s.mode << "\n";
  out << "seed = " << s.seed << "\n";
  out << "status = " << s.status << "\n";
  out << "final_norm = " << s.final_norm << "\n";
  out << "max_norm = " << s.max_norm << "\n";
  out << "episode_count = " << s.episodes.size() << "\n";
  out << "episodes =";
  for (auto k : s.episodes) out << " " << k;
  out << "\n";
  out << "converged = " << (s.converged ? "true" : "false") << "\n";
  out << "bound_ok = " << (s.bound_ok ? "true" : "false") << "\n";
  out << "databased_dominates = " << (s.databased_dominates ? "true" : "false")
      << "\n";
  out << "corollary = "
      << (s.corollary ? (*s.corollary ? "true" : "false") : "n/a") << "\n";
  out << "solver_breakdown = " << (s.breakdown ? "true" : "false") << "\n";
  out << "warnings = " << s.warnings << "\n";
}

void write_norm_svg(std::ostream& out, const Trajectory& traj) {
  constexpr double kW = 640, kH = 360, kPad = 40;
  std::vector<std::pair<double, double>> pts;
  double kmax = 1.0;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& r : traj.records) {
    if (r.terminal && !r.q.x.allFinite()) continue;
    const double n = std::max(r.q.x.norm(), 1e-300);
    const double l = std::log10(n);
    kmax = std::max(kmax, static_cast<double>(r.t.k));
    lo = first ? l : std::min(lo, l);
    hi = first ? l : std::max(hi, l);
    first = false;
    pts.emplace_back(static_cast<double>(r.t.k), l);
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  auto px = [&](double k) { return kPad + (kW - 2 * kPad) * k / kmax; };
  auto py = [&](double l) {
    return kH - kPad - (kH - 2 * kPad) * (l - lo) / (hi - lo);
  };
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kPad << "\" y=\"20\" font-size=\"12\">log10 |x(k)|"
      << " (" << lo << " .. " << hi << ")</text>\n";
  for (auto k : traj.episodes) {
    out << "<line x1=\"" << px(static_cast<double>(k)) << "\" y1=\"" << kPad
        << "\" x2=\"" << px(static_cast<double>(k)) << "\" y2=\""
        << kH - kPad << "\" stroke=\"red\" stroke-dasharray=\"3,3\"/>\n";
  }
  out << "<polyline fill=\"none\" stroke=\"black\" points=\"";
  for (const auto& [k, l] : pts) out << px(k) << "," << py(l) << " ";
  out << "\"/>\n</svg>\n";
}

std::vector<fs::path> write_outputs(const ScenarioOutcome& o,
                                    const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string());
  std::vector<fs::path> paths;
  auto open = [&](const char* name) {
    paths.push_back(dir / name);
    std::ofstream f(paths.back());
    if (!f) throw ConfigError("cannot write " + paths.back().string());
    return f;
  };
  {
    auto f = open("trajectory.csv");
    write_trajectory_csv(f, o.traj);
  }
  {
    auto f = open("diagnostics.csv");
    write_diagnostics_csv(f, o.traj, o.diag);
  }
  {
    auto f = open("bundles.txt");
    int last = -2;
    for (const auto& r : o.traj.records) {
      if (r.q.bundle_episode == last) continue;
      last = r.q.bundle_episode;
      f << "# episode " << last << " installed at k = " << r.t.k
        << ", j = " << r.t.j << "\n";
      write_bundle(f, r.q.bundle);
    }
  }
  {
    auto f = open("summary.txt");
    write_summary(f, o.summary);
    for (const auto& w : o.traj.warnings) f << "# warning: " << w << "\n";
  }
  if (o.config.svg) {
    auto f = open("norm.svg");
    write_norm_svg(f, o.traj);
  }
  return paths;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  ScenarioResult r{simulate_scenario(cfg), {}};
  r.paths = write_outputs(r.outcome, r.outcome.config.out_dir);
  return r;
}

void write_summary_table(std::ostream& out, const std::vector<BatchRow>& rows) {
  out << std::setprecision(10);
  out << "source,name,mode,seed,status,final_norm,max_norm,episode_count,"
         "converged,bound_ok,databased_dominates,corollary,solver_breakdown,"
         "error\n";
  for (const auto& row : rows) {
    out << row.source << ",";
    if (row.summary) {
      const auto& s = *row.summary;
      out << s.name << "," << s.mode << "," << s.seed << "," << s.status << ","
          << s.final_norm << "," << s.max_norm << "," << s.episodes.size()
          << "," << s.converged << "," << s.bound_ok << ","
          << s.databased_dominates << ","
          << (s.corollary ? (*s.corollary ? "1" : "0") : "") << ","
          << s.breakdown << ",";
    } else {
      out << ",,,error,,,,,,,,,";
    }
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << err << "\n";
  }
}

std::vector<BatchRow> batch(const std::vector<fs::path>& configs,
                            const fs::path& out_root) {
  std::vector<BatchRow> rows(configs.size());
  std::vector<std::future<void>> jobs;
  jobs.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      rows[i].source = configs[i].filename().string();
      try {
        auto cfg = load_config(configs[i]);
        cfg.out_dir = out_root / configs[i].stem();
        rows[i].summary = run_scenario(cfg).outcome.summary;
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }));
  }
  for (auto& j : jobs) j.get();
  std::error_code ec;
  fs::create_directories(out_root, ec);
  std::ofstream f(out_root / "summary.csv");
  if (!f) throw ConfigError("cannot write " + (out_root / "summary.csv").string());
  write_summary_table(f, rows);
  return rows;
}

ScenarioConfig switching_scenario(double ell, ControllerMode mode, int n_p,
                                  std::uint64_t seed) {
  ScenarioConfig c;
  std::ostringstream name;
  name << "switching_" << to_string(mode) << "_ell" << ell;
  if (mode == ControllerMode::TimeTriggered) name << "_np" << n_p;
  c.name = name.str();
  c.plant.kind = PlantKind::Switching;
  c.plant.ell = ell;
  c.plant.period = 12;
  c.run.window = 0;
  c.run.mode = mode;
  c.run.n_p = n_p;
  c.run.seed = seed;
  finalize_config(c);
  return c;
}

ScenarioConfig sinusoidal_scenario(int period, std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "sinusoidal_p" + std::to_string(period);
  c.plant.kind = PlantKind::Sinusoidal;
  c.plant.period = period;
  c.plant.delta = 0.8;
  c.run.window = 0;
  c.run.seed = seed;
  finalize_config(c);
  return c;
}

ScenarioConfig vanishing_scenario(std::uint64_t seed) {
  ScenarioConfig c;
  c.name = "vanishing";
  c.plant.kind = PlantKind::VanishingPerturbation;
  c.plant.period = 10;
  c.plant.t_delta = 30;
  c.plant.delta0 = 1.0;
  c.run.window = 0;
  c.run.seed = seed;
  finalize_config(c);
  return c;
}

}  // namespace ddetc
