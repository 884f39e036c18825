#pragma once

// Experiment configs (INI files), sweep expansion and CSV output for the
// command-line runner. This is the only header that needs Boost
// (PropertyTree), and hetnet.hpp does not include it.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/anacov.hpp"
#include "hetnet/error.hpp"
#include "hetnet/scenario.hpp"
#include "hetnet/simcov.hpp"

namespace hetnet {

enum class Method { kMc, kAnalytic, kBoth };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kMc: return "mc";
    case Method::kAnalytic: return "analytic";
    case Method::kBoth: return "both";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "mc") return Method::kMc;
  if (s == "analytic") return Method::kAnalytic;
  if (s == "both") return Method::kBoth;
  throw Error(ErrorCode::kConfig, "method must be mc, analytic or both (got '" + s + "')");
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct SweepAxes {
  std::vector<double> beta_db;
  std::vector<double> r_d;
  bool empty() const { return beta_db.empty() && r_d.empty(); }
};

struct ExperimentConfig {
  std::optional<int> model;  // preset id; otherwise `scenario` is used
  PresetParams preset;
  Scenario scenario;
  Method method = Method::kBoth;
  SweepAxes sweep;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  double window_radius = 0.0;
  unsigned workers = 1;
  AnalyticOptions quad;
  std::string out;
  bool timing = false;

  void set_quad_rel_tol(double tol) {
    require(tol >= 1e-12 && tol < 1.0, ErrorCode::kConfig, "quad_rel_tol must lie in [1e-12, 1)");
    quad.radial.rel_tol = tol;
    quad.nested.rel_tol = std::min(0.1, 100.0 * tol);
  }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

using boost::property_tree::ptree;

inline double parse_double(const std::string& key, const std::string& text) {
  std::string t = text;
  t.erase(0, t.find_first_not_of(" \t"));
  t.erase(t.find_last_not_of(" \t") + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw Error(ErrorCode::kConfig, key + ": not a number: '" + text + "'");
  }
  return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kConfig, key + ": not a non-negative integer: '" + text + "'");
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

inline void check_keys(const ptree& section, const std::string& name, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : section) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in [" + name + "]");
    }
  }
}

/// "kind:value" pairs such as "matern:20" or "poisson:3".
inline std::pair<std::string, std::string> split_tagged(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::kConfig, key + ": expected kind:value, got '" + text + "'");
  return {text.substr(0, colon), text.substr(colon + 1)};
}

inline OffspringDensity parse_density(const std::string& key, const std::string& text) {
  const auto [kind, value] = split_tagged(key, text);
  const double v = parse_double(key, value);
  require(v > 0.0, ErrorCode::kConfig, key + ": offspring scale must be > 0");
  if (kind == "matern") return OffspringDensity::matern(v);
  if (kind == "thomas") return OffspringDensity::thomas(v);
  throw Error(ErrorCode::kConfig, key + ": offspring kind must be matern or thomas");
}

inline CountDistribution parse_counts(const std::string& key, const std::string& text) {
  const auto [kind, value] = split_tagged(key, text);
  try {
    if (kind == "poisson") return CountDistribution::poisson(parse_double(key, value));
    if (kind == "fixed") return CountDistribution::fixed(static_cast<int>(parse_uint(key, value)));
    if (kind == "pmf") return CountDistribution::generic(parse_list(key, value));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, key + ": " + e.what());
  }
  throw Error(ErrorCode::kConfig, key + ": counts must be poisson:m, fixed:n or pmf:p0,p1,...");
}

inline TierSpec parse_tier(int id, const ptree& sec) {
  const std::string name = "tier." + std::to_string(id);
  check_keys(sec, name, {"process", "density", "parent_density", "counts", "offspring", "power", "beta_db"});
  auto get = [&](const char* k) -> std::string {
    auto v = sec.get_optional<std::string>(k);
    if (!v) throw Error(ErrorCode::kConfig, "[" + name + "] is missing '" + k + "'");
    return *v;
  };
  TierSpec t;
  t.id = id;
  t.power = parse_double(name + ".power", get("power"));
  t.threshold = db_to_linear(parse_double(name + ".beta_db", get("beta_db")));
  const std::string process = sec.get<std::string>("process", "ppp");
  if (process == "ppp") {
    t.process = PppProcess{parse_double(name + ".density", get("density"))};
  } else if (process == "pcp") {
    t.process = PcpProcess{parse_double(name + ".parent_density", get("parent_density")),
                           parse_counts(name + ".counts", get("counts")),
                           parse_density(name + ".offspring", get("offspring"))};
  } else {
    throw Error(ErrorCode::kConfig, name + ".process must be ppp or pcp");
  }
  return t;
}

}  // namespace detail

/// Reads an INI config. Sections: [run], [preset], [scenario] with [tier.N],
/// [sweep]. Unknown sections and keys are rejected.
inline ExperimentConfig parse_config(std::istream& in) {
  using detail::ptree;
  // The Boost reader only knows whole-line comments; drop trailing ones too.
  std::ostringstream cleaned;
  for (std::string line; std::getline(in, line);) {
    const auto cut = line.find_first_of(";#");
    if (cut != std::string::npos && cut > 0 && (line[cut - 1] == ' ' || line[cut - 1] == '\t')) line.erase(cut);
    cleaned << line << '\n';
  }
  std::istringstream text(cleaned.str());
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(text, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config syntax: ") + e.what());
  }

  ExperimentConfig cfg;
  for (const auto& [name, _] : root) {
    const bool known = name == "run" || name == "preset" || name == "scenario" || name == "sweep" ||
                       name.rfind("tier.", 0) == 0;
    if (!known) throw Error(ErrorCode::kConfig, "unknown section [" + name + "]");
  }

  if (auto run = root.get_child_optional("run")) {
    detail::check_keys(*run, "run",
                       {"model", "method", "trials", "seed", "window_radius", "workers", "quad_rel_tol", "out"});
    if (auto v = run->get_optional<std::string>("model")) {
      cfg.model = static_cast<int>(detail::parse_uint("run.model", *v));
    }
    if (auto v = run->get_optional<std::string>("method")) cfg.method = parse_method(*v);
    if (auto v = run->get_optional<std::string>("trials")) cfg.trials = detail::parse_uint("run.trials", *v);
    if (auto v = run->get_optional<std::string>("seed")) cfg.seed = detail::parse_uint("run.seed", *v);
    if (auto v = run->get_optional<std::string>("window_radius")) {
      cfg.window_radius = detail::parse_double("run.window_radius", *v);
    }
    if (auto v = run->get_optional<std::string>("workers")) {
      cfg.workers = static_cast<unsigned>(detail::parse_uint("run.workers", *v));
    }
    if (auto v = run->get_optional<std::string>("quad_rel_tol")) {
      cfg.set_quad_rel_tol(detail::parse_double("run.quad_rel_tol", *v));
    }
    if (auto v = run->get_optional<std::string>("out")) cfg.out = *v;
  }

  if (auto pre = root.get_child_optional("preset")) {
    detail::check_keys(*pre, "preset",
                       {"lambda_m", "lambda_s", "lambda_p", "power_m", "power_s", "beta_db", "beta_m_db",
                        "beta_s_db", "alpha", "r_d", "mean_count"});
    PresetParams& p = cfg.preset;
    auto num = [&](const char* key, double& field) {
      if (auto v = pre->get_optional<std::string>(key)) field = detail::parse_double(std::string("preset.") + key, *v);
    };
    num("lambda_m", p.lambda_m);
    num("lambda_s", p.lambda_s);
    num("lambda_p", p.lambda_p);
    num("power_m", p.power_m);
    num("power_s", p.power_s);
    num("alpha", p.alpha);
    num("r_d", p.r_d);
    num("mean_count", p.mean_count);
    if (auto v = pre->get_optional<std::string>("beta_db")) {
      p.beta_m = p.beta_s = db_to_linear(detail::parse_double("preset.beta_db", *v));
    }
    if (auto v = pre->get_optional<std::string>("beta_m_db")) {
      p.beta_m = db_to_linear(detail::parse_double("preset.beta_m_db", *v));
    }
    if (auto v = pre->get_optional<std::string>("beta_s_db")) {
      p.beta_s = db_to_linear(detail::parse_double("preset.beta_s_db", *v));
    }
  }

  // The INI reader drops key-less sections, so [tier.N] alone implies a
  // scenario with default settings.
  const bool has_tiers =
      std::any_of(root.begin(), root.end(), [](const auto& kv) { return kv.first.rfind("tier.", 0) == 0; });
  const bool inline_scenario = root.get_child_optional("scenario") || has_tiers;
  if (inline_scenario) {
    const ptree defaults;
    const ptree& sc = root.get_child("scenario", defaults);
    detail::check_keys(sc, "scenario", {"pathloss", "user_case", "anchor_tier", "user_density", "phi0_law"});
    Scenario& s = cfg.scenario;
    s.pathloss = detail::parse_double("scenario.pathloss", sc.get<std::string>("pathloss", "4"));
    const auto user_case = detail::parse_uint("scenario.user_case", sc.get<std::string>("user_case", "1"));
    require(user_case >= 1 && user_case <= 3, ErrorCode::kConfig, "scenario.user_case must be 1, 2 or 3");
    s.users.kind = static_cast<UserCase>(user_case);
    if (auto v = sc.get_optional<std::string>("anchor_tier")) {
      s.users.anchor_tier = static_cast<int>(detail::parse_uint("scenario.anchor_tier", *v));
    }
    if (auto v = sc.get_optional<std::string>("user_density")) {
      s.users.user_density = detail::parse_density("scenario.user_density", *v);
    }
    const std::string law = sc.get<std::string>("phi0_law", "independent");
    if (law == "independent") {
      s.users.phi0_law = Phi0Law::kIndependent;
    } else if (law == "size_biased") {
      s.users.phi0_law = Phi0Law::kSizeBiased;
    } else {
      throw Error(ErrorCode::kConfig, "scenario.phi0_law must be independent or size_biased");
    }
    for (const auto& [name, sec] : root) {
      if (name.rfind("tier.", 0) != 0) continue;
      const auto id = detail::parse_uint("section " + name, name.substr(5));
      s.tiers.push_back(detail::parse_tier(static_cast<int>(id), sec));
    }
  }

  if (auto sw = root.get_child_optional("sweep")) {
    detail::check_keys(*sw, "sweep", {"beta_db", "r_d"});
    if (auto v = sw->get_optional<std::string>("beta_db")) {
      cfg.sweep.beta_db = detail::parse_list("sweep.beta_db", *v);
      require(!cfg.sweep.beta_db.empty(), ErrorCode::kConfig, "sweep.beta_db is empty");
    }
    if (auto v = sw->get_optional<std::string>("r_d")) {
      cfg.sweep.r_d = detail::parse_list("sweep.r_d", *v);
      require(!cfg.sweep.r_d.empty(), ErrorCode::kConfig, "sweep.r_d is empty");
    }
    require(!cfg.sweep.empty(), ErrorCode::kConfig, "[sweep] has no axis");
  }

  if (inline_scenario && cfg.model) {
    throw Error(ErrorCode::kConfig, "give either run.model or a [scenario], not both");
  }
  return cfg;
}

/// Cross-field checks that do not depend on the sweep point.
inline void check_config(const ExperimentConfig& cfg) {
  require(cfg.trials >= 1, ErrorCode::kConfig, "trials must be >= 1");
  require(cfg.window_radius >= 0.0, ErrorCode::kConfig, "window_radius must be >= 0");
  if (cfg.model) {
    require(*cfg.model >= 1 && *cfg.model <= 4, ErrorCode::kConfig, "model must be 1..4");
  } else {
    require(!cfg.scenario.tiers.empty(), ErrorCode::kConfig, "config needs run.model or a [scenario] with tiers");
  }
  for (const auto* axis : {&cfg.sweep.beta_db, &cfg.sweep.r_d}) {
    require(std::is_sorted(axis->begin(), axis->end()), ErrorCode::kConfig, "sweep lists must be sorted");
  }
  for (double r : cfg.sweep.r_d) require(r > 0.0, ErrorCode::kConfig, "sweep r_d values must be > 0");
}

// ---------------------------------------------------------------------------
// Sweep expansion

struct SweepPoint {
  std::optional<double> beta_db;
  std::optional<double> r_d;
};

/// Cartesian product, beta_db outer, r_d inner; a single empty point when
/// there is no sweep.
inline std::vector<SweepPoint> sweep_points(const SweepAxes& axes) {
  std::vector<std::optional<double>> betas, rds;
  for (double b : axes.beta_db) betas.emplace_back(b);
  for (double r : axes.r_d) rds.emplace_back(r);
  if (betas.empty()) betas.emplace_back();
  if (rds.empty()) rds.emplace_back();
  std::vector<SweepPoint> out;
  for (const auto& b : betas) {
    for (const auto& r : rds) out.push_back({b, r});
  }
  return out;
}

/// Scenario for one sweep point. beta_db sets every tier threshold; r_d sets
/// the scale of every offspring and user density.
inline Scenario build_scenario(const ExperimentConfig& cfg, const SweepPoint& pt) {
  Scenario s;
  if (cfg.model) {
    PresetParams p = cfg.preset;
    if (pt.beta_db) p.beta_m = p.beta_s = db_to_linear(*pt.beta_db);
    if (pt.r_d) p.r_d = *pt.r_d;
    s = preset(*cfg.model, p);
  } else {
    s = cfg.scenario;
    for (TierSpec& t : s.tiers) {
      if (pt.beta_db) t.threshold = db_to_linear(*pt.beta_db);
      if (pt.r_d && !t.is_ppp()) {
        auto& pcp = std::get<PcpProcess>(t.process);
        pcp.offspring = pcp.offspring.with_scale(*pt.r_d);
      }
    }
    if (pt.r_d && s.users.user_density) s.users.user_density = s.users.user_density->with_scale(*pt.r_d);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Results and CSV

struct ResultRow {
  std::optional<int> model;
  int user_case = 1;
  std::optional<double> beta_db;
  std::optional<double> r_d;
  Method method = Method::kBoth;
  std::optional<CoverageEstimate> mc;
  std::optional<AnalyticCoverage> analytic;
  std::optional<double> wall_ms;
};

/// Shortest decimal string that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

inline constexpr const char* kCsvHeader =
    "model,case,beta_db,r_d,method,p_mc,stderr,ci_lo,ci_hi,p_analytic,quad_error,trials,seed,wall_ms";

inline std::string csv_row(const ResultRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  std::string out = r.model ? std::to_string(*r.model) : std::string();
  out += ',' + std::to_string(r.user_case);
  out += ',' + opt(r.beta_db);
  out += ',' + opt(r.r_d);
  out += ',' + to_string(r.method);
  if (r.mc) {
    out += ',' + format_number(r.mc->p_hat) + ',' + format_number(r.mc->std_error) + ',' +
           format_number(r.mc->ci_lo) + ',' + format_number(r.mc->ci_hi);
  } else {
    out += ",,,,";
  }
  if (r.analytic) {
    out += ',' + format_number(r.analytic->p_c) + ',' + format_number(r.analytic->quad_error);
  } else {
    out += ",,";
  }
  if (r.mc) {
    out += ',' + std::to_string(r.mc->trials) + ',' + std::to_string(r.mc->seed);
  } else {
    out += ",,";
  }
  out += ',' + opt(r.wall_ms);
  return out;
}

/// The beta_db and r_d columns: the swept value, else the scenario's own
/// value when it is unambiguous.
inline ResultRow describe(const ExperimentConfig& cfg, const SweepPoint& pt, const Scenario& s) {
  ResultRow row;
  row.model = cfg.model;
  row.user_case = static_cast<int>(s.users.kind);
  row.method = cfg.method;
  row.beta_db = pt.beta_db;
  if (!row.beta_db) {
    const double b = s.tiers.front().threshold;
    const bool same = std::all_of(s.tiers.begin(), s.tiers.end(), [&](const TierSpec& t) { return t.threshold == b; });
    if (same) row.beta_db = linear_to_db(b);
  }
  row.r_d = pt.r_d;
  if (!row.r_d) {
    std::set<double> scales;
    for (const TierSpec& t : s.tiers) {
      if (!t.is_ppp()) scales.insert(t.pcp().offspring.scale());
    }
    if (s.users.user_density) scales.insert(s.users.user_density->scale());
    if (scales.size() == 1) row.r_d = *scales.begin();
  }
  return row;
}

inline ResultRow run_point(const ExperimentConfig& cfg, const SweepPoint& pt) {
  const Scenario s = build_scenario(cfg, pt);
  ResultRow row = describe(cfg, pt, s);
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.method != Method::kMc) row.analytic = coverage_probability(s, cfg.quad);
  if (cfg.method != Method::kAnalytic) {
    SimulationOptions opt;
    opt.window_radius = cfg.window_radius;
    opt.trials = cfg.trials;
    opt.seed = cfg.seed;
    opt.workers = cfg.workers;
    row.mc = estimate_coverage(s, opt);
  }
  if (cfg.timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return row;
}

// ---------------------------------------------------------------------------
// Validation report

struct ValidationRow {
  ResultRow result;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  bool flagged = false;
  bool under_powered = false;
};

inline ValidationRow validate_point(const ResultRow& r) {
  require(r.mc && r.analytic, ErrorCode::kInvalidParameter, "validation needs both estimates");
  ValidationRow v;
  v.result = r;
  v.abs_diff = std::abs(r.mc->p_hat - r.analytic->p_c);
  v.tolerance = std::max(0.02, 4.0 * r.mc->std_error);
  v.flagged = v.abs_diff > v.tolerance;
  v.under_powered = r.mc->std_error > 0.05;
  return v;
}

inline constexpr const char* kValidationHeader =
    "model,case,beta_db,r_d,p_mc,stderr,p_analytic,abs_diff,tolerance,status";

inline std::string validation_row(const ValidationRow& v) {
  const ResultRow& r = v.result;
  auto opt = [](const std::optional<double>& x) { return x ? format_number(*x) : std::string(); };
  std::string out = r.model ? std::to_string(*r.model) : std::string();
  out += ',' + std::to_string(r.user_case) + ',' + opt(r.beta_db) + ',' + opt(r.r_d);
  out += ',' + format_number(r.mc->p_hat) + ',' + format_number(r.mc->std_error);
  out += ',' + format_number(r.analytic->p_c) + ',' + format_number(v.abs_diff) + ',' + format_number(v.tolerance);
  out += v.flagged ? ",FLAGGED" : ",ok";
  return out;
}

// ---------------------------------------------------------------------------
// Realization dump

inline constexpr const char* kSampleHeader = "tier,role,x,y";

/// One realization as CSV rows: BSs of every tier, the distinct parents of PCP
/// tiers, then the user's cluster (tier 0) with its center as a parent row.
inline void write_sample(std::ostream& os, const Scenario& s, double window_radius, std::uint64_t seed) {
  require_valid(s);
  const double window = window_radius > 0.0 ? window_radius : default_window_radius(s);
  Engine rng = substream(seed, 0);
  const TypicalUserRealization r = realize(s, window, rng);
  auto row = [&](int tier, const char* role, Point p) {
    os << tier << ',' << role << ',' << format_number(p.x) << ',' << format_number(p.y) << '\n';
  };
  os << kSampleHeader << '\n';
  for (std::size_t k = 0; k < s.tiers.size(); ++k) {
    const PointSet& ps = r.tiers[k];
    for (const Point& p : ps.points) row(s.tiers[k].id, "bs", p);
    std::vector<Point> parents = ps.parents;
    std::sort(parents.begin(), parents.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
    for (const Point& p : parents) row(s.tiers[k].id, "parent", p);
  }
  if (r.z0) {
    row(0, "parent", *r.z0);
    for (const Point& p : r.phi0.points) row(0, "phi0", p);
  }
}

}  // namespace hetnet
