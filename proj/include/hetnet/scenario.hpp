#pragma once

// K-tier network description, validation, typical-user realizations and the
// four reference deployment models.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/pointproc.hpp"

namespace hetnet {

struct PppProcess {
  double density = 0.0;
};

struct PcpProcess {
  double parent_density = 0.0;
  CountDistribution counts = CountDistribution::poisson(1.0);
  OffspringDensity offspring = OffspringDensity::matern(1.0);
};

using TierProcess = std::variant<PppProcess, PcpProcess>;

struct TierSpec {
  int id = 1;  // 0 is reserved for the typical user's own cluster
  TierProcess process = PppProcess{};
  double power = 1.0;      // linear, relative units
  double threshold = 2.0;  // SIR threshold, linear

  bool is_ppp() const { return std::holds_alternative<PppProcess>(process); }
  const PppProcess& ppp() const { return std::get<PppProcess>(process); }
  const PcpProcess& pcp() const { return std::get<PcpProcess>(process); }

  /// Mean number of BSs per unit area.
  double intensity() const {
    if (is_ppp()) return ppp().density;
    return pcp().parent_density * pcp().counts.mean();
  }
};

enum class UserCase {
  kUniform = 1,          // users form a PPP independent of the BSs
  kAroundPppBs = 2,      // users cluster around the points of a PPP tier
  kSharedParents = 3,    // users and a PCP tier share the parent PPP
};

/// Law of the count of the BS cluster that shares the typical user's parent
/// (case 3). kIndependent: the BS offspring of that parent are an ordinary
/// cluster, independent of how the user was picked. kSizeBiased: the cluster
/// is the one seen from a randomly chosen BS, with count law n p(n)/mean.
enum class Phi0Law { kIndependent, kSizeBiased };

struct UserConfig {
  UserCase kind = UserCase::kUniform;
  int anchor_tier = 0;
  std::optional<OffspringDensity> user_density;
  Phi0Law phi0_law = Phi0Law::kIndependent;
};

struct Scenario {
  std::vector<TierSpec> tiers;
  UserConfig users;
  double pathloss = 4.0;

  const TierSpec* find_tier(int id) const {
    auto it = std::find_if(tiers.begin(), tiers.end(), [id](const TierSpec& t) { return t.id == id; });
    return it == tiers.end() ? nullptr : &*it;
  }

  const TierSpec& tier(int id) const {
    const TierSpec* t = find_tier(id);
    require(t != nullptr, ErrorCode::kInvalidParameter, "unknown tier id " + std::to_string(id));
    return *t;
  }

  bool has_phi0() const { return users.kind != UserCase::kUniform; }

  const TierSpec& anchor() const {
    require(has_phi0(), ErrorCode::kInvalidParameter, "uniform users have no anchor tier");
    return tier(users.anchor_tier);
  }

  /// Density of the typical user's displacement from its cluster center.
  /// Case 3 falls back to the anchor tier's offspring density.
  OffspringDensity user_density() const {
    if (users.user_density) return *users.user_density;
    require(users.kind == UserCase::kSharedParents && find_tier(users.anchor_tier) &&
                !anchor().is_ppp(),
            ErrorCode::kInvalidParameter, "scenario has no user density");
    return anchor().pcp().offspring;
  }
};

struct Issue {
  std::string code;
  std::string message;
  bool fatal = true;
};

inline std::vector<Issue> validate(const Scenario& s) {
  std::vector<Issue> issues;
  auto add = [&](std::string code, std::string msg, bool fatal = true) {
    issues.push_back({std::move(code), std::move(msg), fatal});
  };

  if (!(s.pathloss > 2.0) || !std::isfinite(s.pathloss)) {
    add("PATHLOSS_RANGE", "path-loss exponent must exceed 2");
  }
  if (s.tiers.empty()) add("NO_TIERS", "scenario has no BS tiers");

  std::set<int> ids;
  for (const TierSpec& t : s.tiers) {
    const std::string tag = "tier " + std::to_string(t.id);
    if (t.id <= 0) add("TIER_ID", tag + ": ids must be positive (0 is the user's own cluster)");
    if (!ids.insert(t.id).second) add("TIER_ID_DUPLICATE", tag + ": duplicate id");
    if (!(t.power > 0.0) || !std::isfinite(t.power)) add("POWER_RANGE", tag + ": power must be > 0");
    if (!(t.threshold > 0.0) || !std::isfinite(t.threshold)) {
      add("THRESHOLD_RANGE", tag + ": SIR threshold must be > 0");
    } else if (t.threshold <= 1.0) {
      add("ANALYTIC_UNAVAILABLE", tag + ": threshold <= 1 (0 dB), analytic coverage needs > 1", false);
    }
    if (t.is_ppp()) {
      if (!(t.ppp().density >= 0.0) || !std::isfinite(t.ppp().density)) {
        add("DENSITY_RANGE", tag + ": density must be >= 0");
      }
    } else if (!(t.pcp().parent_density >= 0.0) || !std::isfinite(t.pcp().parent_density)) {
      add("DENSITY_RANGE", tag + ": parent density must be >= 0");
    }
  }

  switch (s.users.kind) {
    case UserCase::kUniform: break;
    case UserCase::kAroundPppBs: {
      const TierSpec* a = s.find_tier(s.users.anchor_tier);
      if (!a) {
        add("ANCHOR_MISSING", "case 2 anchor tier " + std::to_string(s.users.anchor_tier) + " not found");
      } else if (!a->is_ppp()) {
        add("ANCHOR_KIND", "case 2 anchor must be a PPP tier");
      }
      if (!s.users.user_density) add("USER_DENSITY_MISSING", "case 2 needs a user density");
      break;
    }
    case UserCase::kSharedParents: {
      const TierSpec* a = s.find_tier(s.users.anchor_tier);
      if (!a) {
        add("ANCHOR_MISSING", "case 3 anchor tier " + std::to_string(s.users.anchor_tier) + " not found");
      } else if (a->is_ppp()) {
        add("ANCHOR_KIND", "case 3 anchor must be a PCP tier");
      } else if (s.users.phi0_law == Phi0Law::kSizeBiased && !(a->pcp().counts.mean() > 0.0)) {
        add("COUNTS_RANGE", "size-biased cluster law needs a positive mean count");
      }
      break;
    }
  }
  return issues;
}

inline bool has_fatal(const std::vector<Issue>& issues) {
  return std::any_of(issues.begin(), issues.end(), [](const Issue& i) { return i.fatal; });
}

/// Throws kInvalidParameter listing every fatal issue.
inline void require_valid(const Scenario& s) {
  std::string msg;
  for (const Issue& i : validate(s)) {
    if (!i.fatal) continue;
    if (!msg.empty()) msg += "; ";
    msg += i.code + " (" + i.message + ")";
  }
  require(msg.empty(), ErrorCode::kInvalidParameter, msg);
}

/// Largest offspring truncation radius over tiers and the user density.
inline double max_truncation_radius(const Scenario& s) {
  double r = 0.0;
  for (const TierSpec& t : s.tiers) {
    if (!t.is_ppp()) r = std::max(r, t.pcp().offspring.truncation_radius());
  }
  if (s.users.user_density) r = std::max(r, s.users.user_density->truncation_radius());
  return r;
}

/// 15 mean inter-site distances of the sparsest populated tier.
inline double default_window_radius(const Scenario& s) {
  double lambda_min = 0.0;
  for (const TierSpec& t : s.tiers) {
    const double l = t.intensity();
    if (l > 0.0 && (lambda_min == 0.0 || l < lambda_min)) lambda_min = l;
  }
  require(lambda_min > 0.0, ErrorCode::kInvalidParameter, "all tiers are empty; pass a window radius");
  return 15.0 / std::sqrt(std::numbers::pi * lambda_min);
}

inline std::vector<Issue> check_window(const Scenario& s, double window_radius) {
  std::vector<Issue> issues;
  if (window_radius < 10.0 * max_truncation_radius(s)) {
    issues.push_back({"EDGE_RISK", "window radius is below 10x the largest cluster truncation radius", false});
  }
  return issues;
}

struct TypicalUserRealization {
  std::vector<PointSet> tiers;  // aligned with Scenario::tiers
  PointSet phi0;
  std::optional<Point> z0;
};

/// One network seen from the typical user at the origin. Tiers are sampled
/// independently on the window disc; the user's own cluster is added as phi0.
template <class URBG>
TypicalUserRealization realize(const Scenario& s, double window_radius, URBG& rng) {
  TypicalUserRealization out;
  out.tiers.reserve(s.tiers.size());
  for (const TierSpec& t : s.tiers) {
    if (t.is_ppp()) {
      out.tiers.push_back(sample_ppp(t.ppp().density, window_radius, rng));
    } else {
      const PcpProcess& p = t.pcp();
      out.tiers.push_back(sample_pcp(p.parent_density, p.counts, p.offspring, window_radius,
                                     p.offspring.truncation_radius(), rng));
    }
  }
  if (!s.has_phi0()) return out;

  // The user sits at the origin at offset s ~ f_u from its center; by
  // isotropy the center itself is distributed as f_u.
  const Point z0 = s.user_density().sample_offset(rng);
  out.z0 = z0;
  if (s.users.kind == UserCase::kAroundPppBs) {
    out.phi0.points.push_back(z0);
  } else {
    const PcpProcess& p = s.anchor().pcp();
    out.phi0 = s.users.phi0_law == Phi0Law::kSizeBiased
                   ? sample_representative_cluster(p.counts, p.offspring, z0, rng)
                   : sample_cluster(z0, p.counts, p.offspring, rng);
  }
  out.phi0.parents.assign(out.phi0.points.size(), z0);
  return out;
}

// ---------------------------------------------------------------------------
// Reference models: tier 1 is the macro PPP, tier 2 the small cells.

struct PresetParams {
  double lambda_m = 1e-6;
  double lambda_s = 1e-4;
  double lambda_p = 0.0;  // SBS parent density for Models 3-4; 0 selects lambda_s / mean_count
  double power_m = 1000.0;
  double power_s = 1.0;
  double beta_m = 2.0;
  double beta_s = 2.0;
  double alpha = 4.0;
  double r_d = 20.0;
  double mean_count = 3.0;

  double sbs_parent_density() const { return lambda_p > 0.0 ? lambda_p : lambda_s / mean_count; }
};

inline constexpr int kMacroTier = 1;
inline constexpr int kSmallCellTier = 2;

inline Scenario preset(int model, const PresetParams& p = {}) {
  require(model >= 1 && model <= 4, ErrorCode::kInvalidParameter,
          "unknown model id " + std::to_string(model) + " (expected 1..4)");
  Scenario s;
  s.pathloss = p.alpha;
  s.tiers.push_back({kMacroTier, PppProcess{p.lambda_m}, p.power_m, p.beta_m});
  const OffspringDensity disc = OffspringDensity::matern(p.r_d);
  if (model <= 2) {
    s.tiers.push_back({kSmallCellTier, PppProcess{p.lambda_s}, p.power_s, p.beta_s});
  } else {
    s.tiers.push_back({kSmallCellTier,
                       PcpProcess{p.sbs_parent_density(), CountDistribution::poisson(p.mean_count), disc},
                       p.power_s, p.beta_s});
  }
  if (model == 2) s.users = {UserCase::kAroundPppBs, kSmallCellTier, disc};
  if (model == 3) s.users = {UserCase::kSharedParents, kSmallCellTier, disc};
  return s;
}

}  // namespace hetnet
