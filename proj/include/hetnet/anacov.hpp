#pragma once

// Analytic max-SIR coverage probability for beta_k > 1:
//   P_c = P_c0 + sum over PPP tiers + sum over PCP tiers,
// each term an integral of interference PGFLs against the serving tier's
// intensity measure.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/functionals.hpp"
#include "hetnet/quad.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

struct AnalyticOptions {
  QuadratureSpec radial{1e-6, 0.0, 2000};  // terms that are at most 2-D
  QuadratureSpec nested{1e-4, 0.0, 2000};  // PCP and case 3 terms
};

struct AnalyticCoverage {
  double p_c = 0.0;
  std::map<int, double> per_tier_terms;  // tier id -> term; 0 is the user's own cluster
  double quad_error = 0.0;
};

/// Throws THRESHOLD_RANGE unless every tier threshold exceeds 1, and rejects
/// PCP tiers whose counts are not Poisson.
inline void require_analytic(const Scenario& s) {
  require_valid(s);
  for (const TierSpec& t : s.tiers) {
    require(t.threshold > 1.0, ErrorCode::kThresholdRange,
            "tier " + std::to_string(t.id) + " has SIR threshold " + std::to_string(t.threshold) +
                " <= 1 (0 dB); the analytic expression counts covering BSs and is exact only when at most one "
                "BS can satisfy the coverage condition, which needs every threshold above 1");
    if (!t.is_ppp()) detail::require_poisson(t.pcp().counts, "analytic coverage");
  }
}

namespace detail {

inline bool needs_nested(const Scenario& s) {
  if (s.users.kind == UserCase::kSharedParents) return true;
  return std::any_of(s.tiers.begin(), s.tiers.end(), [](const TierSpec& t) { return !t.is_ppp(); });
}

/// Inner levels of a nested integral run tighter than the outer level so that
/// their noise does not stall the outer subdivision.
inline QuadratureSpec inner_spec(const QuadratureSpec& outer) {
  QuadratureSpec q = outer;
  q.rel_tol = std::max(1e-10, outer.rel_tol * 1e-2);
  return q;
}

/// Distance at which the all-PPP equivalent of the interference PGFL seen by
/// a tier-k link drops to 1/e.
inline double link_scale(const Scenario& s, double p_k, double beta_k) {
  const double a = s.pathloss;
  double sum = 0.0;
  for (const TierSpec& t : s.tiers) sum += t.intensity() * std::pow(t.power * beta_k / p_k, 2.0 / a);
  if (sum <= 0.0) return 1.0;
  return 1.0 / std::sqrt(std::numbers::pi * c_alpha(a) * sum);
}

inline std::vector<double> scenario_breakpoints(const Scenario& s) {
  std::vector<double> bps;
  double ru = 0.0;
  if (s.has_phi0()) {
    ru = s.user_density().support_radius();
    bps.push_back(ru);
  }
  for (const TierSpec& t : s.tiers) {
    if (t.is_ppp()) continue;
    const double r = t.pcp().offspring.support_radius();
    bps.push_back(r);
    bps.push_back(2.0 * r);
    if (ru > 0.0) bps.push_back(ru + r);
  }
  return bps;
}

/// prod_j G_j(v_{k,j})(r_x) over all BS tiers, optionally times G_0.
inline QuadResult interference_pgfl(const Scenario& s, double p_k, double beta_k, double r_x, bool with_phi0,
                                    const QuadratureSpec& spec) {
  QuadResult out{1.0, 0.0};
  auto mul = [&](QuadResult f) {
    out.error = out.error * std::abs(f.value) + std::abs(out.value) * f.error;
    out.value *= f.value;
  };
  for (const TierSpec& t : s.tiers) {
    if (t.is_ppp()) {
      const double g = pgfl_ppp(t.ppp().density, t.power, p_k, beta_k, r_x, s.pathloss);
      out.value *= g;
      out.error *= g;
    } else {
      const PcpProcess& p = t.pcp();
      mul(pgfl_pcp(p.parent_density, ClusterParams{p.counts, p.offspring},
                   SirKernel{beta_k, p_k, t.power, s.pathloss}, r_x, spec));
    }
    if (out.value == 0.0) return out;
  }
  if (with_phi0 && s.has_phi0()) {
    mul(pgfl_phi0_decond(phi0_params(s), p_k, beta_k, s.pathloss, r_x, spec));
  }
  return out;
}

inline QuadResult outer_radial(const Scenario& s, auto&& integrand, double scale, const QuadratureSpec& spec) {
  const std::vector<double> bps = scenario_breakpoints(s);
  return integrate_radial(integrand, scale, spec, bps);
}

}  // namespace detail

/// Contribution of BSs of PPP tier k.
inline QuadResult pc_term_ppp(const Scenario& s, int k, const AnalyticOptions& opt = {}) {
  require_analytic(s);
  const TierSpec& t = s.tier(k);
  require(t.is_ppp(), ErrorCode::kInvalidParameter, "pc_term_ppp: tier " + std::to_string(k) + " is not a PPP");
  const double lambda = t.ppp().density;
  if (lambda == 0.0) return {};
  const QuadratureSpec outer = detail::needs_nested(s) ? opt.nested : opt.radial;
  const QuadratureSpec inner = detail::inner_spec(outer);
  auto integrand = [&](double rx) -> QuadResult {
    const QuadResult pi = detail::interference_pgfl(s, t.power, t.threshold, rx, true, inner);
    const double w = kTwoPi * lambda * rx;
    return {w * pi.value, w * pi.error};
  };
  return detail::outer_radial(s, integrand, detail::link_scale(s, t.power, t.threshold), outer);
}

/// Contribution of BSs of PCP tier k: the serving BS's own cluster center z
/// is integrated against lambda_p * mean * f(x - z).
inline QuadResult pc_term_pcp(const Scenario& s, int k, const AnalyticOptions& opt = {}) {
  require_analytic(s);
  const TierSpec& t = s.tier(k);
  require(!t.is_ppp(), ErrorCode::kInvalidParameter, "pc_term_pcp: tier " + std::to_string(k) + " is not a PCP");
  const PcpProcess& p = t.pcp();
  const double mean = p.counts.mean();
  if (p.parent_density == 0.0 || mean == 0.0) return {};
  const QuadratureSpec& outer = opt.nested;
  const QuadratureSpec inner = detail::inner_spec(outer);
  const SirKernel vkk{t.threshold, t.power, t.power, s.pathloss};
  const OffspringDensity& f = p.offspring;

  auto integrand = [&](double rx) -> QuadResult {
    if (rx == 0.0) return {};
    const QuadResult pi = detail::interference_pgfl(s, t.power, t.threshold, rx, true, inner);
    if (pi.value == 0.0) return {};
    auto own = [&](double rz) -> QuadResult {
      const double w = kTwoPi * rz * f.ring_average(rz, rx);
      if (w == 0.0) return {};
      const QuadResult j = cluster_complement(vkk, rx, f, rz, inner);
      const double e = std::exp(-mean * j.value);
      return {w * e, w * e * mean * j.error};
    };
    const QuadResult z_int = integrate_ring(own, f, rx, inner);
    const double w = p.parent_density * mean * kTwoPi * rx;
    return {w * pi.value * z_int.value, w * (pi.error * z_int.value + pi.value * z_int.error)};
  };
  return detail::outer_radial(s, integrand, detail::link_scale(s, t.power, t.threshold), outer);
}

/// Contribution of the typical user's own cluster.
inline QuadResult pc0(const Scenario& s, const AnalyticOptions& opt = {}) {
  require_analytic(s);
  if (!s.has_phi0()) return {};
  const Phi0Params ph = phi0_params(s);
  const TierSpec& a = s.anchor();
  const double alpha = s.pathloss;
  const OffspringDensity& fu = ph.user_density;
  const double ru = fu.support_radius();

  if (ph.kind == UserCase::kAroundPppBs) {
    const QuadratureSpec outer = detail::needs_nested(s) ? opt.nested : opt.radial;
    const QuadratureSpec inner = detail::inner_spec(outer);
    auto integrand = [&](double rx) -> QuadResult {
      const double w = kTwoPi * rx * fu.radial(rx);
      if (w == 0.0) return {};
      const QuadResult pi = detail::interference_pgfl(s, a.power, a.threshold, rx, false, inner);
      return {w * pi.value, w * pi.error};
    };
    const std::vector<double> bps = detail::scenario_breakpoints(s);
    return integrate_1d(integrand, 0.0, ru, outer, bps);
  }

  // Case 3: BS at x in the cluster centered at z ~ f_u.
  const QuadratureSpec& outer = opt.nested;
  const QuadratureSpec inner = detail::inner_spec(outer);
  const OffspringDensity& f0 = ph.bs_density;
  const CountDistribution& counts = ph.counts;
  const double mean = counts.mean();
  if (mean == 0.0) return {};
  const SirKernel v00{a.threshold, a.power, a.power, alpha};
  // Expected number of covering phi0 BSs per unit of f_0(x - z), as a function
  // of J = J(r_x, |z|): mean * E[I^N] for the ordinary cluster,
  // sum n^2 p(n)/mean I^(n-1) for the size-biased one.
  auto weight = [&](double j) {
    if (ph.law == Phi0Law::kIndependent) return mean * std::exp(-mean * j);
    return std::exp(-mean * j) * (mean * (1.0 - j) + 1.0);
  };
  auto integrand = [&](double rx) -> QuadResult {
    if (rx == 0.0) return {};
    const QuadResult pi = detail::interference_pgfl(s, a.power, a.threshold, rx, false, inner);
    if (pi.value == 0.0) return {};
    auto centers = [&](double rz) -> QuadResult {
      const double w = kTwoPi * rz * fu.radial(rz) * f0.ring_average(rz, rx);
      if (w == 0.0) return {};
      const QuadResult j = cluster_complement(v00, rx, f0, rz, inner);
      return {w * weight(j.value), w * (mean + 1.0) * mean * j.error};
    };
    const double bps[] = {ru};
    const QuadResult z_int = integrate_ring(centers, f0, rx, inner, ru, bps);
    const double w = kTwoPi * rx;
    return {w * pi.value * z_int.value, w * (pi.error * z_int.value + pi.value * z_int.error)};
  };
  const std::vector<double> bps = detail::scenario_breakpoints(s);
  return integrate_1d(integrand, 0.0, ru + f0.support_radius(), outer, bps);
}

inline AnalyticCoverage coverage_probability(const Scenario& s, const AnalyticOptions& opt = {}) {
  require_analytic(s);
  AnalyticCoverage out;
  auto add = [&](int id, QuadResult r) {
    out.per_tier_terms[id] = r.value;
    out.quad_error += r.error;
  };
  if (s.has_phi0()) add(0, pc0(s, opt));
  for (const TierSpec& t : s.tiers) add(t.id, t.is_ppp() ? pc_term_ppp(s, t.id, opt) : pc_term_pcp(s, t.id, opt));
  // Summed in map order so that p_c is exactly the sum of the reported terms.
  for (const auto& [id, v] : out.per_tier_terms) out.p_c += v;
  return out;
}

}  // namespace hetnet
