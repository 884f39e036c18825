#pragma once

// PGFLs and sum-product functionals of PPPs, Poisson cluster processes and
// single clusters, evaluated for radial kernels v(|x|, |y|).
//
// Every cluster-level quantity is computed from the complement
//   J(r_x, d) = int (1 - v(r_x, |y|)) f(y - z) dy,   |z| = d,
// rather than from I = 1 - J. The kernel complement is evaluated directly, so
// a constant-1 kernel gives J = 0 exactly and far clusters keep full relative
// precision.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/pointproc.hpp"
#include "hetnet/quad.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Kernels

/// 1 / (1 + beta_i (P_j/P_i) (r_x/r_y)^alpha): the Laplace transform of one
/// Rayleigh-faded interferer of tier j at r_y, seen by a link from tier i at r_x.
inline double v_ij(double beta_i, double p_i, double p_j, double r_x, double r_y, double alpha) {
  require(r_x >= 0.0 && r_y >= 0.0, ErrorCode::kDomain, "v_ij: distances must be >= 0");
  if (r_y == 0.0) return r_x == 0.0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + beta_i * (p_j / p_i) * std::pow(r_x / r_y, alpha));
}

/// 1 / sinc(2/alpha) with sinc(x) = sin(pi x) / (pi x).
inline double c_alpha(double alpha) {
  require(alpha > 2.0, ErrorCode::kDomain, "c_alpha: alpha must exceed 2");
  const double x = 2.0 / alpha;
  return std::numbers::pi * x / std::sin(std::numbers::pi * x);
}

struct SirKernel {
  double beta = 1.0;
  double p_serving = 1.0;
  double p_interferer = 1.0;
  double alpha = 4.0;

  double value(double r_x, double r_y) const { return v_ij(beta, p_serving, p_interferer, r_x, r_y, alpha); }
  double complement(double r_x, double r_y) const {
    if (r_x == 0.0) return 0.0;
    if (r_y == 0.0) return 1.0;
    return 1.0 / (1.0 + (p_serving / (beta * p_interferer)) * std::pow(r_y / r_x, alpha));
  }
  /// Interferer distance where v = 1/2.
  double scale(double r_x) const { return r_x * std::pow(beta * p_interferer / p_serving, 1.0 / alpha); }
};

struct ConstantKernel {
  double c = 1.0;
  double value(double, double) const { return c; }
  double complement(double, double) const { return 1.0 - c; }
  double scale(double) const { return 1.0; }
};

/// Wraps an arbitrary radial kernel v(r_x, r_y) with values in [0, 1].
template <class F>
struct FunctionKernel {
  F f;
  double length = 1.0;
  double value(double r_x, double r_y) const { return f(r_x, r_y); }
  double complement(double r_x, double r_y) const { return 1.0 - f(r_x, r_y); }
  double scale(double) const { return length; }
};
template <class F>
FunctionKernel(F, double) -> FunctionKernel<F>;

// ---------------------------------------------------------------------------
// Cluster descriptions

struct ClusterParams {
  CountDistribution counts = CountDistribution::poisson(1.0);
  OffspringDensity density = OffspringDensity::matern(1.0);
};

struct ClusterContext {
  CountDistribution counts = CountDistribution::poisson(1.0);
  OffspringDensity density = OffspringDensity::matern(1.0);
  Point center{};
};

namespace detail {

inline QuadResult product(std::initializer_list<QuadResult> factors) {
  QuadResult out{1.0, 0.0};
  for (const QuadResult& f : factors) {
    out.error = out.error * std::abs(f.value) + std::abs(out.value) * f.error;
    out.value *= f.value;
  }
  return out;
}

inline QuadResult exp_of(double scale, const QuadResult& x) {
  // exp(-scale * x) with first-order error propagation.
  const double v = std::exp(-scale * x.value);
  return {v, v * std::abs(scale) * x.error};
}

inline void require_poisson(const CountDistribution& counts, const char* where) {
  require(counts.is_poisson(), ErrorCode::kInvalidParameter,
          std::string(where) + ": closed form needs Poisson cluster counts (Neyman-Scott)");
}

/// 1 - M(1 - j) without cancellation.
inline double one_minus_pgf(const CountDistribution& counts, double j) {
  switch (counts.kind()) {
    case CountDistribution::Kind::kPoisson: return -std::expm1(-counts.mean() * j);
    case CountDistribution::Kind::kFixed: {
      const int n = counts.fixed_count();
      return n == 0 ? 0.0 : -std::expm1(n * std::log1p(-j));
    }
    case CountDistribution::Kind::kGeneric: {
      const auto& pmf = counts.generic_pmf();
      const double l = std::log1p(-j);
      double s = 0.0;
      for (std::size_t n = 1; n < pmf.size(); ++n) s += pmf[n] * -std::expm1(static_cast<double>(n) * l);
      return s;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Integral of g over the r-range where density.ring_average(r, d) is
/// nonzero, clipped to r <= hi_clip; g is expected to contain that ring
/// average. Matern rings have square-root edges, which bisection cannot
/// resolve once the ring is thin and far out, so each piece between
/// breakpoints is mapped through r = m - h cos(u).
template <class G>
QuadResult integrate_ring(G&& g, const OffspringDensity& density, double d, const QuadratureSpec& spec,
                          double hi_clip = std::numeric_limits<double>::infinity(),
                          std::span<const double> extra_breakpoints = {}) {
  auto [lo, hi] = density.ring_support(d);
  hi = std::min(hi, hi_clip);
  if (!(hi > lo)) return {};
  std::vector<double> bps = density.ring_breakpoints(d);
  bps.insert(bps.end(), extra_breakpoints.begin(), extra_breakpoints.end());
  if (density.kind() != OffspringDensity::Kind::kMaternDisc) return integrate_1d(g, lo, hi, spec, bps);

  std::vector<double> cuts{lo, hi};
  for (double b : bps) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  QuadResult total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double m = 0.5 * (cuts[i] + cuts[i + 1]);
    const double h = 0.5 * (cuts[i + 1] - cuts[i]);
    if (!(h > 0.0)) continue;
    auto mapped = [&](double u) {
      const double jac = h * std::sin(u);
      auto val = g(m - h * std::cos(u));
      if constexpr (std::is_same_v<std::decay_t<decltype(val)>, QuadResult>) {
        return QuadResult{val.value * jac, val.error * jac};
      } else {
        return static_cast<double>(val) * jac;
      }
    };
    total += integrate_1d(mapped, 0.0, std::numbers::pi, spec);
  }
  return total;
}

/// J(r_x, d): mass of one offspring density centered at distance d, weighted
/// by the kernel complement. Radial over |y|, using the closed-form ring
/// average of the density.
template <class Kernel>
QuadResult cluster_complement(const Kernel& v, double r_x, const OffspringDensity& density, double d,
                              const QuadratureSpec& spec) {
  auto integrand = [&](double r) { return kTwoPi * r * v.complement(r_x, r) * density.ring_average(r, d); };
  QuadResult j = integrate_ring(integrand, density, d, spec);
  j.value = std::clamp(j.value, 0.0, 1.0);
  return j;
}

// ---------------------------------------------------------------------------
// PGFLs

/// exp(-pi lambda_j (P_j beta_k / P_k)^(2/alpha) r_x^2 C(alpha)): PPP tier j
/// evaluated at v_{k,j}.
inline double pgfl_ppp(double lambda_j, double p_j, double p_k, double beta_k, double r_x, double alpha) {
  require(lambda_j >= 0.0 && p_j > 0.0 && p_k > 0.0 && beta_k > 0.0 && r_x >= 0.0, ErrorCode::kDomain,
          "pgfl_ppp: invalid parameter");
  return std::exp(-std::numbers::pi * lambda_j * std::pow(p_j * beta_k / p_k, 2.0 / alpha) * r_x * r_x *
                  c_alpha(alpha));
}

/// PPP PGFL for an arbitrary radial kernel, by quadrature.
template <class Kernel>
QuadResult ppp_pgfl(double lambda, const Kernel& v, double r_x, const QuadratureSpec& spec = {}) {
  require(lambda >= 0.0, ErrorCode::kInvalidParameter, "PPP density must be >= 0");
  if (lambda == 0.0) return {1.0, 0.0};
  auto integrand = [&](double r) { return kTwoPi * r * v.complement(r_x, r); };
  const double split = std::max(v.scale(r_x), std::numeric_limits<double>::min() * 1e10);
  return detail::exp_of(lambda, integrate_radial(integrand, split, spec));
}

/// G_c(v | z) = M(int v f(y - z) dy).
template <class Kernel>
QuadResult pgfl_cluster(const ClusterContext& c, const Kernel& v, double r_x, const QuadratureSpec& spec = {}) {
  const QuadResult j = cluster_complement(v, r_x, c.density, c.center.norm(), spec);
  const double m = c.counts.pgf_complement(j.value);
  // dM/dI <= E[N]
  return {m, c.counts.mean() * j.error};
}

/// Reduced Palm cluster PGFL: sum_{n>=1} I^(n-1) n p(n) / mean.
template <class Kernel>
QuadResult pgfl_cluster_reduced(const ClusterContext& c, const Kernel& v, double r_x,
                                const QuadratureSpec& spec = {}) {
  require(c.counts.mean() > 0.0, ErrorCode::kInvalidParameter, "reduced cluster PGFL needs mean > 0");
  const QuadResult j = cluster_complement(v, r_x, c.density, c.center.norm(), spec);
  const double value = c.counts.is_poisson() ? std::exp(-c.counts.mean() * j.value)
                                             : c.counts.weighted_series(1, j.value, 1e-10);
  return {value, c.counts.second_moment() / c.counts.mean() * j.error};
}

/// mu_{k,j}(x, z) = exp(-mean_j * J): Neyman-Scott cluster of tier j centered
/// at z, evaluated at v_{k,j}.
inline QuadResult mu_kj(double r_x, Point z, const ClusterParams& cluster, const SirKernel& v,
                        const QuadratureSpec& spec = {}) {
  detail::require_poisson(cluster.counts, "mu_kj");
  return pgfl_cluster(ClusterContext{cluster.counts, cluster.density, z}, v, r_x, spec);
}

/// PCP PGFL for an arbitrary kernel and count law:
/// exp(-lambda_p int (1 - M(I(x, z))) dz), radial in |z|.
template <class Kernel>
QuadResult pcp_pgfl(double parent_density, const ClusterParams& cluster, const Kernel& v, double r_x,
                    const QuadratureSpec& spec = {}) {
  require(parent_density >= 0.0, ErrorCode::kInvalidParameter, "parent density must be >= 0");
  if (parent_density == 0.0) return {1.0, 0.0};
  const double support = cluster.density.support_radius();
  auto integrand = [&](double rz) -> QuadResult {
    const QuadResult j = cluster_complement(v, r_x, cluster.density, rz, spec);
    const double w = kTwoPi * rz;
    return {w * detail::one_minus_pgf(cluster.counts, j.value), w * cluster.counts.mean() * j.error};
  };
  const double split = v.scale(r_x) + 2.0 * support;
  const double bps[] = {support, v.scale(r_x)};
  return detail::exp_of(parent_density, integrate_radial(integrand, split, spec, bps));
}

/// Neyman-Scott PCP tier j evaluated at v_{k,j}.
inline QuadResult pgfl_pcp(double parent_density, const ClusterParams& cluster, const SirKernel& v, double r_x,
                           const QuadratureSpec& spec = {}) {
  detail::require_poisson(cluster.counts, "pgfl_pcp");
  if (r_x == 0.0) return {1.0, 0.0};
  return pcp_pgfl(parent_density, cluster, v, r_x, spec);
}

inline QuadResult mu_kj(double r_x, Point z, const ClusterParams& cluster, double p_k, double p_j, double beta_k,
                        double alpha, const QuadratureSpec& spec = {}) {
  return mu_kj(r_x, z, cluster, SirKernel{beta_k, p_k, p_j, alpha}, spec);
}

inline QuadResult pgfl_pcp(double parent_density, const ClusterParams& cluster, double p_k, double p_j,
                           double beta_k, double alpha, double r_x, const QuadratureSpec& spec = {}) {
  return pgfl_pcp(parent_density, cluster, SirKernel{beta_k, p_k, p_j, alpha}, r_x, spec);
}

// ---------------------------------------------------------------------------
// The typical user's own cluster

/// Everything the phi0 PGFLs need from a scenario.
struct Phi0Params {
  UserCase kind = UserCase::kUniform;
  double power = 1.0;  // anchor tier power
  CountDistribution counts = CountDistribution::fixed(1);
  OffspringDensity bs_density = OffspringDensity::matern(1.0);
  OffspringDensity user_density = OffspringDensity::matern(1.0);
  Phi0Law law = Phi0Law::kIndependent;
};

inline Phi0Params phi0_params(const Scenario& s) {
  Phi0Params p;
  p.kind = s.users.kind;
  if (!s.has_phi0()) return p;
  const TierSpec& a = s.anchor();
  p.power = a.power;
  p.user_density = s.user_density();
  p.bs_density = p.user_density;
  if (p.kind == UserCase::kSharedParents) {
    p.counts = a.pcp().counts;
    p.bs_density = a.pcp().offspring;
    p.law = s.users.phi0_law;
  }
  return p;
}

namespace detail {

/// 1 - G_0(v | z) for case 3, from J = J(r_x, |z|).
inline double phi0_miss(const Phi0Params& p, double j) {
  if (p.law == Phi0Law::kIndependent) return one_minus_pgf(p.counts, j);
  // size-biased count: E[I^N~] = I * reduced PGF
  const double red = p.counts.is_poisson() ? std::exp(-p.counts.mean() * j) : p.counts.weighted_series(1, j, 1e-10);
  return 1.0 - (1.0 - j) * red;
}

}  // namespace detail

/// G_0(v_{k,0}) conditional on the cluster center z (needed in case 3 only).
/// Case 1 gives 1; case 2 integrates v against the user density.
inline QuadResult pgfl_phi0(const Phi0Params& p, double p_k, double beta_k, double alpha, double r_x,
                            std::optional<Point> z, const QuadratureSpec& spec = {}) {
  const SirKernel v{beta_k, p_k, p.power, alpha};
  switch (p.kind) {
    case UserCase::kUniform: return {1.0, 0.0};
    case UserCase::kAroundPppBs: {
      if (r_x == 0.0) return {1.0, 0.0};
      auto integrand = [&](double r) { return kTwoPi * r * v.complement(r_x, r) * p.user_density.radial(r); };
      const double R = p.user_density.support_radius();
      const double bps[] = {R};
      const QuadResult miss = integrate_1d(integrand, 0.0, R, spec, bps);
      return {std::clamp(1.0 - miss.value, 0.0, 1.0), miss.error};
    }
    case UserCase::kSharedParents: {
      require(z.has_value(), ErrorCode::kInvalidParameter, "pgfl_phi0: case 3 needs the cluster center z");
      const QuadResult j = cluster_complement(v, r_x, p.bs_density, z->norm(), spec);
      return {1.0 - detail::phi0_miss(p, j.value), p.counts.second_moment() / std::max(p.counts.mean(), 1.0) * j.error};
    }
  }
  return {1.0, 0.0};
}

/// G_0(v_{k,0}) averaged over the cluster center z ~ f_u. Cases 1 and 2 are
/// already unconditional and are returned as is.
inline QuadResult pgfl_phi0_decond(const Phi0Params& p, double p_k, double beta_k, double alpha, double r_x,
                                   const QuadratureSpec& spec = {}) {
  if (p.kind != UserCase::kSharedParents) return pgfl_phi0(p, p_k, beta_k, alpha, r_x, std::nullopt, spec);
  if (r_x == 0.0 || p.counts.mean() == 0.0) return {1.0, 0.0};
  const SirKernel v{beta_k, p_k, p.power, alpha};
  const double scale = p.counts.second_moment() / std::max(p.counts.mean(), 1.0);
  auto integrand = [&](double rz) -> QuadResult {
    const double w = kTwoPi * rz * p.user_density.radial(rz);
    if (w == 0.0) return {};
    const QuadResult j = cluster_complement(v, r_x, p.bs_density, rz, spec);
    return {w * detail::phi0_miss(p, j.value), w * scale * j.error};
  };
  const double R = p.user_density.support_radius();
  const double bps[] = {R, p.bs_density.support_radius()};
  const QuadResult miss = integrate_1d(integrand, 0.0, R, spec, bps);
  return {std::clamp(1.0 - miss.value, 0.0, 1.0), miss.error};
}

// ---------------------------------------------------------------------------
// Sum-product functionals  E[ sum_x g(x) prod_{y != x} v(x, y) ]

struct PppSource {
  double density = 0.0;
};
struct PcpSource {
  double parent_density = 0.0;
  ClusterParams cluster;
};
/// The cluster of a randomly chosen point: size-biased count, center at `center`.
struct FiniteClusterSource {
  ClusterParams cluster;
  Point center{};
};
using SumProductSource = std::variant<PppSource, PcpSource, FiniteClusterSource>;

struct SumProductOptions {
  QuadratureSpec quad{};
  /// g vanishes beyond this radius (infinity: no compact support).
  double g_support = std::numeric_limits<double>::infinity();
  /// Typical length of the problem, used to split semi-infinite integrals.
  double length_scale = 1.0;
};

/// Analytic sum-product functional for a radial g(|x|) and kernel v.
template <class G, class Kernel>
QuadResult sum_product_analytic(const SumProductSource& source, G&& g, const Kernel& v,
                                const SumProductOptions& opt = {}) {
  const QuadratureSpec& spec = opt.quad;
  auto outer = [&](auto&& integrand, double lo, double hi, std::span<const double> bps) -> QuadResult {
    hi = std::min(hi, opt.g_support);
    if (hi <= lo) return {};
    if (std::isinf(hi)) {
      QuadResult head = lo < opt.length_scale ? integrate_1d(integrand, lo, opt.length_scale, spec, bps)
                                              : QuadResult{};
      return head + integrate_semi_infinite(integrand, std::max(lo, opt.length_scale), spec, opt.length_scale, bps);
    }
    return integrate_1d(integrand, lo, hi, spec, bps);
  };

  if (const auto* ppp = std::get_if<PppSource>(&source)) {
    // lambda int g(x) G(v(x, .)) dx
    auto integrand = [&](double rx) -> QuadResult {
      const QuadResult pg = ppp_pgfl(ppp->density, v, rx, spec);
      const double w = ppp->density * kTwoPi * rx * g(rx);
      return {w * pg.value, std::abs(w) * pg.error};
    };
    return outer(integrand, 0.0, std::numeric_limits<double>::infinity(), {});
  }

  if (const auto* pcp = std::get_if<PcpSource>(&source)) {
    // int int g(x) G(v) G~_c(v | z) lambda_p mean f(x - z) dz dx
    const ClusterParams& cl = pcp->cluster;
    const double mean = cl.counts.mean();
    auto integrand = [&](double rx) -> QuadResult {
      const double gx = g(rx);
      if (gx == 0.0) return {};
      const QuadResult pg = pcp_pgfl(pcp->parent_density, cl, v, rx, spec);
      auto inner = [&](double rz) -> QuadResult {
        const QuadResult red = pgfl_cluster_reduced(ClusterContext{cl.counts, cl.density, Point{rz, 0.0}}, v, rx, spec);
        const double w = kTwoPi * rz * cl.density.ring_average(rz, rx);
        return {w * red.value, w * red.error};
      };
      const QuadResult z_int = integrate_ring(inner, cl.density, rx, spec);
      const double w = pcp->parent_density * mean * kTwoPi * rx * gx;
      const QuadResult p = detail::product({pg, z_int});
      return {w * p.value, std::abs(w) * p.error};
    };
    const double bps[] = {cl.density.support_radius()};
    return outer(integrand, 0.0, std::numeric_limits<double>::infinity(), bps);
  }

  // Size-biased finite cluster: sum_n n^2 p(n)/mean int g(x) I(x)^(n-1) f(x - z) dx.
  const auto& fc = std::get<FiniteClusterSource>(source);
  const ClusterParams& cl = fc.cluster;
  require(cl.counts.mean() > 0.0, ErrorCode::kInvalidParameter, "finite cluster needs mean count > 0");
  const double d = fc.center.norm();
  auto integrand = [&](double rx) -> QuadResult {
    const double gx = g(rx);
    if (gx == 0.0) return {};
    const QuadResult j = cluster_complement(v, rx, cl.density, d, spec);
    const double series = cl.counts.weighted_series(2, j.value, 1e-10);
    const double w = kTwoPi * rx * gx * cl.density.ring_average(rx, d);
    // d/dJ of the series is bounded by E[N^3]/mean; use the second moment scale.
    return {w * series, std::abs(w) * cl.counts.second_moment() * j.error};
  };
  return integrate_ring(integrand, cl.density, d, spec, opt.g_support);
}

struct MonteCarloResult {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Direct Monte Carlo of the sum-product functional. `sampler(rng)` returns a
/// PointSet; points with g = 0 are skipped as serving candidates but still
/// appear in every product.
template <class Sampler, class G, class Kernel>
MonteCarloResult sum_product_mc(Sampler&& sampler, G&& g, const Kernel& v, std::uint64_t trials,
                                std::uint64_t seed) {
  require(trials >= 1, ErrorCode::kInvalidParameter, "trials must be >= 1");
  double sum = 0.0, sum2 = 0.0;
  std::vector<double> radii;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Engine rng = substream(seed, t);
    const PointSet ps = sampler(rng);
    radii.resize(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) radii[i] = ps.points[i].norm();
    double value = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double gx = g(radii[i]);
      if (gx == 0.0) continue;
      double prod = 1.0;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        if (k != i) prod *= v.value(radii[i], radii[k]);
      }
      value += gx * prod;
    }
    sum += value;
    sum2 += value * value;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = trials > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace hetnet
