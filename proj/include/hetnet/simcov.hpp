#pragma once

// Monte Carlo coverage under Rayleigh fading, power-law path loss and max-SIR
// association.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/scenario.hpp"

namespace hetnet {

/// Unit-mean exponential fading marks, laid out like the realization.
struct Fading {
  std::vector<std::vector<double>> tiers;
  std::vector<double> phi0;
};

/// Fading draws in the canonical order: tiers in scenario order, then phi0.
template <class URBG>
Fading draw_fading(const TypicalUserRealization& r, URBG& rng) {
  Fading f;
  for (const PointSet& ps : r.tiers) {
    auto& v = f.tiers.emplace_back(ps.size());
    for (double& h : v) h = exponential1(rng);
  }
  f.phi0.resize(r.phi0.size());
  for (double& h : f.phi0) h = exponential1(rng);
  return f;
}

namespace detail {

/// |x|^-alpha from |x|^2.
inline double path_gain(double r2, double alpha) {
  if (alpha == 4.0) return 1.0 / (r2 * r2);
  return std::pow(r2, -0.5 * alpha);
}

/// Mean interference from beyond the window disc: each tier is homogeneous
/// with intensity lambda, so Campbell gives P lambda 2pi R^(2-alpha)/(alpha-2).
inline double far_field(const Scenario& s, double window_radius) {
  double total = 0.0;
  const double a = s.pathloss;
  for (const TierSpec& t : s.tiers) {
    total += t.power * t.intensity() * 2.0 * std::numbers::pi * std::pow(window_radius, 2.0 - a) / (a - 2.0);
  }
  return total;
}

/// Running state of one coverage check: total received power plus the
/// strongest signal per association group (one per tier, plus phi0).
struct CoverageScan {
  double total = 0.0;
  std::vector<double> best;
  bool degenerate = false;
};

inline bool scan_covered(const CoverageScan& scan, const Scenario& s) {
  for (std::size_t g = 0; g < scan.best.size(); ++g) {
    const double sig = scan.best[g];
    if (sig <= 0.0) continue;
    const double beta = g < s.tiers.size() ? s.tiers[g].threshold : s.anchor().threshold;
    const double interference = scan.total - sig;
    if (interference <= 0.0) return true;  // SIR = +inf
    if (sig > beta * interference) return true;
  }
  return false;
}

}  // namespace detail

/// Identifies a BS: tier id 0 addresses the typical user's own cluster.
struct BsRef {
  int tier = 0;
  std::size_t index = 0;
};

/// SIR at the origin when served by `bs`, with every other BS of every tier
/// (phi0 included) interfering. `background` adds unattributed interference.
/// Returns +inf when the interference is exactly zero.
inline double sir_at(const TypicalUserRealization& r, const Scenario& s, BsRef bs, const Fading& fading,
                     double background = 0.0) {
  const double a = s.pathloss;
  const Point* x = nullptr;
  double power = 0.0, h = 0.0;
  std::size_t serving_group = 0;
  if (bs.tier == 0) {
    require(bs.index < r.phi0.size(), ErrorCode::kInvalidParameter, "phi0 index out of range");
    x = &r.phi0.points[bs.index];
    power = s.anchor().power;
    h = fading.phi0[bs.index];
    serving_group = s.tiers.size();
  } else {
    for (std::size_t k = 0; k < s.tiers.size(); ++k) {
      if (s.tiers[k].id != bs.tier) continue;
      require(bs.index < r.tiers[k].size(), ErrorCode::kInvalidParameter, "BS index out of range");
      x = &r.tiers[k].points[bs.index];
      power = s.tiers[k].power;
      h = fading.tiers[k][bs.index];
      serving_group = k;
    }
    require(x != nullptr, ErrorCode::kInvalidParameter, "unknown tier id " + std::to_string(bs.tier));
  }
  require(x->norm2() > 0.0, ErrorCode::kDegenerateGeometry, "serving BS at the origin");

  double interference = background;
  for (std::size_t k = 0; k < r.tiers.size(); ++k) {
    for (std::size_t i = 0; i < r.tiers[k].size(); ++i) {
      if (k == serving_group && i == bs.index) continue;
      interference += s.tiers[k].power * fading.tiers[k][i] * detail::path_gain(r.tiers[k].points[i].norm2(), a);
    }
  }
  if (!r.phi0.empty()) {
    const double p0 = s.anchor().power;
    for (std::size_t i = 0; i < r.phi0.size(); ++i) {
      if (serving_group == s.tiers.size() && i == bs.index) continue;
      interference += p0 * fading.phi0[i] * detail::path_gain(r.phi0.points[i].norm2(), a);
    }
  }
  const double signal = power * h * detail::path_gain(x->norm2(), a);
  if (interference == 0.0) return std::numeric_limits<double>::infinity();
  return signal / interference;
}

namespace detail {

template <class FadingSource>
CoverageScan scan(const TypicalUserRealization& r, const Scenario& s, double background, FadingSource&& next_h) {
  CoverageScan sc;
  sc.total = background;
  sc.best.assign(s.tiers.size() + 1, 0.0);
  const double a = s.pathloss;
  for (std::size_t k = 0; k < r.tiers.size(); ++k) {
    const double p = s.tiers[k].power;
    double best = 0.0;
    for (std::size_t i = 0; i < r.tiers[k].size(); ++i) {
      const double r2 = r.tiers[k].points[i].norm2();
      const double sig = p * next_h(k, i) * path_gain(r2, a);
      if (r2 == 0.0) sc.degenerate = true;
      sc.total += sig;
      best = std::max(best, sig);
    }
    sc.best[k] = best;
  }
  if (!r.phi0.empty()) {
    const double p = s.anchor().power;
    double best = 0.0;
    for (std::size_t i = 0; i < r.phi0.size(); ++i) {
      const double r2 = r.phi0.points[i].norm2();
      const double sig = p * next_h(s.tiers.size(), i) * path_gain(r2, a);
      if (r2 == 0.0) sc.degenerate = true;
      sc.total += sig;
      best = std::max(best, sig);
    }
    sc.best[s.tiers.size()] = best;
  }
  return sc;
}

}  // namespace detail

/// Covered iff some BS x of some tier k has SIR(x) > beta_k (strict). Within a
/// tier SIR increases with the received signal, so only the strongest BS of
/// each tier needs checking.
inline bool is_covered(const TypicalUserRealization& r, const Scenario& s, const Fading& fading,
                       double background = 0.0) {
  auto sc = detail::scan(r, s, background, [&](std::size_t g, std::size_t i) {
    return g < fading.tiers.size() ? fading.tiers[g][i] : fading.phi0[i];
  });
  require(!sc.degenerate, ErrorCode::kDegenerateGeometry, "BS at the origin");
  return detail::scan_covered(sc, s);
}

/// Draws the fading inline, in the same order as draw_fading.
template <class URBG>
bool is_covered(const TypicalUserRealization& r, const Scenario& s, URBG& rng, double background = 0.0) {
  auto sc = detail::scan(r, s, background, [&](std::size_t, std::size_t) { return exponential1(rng); });
  require(!sc.degenerate, ErrorCode::kDegenerateGeometry, "BS at the origin");
  return detail::scan_covered(sc, s);
}

struct SimulationOptions {
  double window_radius = 0.0;  // 0 selects default_window_radius()
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool far_field_correction = true;
};

struct CoverageEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t covered = 0;
  std::uint64_t seed = 0;
};

inline CoverageEstimate make_estimate(std::uint64_t covered, std::uint64_t trials, std::uint64_t seed) {
  CoverageEstimate e;
  e.trials = trials;
  e.covered = covered;
  e.seed = seed;
  e.p_hat = static_cast<double>(covered) / static_cast<double>(trials);
  // Sample (n - 1) variance of the coverage indicators.
  const double dof = static_cast<double>(trials > 1 ? trials - 1 : trials);
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / dof);
  e.ci_lo = e.p_hat - 1.96 * e.std_error;
  e.ci_hi = e.p_hat + 1.96 * e.std_error;
  return e;
}

namespace detail {

/// One trial without materializing the realization. It has the same law as
/// is_covered(realize(...)): PPP tiers only need squared distances
/// (r^2 = R^2 U), and each BS's fading is drawn as soon as it is placed.
template <class URBG>
CoverageScan sample_scan(const Scenario& s, double window_radius, double background, URBG& rng) {
  CoverageScan sc;
  sc.total = background;
  sc.best.assign(s.tiers.size() + 1, 0.0);
  const double a = s.pathloss;
  const double r2_max = window_radius * window_radius;
  auto add = [&](std::size_t group, double power, double r2) {
    const double sig = power * exponential1(rng) * path_gain(r2, a);
    if (r2 == 0.0) sc.degenerate = true;
    sc.total += sig;
    sc.best[group] = std::max(sc.best[group], sig);
  };

  for (std::size_t k = 0; k < s.tiers.size(); ++k) {
    const TierSpec& t = s.tiers[k];
    if (t.is_ppp()) {
      const double mean = t.ppp().density * std::numbers::pi * r2_max;
      if (mean <= 0.0) continue;
      const int n = std::poisson_distribution<int>(mean)(rng);
      for (int i = 0; i < n; ++i) add(k, t.power, r2_max * uniform01(rng));
      continue;
    }
    const PcpProcess& p = t.pcp();
    const double outer = window_radius + p.offspring.truncation_radius();
    const double mean = p.parent_density * std::numbers::pi * outer * outer;
    if (mean <= 0.0) continue;
    const int parents = std::poisson_distribution<int>(mean)(rng);
    for (int j = 0; j < parents; ++j) {
      const Point z = uniform_in_disc(outer, rng);
      const int n = p.counts.sample(rng);
      for (int i = 0; i < n; ++i) {
        const double r2 = (z + p.offspring.sample_offset(rng)).norm2();
        if (r2 <= r2_max) add(k, t.power, r2);
      }
    }
  }

  if (!s.has_phi0()) return sc;
  const std::size_t g0 = s.tiers.size();
  const double p0 = s.anchor().power;
  const Point z0 = s.user_density().sample_offset(rng);
  if (s.users.kind == UserCase::kAroundPppBs) {
    add(g0, p0, z0.norm2());
    return sc;
  }
  const PcpProcess& p = s.anchor().pcp();
  const int n = s.users.phi0_law == Phi0Law::kSizeBiased ? p.counts.sample_size_biased(rng) : p.counts.sample(rng);
  for (int i = 0; i < n; ++i) add(g0, p0, (z0 + p.offspring.sample_offset(rng)).norm2());
  return sc;
}

}  // namespace detail

/// Runs one trial on its own substream. A BS landing exactly on the origin
/// (probability zero) triggers a redraw from the continuing stream.
inline bool run_trial(const Scenario& s, double window_radius, double background, std::uint64_t seed,
                      std::uint64_t trial) {
  Engine rng = substream(seed, trial);
  for (;;) {
    const detail::CoverageScan sc = detail::sample_scan(s, window_radius, background, rng);
    if (!sc.degenerate) return detail::scan_covered(sc, s);
  }
}

/// Fraction of covered trials. Trial i always uses substream(seed, i), and the
/// tally is an integer sum, so the result does not depend on `workers`.
inline CoverageEstimate estimate_coverage(const Scenario& s, const SimulationOptions& opt) {
  require(opt.trials >= 1, ErrorCode::kInvalidParameter, "trials must be >= 1");
  require_valid(s);
  const double window = opt.window_radius > 0.0 ? opt.window_radius : default_window_radius(s);
  const double background = opt.far_field_correction ? detail::far_field(s, window) : 0.0;
  const unsigned workers = std::max(1u, opt.workers);

  std::atomic<std::uint64_t> covered{0};
  std::vector<std::exception_ptr> failures(workers);
  auto work = [&](unsigned w) {
    try {
      std::uint64_t local = 0;
      for (std::uint64_t t = w; t < opt.trials; t += workers) {
        if (run_trial(s, window, background, opt.seed, t)) ++local;
      }
      covered += local;
    } catch (...) {
      failures[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return make_estimate(covered.load(), opt.trials, opt.seed);
}

}  // namespace hetnet
