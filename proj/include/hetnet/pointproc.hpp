#pragma once

// Planar point processes: homogeneous PPP, Neyman-Scott cluster processes and
// their individual clusters, together with the count laws and isotropic
// offspring densities that parameterize them.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet {

struct Point {
  double x = 0.0;
  double y = 0.0;

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::hypot(x, y); }

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double c, Point a) { return {c * a.x, c * a.y}; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return (a - b).norm(); }

/// Finite point configuration. `parents` is either empty (unmarked) or holds
/// the cluster center of each point, index-aligned with `points`.
struct PointSet {
  std::vector<Point> points;
  std::vector<Point> parents;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool marked() const { return !points.empty() && parents.size() == points.size(); }
};

// ---------------------------------------------------------------------------
// Count laws

class CountDistribution {
 public:
  enum class Kind { kPoisson, kFixed, kGeneric };

  static CountDistribution poisson(double mean) {
    require(std::isfinite(mean) && mean >= 0.0, ErrorCode::kInvalidParameter,
            "Poisson mean must be finite and >= 0");
    CountDistribution c;
    c.kind_ = Kind::kPoisson;
    c.mean_ = mean;
    return c;
  }

  static CountDistribution fixed(int n) {
    require(n >= 0, ErrorCode::kInvalidParameter, "fixed count must be >= 0");
    CountDistribution c;
    c.kind_ = Kind::kFixed;
    c.fixed_ = n;
    c.mean_ = n;
    return c;
  }

  static CountDistribution generic(std::vector<double> pmf) {
    require(!pmf.empty(), ErrorCode::kInvalidParameter, "pmf must be non-empty");
    double sum = 0.0, mean = 0.0;
    for (std::size_t n = 0; n < pmf.size(); ++n) {
      require(std::isfinite(pmf[n]) && pmf[n] >= 0.0, ErrorCode::kInvalidParameter,
              "pmf entries must be finite and >= 0");
      sum += pmf[n];
      mean += static_cast<double>(n) * pmf[n];
    }
    require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::kInvalidParameter, "pmf must sum to 1 within 1e-12");
    CountDistribution c;
    c.kind_ = Kind::kGeneric;
    c.pmf_ = std::move(pmf);
    c.mean_ = mean;
    return c;
  }

  Kind kind() const { return kind_; }
  bool is_poisson() const { return kind_ == Kind::kPoisson; }
  double mean() const { return mean_; }

  double second_moment() const {
    switch (kind_) {
      case Kind::kPoisson: return mean_ * mean_ + mean_;
      case Kind::kFixed: return static_cast<double>(fixed_) * fixed_;
      case Kind::kGeneric: {
        double m2 = 0.0;
        for (std::size_t n = 0; n < pmf_.size(); ++n) m2 += static_cast<double>(n * n) * pmf_[n];
        return m2;
      }
    }
    return 0.0;
  }

  double pmf(int n) const {
    if (n < 0) return 0.0;
    switch (kind_) {
      case Kind::kPoisson:
        if (mean_ == 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(n * std::log(mean_) - mean_ - std::lgamma(n + 1.0));
      case Kind::kFixed: return n == fixed_ ? 1.0 : 0.0;
      case Kind::kGeneric: return static_cast<std::size_t>(n) < pmf_.size() ? pmf_[n] : 0.0;
    }
    return 0.0;
  }

  const std::vector<double>& generic_pmf() const { return pmf_; }
  int fixed_count() const { return fixed_; }

  template <class URBG>
  int sample(URBG& rng) const {
    switch (kind_) {
      case Kind::kPoisson:
        if (mean_ == 0.0) return 0;
        return std::poisson_distribution<int>(mean_)(rng);
      case Kind::kFixed: return fixed_;
      case Kind::kGeneric: return std::discrete_distribution<int>(pmf_.begin(), pmf_.end())(rng);
    }
    return 0;
  }

  /// Draw from the size-biased law n p(n) / mean. Never returns 0.
  template <class URBG>
  int sample_size_biased(URBG& rng) const {
    require(mean_ > 0.0, ErrorCode::kInvalidParameter, "size-biased count needs mean > 0");
    switch (kind_) {
      case Kind::kPoisson: return 1 + std::poisson_distribution<int>(mean_)(rng);
      case Kind::kFixed: return fixed_;
      case Kind::kGeneric: {
        std::vector<double> w(pmf_.size());
        for (std::size_t n = 0; n < pmf_.size(); ++n) w[n] = static_cast<double>(n) * pmf_[n];
        return std::discrete_distribution<int>(w.begin(), w.end())(rng);
      }
    }
    return 0;
  }

  /// E[t^N] evaluated from the complement j = 1 - t, which keeps precision
  /// when t is within rounding of 1.
  double pgf_complement(double j) const {
    switch (kind_) {
      case Kind::kPoisson: return std::exp(-mean_ * j);
      case Kind::kFixed: return std::pow(1.0 - j, fixed_);
      case Kind::kGeneric: {
        const double t = 1.0 - j;
        double s = 0.0, tn = 1.0;
        for (double p : pmf_) {
          s += p * tn;
          tn *= t;
        }
        return s;
      }
    }
    return 1.0;
  }

  /// Sum over n >= 1 of n^power * p(n) / mean * t^(n-1), with t = 1 - j.
  /// power 1 is the reduced-Palm cluster PGF; power 2 is the weight of the
  /// sum-product functional of a size-biased cluster. The infinite Poisson
  /// series is cut once the remaining weight falls below tail_tol.
  double weighted_series(int power, double j, double tail_tol = 1e-10) const {
    require(mean_ > 0.0, ErrorCode::kInvalidParameter, "weighted series needs mean > 0");
    require(power == 1 || power == 2, ErrorCode::kInvalidParameter, "power must be 1 or 2");
    const double t = 1.0 - j;
    auto weight = [&](double n, double p) { return (power == 1 ? n : n * n) * p / mean_; };
    switch (kind_) {
      case Kind::kFixed: {
        const double n = fixed_;
        return weight(n, 1.0) * std::pow(t, n - 1.0);
      }
      case Kind::kGeneric: {
        double s = 0.0;
        for (std::size_t n = 1; n < pmf_.size(); ++n) {
          s += weight(static_cast<double>(n), pmf_[n]) * std::pow(t, static_cast<double>(n) - 1.0);
        }
        return s;
      }
      case Kind::kPoisson: {
        const double total = power == 1 ? 1.0 : mean_ + 1.0;
        double s = 0.0, acc = 0.0;
        const int n_max = static_cast<int>(mean_ + 40.0 * std::sqrt(mean_) + 200.0);
        for (int n = 1; n <= n_max; ++n) {
          const double w = weight(n, pmf(n));
          s += w * std::pow(t, n - 1.0);
          acc += w;
          if (n > mean_ && total - acc < tail_tol * total) break;
        }
        return s;
      }
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::kFixed;
  double mean_ = 0.0;
  int fixed_ = 0;
  std::vector<double> pmf_;
};

/// M(t) = E[t^N] for t in [0, 1].
inline double count_pgf(const CountDistribution& counts, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorCode::kDomain, "count_pgf: t must lie in [0, 1]");
  return counts.pgf_complement(1.0 - t);
}

/// Uniform point in the unit disc: radius sqrt(U), uniform angle. Always two
/// draws per point.
template <class URBG>
Point unit_disc_point(URBG& rng) {
  const double r = std::sqrt(uniform01(rng));
  const double theta = 2.0 * std::numbers::pi * uniform01(rng);
  return {r * std::cos(theta), r * std::sin(theta)};
}

// ---------------------------------------------------------------------------
// Offspring densities

namespace detail {

/// exp(-x) * I0(x) for x >= 0.
inline double scaled_bessel_i0(double x) {
  if (x < 500.0) return std::cyl_bessel_i(0.0, x) * std::exp(-x);
  const double y = 1.0 / (8.0 * x);
  return (1.0 + y + 4.5 * y * y + 37.5 * y * y * y) / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace detail

class OffspringDensity {
 public:
  enum class Kind { kMaternDisc, kThomasGaussian };

  static OffspringDensity matern(double radius) {
    require(std::isfinite(radius) && radius > 0.0, ErrorCode::kInvalidParameter,
            "Matern disc radius must be > 0");
    return OffspringDensity(Kind::kMaternDisc, radius);
  }
  static OffspringDensity thomas(double sigma) {
    require(std::isfinite(sigma) && sigma > 0.0, ErrorCode::kInvalidParameter,
            "Thomas scale must be > 0");
    return OffspringDensity(Kind::kThomasGaussian, sigma);
  }

  Kind kind() const { return kind_; }
  /// r_d for the Matern disc, sigma for the Thomas kernel.
  double scale() const { return scale_; }
  OffspringDensity with_scale(double s) const {
    return kind_ == Kind::kMaternDisc ? matern(s) : thomas(s);
  }

  /// Radius beyond which offspring are ignored by windowed samplers.
  double truncation_radius() const { return kind_ == Kind::kMaternDisc ? scale_ : 5.0 * scale_; }
  /// Radius beyond which the density is treated as zero inside integrals.
  double support_radius() const { return kind_ == Kind::kMaternDisc ? scale_ : 10.0 * scale_; }

  /// f evaluated at distance r from the center.
  double radial(double r) const {
    if (kind_ == Kind::kMaternDisc) {
      return r <= scale_ ? 1.0 / (std::numbers::pi * scale_ * scale_) : 0.0;
    }
    const double s2 = scale_ * scale_;
    return std::exp(-r * r / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
  }

  double operator()(Point s) const { return radial(s.norm()); }

  /// Mean of f over the circle of radius r around the origin when the
  /// density is centered at distance d: (1/2pi) * int f(|r e^{i phi} - d|) dphi.
  /// Symmetric in (r, d).
  double ring_average(double r, double d) const {
    r = std::abs(r);
    d = std::abs(d);
    if (kind_ == Kind::kMaternDisc) {
      const double R = scale_;
      const double c = 1.0 / (std::numbers::pi * R * R);
      if (r == 0.0) return d <= R ? c : 0.0;
      if (d == 0.0) return r <= R ? c : 0.0;
      if (r + d <= R) return c;
      if (std::abs(r - d) >= R) return 0.0;
      // Half-angle of the arc inside the disc, acos((r^2 + d^2 - R^2) / 2rd),
      // from factored forms of 1 -/+ cos: the direct argument cancels when
      // the ring is thin relative to r and d.
      const double one_minus = (R - r + d) * (R + r - d) / (2.0 * r * d);
      double angle;
      if (one_minus <= 1.0) {
        angle = 2.0 * std::asin(std::sqrt(std::max(0.0, 0.5 * one_minus)));
      } else {
        const double one_plus = (r + d - R) * (r + d + R) / (2.0 * r * d);
        angle = std::numbers::pi - 2.0 * std::asin(std::sqrt(std::clamp(0.5 * one_plus, 0.0, 1.0)));
      }
      return c * angle / std::numbers::pi;
    }
    const double s2 = scale_ * scale_;
    const double diff = r - d;
    return std::exp(-diff * diff / (2.0 * s2)) * detail::scaled_bessel_i0(r * d / s2) /
           (2.0 * std::numbers::pi * s2);
  }

  /// Range of r where ring_average(r, d) is nonzero (numerically, for Thomas).
  std::pair<double, double> ring_support(double d) const {
    const double R = support_radius();
    return {std::max(0.0, std::abs(d) - R), std::abs(d) + R};
  }

  /// Points where ring_average(., d) has kinks.
  std::vector<double> ring_breakpoints(double d) const {
    if (kind_ == Kind::kMaternDisc) return {std::abs(scale_ - std::abs(d)), std::abs(d) + scale_};
    return {std::abs(d)};
  }

  template <class URBG>
  Point sample_offset(URBG& rng) const {
    if (kind_ == Kind::kMaternDisc) return scale_ * unit_disc_point(rng);
    std::normal_distribution<double> n(0.0, scale_);
    const double x = n(rng);
    return {x, n(rng)};
  }

 private:
  OffspringDensity(Kind k, double s) : kind_(k), scale_(s) {}

  Kind kind_;
  double scale_;
};

inline double density_eval(const OffspringDensity& density, Point s) { return density(s); }

// ---------------------------------------------------------------------------
// Samplers

template <class URBG>
Point uniform_in_disc(double radius, URBG& rng) {
  return radius * unit_disc_point(rng);
}

/// Homogeneous PPP restricted to the disc of the given radius at the origin.
template <class URBG>
PointSet sample_ppp(double density, double window_radius, URBG& rng) {
  require(std::isfinite(density) && density >= 0.0, ErrorCode::kInvalidParameter,
          "PPP density must be >= 0");
  require(window_radius > 0.0, ErrorCode::kInvalidParameter, "window radius must be > 0");
  PointSet out;
  const double mean = density * std::numbers::pi * window_radius * window_radius;
  if (mean <= 0.0) return out;
  const int n = std::poisson_distribution<int>(mean)(rng);
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) out.points.push_back(uniform_in_disc(window_radius, rng));
  return out;
}

template <class URBG>
PointSet sample_cluster(Point center, const CountDistribution& counts, const OffspringDensity& density,
                        URBG& rng) {
  PointSet out;
  const int n = counts.sample(rng);
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) out.points.push_back(center + density.sample_offset(rng));
  return out;
}

/// Cluster seen from one of its own points: count drawn from n p(n) / mean.
template <class URBG>
PointSet sample_representative_cluster(const CountDistribution& counts, const OffspringDensity& density,
                                       Point center, URBG& rng) {
  PointSet out;
  const int n = counts.sample_size_biased(rng);
  out.points.reserve(n);
  for (int i = 0; i < n; ++i) out.points.push_back(center + density.sample_offset(rng));
  return out;
}

/// Neyman-Scott process on the window disc. Parents are drawn on the enlarged
/// disc (window + guard) so that clusters straddling the edge are complete;
/// offspring outside the window are dropped. Every point carries its parent.
template <class URBG>
PointSet sample_pcp(double parent_density, const CountDistribution& counts, const OffspringDensity& density,
                    double window_radius, double guard, URBG& rng) {
  require(guard >= density.truncation_radius(), ErrorCode::kInvalidParameter,
          "PCP guard must be at least the offspring truncation radius");
  require(window_radius > 0.0, ErrorCode::kInvalidParameter, "window radius must be > 0");
  PointSet parents = sample_ppp(parent_density, window_radius + guard, rng);
  PointSet out;
  const double r2_max = window_radius * window_radius;
  for (const Point& z : parents.points) {
    const int n = counts.sample(rng);
    for (int i = 0; i < n; ++i) {
      const Point p = z + density.sample_offset(rng);
      if (p.norm2() <= r2_max) {
        out.points.push_back(p);
        out.parents.push_back(z);
      }
    }
  }
  return out;
}

}  // namespace hetnet
