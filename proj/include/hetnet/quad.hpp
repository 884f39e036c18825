#pragma once

// Adaptive Gauss-Kronrod quadrature (21-point rule, global subdivision).
//
// Integrands may return either a plain double or a QuadResult. The latter is
// used when the integrand is itself computed by quadrature: its error
// component is integrated alongside the value and added to the reported
// error, but it does not drive the outer subdivision.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hetnet/error.hpp"

namespace hetnet {

struct QuadratureSpec {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  int max_subdivisions = 2000;

  void check() const {
    require(rel_tol >= 1e-12, ErrorCode::kInvalidParameter, "rel_tol must be >= 1e-12");
    require(abs_tol >= 0.0, ErrorCode::kInvalidParameter, "abs_tol must be >= 0");
    require(max_subdivisions >= 1, ErrorCode::kInvalidParameter, "max_subdivisions must be >= 1");
  }
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
  friend QuadResult operator+(QuadResult a, const QuadResult& b) { return a += b; }
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, QuadResult best)
      : Error(ErrorCode::kQuadrature, what), best_(best) {}
  const QuadResult& best() const noexcept { return best_; }

 private:
  QuadResult best_;
};

namespace detail {

// 21-point Kronrod abscissae/weights and the embedded 10-point Gauss weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  double inner_error = 0.0;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class R>
inline void split_eval(const R& r, double& value, double& err) {
  if constexpr (std::is_same_v<std::decay_t<R>, QuadResult>) {
    value = r.value;
    err = std::abs(r.error);
  } else {
    value = static_cast<double>(r);
    err = 0.0;
  }
}

template <class F>
Panel gk21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double abs_half = std::abs(half);
  double fv1[10];
  double fv2[10];

  double fc = 0.0, ec = 0.0;
  split_eval(f(center), fc, ec);
  double resk = kWgk[10] * fc;
  double resg = 0.0;
  double resabs = std::abs(resk);
  double inner = kWgk[10] * ec;

  for (int j = 0; j < 5; ++j) {
    const int jtw = 2 * j + 1;
    const double dx = half * kXgk[jtw];
    double f1, f2, e1, e2;
    split_eval(f(center - dx), f1, e1);
    split_eval(f(center + dx), f2, e2);
    fv1[jtw] = f1;
    fv2[jtw] = f2;
    resg += kWg[j] * (f1 + f2);
    resk += kWgk[jtw] * (f1 + f2);
    resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    inner += kWgk[jtw] * (e1 + e2);
  }
  for (int j = 0; j < 5; ++j) {
    const int jtwm1 = 2 * j;
    const double dx = half * kXgk[jtwm1];
    double f1, f2, e1, e2;
    split_eval(f(center - dx), f1, e1);
    split_eval(f(center + dx), f2, e2);
    fv1[jtwm1] = f1;
    fv2[jtwm1] = f2;
    resk += kWgk[jtwm1] * (f1 + f2);
    resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    inner += kWgk[jtwm1] * (e1 + e2);
  }

  const double reskh = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - reskh);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
  }

  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * half;
  resabs *= abs_half;
  resasc *= abs_half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  if (resabs > uflow / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  p.error = err;
  p.inner_error = inner * abs_half;
  return p;
}

}  // namespace detail

/// Adaptive integral of f over [a, b]. Breakpoints strictly inside (a, b) seed
/// the initial partition, which is how support edges of discontinuous
/// densities are handled. Throws QuadratureError when the subdivision budget
/// runs out before the tolerance max(abs_tol, rel_tol*|value|) is met.
template <class F>
QuadResult integrate_1d(F&& f, double a, double b, const QuadratureSpec& spec = {},
                        std::span<const double> breakpoints = {}) {
  spec.check();
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::kInvalidParameter,
          "integrate_1d: bounds must be finite");
  require(a <= b, ErrorCode::kInvalidParameter, "integrate_1d: requires a <= b");
  if (a == b) return {};

  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.push_back(b);

  std::priority_queue<detail::Panel> heap;
  double total = 0.0, total_err = 0.0, inner_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    detail::Panel p = detail::gk21(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_err += p.error;
    inner_err += p.inner_error;
    heap.push(p);
  }

  std::vector<detail::Panel> frozen;  // panels too narrow to split further
  int subdivisions = static_cast<int>(heap.size());
  auto converged = [&] { return total_err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };

  while (!converged() && !heap.empty()) {
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureError("subdivision budget exhausted (error estimate " +
                                std::to_string(total_err) + ")",
                            {total, total_err + inner_err});
    }
    detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        std::abs(worst.b - worst.a) <= 1e3 * std::numeric_limits<double>::epsilon() *
                                           std::max(std::abs(worst.a), std::abs(worst.b))) {
      frozen.push_back(worst);
      continue;
    }
    detail::Panel left = detail::gk21(f, worst.a, mid);
    detail::Panel right = detail::gk21(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    inner_err += left.inner_error + right.inner_error - worst.inner_error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }

  // Re-sum to remove drift from the incremental updates.
  double value = 0.0, err = 0.0, inner = 0.0;
  for (; !heap.empty(); heap.pop()) {
    value += heap.top().value;
    err += heap.top().error;
    inner += heap.top().inner_error;
  }
  for (const auto& p : frozen) {
    value += p.value;
    err += p.error;
    inner += p.inner_error;
  }
  return {value, err + inner};
}

/// Integral over [a, inf) through the map r = a + scale * t / (1 - t).
/// The default scale 1 gives the plain t/(1-t) transform; callers pass the
/// characteristic length of the integrand so that the mass is not squeezed
/// against t = 1.
template <class F>
QuadResult integrate_semi_infinite(F&& f, double a, const QuadratureSpec& spec = {},
                                   double scale = 1.0, std::span<const double> breakpoints = {}) {
  require(std::isfinite(a), ErrorCode::kInvalidParameter, "integrate_semi_infinite: a must be finite");
  require(scale > 0.0 && std::isfinite(scale), ErrorCode::kInvalidParameter,
          "integrate_semi_infinite: scale must be positive");
  std::vector<double> tb;
  for (double r : breakpoints) {
    if (r > a && std::isfinite(r)) tb.push_back((r - a) / (scale + r - a));
  }
  auto g = [&](double t) {
    const double one_minus = 1.0 - t;
    const double r = a + scale * t / one_minus;
    const double jac = scale / (one_minus * one_minus);
    auto v = f(r);
    if constexpr (std::is_same_v<std::decay_t<decltype(v)>, QuadResult>) {
      return QuadResult{v.value * jac, v.error * jac};
    } else {
      return static_cast<double>(v) * jac;
    }
  };
  return integrate_1d(g, 0.0, 1.0, spec, tb);
}

/// Radial integral over [0, inf): finite part on [0, split] plus a mapped tail.
template <class F>
QuadResult integrate_radial(F&& f, double split, const QuadratureSpec& spec = {},
                            std::span<const double> breakpoints = {}) {
  require(split > 0.0 && std::isfinite(split), ErrorCode::kInvalidParameter,
          "integrate_radial: split must be positive");
  QuadResult head = integrate_1d(f, 0.0, split, spec, breakpoints);
  QuadResult tail = integrate_semi_infinite(f, split, spec, split, breakpoints);
  return head + tail;
}

struct Bound {
  double lo = 0.0;
  double hi = 1.0;  // +infinity selects the semi-infinite transform
};

/// Nested adaptive integration over a box in 2 or 3 dimensions; f receives a
/// std::array<double, N>. The returned error accumulates the inner estimates.
template <std::size_t N, class F>
QuadResult integrate_nd(F&& f, const std::array<Bound, N>& bounds, const QuadratureSpec& spec = {}) {
  static_assert(N == 2 || N == 3, "integrate_nd supports 2 or 3 dimensions");
  std::array<double, N> x{};

  auto integrate_dim = [&](auto&& self, std::size_t dim) -> QuadResult {
    auto inner = [&](double xi) -> QuadResult {
      x[dim] = xi;
      if (dim + 1 == N) return QuadResult{static_cast<double>(f(x)), 0.0};
      return self(self, dim + 1);
    };
    const Bound& bd = bounds[dim];
    if (std::isinf(bd.hi)) return integrate_semi_infinite(inner, bd.lo, spec);
    return integrate_1d(inner, bd.lo, bd.hi, spec);
  };
  return integrate_dim(integrate_dim, 0);
}

}  // namespace hetnet
