#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <vector>

#include "ethloc/error.hpp"

namespace ethloc {

struct QuadratureOptions {
  double tol = 1e-8;
  int max_depth = 48;
};

namespace detail {

struct SimpsonState {
  const std::function<double(double)>& f;
  int max_depth;
  bool failed = false;
  double worst_error = 0.0;
};

inline double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) return delta;  // reported by the caller; refining would not help
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= st.max_depth || m <= a || m >= b) {
    st.failed = true;
    st.worst_error = std::max(st.worst_error, std::abs(delta) / 15.0);
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The interval is split at
/// every point of `kinks` strictly inside (a, b) so that |x| corners and step
/// discontinuities land on panel edges; the tolerance is shared across panels
/// in proportion to their length.
///
/// Throws QuadratureError (carrying the best estimate) when a panel hits the
/// depth limit without meeting its tolerance.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 std::span<const double> kinks = {}, QuadratureOptions opts = {}) {
  if (!(opts.tol > 0.0)) throw InvalidInput("integrate_adaptive: tol must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidInput("integrate_adaptive: non-finite limits");
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::vector<double> edges{a};
  for (double k : kinks)
    if (k > a && k < b) edges.push_back(k);
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  detail::SimpsonState st{f, opts.max_depth};
  const double width = b - a;
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    // Evaluate just inside the panel so step functions take their panel value.
    const double span = hi - lo;
    const double eps = span * 1e-13;
    const double flo = f(lo + eps);
    const double fhi = f(hi - eps);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = span / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(st, lo, hi, flo, fmid, fhi, whole, opts.tol * span / width, 0);
  }
  if (!std::isfinite(total)) throw ComputeError("integrate_adaptive: integrand produced non-finite values");
  if (st.failed) {
    std::ostringstream os;
    os << "adaptive quadrature did not converge on [" << a << ", " << b << "] (depth limit "
       << opts.max_depth << ", panel error estimate " << st.worst_error << ")";
    throw QuadratureError(os.str(), sign * total, st.worst_error);
  }
  return sign * total;
}

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  return integrate_adaptive(f, a, b, {}, QuadratureOptions{tol});
}

}  // namespace ethloc
