#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace ssc {

struct GradCheckResult {
  double max_rel_error = 0;
  std::size_t worst_index = 0;
  bool finite = true;

  bool passed(double tol) const { return finite && max_rel_error < tol; }
};

/// Compares analytic[i] against the central difference
/// (f(x + h e_i) - f(x - h e_i)) / 2h for each probed coordinate i.
/// Error per coordinate is |a - n| / max(|a|, |n|, 1e-8). An empty probe list
/// means every coordinate. x is restored before returning.
template <typename T, typename F>
GradCheckResult grad_check(F&& f, std::vector<T>& x,
                           const std::vector<T>& analytic, T step,
                           const std::vector<std::size_t>& probes = {}) {
  GradCheckResult r;
  auto check = [&](std::size_t i) {
    const T saved = x[i];
    x[i] = saved + step;
    const T up = f(x);
    x[i] = saved - step;
    const T down = f(x);
    x[i] = saved;
    const double numeric = (static_cast<double>(up) - static_cast<double>(down)) /
                           (2.0 * static_cast<double>(step));
    const double a = static_cast<double>(analytic[i]);
    if (!std::isfinite(numeric) || !std::isfinite(a)) {
      r.finite = false;
      r.max_rel_error = std::numeric_limits<double>::infinity();
      r.worst_index = i;
      return;
    }
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double err = std::abs(a - numeric) / denom;
    if (err > r.max_rel_error) {
      r.max_rel_error = err;
      r.worst_index = i;
    }
  };
  if (probes.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) check(i);
  } else {
    for (std::size_t i : probes) check(i);
  }
  return r;
}

}  // namespace ssc
