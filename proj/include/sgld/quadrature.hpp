#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <sstream>
#include <string_view>
#include <vector>

#include "sgld/errors.hpp"

namespace sgld {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// Globally adaptive 15-point Gauss-Kronrod on [a, b]: the panel with the largest
// error estimate is bisected until the total is below max(abs_tol, rel_tol * L1).
// Throws NumericError with context when max_panels is reached first.
// (Boost's own adaptive driver compares an unscaled panel error against a
// scaled tolerance and bisects short intervals to full depth.)
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol, double abs_tol,
                           std::string_view what, std::size_t max_panels = 4000) {
  if (a == b) return {};
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi) {
    Panel p{lo, hi, 0.0, 0.0, 0.0};
    const double half = (hi - lo) / 2, mid = (hi + lo) / 2;
    p.value = GK::integrate([&](double x) { return f(half * x + mid); }, -1.0, 1.0, 0, 0.0, &p.error, &p.l1);
    p.value *= half;
    p.error *= std::abs(half);
    p.l1 *= std::abs(half);
    return p;
  };
  std::priority_queue<Panel> panels;
  QuadratureResult r;
  auto add = [&](const Panel& p) {
    panels.push(p);
    r.value += p.value;
    r.error += p.error;
    r.l1 += p.l1;
  };
  add(eval(a, b));
  while (r.error > std::max(abs_tol, rel_tol * r.l1) && panels.size() < max_panels && std::isfinite(r.value)) {
    const Panel worst = panels.top();
    panels.pop();
    r.value -= worst.value;
    r.error -= worst.error;
    r.l1 -= worst.l1;
    const double mid = (worst.a + worst.b) / 2;
    add(eval(worst.a, mid));
    add(eval(mid, worst.b));
  }
  if (!panels.empty()) {
    // Re-sum to drop the cancellation accumulated by the running updates.
    r = {};
    while (!panels.empty()) {
      r.value += panels.top().value;
      r.error += panels.top().error;
      r.l1 += panels.top().l1;
      panels.pop();
    }
  }
  if (!std::isfinite(r.value) || r.error > std::max(abs_tol, rel_tol * r.l1)) {
    std::ostringstream os;
    os << what << ": quadrature on [" << a << ", " << b << "] did not converge (value " << r.value
       << ", error estimate " << r.error << ", L1 " << r.l1 << ")";
    throw NumericError(os.str());
  }
  return r;
}

}  // namespace sgld
