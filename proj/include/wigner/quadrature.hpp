#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "wigner/error.hpp"

namespace wigner::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
inline Rule gauss_legendre(int order) {
  if (order < 1) throw InvalidArgument("Gauss-Legendre order must be >= 1");
  Rule r;
  r.nodes.resize(order);
  r.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[order - 1 - i] = x;
    r.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) r.nodes[order / 2] = 0.0;
  return r;
}

// Composite rule: [lo, hi] cut into `panels` equal panels of `order` nodes each.
inline Rule composite(double lo, double hi, int panels, const Rule& base) {
  Rule r;
  if (!(hi > lo) || panels < 1) return r;
  const double h = (hi - lo) / panels;
  const std::size_t p = base.nodes.size();
  r.nodes.reserve(panels * p);
  r.weights.reserve(panels * p);
  for (int j = 0; j < panels; ++j) {
    const double a = lo + j * h;
    const double mid = a + 0.5 * h;
    for (std::size_t i = 0; i < p; ++i) {
      r.nodes.push_back(mid + 0.5 * h * base.nodes[i]);
      r.weights.push_back(0.5 * h * base.weights[i]);
    }
  }
  return r;
}

// Adaptive panel integration of a scalar function: each panel is accepted
// once the `order`-point estimate agrees with the sum over its two halves.
template <class F>
double adaptive(F&& f, double lo, double hi, int base_panels, double abs_tol,
                int order = 20, int max_depth = 30) {
  if (!(hi > lo)) return 0.0;
  const Rule rule = gauss_legendre(order);
  auto panel = [&](double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
  };
  struct Frame {
    double a, b, est, tol;
    int depth;
  };
  double total = 0.0;
  const double h = (hi - lo) / base_panels;
  std::vector<Frame> stack;
  for (int j = base_panels - 1; j >= 0; --j) {
    const double a = lo + j * h, b = (j + 1 == base_panels) ? hi : lo + (j + 1) * h;
    stack.push_back({a, b, panel(a, b), abs_tol / base_panels, 0});
  }
  while (!stack.empty()) {
    const Frame fr = stack.back();
    stack.pop_back();
    const double m = 0.5 * (fr.a + fr.b);
    const double left = panel(fr.a, m), right = panel(m, fr.b);
    if (std::abs(left + right - fr.est) <= fr.tol) {
      total += left + right;
      continue;
    }
    if (fr.depth >= max_depth)
      throw NumericalFailure("adaptive quadrature did not converge on [" + std::to_string(fr.a) + ", " +
                             std::to_string(fr.b) + "]");
    stack.push_back({m, fr.b, right, 0.5 * fr.tol, fr.depth + 1});
    stack.push_back({fr.a, m, left, 0.5 * fr.tol, fr.depth + 1});
  }
  return total;
}

}  // namespace wigner::quad
