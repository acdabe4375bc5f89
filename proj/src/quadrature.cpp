#include "movedg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace movedg {

namespace {

// Legendre polynomial value and derivative on [-1,1].
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  double d = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, d};
}

}  // namespace

SegmentRule gauss_segment(int npoints) {
  if (npoints < 1) throw std::invalid_argument("gauss_segment: npoints < 1");
  SegmentRule rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  for (int i = 0; i < npoints; ++i) {
    // Newton from the Chebyshev-type initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (npoints + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, d] = legendre(npoints, x);
      double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, d] = legendre(npoints, x);
    (void)p;
    double w = 2.0 / ((1.0 - x * x) * d * d);
    // map [-1,1] -> [0,1], sorted ascending
    rule.points[npoints - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[npoints - 1 - i] = 0.5 * w;
  }
  rule.exactness = 2 * npoints - 1;
  return rule;
}

TriangleRule make_volume_rule(int exactness) {
  if (exactness < 0 || exactness > 40)
    throw std::invalid_argument("make_volume_rule: unsupported exactness");
  // x = u, y = v(1-u); the extra (1-u) factor raises the u-degree by one.
  const int ku = (exactness + 2 + 1) / 2;
  const int kv = (exactness + 1 + 1) / 2;
  SegmentRule gu = gauss_segment(ku);
  SegmentRule gv = gauss_segment(kv);
  TriangleRule rule;
  rule.points.resize(ku * kv, 2);
  rule.weights.resize(ku * kv);
  int idx = 0;
  for (int i = 0; i < ku; ++i) {
    for (int j = 0; j < kv; ++j, ++idx) {
      const double u = gu.points[i], v = gv.points[j];
      rule.points(idx, 0) = u;
      rule.points(idx, 1) = v * (1.0 - u);
      rule.weights[idx] = gu.weights[i] * gv.weights[j] * (1.0 - u);
    }
  }
  rule.exactness = exactness;
  return rule;
}

SegmentRule make_edge_rule(int exactness) {
  if (exactness < 0 || exactness > 60)
    throw std::invalid_argument("make_edge_rule: unsupported exactness");
  SegmentRule rule = gauss_segment((exactness + 2) / 2);
  rule.exactness = exactness;
  return rule;
}

double monomial_defect(const TriangleRule& rule, int degree) {
  double worst = 0.0;
  for (int a = 0; a <= degree; ++a) {
    for (int b = 0; a + b <= degree; ++b) {
      // int_T x^a y^b = a! b! / (a+b+2)! = 1 / (C(a+b,a) (a+b+1) (a+b+2))
      double binom = 1.0;
      for (int k = 1; k <= a; ++k) binom *= static_cast<double>(a + b - a + k) / k;
      double exact = 1.0 / (binom * (a + b + 1) * (a + b + 2));
      double q = 0.0;
      for (int i = 0; i < rule.size(); ++i)
        q += rule.weights[i] * std::pow(rule.points(i, 0), a) * std::pow(rule.points(i, 1), b);
      worst = std::max(worst, std::abs(q - exact) / std::abs(exact));
    }
  }
  return worst;
}

double monomial_defect(const SegmentRule& rule, int degree) {
  double worst = 0.0;
  for (int a = 0; a <= degree; ++a) {
    double exact = 1.0 / (a + 1);
    double q = 0.0;
    for (int i = 0; i < rule.size(); ++i) q += rule.weights[i] * std::pow(rule.points[i], a);
    worst = std::max(worst, std::abs(q - exact) / exact);
  }
  return worst;
}

}  // namespace movedg
