#include "carre/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace carre {

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= upper[i] - lower[i];
  return v;
}

Box Box::cube(int dim, double lo, double hi) {
  Box box;
  box.lower = Vector::Constant(dim, lo);
  box.upper = Vector::Constant(dim, hi);
  return box;
}

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                           23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t index, int base) {
  double inv = 1.0 / base, result = 0.0, scale = inv;
  while (index) {
    result += static_cast<double>(index % base) * scale;
    index /= base;
    scale *= inv;
  }
  return result;
}

}  // namespace

std::vector<Vector> halton_points(const Box& box, int count,
                                  std::uint64_t seed) {
  const int n = box.dim();
  if (n > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
    throw std::invalid_argument("halton_points supports up to 16 dimensions");
  SplitMix64 rng(seed);
  std::vector<double> rotation(n);
  for (int a = 0; a < n; ++a) rotation[a] = rng.uniform();

  std::vector<Vector> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vector x(n);
    for (int a = 0; a < n; ++a) {
      double u = radical_inverse(static_cast<std::uint64_t>(i) + 1, kPrimes[a]);
      u += rotation[a];
      u -= std::floor(u);
      x[a] = box.lower[a] + (box.upper[a] - box.lower[a]) * u;
    }
    points.push_back(std::move(x));
  }
  return points;
}

double Polynomial::operator()(const Vector& x) const {
  double sum = 0.0;
  for (const Term& t : terms) {
    double m = t.coefficient;
    for (int a = 0; a < dim; ++a)
      for (int k = 0; k < t.exponents[a]; ++k) m *= x[a];
    sum += m;
  }
  return sum;
}

Jet Polynomial::jet(const Vector& x, int order) const {
  // Taylor-shift each monomial directly: the coefficient of (x-p)^beta in
  // x^alpha is prod_a C(alpha_a, beta_a) p_a^(alpha_a - beta_a).
  Jet sum(dim, order, x);
  const JetTable& table = sum.table();
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(table.size());
  for (const Term& t : terms) {
    for (int idx = 0; idx < table.size(); ++idx) {
      const std::vector<int>& beta = table.exponent(idx);
      double c = t.coefficient;
      bool in_range = true;
      for (int a = 0; a < dim && in_range; ++a) {
        const int alpha = t.exponents[a], b = beta[a];
        if (b > alpha) {
          in_range = false;
          break;
        }
        double binom = 1.0;
        for (int i = 0; i < b; ++i) binom = binom * (alpha - i) / (i + 1);
        c *= binom;
        for (int i = 0; i < alpha - b; ++i) c *= x[a];
      }
      if (in_range) coef[idx] += c;
    }
  }
  return Jet::with_coefficients(dim, order, x, std::move(coef));
}

SmoothFunction Polynomial::function(std::string name) const {
  auto shared = std::make_shared<const Polynomial>(*this);
  return SmoothFunction(
      dim,
      [shared](const Vector& x, int order) { return shared->jet(x, order); },
      std::move(name));
}

Polynomial random_polynomial(int dim, int max_degree, SplitMix64& rng,
                             double scale) {
  // enumerate all exponent tuples of total degree <= max_degree
  Polynomial poly;
  poly.dim = dim;
  std::vector<int> exp(dim, 0);
  std::vector<std::vector<int>> all;
  auto recurse = [&](auto&& self, int axis, int budget) -> void {
    if (axis == dim) {
      all.push_back(exp);
      return;
    }
    for (int k = 0; k <= budget; ++k) {
      exp[axis] = k;
      self(self, axis + 1, budget - k);
    }
    exp[axis] = 0;
  };
  recurse(recurse, 0, max_degree);
  const double unit = scale / static_cast<double>(all.size());
  for (auto& e : all)
    poly.terms.push_back({rng.uniform(-unit, unit), std::move(e)});
  return poly;
}

}  // namespace carre
