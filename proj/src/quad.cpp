#include "carre/quad.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "carre/parallel.hpp"

namespace carre {

namespace {

void gauss_legendre_reference(int count, std::vector<double>& nodes,
                              std::vector<double>& weights) {
  nodes.assign(count, 0.0);
  weights.assign(count, 0.0);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // P_count(x) and its derivative by the three-term recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[count - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[count - 1 - i] = w;
  }
  if (count % 2 == 1) nodes[count / 2] = 0.0;
}

}  // namespace

void rule_nodes(QuadratureRule rule, double lo, double hi, int count,
                std::vector<double>& nodes, std::vector<double>& weights) {
  if (count < 2) throw std::invalid_argument("need at least 2 nodes per axis");
  if (!(hi > lo)) throw std::invalid_argument("degenerate box axis");
  nodes.resize(count);
  weights.resize(count);
  switch (rule) {
    case QuadratureRule::Trapezoid: {
      const double h = (hi - lo) / (count - 1);
      for (int i = 0; i < count; ++i) {
        nodes[i] = lo + h * i;
        weights[i] = (i == 0 || i == count - 1) ? h / 2 : h;
      }
      break;
    }
    case QuadratureRule::GaussLegendre: {
      std::vector<double> ref_nodes, ref_weights;
      gauss_legendre_reference(count, ref_nodes, ref_weights);
      const double mid = (lo + hi) / 2, scale = (hi - lo) / 2;
      for (int i = 0; i < count; ++i) {
        nodes[i] = mid + scale * ref_nodes[i];
        weights[i] = scale * ref_weights[i];
      }
      break;
    }
  }
}

QuadratureGrid build_grid(const Box& box,
                          const std::vector<int>& nodes_per_axis,
                          QuadratureRule rule) {
  if (static_cast<int>(nodes_per_axis.size()) != box.dim())
    throw std::invalid_argument("node counts do not match box dimension");
  QuadratureGrid grid;
  grid.box_ = box;
  grid.rule_ = rule;
  grid.size_ = 1;
  for (int a = 0; a < box.dim(); ++a) {
    std::vector<double> nodes, weights;
    rule_nodes(rule, box.lower[a], box.upper[a], nodes_per_axis[a], nodes,
               weights);
    grid.size_ *= nodes.size();
    grid.axis_nodes_.push_back(std::move(nodes));
    grid.axis_weights_.push_back(std::move(weights));
  }
  return grid;
}

void QuadratureGrid::decode(std::size_t index, std::vector<int>& digits) const {
  const int n = dim();
  digits.resize(n);
  for (int a = n - 1; a >= 0; --a) {
    const std::size_t c = axis_nodes_[a].size();
    digits[a] = static_cast<int>(index % c);
    index /= c;
  }
}

Vector QuadratureGrid::node(std::size_t index) const {
  std::vector<int> digits;
  decode(index, digits);
  Vector x(dim());
  for (int a = 0; a < dim(); ++a) x[a] = axis_nodes_[a][digits[a]];
  return x;
}

double QuadratureGrid::weight(std::size_t index) const {
  std::vector<int> digits;
  decode(index, digits);
  double w = 1.0;
  for (int a = 0; a < dim(); ++a) w *= axis_weights_[a][digits[a]];
  return w;
}

double QuadratureGrid::weight_density(std::size_t index) const {
  return density_.empty() ? 1.0 : density_[index];
}

QuadratureGrid QuadratureGrid::with_weight(const SmoothFunction& eta) const {
  QuadratureGrid out = *this;
  out.density_.assign(size_, 1.0);
  parallel_chunks(size_, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out.density_[i] = std::exp(eta(out.node(i)));
  });
  return out;
}

double integrate(const QuadratureGrid& grid,
                 const std::function<double(const Vector&)>& integrand,
                 bool weighted) {
  std::atomic<long long> first_bad{-1};
  const double sum = parallel_sum(grid.size(), [&](std::size_t i) {
    const Vector x = grid.node(i);
    const double f = integrand(x);
    if (!std::isfinite(f)) {
      // atomic min so the reported node does not depend on thread timing
      const long long mine = static_cast<long long>(i);
      long long expected = first_bad.load();
      while (expected < 0 || mine < expected)
        if (first_bad.compare_exchange_weak(expected, mine)) break;
      return 0.0;
    }
    const double w = grid.weight(i) * (weighted ? grid.weight_density(i) : 1.0);
    return w * f;
  });
  const long long bad = first_bad.load();
  if (bad >= 0) {
    std::string where = "(";
    const Vector x = grid.node(static_cast<std::size_t>(bad));
    for (int a = 0; a < x.size(); ++a)
      where += (a ? ", " : "") + std::to_string(x[a]);
    throw EvalError("non-finite integrand value at node " +
                    std::to_string(bad) + " " + where + ")");
  }
  return sum;
}

double Bump::value(const Vector& x) const {
  if (tensor) {
    double v = 1.0;
    for (int a = 0; a < x.size(); ++a) {
      const double t = (x[a] - center[a]) / radius[a];
      const double s = 1.0 - t * t;
      if (s <= 0.0) return 0.0;
      for (int i = 0; i < power; ++i) v *= s;
    }
    return v;
  }
  double s = 1.0;
  for (int a = 0; a < x.size(); ++a) {
    const double t = (x[a] - center[a]) / radius[a];
    s -= t * t;
  }
  if (s <= 0.0) return 0.0;
  double v = 1.0;
  for (int i = 0; i < power; ++i) v *= s;
  return v;
}

Jet Bump::jet(const Vector& x, int order) const {
  if (tensor) {
    for (int a = 0; a < x.size(); ++a) {
      const double t = (x[a] - center[a]) / radius[a];
      if (1.0 - t * t <= 0.0)
        return Jet(static_cast<int>(x.size()), order, x);
    }
    Jet v = Jet::constant(1.0, x, order);
    for (int a = 0; a < x.size(); ++a) {
      Jet t = (Jet::variable(a, x, order) - center[a]) / radius[a];
      v = v * pow_int(1.0 - t * t, power);
    }
    return v;
  }
  Jet s = Jet::constant(1.0, x, order);
  for (int a = 0; a < x.size(); ++a) {
    Jet t = (Jet::variable(a, x, order) - center[a]) / radius[a];
    s -= t * t;
  }
  if (s.value() <= 0.0) return Jet(static_cast<int>(x.size()), order, x);
  return pow_int(s, power);
}

SmoothFunction Bump::function() const {
  Bump copy = *this;
  return SmoothFunction(
      static_cast<int>(center.size()),
      [copy](const Vector& x, int order) { return copy.jet(x, order); },
      "bump");
}

bool Bump::supported_in(const Box& box) const {
  for (int a = 0; a < box.dim(); ++a)
    if (center[a] - radius[a] < box.lower[a] - 1e-12 ||
        center[a] + radius[a] > box.upper[a] + 1e-12)
      return false;
  return true;
}

Box Bump::support_box() const {
  Box box;
  box.lower = center - radius;
  box.upper = center + radius;
  return box;
}

std::vector<Bump> bump_lattice(const Box& box, const std::vector<int>& per_axis,
                               double radius_factor, int power) {
  const int n = box.dim();
  if (static_cast<int>(per_axis.size()) != n)
    throw std::invalid_argument("per_axis count mismatch");
  // spacing chosen so the outermost supports exactly touch the box:
  // width = (count - 1) h + 2 (radius_factor h)
  std::vector<double> spacing(n), margin(n);
  for (int a = 0; a < n; ++a) {
    const double width = box.upper[a] - box.lower[a];
    spacing[a] = width / (per_axis[a] - 1 + 2.0 * radius_factor);
    margin[a] = radius_factor * spacing[a];
  }

  std::vector<Bump> bumps;
  std::vector<int> digits(n, 0);
  for (;;) {
    Bump b;
    b.center.resize(n);
    b.radius.resize(n);
    b.power = power;
    for (int a = 0; a < n; ++a) {
      b.center[a] = box.lower[a] + margin[a] + spacing[a] * digits[a];
      b.radius[a] = margin[a];
    }
    bumps.push_back(std::move(b));
    int a = n - 1;
    while (a >= 0 && ++digits[a] == per_axis[a]) digits[a--] = 0;
    if (a < 0) break;
  }
  return bumps;
}

double CutoffProfile::value(double t) const {
  if (t <= 0.125) return 1.0;
  if (t >= 0.25) return 0.0;
  const double u = 8.0 * t - 1.0;
  const double u3 = u * u * u;
  return 1.0 - u3 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u))) * u;
}

UnivariateSeries CutoffProfile::series(double t0, int order) const {
  UnivariateSeries s{t0, Eigen::VectorXd::Zero(order + 1)};
  if (t0 <= 0.125) {
    s.c[0] = 1.0;
    return s;
  }
  if (t0 >= 0.25) return s;
  // q(u) = 1 - 35u^4 + 84u^5 - 70u^6 + 20u^7 shifted to u0, then chain by 8
  static const double a[8] = {1.0, 0.0, 0.0, 0.0, -35.0, 84.0, -70.0, 20.0};
  const double u0 = 8.0 * t0 - 1.0;
  double chain = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j <= 7) {
      double bj = 0.0;
      for (int m = j; m <= 7; ++m) {
        double binom = 1.0;
        for (int i = 0; i < j; ++i) binom = binom * (m - i) / (i + 1);
        double up = 1.0;
        for (int i = 0; i < m - j; ++i) up *= u0;
        bj += a[m] * binom * up;
      }
      s.c[j] = bj * chain;
    }
    chain *= 8.0;
  }
  return s;
}

Cutoff make_cutoff(int k, const SmoothFunction& distance) {
  if (k < 1) throw std::invalid_argument("cutoff index must be positive");
  Cutoff cutoff;
  cutoff.k = k;
  const double rk = CutoffProfile::slope_constant() * std::sqrt(double(k));
  cutoff.plateau_radius = rk / (2.0 * std::sqrt(2.0));
  SmoothFunction d = distance;
  CutoffProfile profile;
  cutoff.xi = SmoothFunction(
      distance.dim(),
      [d, rk, profile](const Vector& x, int order) {
        Jet dj = d.jet(x, order);
        Jet t = dj * dj / (rk * rk);
        return compose(profile.series(t.value(), order), t);
      },
      "xi_" + std::to_string(k));
  return cutoff;
}

SmoothFunction euclidean_distance_surrogate(int dim, double delta) {
  return SmoothFunction(
      dim,
      [delta](const Vector& x, int order) {
        Jet s = Jet::constant(delta * delta, x, order);
        for (int a = 0; a < x.size(); ++a) {
          Jet t = Jet::variable(a, x, order);
          s += t * t;
        }
        return sqrt(s);
      },
      "dist_euclid");
}

SmoothFunction heisenberg_gauge_surrogate(double delta) {
  return SmoothFunction(
      3,
      [delta](const Vector& x, int order) {
        Jet gx = Jet::variable(0, x, order);
        Jet gy = Jet::variable(1, x, order);
        Jet gt = Jet::variable(2, x, order);
        Jet plane = gx * gx + gy * gy;
        Jet s = plane * plane + gt * gt +
                Jet::constant(delta * delta * delta * delta, x, order);
        return pow(s, 0.25);
      },
      "gauge_heisenberg");
}

}  // namespace carre
