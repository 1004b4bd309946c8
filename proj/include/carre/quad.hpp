#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "carre/sampling.hpp"
#include "carre/smooth_function.hpp"

namespace carre {

enum class QuadratureRule { Trapezoid, GaussLegendre };

/// Nodes and weights of a univariate rule on [lo, hi].
void rule_nodes(QuadratureRule rule, double lo, double hi, int count,
                std::vector<double>& nodes, std::vector<double>& weights);

/// Tensor-product quadrature over a finite box, with an optional cached
/// weight density e^eta so that integrals against d(mu) = e^eta dx reuse the
/// same nodes.
class QuadratureGrid {
 public:
  QuadratureGrid() = default;

  const Box& box() const { return box_; }
  int dim() const { return box_.dim(); }
  std::size_t size() const { return size_; }
  Vector node(std::size_t index) const;
  /// Plain Lebesgue weight of the node.
  double weight(std::size_t index) const;
  /// e^eta at the node (1 when no weight is attached).
  double weight_density(std::size_t index) const;
  bool has_weight() const { return !density_.empty(); }

  /// A copy of this grid with e^eta cached at every node.
  QuadratureGrid with_weight(const SmoothFunction& eta) const;

  friend QuadratureGrid build_grid(const Box& box,
                                   const std::vector<int>& nodes_per_axis,
                                   QuadratureRule rule);

 private:
  Box box_;
  QuadratureRule rule_ = QuadratureRule::GaussLegendre;
  std::vector<std::vector<double>> axis_nodes_, axis_weights_;
  std::vector<double> density_;
  std::size_t size_ = 0;

  void decode(std::size_t index, std::vector<int>& digits) const;
};

QuadratureGrid build_grid(const Box& box,
                          const std::vector<int>& nodes_per_axis,
                          QuadratureRule rule);

/// Weighted sum over the grid; includes the cached e^eta density iff
/// weighted.  Throws EvalError naming the node if the integrand returns a
/// non-finite value.  Node evaluation parallelizes over a fixed chunk
/// partition and sums pairwise, so results do not depend on --threads.
double integrate(const QuadratureGrid& grid,
                 const std::function<double(const Vector&)>& integrand,
                 bool weighted);

/// Compactly supported test bump.  Radial form
/// ((1 - sum_a ((x_a-c_a)/r_a)^2)_+)^power, or with `tensor` set the
/// product form prod_a ((1 - ((x_a-c_a)/r_a)^2)_+)^power, which is exactly
/// polynomial on its support box (so tensor Gauss rules integrate it
/// exactly).  Smoothness class C^{power-1}.
struct Bump {
  Vector center;
  Vector radius;
  int power = 4;
  bool tensor = false;

  double value(const Vector& x) const;
  Jet jet(const Vector& x, int order) const;
  SmoothFunction function() const;
  bool supported_in(const Box& box) const;
  Box support_box() const;
};

/// Lattice of interior bumps covering the box; radius_factor scales the
/// per-axis spacing into the bump radius (supports stay inside the box).
std::vector<Bump> bump_lattice(const Box& box,
                               const std::vector<int>& per_axis,
                               double radius_factor = 2.0, int power = 4);

/// Plateau profile for the cutoff sequence: 1 on t <= 1/8, 0 on t >= 1/4,
/// with a degree-7 smoothstep transition (C^3).
struct CutoffProfile {
  double value(double t) const;
  UnivariateSeries series(double t0, int order) const;
  /// Rigorous bound on sup_t 2 sqrt(t) |phi'(t)| over the transition.
  static double slope_constant() { return 17.5; }
};

/// One element of the cutoff sequence: xi_k = profile(d(x)^2 / r_k^2) with
/// r_k = slope_constant() * sqrt(k), which keeps the pointwise bound
/// Gamma(xi_k) <= Gamma(d)/k for every k >= 1 and xi_k -> 1 on bounded sets.
struct Cutoff {
  int k = 1;
  double plateau_radius = 0.0;  // xi_k = 1 while d(x) <= plateau_radius
  SmoothFunction xi;
  /// sup over samples of Gamma(xi_k), filled by certify_cutoff.
  double sampled_sup_gamma = 0.0;
  /// sup over samples of Gamma(d), reported for non-Euclidean surrogates.
  double sampled_sup_gamma_distance = 0.0;
};

Cutoff make_cutoff(int k, const SmoothFunction& distance);

/// Smoothed Euclidean distance surrogate sqrt(|x|^2 + delta^2).
SmoothFunction euclidean_distance_surrogate(int dim, double delta = 1e-6);
/// Homogeneous-gauge surrogate ((x^2+y^2)^2 + t^2 + delta^4)^(1/4) for the
/// 3-dimensional step-2 frame; its own Gamma bound is reported, not assumed.
SmoothFunction heisenberg_gauge_surrogate(double delta = 1e-3);

}  // namespace carre
