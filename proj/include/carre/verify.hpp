#pragma once

#include <optional>
#include <string>
#include <vector>

#include "carre/quad.hpp"
#include "carre/triple.hpp"

namespace carre {

/// A semilinear problem L u + F(u) = 0 on a working box: the triple, the
/// candidate solution u, the univariate nonlinearity F (invalid = zero), and
/// a weighted quadrature grid for every integral.
struct ProblemInstance {
  MarkovTriple triple;
  SmoothFunction u;
  SmoothFunction F;
  QuadratureGrid grid;
};

/// F(s) and F'(s) for a univariate SmoothFunction.
double nonlinearity_value(const SmoothFunction& F, double s);
double nonlinearity_derivative(const SmoothFunction& F, double s);
/// F(u) as a function of x.
SmoothFunction composed_nonlinearity(const SmoothFunction& F,
                                     const SmoothFunction& u);

struct ResidualReport {
  double pointwise_sup = 0.0;
  Vector worst_point;
  double weak_sup = 0.0;   // max over test bumps, normalized by ||phi||_L2(mu)
  int weak_worst_index = -1;
  std::size_t points = 0, test_functions = 0;
};

ResidualReport residual(const ProblemInstance& p,
                        const std::vector<Vector>& points,
                        const std::vector<Bump>& test_bumps);

struct SpectrumReport {
  std::string basis_description;
  int matrix_dim = 0;
  std::vector<double> smallest_eigenvalues;  // ascending
  double tol = 0.0;
  bool stable = false;  // lambda_min >= -tol on the tested subspace
  Eigen::VectorXd witness_coefficients;  // bottom eigenvector when unstable
};

/// Rayleigh-Ritz certificate for the stability form
/// Q(phi) = int Gamma(phi) - F'(u) phi^2 d(mu) over the bump subspace:
/// assembles A_ij = int [Gamma(phi_i, phi_j) - F'(u) phi_i phi_j] d(mu) and
/// M_ij = int phi_i phi_j d(mu), then solves A v = lambda M v.  "stable"
/// certifies only the tested subspace; an eigenvalue below -tol is a genuine
/// counterexample up to quadrature accuracy.
SpectrumReport stability_spectrum(const ProblemInstance& p,
                                  const std::vector<Bump>& basis, double tol,
                                  int num_eigenvalues = 8);

struct InequalityReport {
  std::string name;
  double tol = 0.0;
  double epsilon = 0.0;  // regularization constant, when one is used
  bool holds = false;
  bool hypothesis_ok = true;
  std::string hypothesis_warning;
  double worst_margin = 0.0;
  double lhs_at_worst = 0.0, rhs_at_worst = 0.0;
  int worst_index = -1;
  Vector witness_point;
  std::string witness_label;
  std::size_t violations = 0;
  std::size_t tests = 0;
  std::string note;
  PointTable table;
};

/// The geometric Poincare certificate: for each test function phi checks
///   int (Gamma_2(u) - Gamma(Gamma(u))/(4(Gamma(u)+eps))) phi^2 d(mu)
///     <=  int Gamma(u) Gamma(phi) d(mu) + tol.
/// The regularized term underestimates Gamma(sqrt(Gamma(u))), which only
/// shrinks the left side, so the certificate direction is preserved.  A
/// "verified" verdict additionally requires the residual and stability gates;
/// otherwise the values are reported with a hypothesis warning.
InequalityReport poincare_certificate(const ProblemInstance& p,
                                      const std::vector<Bump>& test_functions,
                                      double epsilon, double tol,
                                      const ResidualReport* residual_gate,
                                      const SpectrumReport* stability_gate,
                                      double gate_residual_tol = 1e-6);

/// CD(K, infinity) margins on samples:
///   m1 = Gamma_2(f) - K Gamma(f)
///   m2 = 4 Gamma(f) (Gamma_2(f) - K Gamma(f)) - Gamma(Gamma(f)).
/// A negative m1 refutes the condition on the instance; absence of
/// violations is evidence on the sampled set, not proof.
InequalityReport cd_check(const MarkovTriple& T, double K,
                          const std::vector<SmoothFunction>& sample_functions,
                          const std::vector<Vector>& sample_points, double tol);

/// Carnot identities evaluated by two independent jet routes:
///  (i)  (1/2) Delta_Z |Zu|^2 = ||Z^2 u||^2 + sum_j Z_j u Z_j(Delta_Z u)
///       + 2 sum_ij Z_j u [Z_i, Z_j] Z_i u + sum_ij Z_j u [Z_i,[Z_i, Z_j]] u
///  (ii) Gamma_2(u) = ||Z^2 u||^2 + R(u).
/// Requires a Carnot catalog triple (heisenberg, engel, filiform).
IdentityReport bochner_carnot_check(const MarkovTriple& T,
                                    const SmoothFunction& u,
                                    const std::vector<Vector>& points,
                                    double tol);

/// Grushin-plane identities: the commutation relations
///   Delta_Z Z1 u = Z1 Delta_Z u - 2 Z3 Z2 u
///   Delta_Z Z2 u = Z2 Delta_Z u + 2 Z3 Z1 u        (exact for alpha = 1)
/// with Z3 = [Z1, Z2], the Gamma_2 display
///   Gamma_2(u) = ||Z^2 u||^2 - 2 Z1u Z3 Z2 u + 2 Z2u Z3 Z1 u,
/// and, gated on u solving the equation, Z_i Delta_Z u = -F'(u) Z_i u and
/// Gamma(u, Delta_Z u) = -F'(u) |Zu|^2.
IdentityReport grushin_gamma2_check(const MarkovTriple& T,
                                    const SmoothFunction& u,
                                    const SmoothFunction* F,
                                    const std::vector<Vector>& points,
                                    double tol,
                                    const ResidualReport* residual_gate,
                                    double gate_residual_tol = 1e-6);

/// Level-set decomposition on model filiform groups, on {|Zu| > floor}:
///   ||Z^2 u||^2 - <(Z^2u)(Z^2u)^T nu, nu>
///     = |Zu|^2 [ h^2 + (p + <(Z^2u) v, nu> / |Zu|)^2 ]
/// with nu = Zu/|Zu|, v = (Z2u, -Z1u)/|Zu|, h = Z1 nu_1 + Z2 nu_2,
/// p = -Z3u/|Zu| and Z3 = [Z2, Z1] (the realized chain's sign).  Reports h
/// and p per point; points under the floor are skipped and counted.
IdentityReport filiform_levelset_check(const MarkovTriple& T,
                                       const SmoothFunction& u,
                                       const std::vector<Vector>& points,
                                       double tol, double zu_floor = 1e-6);

struct RigidityReport {
  double K = 0.0;
  double gamma_integral = 0.0;  // int Gamma(u) d(mu) over the box
  double gamma_sup = 0.0, gamma_mean = 0.0;
  double k0_identity_sup = 0.0;  // sup |Gamma_2(u) - regularized term|
  double epsilon = 0.0;
  std::size_t lower_bound_violations = 0;
  double lower_bound_worst_margin = 0.0;
  Vector worst_point;
  bool hypothesis_consistent = true;
  std::size_t points = 0;
};

/// Diagnostics for the rigidity conclusions: the energy gate, the K > 0
/// flatness of Gamma(u), the K = 0 identity defect, and the pointwise lower
/// bound 4 Gamma(u) Gamma_2(u) - Gamma(Gamma(u)) >= 4K Gamma(u)^2.  A failed
/// lower bound marks the claimed K inconsistent with the instance.
RigidityReport rigidity_report(const ProblemInstance& p, double K,
                               const std::vector<Vector>& points);

/// Random interior bumps for weak-form and Poincare test functions.
std::vector<Bump> random_bumps(const Box& box, int count, SplitMix64& rng,
                               int power = 4);

}  // namespace carre
