#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "carre/fields.hpp"
#include "carre/quad.hpp"
#include "carre/smooth_function.hpp"

namespace carre {

enum class GeometryKind {
  EuclideanWeighted,
  OrnsteinUhlenbeck,
  Heisenberg,
  Engel,
  Filiform,
  Grushin,
  Custom,
};

std::string to_string(GeometryKind kind);

/// Diffusion Markov triple built from a Hormander frame Z_1..Z_m and a
/// log-weight eta (measure d(mu) = e^eta dx).  The divergences div Z_j and
/// the drift Z_0 (Z_0 f = sum_j Z_j(eta) Z_j f) are derived by jet
/// differentiation, so L is fixed by the frame and weight:
///   L g = sum_j Z_j(g) div Z_j  +  sum_j Z_j(Z_j g)  +  Z_0 g.
/// Immutable and cheap to copy; all evaluations are pure.
class MarkovTriple {
 public:
  MarkovTriple() = default;
  MarkovTriple(std::vector<VectorField> frame, SmoothFunction eta,
               GeometryKind kind = GeometryKind::Custom,
               std::string description = {});

  int dim() const { return data_->dim; }
  int field_count() const { return static_cast<int>(data_->frame.size()); }
  const std::vector<VectorField>& frame() const { return data_->frame; }
  const SmoothFunction& eta() const { return data_->eta; }
  bool weighted() const { return data_->weighted; }
  const SmoothFunction& divergence(int j) const { return data_->divergence[j]; }
  const VectorField& drift() const { return data_->drift; }
  GeometryKind kind() const { return data_->kind; }
  const std::string& description() const { return data_->description; }

  /// Grushin exponent for kind() == Grushin, filiform dimension, etc.
  int parameter() const { return data_->parameter; }

  double weight_density(const Vector& x) const;

  Jet gamma_jet(const SmoothFunction& f, const SmoothFunction& g,
                const Vector& x, int order) const;
  double gamma(const SmoothFunction& f, const SmoothFunction& g,
               const Vector& x) const;
  double gamma(const SmoothFunction& f, const Vector& x) const;

  Jet operator_L_jet(const SmoothFunction& f, const Vector& x,
                     int order) const;
  double operator_L(const SmoothFunction& f, const Vector& x) const;

  double gamma2(const SmoothFunction& f, const SmoothFunction& g,
                const Vector& x) const;
  double gamma2(const SmoothFunction& f, const Vector& x) const;

  /// Gamma(Gamma(u)) / (4 (Gamma(u) + epsilon)): the epsilon-regularized
  /// stand-in for Gamma(sqrt(Gamma(u))); monotone nondecreasing as
  /// epsilon decreases, with equality in the limit where Gamma(u) > 0.
  double gamma_sqrt_reg(const SmoothFunction& u, const Vector& x,
                        double epsilon) const;

  SmoothFunction gamma_function(const SmoothFunction& f,
                                const SmoothFunction& g) const;
  SmoothFunction operator_L_function(const SmoothFunction& f) const;
  SmoothFunction delta_z_function(const SmoothFunction& f) const;

  MarkovTriple with_kind(GeometryKind kind, std::string description,
                         int parameter = 0) const;

 private:
  struct Data {
    int dim = 0;
    std::vector<VectorField> frame;
    SmoothFunction eta;
    bool weighted = false;
    std::vector<SmoothFunction> divergence;
    VectorField drift;
    GeometryKind kind = GeometryKind::Custom;
    std::string description;
    int parameter = 0;
  };
  std::shared_ptr<const Data> data_;
};

/// sup over points of Gamma(f) -- used for cutoff certification and the
/// default regularization epsilon.
double sampled_sup_gamma(const MarkovTriple& T, const SmoothFunction& f,
                         const std::vector<Vector>& points);

/// Fills the cutoff's certified bounds: the sampled sup of Gamma(xi_k),
/// compared against 1/k by the caller, and the sampled sup of Gamma(d) for
/// non-Euclidean distance surrogates.  Returns the sampled sup of
/// Gamma(xi_k).
double certify_cutoff(Cutoff& cutoff, const SmoothFunction& distance,
                      const MarkovTriple& T, const std::vector<Vector>& points);

/// Bracket-generation scan with and without the drift Z_0.  The drift enters
/// level 2 onward only when a weight is declared; both ranks are surfaced
/// because the spanning role of Z_0 is not settled.
struct DepthReport {
  HormanderScan frame_only;
  bool drift_included = false;
  HormanderScan with_drift;  // meaningful iff drift_included
};

DepthReport hormander_depth_report(const MarkovTriple& T,
                                   const std::vector<Vector>& points,
                                   int max_depth, double tol);

/// Second-order operator L f = sum a_ij d_i d_j f + sum b_i d_i f with the
/// coefficient matrix stored symmetrized.  Carries the Remark's
/// counterexample operators and the polarization route to Gamma.
class GeneralOperator {
 public:
  GeneralOperator(int dim, std::vector<SmoothFunction> a,
                  std::vector<SmoothFunction> b, std::string description = {});

  int dim() const { return dim_; }
  const std::string& description() const { return description_; }

  Jet apply_jet(const SmoothFunction& f, const Vector& x, int order) const;
  double apply(const SmoothFunction& f, const Vector& x) const;

  /// Polarization: Gamma(f, g) = (L(fg) - f Lg - g Lf) / 2.
  double gamma_from_L(const SmoothFunction& f, const SmoothFunction& g,
                      const Vector& x) const;

  static GeneralOperator dalembert();       // f_xx - f_yy on R^2
  static GeneralOperator derivative_1d();   // f_x on R
  static GeneralOperator nondivergence_form(int dim,
                                            std::vector<SmoothFunction> a);
  static GeneralOperator divergence_form(int dim,
                                         std::vector<SmoothFunction> a);
  static GeneralOperator from_triple(const MarkovTriple& T);

 private:
  int dim_;
  std::vector<SmoothFunction> a_;  // row-major dim x dim, symmetrized
  std::vector<SmoothFunction> b_;
  std::string description_;
};

struct IdentityEntry {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  Vector witness_point;
  std::string witness_label;
  std::string note;
};

/// Per-point diagnostic rows attached to reports (feeds the CSV output).
struct PointTable {
  std::vector<std::string> columns;
  std::vector<Vector> points;
  std::vector<Eigen::VectorXd> rows;
};

struct IdentityReport {
  std::string title;
  std::vector<IdentityEntry> entries;
  PointTable table;
  bool all_pass() const;
  double max_residual() const;
};

/// Inputs for the axiom validator.  `functions` are generic smooth samples
/// (consecutive entries form the (f, g) pairs), `compact_support` must
/// vanish near the boundary of `integration_box` for the integration-by-parts
/// axiom, and the grid node counts are chosen by the validator.
struct AxiomSamples {
  std::vector<SmoothFunction> functions;
  std::vector<Vector> points;
  std::vector<Bump> compact_support;
  std::vector<int> ibp_nodes_per_axis;  // empty = dimension default
};

/// Numerical certification of the structural axioms on finite samples:
/// bilinearity/symmetry of Gamma, the chain rule for cubing/tanh/exp-1, the
/// product and square identities, Gamma(1) = L(1) = 0, positivity of Gamma,
/// agreement of Gamma with the polarization of the frame-induced operator,
/// integration by parts against d(mu), the Cauchy-Schwarz bound, and the
/// sampled contrapositive of nondegeneracy.  Failures are report entries.
IdentityReport validate_axioms(const MarkovTriple& T,
                               const AxiomSamples& samples, double tol);

/// Positivity / polarization checks for an arbitrary second-order operator;
/// the d'Alembert operator fails this with an explicit witness.
IdentityReport validate_operator_positivity(
    const GeneralOperator& op, const std::vector<SmoothFunction>& functions,
    const std::vector<Vector>& points, double tol);

}  // namespace carre
