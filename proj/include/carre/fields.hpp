#pragma once

#include <memory>
#include <string>
#include <vector>

#include "carre/smooth_function.hpp"

namespace carre {

/// A smooth vector field Z = sum_i Z^i d/dx_i given through its coefficient
/// functions.  Immutable; applying it to a function consumes one derivative
/// order of that function.
class VectorField {
 public:
  VectorField() = default;
  VectorField(std::vector<SmoothFunction> coefficients, std::string label = {});

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }
  const SmoothFunction& coefficient(int i) const { return coef_[i]; }
  const std::vector<SmoothFunction>& coefficients() const { return coef_; }

  std::vector<Jet> coefficient_jets(const Vector& x, int order) const;

  /// Jet of x -> (Zf)(x) at the given order; evaluates f at order + 1.
  Jet apply(const SmoothFunction& f, const Vector& x, int order) const;
  /// Same contraction on an already evaluated jet; drops one order.
  Jet apply_to_jet(const Jet& f_jet) const;
  /// Zf as a SmoothFunction.
  SmoothFunction applied(const SmoothFunction& f) const;

  /// Constant coordinate field d/dx_i.
  static VectorField coordinate(int dim, int axis);

 private:
  int dim_ = 0;
  std::vector<SmoothFunction> coef_;
  std::string label_;
};

/// [A, B] with coefficients A(B^i) - B(A^i); evaluating the result's
/// coefficients at order r consumes the parents' coefficients at order r+1.
VectorField bracket(const VectorField& A, const VectorField& B);

/// Contraction used by both bracket() and the depth scan: given the
/// coefficient jets of A and B at order r, the bracket's coefficient jets at
/// order r-1.
std::vector<Jet> bracket_jets(const std::vector<Jet>& a_jets,
                              const std::vector<Jet>& b_jets);

/// An iterated bracket over a frame: either a leaf (frame index) or
/// [frame[j], subtree].  depth counts leaves.
struct BracketTree {
  int leaf = -1;
  int outer = -1;  // frame index bracketed onto `inner`
  std::shared_ptr<const BracketTree> inner;
  int depth = 1;

  static std::shared_ptr<const BracketTree> make_leaf(int j);
  static std::shared_ptr<const BracketTree> wrap(
      int outer, std::shared_ptr<const BracketTree> inner);
  std::string describe(const std::vector<VectorField>& frame) const;
};

/// Evaluate the tree's field as coefficient jets at the point.  A tree of
/// depth d needs leaf coefficients to order `order + d - 1`.
std::vector<Jet> evaluate_tree(const BracketTree& tree,
                               const std::vector<VectorField>& frame,
                               const Vector& x, int order);

/// Numerical rank by Gaussian elimination with full column pivoting; a pivot
/// counts while its magnitude exceeds tol * (largest initial column norm).
int rank_with_tolerance(Eigen::MatrixXd columns, double tol);

struct HormanderScan {
  bool spans = false;
  int depth = 0;          // smallest level at which every point reached rank n
  int min_rank = 0;       // worst rank over points at the deepest level tried
  int worst_point = -1;   // index of that worst point
  int fields_tested = 0;  // bracket fields accumulated over all levels
  std::vector<int> per_point_depth;  // first spanning level per point, -1 if none
};

/// Levelwise bracket generation: level 1 is the frame, level p adds
/// [Z_j, V] for V in level p-1.  Reports the smallest level at which the
/// evaluated fields span R^n at every sample point.
HormanderScan hormander_depth(const std::vector<VectorField>& frame,
                              const std::vector<Vector>& points, int max_depth,
                              double tol);

}  // namespace carre
