#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace carre {

using Vector = Eigen::VectorXd;

/// Thrown when an evaluation leaves the domain of a smooth primitive
/// (log/sqrt of a non-positive base value, |.| differentiated at 0, ...).
struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

/// Shared multi-index bookkeeping for all jets of a given (dimension, order).
///
/// Enumeration is graded lexicographic: ascending total degree, and within a
/// degree the first axis takes the largest share first, so for n=2, r=2 the
/// order is (0,0) (1,0) (0,1) (2,0) (1,1) (0,2).  Tables of order r-1 are
/// prefixes of tables of order r; truncation never reindexes coefficients.
class JetTable {
 public:
  struct MulTriple {
    std::uint32_t left, right, target;
  };

  /// Tables are interned and immortal; the returned pointer never dangles.
  static const JetTable* get(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  /// Number of coefficients of total degree <= d.
  int size_at_order(int d) const { return offsets_[d + 1]; }

  const std::vector<int>& exponent(int idx) const { return exponents_[idx]; }
  int degree(int idx) const { return degrees_[idx]; }
  /// Index of alpha + e_axis, or -1 when that leaves the table.
  int raise(int axis, int idx) const { return raise_[axis * size() + idx]; }
  const std::vector<MulTriple>& mul_triples() const { return mul_triples_; }
  /// factorial(alpha) = prod_i alpha_i!
  double factorial(int idx) const { return factorials_[idx]; }
  std::string key(int idx) const;  // "2,0,1"

 private:
  JetTable(int dim, int order);

  int dim_, order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<int> offsets_;  // offsets_[d] = first index of degree d
  std::vector<int> raise_;
  std::vector<double> factorials_;
  std::vector<MulTriple> mul_triples_;
};

/// Truncated multivariate Taylor expansion of a smooth function at a base
/// point.  Coefficients store the scaled derivatives d^a f / a!, so the
/// product of two jets is a plain truncated convolution.  Jets are immutable
/// value types; arithmetic requires matching dimension, order and base point.
class Jet {
 public:
  static constexpr int kDefaultOrder = 4;

  Jet() = default;
  Jet(int dim, int order, Vector point);  // the zero jet

  static Jet constant(double c, Vector point, int order = kDefaultOrder);
  /// Jet of the coordinate function x_i (i is 0-based).
  static Jet variable(int i, Vector point, int order = kDefaultOrder);
  /// Adopt a full coefficient table (graded-lex order, C(n+r, r) entries).
  static Jet with_coefficients(int dim, int order, Vector point,
                               Eigen::VectorXd coefficients);

  bool valid() const { return table_ != nullptr; }
  int dim() const { return table_->dim(); }
  int order() const { return table_->order(); }
  const Vector& point() const { return point_; }
  const JetTable& table() const { return *table_; }

  double value() const { return coef_[0]; }
  double coefficient(int idx) const { return coef_[idx]; }
  double coefficient(const std::vector<int>& alpha) const;
  /// Raw derivative d^alpha f = coefficient * alpha!.
  double derivative(const std::vector<int>& alpha) const;
  /// Coefficient of the first-order term e_i (equals df/dx_i).
  double first(int i) const;
  const Eigen::VectorXd& coefficients() const { return coef_; }

  Jet truncated(int order) const;
  /// d/dx_i as a jet of one order less.
  Jet partial(int i) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator+=(double c);
  Jet& operator-=(double c);
  Jet& operator*=(double c);
  Jet& operator/=(double c);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double c) { return a += c; }
  friend Jet operator+(double c, Jet a) { return a += c; }
  friend Jet operator-(Jet a, double c) { return a -= c; }
  friend Jet operator-(double c, const Jet& a) { return -a + c; }
  friend Jet operator*(Jet a, double c) { return a *= c; }
  friend Jet operator*(double c, Jet a) { return a *= c; }
  friend Jet operator/(Jet a, double c) { return a /= c; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

  /// Debug serialization keyed by multi-index strings ("2,0,1").
  std::string debug_json() const;

 private:
  const JetTable* table_ = nullptr;
  Vector point_;
  Eigen::VectorXd coef_;

  static void require_compatible(const Jet& a, const Jet& b);
};

/// Taylor coefficients of a univariate smooth map psi at a base value:
/// psi(base + s) = sum_k c[k] s^k + O(s^{r+1}).
struct UnivariateSeries {
  double base = 0.0;
  Eigen::VectorXd c;
  int order() const { return static_cast<int>(c.size()) - 1; }
};

UnivariateSeries exp_series(double t0, int order);
UnivariateSeries log_series(double t0, int order);
UnivariateSeries sqrt_series(double t0, int order);
UnivariateSeries sin_series(double t0, int order);
UnivariateSeries cos_series(double t0, int order);
UnivariateSeries tanh_series(double t0, int order);
UnivariateSeries abs_series(double t0, int order);
UnivariateSeries pow_series(double t0, double exponent, int order);
UnivariateSeries recip_series(double t0, int order);

/// Truncated composition psi(a): Horner evaluation of the series in
/// (a - a.value()).  Requires psi.base == a.value() and matching order.
Jet compose(const UnivariateSeries& psi, const Jet& a);

/// a^m for integer m >= 0 by binary exponentiation; valid at any base value.
Jet pow_int(const Jet& a, long m);

Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
Jet tanh(const Jet& a);
Jet abs(const Jet& a);
Jet pow(const Jet& a, double exponent);

}  // namespace carre
