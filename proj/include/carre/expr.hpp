#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "carre/smooth_function.hpp"

namespace carre {

// The function-definition language: infix expressions over variables
// x1..xn, decimal literals with optional exponent, and the closed builtin
// set {sin, cos, exp, log, tanh, sqrt, abs, pow}.  Precedence is
// ^  >  unary -  >  * /  >  + -, with ^ right-associative.  There is no
// implicit multiplication, so every diagnostic has an unambiguous offset.

enum class ExprKind { Constant, Variable, Unary, Binary, Call };
enum class UnaryOp { Negate };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class BuiltinFn { Sin, Cos, Exp, Log, Tanh, Sqrt, Abs, Pow };

struct ExprNode {
  ExprKind kind = ExprKind::Constant;
  double constant = 0.0;
  int variable = 0;  // 0-based
  UnaryOp unary_op = UnaryOp::Negate;
  BinaryOp binary_op = BinaryOp::Add;
  BuiltinFn call = BuiltinFn::Sin;
  std::vector<ExprNode> children;
};

struct ParseDiagnostic {
  enum class Severity { Error, Warning };
  std::size_t offset = 0;
  std::string message;
  Severity severity = Severity::Error;
};

struct ParseResult {
  std::optional<ExprNode> ast;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const { return ast.has_value(); }
};

struct ParseOptions {
  /// Accept the one-variable sub-language with "s" for x1 (requires n = 1);
  /// used for the nonlinearity F.
  bool s_is_x1 = false;
};

/// Total: any byte string yields a tree or diagnostics, never a throw.
ParseResult parse(std::string_view source, int dimension,
                  const ParseOptions& options = {});

std::string to_string(const ExprNode& node);
bool structurally_equal(const ExprNode& a, const ExprNode& b);
/// True when the subtree contains no variable node.
bool is_constant_expr(const ExprNode& node);

Jet eval_jet(const ExprNode& node, const Vector& point, int order);
double eval_scalar(const ExprNode& node, const Vector& point);

/// Wraps a parsed tree as a SmoothFunction of the given dimension.
SmoothFunction make_function(ExprNode ast, int dimension,
                             std::string name = {});

}  // namespace carre
