#include <doctest.h>

#include <cmath>
#include <string>

#include "carre/expr.hpp"
#include "carre/sampling.hpp"
#include "oracles.hpp"

using namespace carre;

namespace {

ExprNode parsed(const std::string& src, int n) {
  ParseResult r = parse(src, n);
  REQUIRE_MESSAGE(r.ok(), "parse failed: ",
                  r.diagnostics.empty() ? "?" : r.diagnostics[0].message);
  return *r.ast;
}

// random tree for the round-trip property
ExprNode random_ast(SplitMix64& rng, int dim, int depth) {
  ExprNode node;
  const double pick = rng.uniform();
  if (depth == 0 || pick < 0.25) {
    if (rng.uniform() < 0.5) {
      node.kind = ExprKind::Constant;
      node.constant = rng.uniform(0, 4);
    } else {
      node.kind = ExprKind::Variable;
      node.variable = static_cast<int>(rng.uniform() * dim);
    }
    return node;
  }
  if (pick < 0.35) {
    node.kind = ExprKind::Unary;
    node.children.push_back(random_ast(rng, dim, depth - 1));
    return node;
  }
  if (pick < 0.80) {
    node.kind = ExprKind::Binary;
    const double op = rng.uniform();
    node.binary_op = op < 0.25   ? BinaryOp::Add
                     : op < 0.5  ? BinaryOp::Sub
                     : op < 0.75 ? BinaryOp::Mul
                     : op < 0.9  ? BinaryOp::Div
                                 : BinaryOp::Pow;
    node.children.push_back(random_ast(rng, dim, depth - 1));
    node.children.push_back(random_ast(rng, dim, depth - 1));
    return node;
  }
  node.kind = ExprKind::Call;
  const double fn = rng.uniform();
  node.call = fn < 0.2   ? BuiltinFn::Sin
              : fn < 0.4 ? BuiltinFn::Cos
              : fn < 0.6 ? BuiltinFn::Tanh
              : fn < 0.8 ? BuiltinFn::Exp
                         : BuiltinFn::Pow;
  node.children.push_back(random_ast(rng, dim, depth - 1));
  if (node.call == BuiltinFn::Pow)
    node.children.push_back(random_ast(rng, dim, depth - 1));
  return node;
}

std::string polynomial_source(const Polynomial& p) {
  std::string out;
  char buf[48];
  for (const auto& t : p.terms) {
    if (!out.empty()) out += " + ";
    std::snprintf(buf, sizeof(buf), "%.17g", t.coefficient);
    out += buf;
    for (int a = 0; a < p.dim; ++a)
      if (t.exponents[a] > 0)
        out += "*x" + std::to_string(a + 1) + "^" +
               std::to_string(t.exponents[a]);
  }
  return out;
}

}  // namespace

TEST_CASE("grammar shapes") {
  ExprNode sum = parsed("x1^2 + x2^2", 3);
  CHECK(sum.kind == ExprKind::Binary);
  CHECK(sum.binary_op == BinaryOp::Add);
  CHECK(sum.children[0].binary_op == BinaryOp::Pow);
  CHECK(sum.children[0].children[0].variable == 0);
  CHECK(sum.children[1].children[0].variable == 1);

  ExprNode t = parsed("tanh(x1 / sqrt(2))", 1);
  CHECK(t.kind == ExprKind::Call);
  CHECK(t.call == BuiltinFn::Tanh);
  CHECK(t.children[0].binary_op == BinaryOp::Div);
  CHECK(t.children[0].children[1].call == BuiltinFn::Sqrt);
}

TEST_CASE("precedence and associativity") {
  Vector p(3);
  p << 2.0, 3.0, 5.0;
  CHECK(eval_scalar(parsed("x1 + x2*x3", 3), p) == 17.0);
  CHECK(eval_scalar(parsed("-x1^2", 3), p) == -4.0);       // ^ binds tighter
  CHECK(eval_scalar(parsed("2^3^2", 3), p) == 512.0);      // right-assoc
  CHECK(eval_scalar(parsed("x3 - x2 - x1", 3), p) == 0.0); // left-assoc
  CHECK(eval_scalar(parsed("x1/x2/x2", 3), p) ==
        doctest::Approx(2.0 / 9.0));
  CHECK(eval_scalar(parsed("2^-1", 3), p) == 0.5);
}

TEST_CASE("diagnostics carry offsets") {
  ParseResult r = parse("x4", 3);
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].offset == 0);
  CHECK(r.diagnostics[0].message.find("out of range") != std::string::npos);

  r = parse("x1 + y2", 3);
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].offset == 5);
  CHECK(r.diagnostics[0].message.find("unknown identifier") !=
        std::string::npos);

  r = parse("sin(x1, x2)", 3);
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].message.find("expects 1 argument") !=
        std::string::npos);

  r = parse("pow(x1)", 3);
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].message.find("expects 2 arguments") !=
        std::string::npos);

  r = parse("(x1 + (x2)", 3);
  REQUIRE(!r.ok());
  CHECK(r.diagnostics[0].message.find("unbalanced") != std::string::npos);
  CHECK(r.diagnostics[0].offset == 0);

  r = parse("2 x1", 3);  // no implicit multiplication
  REQUIRE(!r.ok());

  r = parse("", 3);
  REQUIRE(!r.ok());

  for (const auto& d : r.diagnostics) CHECK(d.offset <= 4u);
}

TEST_CASE("the F sub-language maps s to x1") {
  ParseOptions opt;
  opt.s_is_x1 = true;
  ParseResult r = parse("s - s^3", 1, opt);
  REQUIRE(r.ok());
  Vector p(1);
  p << 2.0;
  CHECK(eval_scalar(*r.ast, p) == -6.0);
  CHECK(!parse("s - s^3", 1).ok());  // plain language rejects 's'
}

TEST_CASE("parsing is total on arbitrary bytes") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    std::string bytes;
    const int len = static_cast<int>(rng.uniform() * 24);
    for (int i = 0; i < len; ++i)
      bytes.push_back(static_cast<char>(rng.next() % 256));
    ParseResult r = parse(bytes, 3);
    if (!r.ok()) {
      REQUIRE(!r.diagnostics.empty());
      for (const auto& d : r.diagnostics) CHECK(d.offset <= bytes.size());
    }
  }
}

TEST_CASE("pretty-print round trip") {
  SplitMix64 rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    ExprNode ast = random_ast(rng, 3, 4);
    std::string printed = to_string(ast);
    ParseResult r = parse(printed, 3);
    REQUIRE_MESSAGE(r.ok(), "failed to reparse: ", printed);
    CHECK_MESSAGE(structurally_equal(ast, *r.ast), "round trip changed: ",
                  printed, " -> ", to_string(*r.ast));
  }
}

TEST_CASE("eval_jet reference values") {
  {
    Vector p(2);
    p << 2.0, 3.0;
    Jet j = eval_jet(parsed("x1*x2", 2), p, 1);
    CHECK(j.value() == 6.0);
    CHECK(j.first(0) == 3.0);
    CHECK(j.first(1) == 2.0);
  }
  {
    Vector p(1);
    p << 0.0;
    Jet j = eval_jet(parsed("tanh(x1/sqrt(2))", 1), p, 2);
    CHECK(j.value() == doctest::Approx(0.0));
    CHECK(j.first(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(j.coefficient({2}) == doctest::Approx(0.0));
  }
  {
    Vector p(2);
    p << 0.0, 0.0;
    ExprNode e = parsed("exp(x1+x2)", 2);
    Jet j = eval_jet(e, p, 3);
    const JetTable& table = j.table();
    for (int idx = 0; idx < table.size(); ++idx)
      CHECK(j.coefficient(idx) ==
            doctest::Approx(1.0 / table.factorial(idx)).epsilon(1e-12));
    // cross-check order-3 coefficients against finite differences
    auto fn = [&e](const Vector& x) { return eval_scalar(e, x); };
    for (int idx = 0; idx < table.size(); ++idx) {
      double fd = oracle::dmulti(fn, p, table.exponent(idx), 1e-2);
      CHECK(j.derivative(table.exponent(idx)) ==
            doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("eval domain violations") {
  Vector zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(eval_jet(parsed("log(x1)", 1), zero, 1), EvalError);
  CHECK_THROWS_AS(eval_jet(parsed("sqrt(-1 + x1)", 1), zero, 1), EvalError);
  CHECK_THROWS_AS(eval_jet(parsed("abs(x1)", 1), zero, 1), EvalError);
  CHECK_NOTHROW(eval_jet(parsed("abs(x1)", 1), zero, 0));
  // pow with natural exponent stays polynomial through 0
  CHECK_NOTHROW(eval_jet(parsed("pow(x1, 2)", 1), zero, 2));
  CHECK(eval_jet(parsed("pow(x1, 2)", 1), zero, 2).coefficient({2}) == 1.0);
}

TEST_CASE("200 random polynomial expressions match divided differences") {
  SplitMix64 rng(777);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + static_cast<int>(rng.uniform() * 3.0);
    Polynomial poly = random_polynomial(dim, 3, rng, 2.0);
    ParseResult r = parse(polynomial_source(poly), dim);
    REQUIRE(r.ok());
    Vector x(dim);
    for (int a = 0; a < dim; ++a) x[a] = rng.uniform(-1.5, 1.5);
    Jet jet = eval_jet(*r.ast, x, 3);
    auto fn = [&](const Vector& y) { return eval_scalar(*r.ast, y); };
    const JetTable& table = jet.table();
    for (int idx = 0; idx < table.size(); ++idx) {
      const double expected = oracle::dmulti(fn, x, table.exponent(idx), 0.1);
      const double got = jet.derivative(table.exponent(idx));
      const double scale = std::max({1.0, std::abs(expected), std::abs(got)});
      CHECK(std::abs(got - expected) / scale < 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}
