#include <doctest.h>

#include <cmath>

#include "carre/expr.hpp"
#include "carre/geometries.hpp"
#include "carre/verify.hpp"
#include "oracles.hpp"

using namespace carre;

namespace {

SmoothFunction fn(const std::string& src, int n) {
  ParseResult r = parse(src, n);
  REQUIRE(r.ok());
  return make_function(*r.ast, n);
}

SmoothFunction nonlinearity(const std::string& src) {
  ParseOptions opt;
  opt.s_is_x1 = true;
  ParseResult r = parse(src, 1, opt);
  REQUIRE(r.ok());
  return make_function(*r.ast, 1, src);
}

MarkovTriple geometry(GeometryKind kind, int dimension = 2, int alpha = 1) {
  GeometrySpec spec;
  spec.kind = kind;
  spec.dimension = dimension;
  spec.alpha = alpha;
  return make_geometry(spec);
}

ProblemInstance tanh_instance(double half_width = 10.0, int nodes = 1024) {
  ProblemInstance p;
  p.triple = geometry(GeometryKind::EuclideanWeighted, 1);
  p.u = fn("tanh(x1/sqrt(2))", 1);
  p.F = nonlinearity("s - s^3");
  p.grid = build_grid(Box::cube(1, -half_width, half_width), {nodes},
                      QuadratureRule::GaussLegendre);
  return p;
}

}  // namespace

TEST_CASE("residual: exact solutions and constants") {
  ProblemInstance p = tanh_instance();
  auto pts = halton_points(p.grid.box(), 100, 11);
  auto bumps = bump_lattice(p.grid.box(), {6});
  ResidualReport rep = residual(p, pts, bumps);
  CHECK(rep.pointwise_sup < 1e-12);
  CHECK(rep.weak_sup < 1e-9);

  ProblemInstance c;
  c.triple = geometry(GeometryKind::OrnsteinUhlenbeck, 2);
  c.u = SmoothFunction::constant(2, 1.0);
  c.F = nonlinearity("s - s^3");  // F(1) = 0
  c.grid = build_grid(Box::cube(2, -5.0, 5.0), {32, 32},
                      QuadratureRule::GaussLegendre)
               .with_weight(c.triple.eta());
  ResidualReport crep =
      residual(c, halton_points(c.grid.box(), 50, 12), bump_lattice(c.grid.box(), {3, 3}));
  CHECK(crep.pointwise_sup < 1e-12);
  CHECK(crep.weak_sup < 1e-10);
}

TEST_CASE("residual on grushin equals sup of the sub-laplacian") {
  ProblemInstance p;
  p.triple = geometry(GeometryKind::Grushin, 2, 1);
  SplitMix64 rng(31);
  Polynomial poly = random_polynomial(2, 3, rng);
  p.u = poly.function();
  p.grid = build_grid(Box::cube(2, -2.0, 2.0), {32, 32},
                      QuadratureRule::GaussLegendre);
  auto pts = halton_points(p.grid.box(), 80, 13);
  ResidualReport rep = residual(p, pts, {});
  double sup = 0.0;
  SmoothFunction delta_u = p.triple.delta_z_function(p.u);
  for (const Vector& x : pts) sup = std::max(sup, std::abs(delta_u(x)));
  CHECK(rep.pointwise_sup == doctest::Approx(sup).epsilon(1e-10));
}

TEST_CASE("stability spectrum basics") {
  // F == 0: the form is pure Gamma, never negative
  ProblemInstance p;
  p.triple = geometry(GeometryKind::EuclideanWeighted, 1);
  p.u = SmoothFunction::constant(1, 0.0);
  p.grid = build_grid(Box::cube(1, -5.0, 5.0), {512},
                      QuadratureRule::GaussLegendre);
  auto basis = bump_lattice(p.grid.box(), {40});
  SpectrumReport rep = stability_spectrum(p, basis, 1e-8);
  CHECK(rep.stable);
  CHECK(rep.smallest_eigenvalues[0] >= -1e-8);
  CHECK(rep.matrix_dim == 40);

  // duplicated bumps make the mass matrix singular: a configuration error
  auto degenerate = basis;
  degenerate.push_back(basis.front());
  CHECK_THROWS_AS(stability_spectrum(p, degenerate, 1e-8),
                  std::runtime_error);

  // a bump outside the box is rejected up front
  Bump outside;
  outside.center = Vector::Constant(1, 5.5);
  outside.radius = Vector::Constant(1, 1.0);
  CHECK_THROWS_AS(stability_spectrum(p, {outside}, 1e-8),
                  std::invalid_argument);
}

TEST_CASE("poincare certificate on the tanh instance") {
  ProblemInstance p = tanh_instance();
  auto pts = halton_points(p.grid.box(), 100, 14);
  auto basis = bump_lattice(p.grid.box(), {100});
  ResidualReport res = residual(p, pts, {});
  SpectrumReport spec = stability_spectrum(p, basis, 1e-3);
  SplitMix64 rng(15);
  auto phis = random_bumps(p.grid.box(), 20, rng);
  InequalityReport rep =
      poincare_certificate(p, phis, 0.0, 1e-4, &res, &spec);
  CHECK(rep.hypothesis_ok);
  CHECK(rep.holds);
  CHECK(rep.worst_margin >= -1e-4);
  CHECK(std::abs(rep.lhs_at_worst) < 1e-5);

  // constant solutions: both sides vanish
  ProblemInstance c;
  c.triple = geometry(GeometryKind::EuclideanWeighted, 1);
  c.u = SmoothFunction::constant(1, 0.5);
  c.F = nonlinearity("s - 0.5");  // F(0.5) = 0? F(s) = s - 0.5 -> F(0.5) = 0
  c.grid = p.grid;
  ResidualReport cres = residual(c, pts, {});
  SpectrumReport cspec = stability_spectrum(c, basis, 1.5);
  InequalityReport crep =
      poincare_certificate(c, phis, 0.0, 1e-6, &cres, &cspec);
  CHECK(std::abs(crep.lhs_at_worst) < 1e-12);
  CHECK(std::abs(crep.worst_margin) < 1e-10);

  // a non-solution gets a hypothesis warning, not a verdict
  ProblemInstance bad = p;
  bad.u = fn("x1^2", 1);
  ResidualReport bad_res = residual(bad, pts, {});
  InequalityReport bad_rep =
      poincare_certificate(bad, phis, 0.0, 1e-4, &bad_res, &spec);
  CHECK(!bad_rep.hypothesis_ok);
  CHECK(!bad_rep.hypothesis_warning.empty());
}

TEST_CASE("cd_check margins") {
  {
    MarkovTriple T = geometry(GeometryKind::OrnsteinUhlenbeck, 2);
    std::vector<SmoothFunction> fs{fn("x1*x2", 2)};
    auto pts = halton_points(Box::cube(2, -2.0, 2.0), 60, 16);
    InequalityReport rep = cd_check(T, 1.0, fs, pts, 1e-8);
    CHECK(rep.holds);
    // m1 = Gamma2 - Gamma = |hess|^2 = 2 for f = x1 x2
    for (const auto& row : rep.table.rows)
      CHECK(row[0] == doctest::Approx(2.0).epsilon(1e-8));
  }
  {
    MarkovTriple T = geometry(GeometryKind::EuclideanWeighted, 2);
    SplitMix64 rng(17);
    std::vector<SmoothFunction> fs;
    for (int i = 0; i < 10; ++i)
      fs.push_back(random_polynomial(2, 3, rng).function("f" + std::to_string(i)));
    auto pts = halton_points(Box::cube(2, -2.0, 2.0), 50, 18);
    InequalityReport rep = cd_check(T, 0.0, fs, pts, 1e-8);
    CHECK(rep.holds);
    CHECK(rep.violations == 0);
  }
  {
    // Heisenberg: f = y - xt/2 has Gamma2(f)(0) = -1 < 0
    MarkovTriple T = geometry(GeometryKind::Heisenberg);
    std::vector<SmoothFunction> fs{fn("x2 - x1*x3/2", 3)};
    std::vector<Vector> pts{Vector::Zero(3)};
    InequalityReport rep = cd_check(T, 0.0, fs, pts, 1e-8);
    CHECK(!rep.holds);
    CHECK(rep.violations > 0);
    // m1 = Gamma2(f)(0) = -1 and m2 = 4 Gamma (m1) - Gamma(Gamma(f)) = -4
    CHECK(rep.lhs_at_worst == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(rep.worst_margin == doctest::Approx(-4.0).epsilon(1e-8));
  }
}

TEST_CASE("bochner identities on Carnot groups") {
  {
    MarkovTriple T = geometry(GeometryKind::Heisenberg);
    SmoothFunction u = fn("x1^2*x2 + x3", 3);
    auto pts = halton_points(Box::cube(3, -2.0, 2.0), 25, 19);
    IdentityReport rep = bochner_carnot_check(T, u, pts, 1e-8);
    CHECK(rep.all_pass());
    CHECK(rep.max_residual() < 1e-8);

    SmoothFunction x = fn("x1", 3);
    IdentityReport xtrivial = bochner_carnot_check(T, x, pts, 1e-10);
    CHECK(xtrivial.all_pass());
  }
  {
    MarkovTriple T = geometry(GeometryKind::Engel);
    SplitMix64 rng(20);
    auto pts = halton_points(Box::cube(4, -1.5, 1.5), 50, 21);
    for (int trial = 0; trial < 3; ++trial) {
      SmoothFunction u = random_polynomial(4, 3, rng).function();
      IdentityReport rep = bochner_carnot_check(T, u, pts, 1e-7);
      CHECK_MESSAGE(rep.all_pass(), "residual ", rep.max_residual());
    }
  }
  CHECK_THROWS_AS(
      bochner_carnot_check(geometry(GeometryKind::Grushin, 2, 1),
                           fn("x1", 2), {Vector::Zero(2)}, 1e-8),
      std::invalid_argument);
}

TEST_CASE("grushin identities") {
  {
    MarkovTriple T = geometry(GeometryKind::Grushin, 2, 1);
    SplitMix64 rng(22);
    auto pts = halton_points(Box::cube(2, -2.0, 2.0), 30, 23);
    for (int trial = 0; trial < 5; ++trial) {
      SmoothFunction u = random_polynomial(2, 3, rng).function();
      IdentityReport rep = grushin_gamma2_check(T, u, nullptr, pts, 1e-9,
                                                nullptr);
      for (const auto& entry : rep.entries)
        if (entry.name.find("solution-gated") == std::string::npos)
          CHECK_MESSAGE(entry.pass, entry.name, " residual ",
                        entry.max_residual);
    }
    // u = y: all routes give Gamma2 = 1 at alpha = 1
    SmoothFunction y = fn("x2", 2);
    Vector x(2);
    x << 0.7, -0.4;
    CHECK(T.gamma2(y, x) == doctest::Approx(1.0).epsilon(1e-10));
    // u constant: everything vanishes
    IdentityReport crep = grushin_gamma2_check(
        T, SmoothFunction::constant(2, 2.0), nullptr, pts, 1e-12, nullptr);
    CHECK(crep.all_pass());
  }
  {
    // alpha = 2: the definition route gives alpha(2 alpha - 1) x^{2a-2} for
    // u = y, and the displayed decomposition picks up the W'' correction
    MarkovTriple T = geometry(GeometryKind::Grushin, 2, 2);
    SmoothFunction y = fn("x2", 2);
    Vector x(2);
    x << 0.8, 0.3;
    CHECK(T.gamma2(y, x) ==
          doctest::Approx(6.0 * x[0] * x[0]).epsilon(1e-10));
    std::vector<Vector> pts{x};
    IdentityReport rep = grushin_gamma2_check(T, y, nullptr, pts, 1e-9,
                                              nullptr);
    const IdentityEntry* display = nullptr;
    for (const auto& e : rep.entries)
      if (e.name == "gamma2 display") display = &e;
    REQUIRE(display != nullptr);
    CHECK(display->max_residual ==
          doctest::Approx(2.0 * x[0] * x[0]).epsilon(1e-9));
    CHECK(!display->note.empty());
  }
  {
    // manufactured solution gates the equation-dependent identities
    ProblemInstance p;
    p.triple = geometry(GeometryKind::Grushin, 2, 1);
    p.u = fn("tanh(x1/sqrt(2))", 2);
    p.F = nonlinearity("s - s^3");
    p.grid = build_grid(Box::cube(2, -6.0, 6.0), {64, 8},
                        QuadratureRule::GaussLegendre);
    auto pts = halton_points(p.grid.box(), 40, 24);
    ResidualReport res = residual(p, pts, {});
    CHECK(res.pointwise_sup < 1e-10);
    IdentityReport rep =
        grushin_gamma2_check(p.triple, p.u, &p.F, pts, 1e-8, &res);
    bool saw_gated = false;
    for (const auto& entry : rep.entries)
      if (entry.name.find("solution-gated:") != std::string::npos) {
        saw_gated = true;
        CHECK_MESSAGE(entry.pass, entry.name, " residual ",
                      entry.max_residual);
      }
    CHECK(saw_gated);
  }
  CHECK_THROWS_AS(grushin_gamma2_check(geometry(GeometryKind::Heisenberg),
                                       fn("x1", 3), nullptr,
                                       {Vector::Zero(3)}, 1e-8, nullptr),
                  std::invalid_argument);
}

TEST_CASE("filiform level-set identity") {
  MarkovTriple T = geometry(GeometryKind::Filiform, 3);
  {
    // u = x1: nu = (1, 0), h = p = 0, both sides vanish
    SmoothFunction u = fn("x1", 3);
    auto pts = halton_points(Box::cube(3, -2.0, 2.0), 10, 25);
    IdentityReport rep = filiform_levelset_check(T, u, pts, 1e-12);
    CHECK(rep.all_pass());
    for (const auto& row : rep.table.rows) {
      CHECK(std::abs(row[1]) < 1e-12);  // h
      CHECK(std::abs(row[2]) < 1e-12);  // p
    }
  }
  {
    SplitMix64 rng(26);
    auto pts = halton_points(Box::cube(3, -2.0, 2.0), 30, 27);
    for (int trial = 0; trial < 5; ++trial) {
      SmoothFunction u = random_polynomial(3, 3, rng, 4.0).function();
      IdentityReport rep = filiform_levelset_check(T, u, pts, 1e-6);
      CHECK_MESSAGE(rep.all_pass(), "residual ", rep.max_residual());
    }
  }
  {
    // points below the floor are skipped and counted
    SmoothFunction u = fn("x1^2/2", 3);
    std::vector<Vector> pts;
    Vector on_line = Vector::Zero(3);
    pts.push_back(on_line);  // Z1 u = x1 = 0 here
    Vector off(3);
    off << 1.0, 0.5, 0.2;
    pts.push_back(off);
    IdentityReport rep = filiform_levelset_check(T, u, pts, 1e-8);
    CHECK(rep.entries[0].note.find("1 points skipped") != std::string::npos);
    CHECK(rep.table.points.size() == 1);
  }
  CHECK_THROWS_AS(
      filiform_levelset_check(geometry(GeometryKind::Heisenberg), fn("x1", 3),
                              {Vector::Zero(3)}, 1e-8),
      std::invalid_argument);
}

TEST_CASE("rigidity diagnostics") {
  {
    // constant solution on the OU triple: every diagnostic vanishes
    ProblemInstance p;
    p.triple = geometry(GeometryKind::OrnsteinUhlenbeck, 2);
    p.u = SmoothFunction::constant(2, 1.0);
    p.F = nonlinearity("s - s^3");
    p.grid = build_grid(Box::cube(2, -6.0, 6.0), {48, 48},
                        QuadratureRule::GaussLegendre)
                 .with_weight(p.triple.eta());
    auto pts = halton_points(p.grid.box(), 50, 28);
    RigidityReport rep = rigidity_report(p, 1.0, pts);
    CHECK(rep.gamma_integral == doctest::Approx(0.0));
    CHECK(rep.gamma_sup == doctest::Approx(0.0));
    CHECK(rep.k0_identity_sup == doctest::Approx(0.0));
    CHECK(rep.hypothesis_consistent);
  }
  {
    ProblemInstance p = tanh_instance();
    auto pts = halton_points(p.grid.box(), 120, 29);
    RigidityReport k0 = rigidity_report(p, 0.0, pts);
    CHECK(k0.k0_identity_sup < 1e-6);  // the 1D cancellation
    CHECK(k0.hypothesis_consistent);
    CHECK(k0.gamma_integral > 0.0);

    RigidityReport k1 = rigidity_report(p, 1.0, pts);
    CHECK(!k1.hypothesis_consistent);  // the flat line is not CD(1,inf)-tight
    CHECK(k1.lower_bound_violations > 0);
    CHECK(k1.lower_bound_worst_margin < 0.0);
  }
}
