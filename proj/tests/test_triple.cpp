#include <doctest.h>

#include <cmath>

#include "carre/expr.hpp"
#include "carre/geometries.hpp"
#include "carre/sampling.hpp"
#include "carre/triple.hpp"
#include "oracles.hpp"

using namespace carre;

namespace {

SmoothFunction fn(const std::string& src, int n) {
  ParseResult r = parse(src, n);
  REQUIRE(r.ok());
  return make_function(*r.ast, n);
}

MarkovTriple heisenberg() {
  GeometrySpec spec;
  spec.kind = GeometryKind::Heisenberg;
  return make_geometry(spec);
}

MarkovTriple euclidean(int n) {
  GeometrySpec spec;
  spec.kind = GeometryKind::EuclideanWeighted;
  spec.dimension = n;
  return make_geometry(spec);
}

MarkovTriple ornstein_uhlenbeck(int n) {
  GeometrySpec spec;
  spec.kind = GeometryKind::OrnsteinUhlenbeck;
  spec.dimension = n;
  return make_geometry(spec);
}

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

// gamma through finite differences of scalar evaluations only
double gamma_fd(const MarkovTriple& T, const SmoothFunction& f,
                const SmoothFunction& g, const Vector& x) {
  double sum = 0.0;
  for (const VectorField& Z : T.frame()) {
    double zf = 0.0, zg = 0.0;
    for (int i = 0; i < T.dim(); ++i) {
      const double zi = Z.coefficient(i)(x);
      zf += zi * oracle::d1([&](const Vector& y) { return f(y); }, x, i, 1e-3);
      zg += zi * oracle::d1([&](const Vector& y) { return g(y); }, x, i, 1e-3);
    }
    sum += zf * zg;
  }
  return sum;
}

}  // namespace

TEST_CASE("gamma on the Heisenberg group") {
  MarkovTriple T = heisenberg();
  SmoothFunction f = fn("x1^2 + x2^2", 3);
  Vector p = vec({1.0, 1.0, 0.0});
  CHECK(T.gamma(f, f, p) == doctest::Approx(8.0));
  CHECK(T.gamma(f, f, p) == doctest::Approx(gamma_fd(T, f, f, p)).epsilon(1e-6));

  SmoothFunction one = SmoothFunction::constant(3, 1.0);
  SmoothFunction g = fn("x3*x1 - x2", 3);
  SplitMix64 rng(5);
  for (int i = 0; i < 10; ++i) {
    Vector x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    CHECK(T.gamma(one, g, x) == doctest::Approx(0.0));
    // square identity
    SmoothFunction f2(3, [f](const Vector& y, int order) {
      Jet j = f.jet(y, order);
      return j * j;
    });
    SmoothFunction g2(3, [g](const Vector& y, int order) {
      Jet j = g.jet(y, order);
      return j * j;
    });
    CHECK(T.gamma(f2, g2, x) ==
          doctest::Approx(4.0 * f(x) * g(x) * T.gamma(f, g, x)).epsilon(1e-9));
  }
}

TEST_CASE("operator L") {
  {
    MarkovTriple T = euclidean(2);
    SmoothFunction f = fn("x1^2 + x2^2", 2);
    SplitMix64 rng(6);
    for (int i = 0; i < 5; ++i) {
      Vector x = vec({rng.uniform(-3, 3), rng.uniform(-3, 3)});
      CHECK(T.operator_L(f, x) == doctest::Approx(4.0));
    }
  }
  {
    MarkovTriple T = ornstein_uhlenbeck(2);
    SmoothFunction one = SmoothFunction::constant(2, 1.0);
    SmoothFunction x1 = fn("x1", 2);
    SplitMix64 rng(7);
    for (int i = 0; i < 5; ++i) {
      Vector x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
      CHECK(T.operator_L(one, x) == doctest::Approx(0.0));
      CHECK(T.operator_L(x1, x) == doctest::Approx(-x[0]));
    }
    // finite-difference cross-check of L f = lap f - x . grad f
    SmoothFunction f = fn("sin(x1)*x2 + x1^3", 2);
    Vector x = vec({0.4, -1.2});
    const double lap = oracle::dmulti([&](const Vector& y) { return f(y); }, x,
                                      {2, 0}, 1e-2) +
                       oracle::dmulti([&](const Vector& y) { return f(y); }, x,
                                      {0, 2}, 1e-2);
    const double drift =
        -x[0] * oracle::d1([&](const Vector& y) { return f(y); }, x, 0, 1e-3) -
        x[1] * oracle::d1([&](const Vector& y) { return f(y); }, x, 1, 1e-3);
    CHECK(T.operator_L(f, x) == doctest::Approx(lap + drift).epsilon(1e-6));
  }
}

TEST_CASE("gamma2 against the flat-case oracle") {
  SmoothFunction f = fn("x1*x2", 2);
  {
    MarkovTriple T = euclidean(2);
    Vector x = vec({0.7, -0.3});
    CHECK(T.gamma2(f, x) == doctest::Approx(2.0).epsilon(1e-10));
  }
  {
    MarkovTriple T = ornstein_uhlenbeck(2);
    SplitMix64 rng(8);
    for (int i = 0; i < 5; ++i) {
      Vector x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
      CHECK(T.gamma2(f, x) ==
            doctest::Approx(2.0 + x[0] * x[0] + x[1] * x[1]).epsilon(1e-9));
    }
    SmoothFunction c = SmoothFunction::constant(2, 3.5);
    CHECK(T.gamma2(c, vec({0.2, 0.4})) == doctest::Approx(0.0));
  }
  // |hess f|^2 (+ |grad f|^2 for the Gaussian weight) on random polynomials
  SplitMix64 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    Polynomial p = random_polynomial(2, 3, rng);
    SmoothFunction g = p.function();
    Vector x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Jet j = p.jet(x, 2);
    double hess2 = 0.0, grad2 = 0.0;
    for (int a = 0; a < 2; ++a) {
      grad2 += j.first(a) * j.first(a);
      for (int b = 0; b < 2; ++b) {
        std::vector<int> alpha(2, 0);
        ++alpha[a];
        ++alpha[b];
        const double h = j.derivative(alpha);
        hess2 += h * h;
      }
    }
    CHECK(euclidean(2).gamma2(g, x) == doctest::Approx(hess2).epsilon(1e-8));
    CHECK(ornstein_uhlenbeck(2).gamma2(g, x) ==
          doctest::Approx(hess2 + grad2).epsilon(1e-8));
    // symmetry of gamma2
    Polynomial q = random_polynomial(2, 3, rng);
    SmoothFunction h = q.function();
    MarkovTriple T = ornstein_uhlenbeck(2);
    CHECK(T.gamma2(g, h, x) == doctest::Approx(T.gamma2(h, g, x)).epsilon(1e-9));
  }
}

TEST_CASE("counterexample operators via polarization") {
  GeneralOperator dal = GeneralOperator::dalembert();
  SmoothFunction y = fn("x2", 2);
  SplitMix64 rng(10);
  for (int i = 0; i < 5; ++i) {
    Vector x = vec({rng.uniform(-2, 2), rng.uniform(-2, 2)});
    CHECK(dal.gamma_from_L(y, y, x) == doctest::Approx(-1.0).epsilon(1e-10));
  }
  // gamma for the d'Alembert operator is f_x^2 - f_y^2
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial p = random_polynomial(2, 3, rng);
    SmoothFunction f = p.function();
    Vector x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    Jet j = p.jet(x, 1);
    const double expected = j.first(0) * j.first(0) - j.first(1) * j.first(1);
    CHECK(dal.gamma_from_L(f, f, x) == doctest::Approx(expected).epsilon(1e-9));
  }

  GeneralOperator ddx = GeneralOperator::derivative_1d();
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial p = random_polynomial(1, 4, rng);
    SmoothFunction f = p.function();
    Vector x = vec({rng.uniform(-1, 1)});
    CHECK(std::abs(ddx.gamma_from_L(f, f, x)) < 1e-9);
  }

  // divergence and nondivergence forms share the carre du champ
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<SmoothFunction> a;
    Polynomial p00 = random_polynomial(2, 2, rng);
    Polynomial p01 = random_polynomial(2, 2, rng);
    Polynomial p11 = random_polynomial(2, 2, rng);
    a.push_back(p00.function());
    a.push_back(p01.function());
    a.push_back(p01.function());
    a.push_back(p11.function());
    GeneralOperator div_form = GeneralOperator::divergence_form(2, a);
    GeneralOperator nondiv_form = GeneralOperator::nondivergence_form(2, a);
    Polynomial pf = random_polynomial(2, 3, rng);
    Polynomial pg = random_polynomial(2, 3, rng);
    SmoothFunction f = pf.function(), g = pg.function();
    Vector x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    CHECK(div_form.gamma_from_L(f, g, x) ==
          doctest::Approx(nondiv_form.gamma_from_L(f, g, x)).epsilon(1e-8));
  }
}

TEST_CASE("polarization route agrees with the frame gamma") {
  MarkovTriple T = heisenberg();
  GeneralOperator op = GeneralOperator::from_triple(T);
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial pf = random_polynomial(3, 3, rng);
    Polynomial pg = random_polynomial(3, 3, rng);
    SmoothFunction f = pf.function(), g = pg.function();
    Vector x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    CHECK(T.gamma(f, g, x) ==
          doctest::Approx(op.gamma_from_L(f, g, x)).epsilon(1e-9));
  }
}

TEST_CASE("gamma_sqrt_reg") {
  {
    // 1D flat: value = (u'')^2 (u')^2 / ((u')^2 + eps)
    MarkovTriple T = euclidean(1);
    SmoothFunction u = fn("tanh(x1/sqrt(2))", 1);
    for (double base : {0.3, -0.9, 1.4}) {
      Vector x = vec({base});
      Jet j = u.jet(x, 2);
      const double du = j.first(0);
      const double ddu = j.derivative({2});
      for (double eps : {1e-4, 1e-8}) {
        const double expected = ddu * ddu * du * du / (du * du + eps);
        CHECK(T.gamma_sqrt_reg(u, x, eps) ==
              doctest::Approx(expected).epsilon(1e-9));
      }
      // monotone nondecreasing as epsilon decreases
      CHECK(T.gamma_sqrt_reg(u, x, 1e-8) >= T.gamma_sqrt_reg(u, x, 1e-4));
    }
    SmoothFunction c = SmoothFunction::constant(1, 2.0);
    CHECK(T.gamma_sqrt_reg(c, vec({0.1}), 1e-6) == doctest::Approx(0.0));
  }
  {
    // bounded by Gamma(Gamma(u)) / (4 Gamma(u)) where Gamma(u) > 0
    MarkovTriple T = heisenberg();
    SplitMix64 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
      Polynomial p = random_polynomial(3, 3, rng);
      SmoothFunction u = p.function();
      Vector x =
          vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
      const double gu = T.gamma(u, u, x);
      if (gu < 1e-8) continue;
      SmoothFunction gufn = T.gamma_function(u, u);
      const double gg = T.gamma(gufn, gufn, x);
      CHECK(T.gamma_sqrt_reg(u, x, 1e-6) <= gg / (4.0 * gu) + 1e-12);
    }
  }
}

TEST_CASE("two evaluation paths of the curvature inequality agree") {
  MarkovTriple T = heisenberg();
  SplitMix64 rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    Polynomial p = random_polynomial(3, 3, rng);
    SmoothFunction u = p.function();
    Vector x = vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double gu = T.gamma(u, u, x);
    const double g2 = T.gamma2(u, x);
    SmoothFunction gufn = T.gamma_function(u, u);
    const double gg = T.gamma(gufn, gufn, x);
    const double eps = 1e-9;
    const double path1 = 4.0 * gu * (g2 - gg / (4.0 * (gu + eps)));
    const double path2 =
        4.0 * gu * g2 - 4.0 * gu * gg / (4.0 * (gu + eps));
    CHECK(path1 == doctest::Approx(path2).epsilon(1e-8));
  }
}

TEST_CASE("validate_axioms on Heisenberg polynomial samples") {
  MarkovTriple T = heisenberg();
  SplitMix64 rng(14);
  AxiomSamples samples;
  for (int i = 0; i < 8; ++i)
    samples.functions.push_back(
        random_polynomial(3, 3, rng).function("f" + std::to_string(i)));
  Box box = Box::cube(3, -1.5, 1.5);
  samples.points = halton_points(box, 60, 99);
  Bump bump;
  bump.center = vec({0.0, 0.0, 0.0});
  bump.radius = vec({1.2, 1.2, 1.2});
  bump.power = 4;
  bump.tensor = true;
  samples.compact_support.push_back(bump);
  IdentityReport report = validate_axioms(T, samples, 1e-7);
  for (const auto& entry : report.entries)
    CHECK_MESSAGE(entry.pass, entry.name, ": residual ", entry.max_residual);
  CHECK(report.max_residual() < 1e-7);
}

TEST_CASE("d'Alembert operator fails positivity with witness f = y") {
  GeneralOperator dal = GeneralOperator::dalembert();
  std::vector<SmoothFunction> fs{fn("x2", 2), fn("x1", 2)};
  std::vector<Vector> pts = halton_points(Box::cube(2, -1, 1), 20, 3);
  IdentityReport report = validate_operator_positivity(dal, fs, pts, 1e-9);
  REQUIRE(report.entries.size() == 1);
  CHECK(!report.entries[0].pass);
  CHECK(report.entries[0].witness_label == "x2");
  CHECK(report.entries[0].max_residual == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("constant detection in the nondegeneracy entry") {
  MarkovTriple T = euclidean(2);
  AxiomSamples samples;
  samples.functions.push_back(SmoothFunction::constant(2, 7.0).named("c7"));
  samples.functions.push_back(fn("x1 + x2", 2));
  samples.points = halton_points(Box::cube(2, -1, 1), 30, 4);
  IdentityReport report = validate_axioms(T, samples, 1e-7);
  const IdentityEntry* entry = nullptr;
  for (const auto& e : report.entries)
    if (e.name.find("nondegeneracy") != std::string::npos) entry = &e;
  REQUIRE(entry != nullptr);
  CHECK(entry->pass);
  CHECK(entry->note.find("c7 constant within tolerance") != std::string::npos);
}

TEST_CASE("cutoff certification against the 1/k bound") {
  MarkovTriple T = euclidean(2);
  SmoothFunction d = euclidean_distance_surrogate(2);
  Cutoff cutoff = make_cutoff(16, d);
  Box box = Box::cube(2, -3.0 * cutoff.plateau_radius,
                      3.0 * cutoff.plateau_radius);
  auto pts = halton_points(box, 1500, 12);
  const double sup = certify_cutoff(cutoff, d, T, pts);
  CHECK(sup == cutoff.sampled_sup_gamma);
  CHECK(sup <= 1.0 / 16 + 1e-9);
  CHECK(cutoff.sampled_sup_gamma_distance <= 1.0 + 1e-9);
  CHECK(cutoff.sampled_sup_gamma_distance > 0.5);
}

TEST_CASE("depth report surfaces both ranks when a weight is declared") {
  {
    MarkovTriple T = ornstein_uhlenbeck(2);
    auto pts = halton_points(Box::cube(2, -2.0, 2.0), 20, 13);
    DepthReport rep = hormander_depth_report(T, pts, 3, 1e-9);
    CHECK(rep.frame_only.spans);
    CHECK(rep.frame_only.depth == 1);
    CHECK(rep.drift_included);
    CHECK(rep.with_drift.spans);
    CHECK(rep.with_drift.depth == 1);
  }
  {
    MarkovTriple T = heisenberg();
    auto pts = halton_points(Box::cube(3, -2.0, 2.0), 20, 14);
    DepthReport rep = hormander_depth_report(T, pts, 4, 1e-9);
    CHECK(rep.frame_only.depth == 2);
    CHECK(!rep.drift_included);  // no weight declared
  }
}
