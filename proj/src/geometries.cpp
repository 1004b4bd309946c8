#include "carre/geometries.hpp"

#include <stdexcept>

#include "carre/expr.hpp"
#include "carre/sampling.hpp"

namespace carre {

namespace {

SmoothFunction monomial(int dim, double coefficient, std::vector<int> exponents,
                        std::string name) {
  Polynomial p;
  p.dim = dim;
  p.terms.push_back({coefficient, std::move(exponents)});
  return p.function(std::move(name));
}

std::vector<VectorField> euclidean_frame(int n) {
  std::vector<VectorField> frame;
  for (int i = 0; i < n; ++i) frame.push_back(VectorField::coordinate(n, i));
  return frame;
}

SmoothFunction gaussian_log_weight(int n) {
  return SmoothFunction(
      n,
      [](const Vector& x, int order) {
        Jet s(static_cast<int>(x.size()), order, x);
        for (int a = 0; a < x.size(); ++a) {
          Jet t = Jet::variable(a, x, order);
          s -= t * t * 0.5;
        }
        return s;
      },
      "-|x|^2/2");
}

SmoothFunction parse_or_throw(const std::string& src, int n,
                              const std::string& what) {
  ParseResult r = parse(src, n);
  if (!r.ok()) {
    std::string message = what + ": ";
    for (const auto& d : r.diagnostics)
      message += d.message + " (offset " + std::to_string(d.offset) + ") ";
    throw std::invalid_argument(message);
  }
  return make_function(std::move(*r.ast), n, src);
}

MarkovTriple make_heisenberg() {
  const int n = 3;
  std::vector<SmoothFunction> xc{
      SmoothFunction::constant(n, 1.0), SmoothFunction::constant(n, 0.0),
      monomial(n, -0.5, {0, 1, 0}, "-x2/2")};
  std::vector<SmoothFunction> yc{
      SmoothFunction::constant(n, 0.0), SmoothFunction::constant(n, 1.0),
      monomial(n, 0.5, {1, 0, 0}, "x1/2")};
  std::vector<VectorField> frame{VectorField(std::move(xc), "X"),
                                 VectorField(std::move(yc), "Y")};
  return MarkovTriple(std::move(frame), SmoothFunction(),
                      GeometryKind::Heisenberg,
                      "heisenberg: X = d/dx - (y/2) d/dt, "
                      "Y = d/dy + (x/2) d/dt (symmetric model, [X,Y] = d/dt)");
}

MarkovTriple make_filiform_like(int n, GeometryKind kind,
                                const std::string& label) {
  std::vector<SmoothFunction> z1;
  for (int i = 0; i < n; ++i)
    z1.push_back(SmoothFunction::constant(n, i == 0 ? 1.0 : 0.0));
  std::vector<SmoothFunction> z2;
  z2.push_back(SmoothFunction::constant(n, 0.0));
  z2.push_back(SmoothFunction::constant(n, 1.0));
  for (int i = 3; i <= n; ++i) {
    // coefficient of d_i is x1^{i-2}/(i-2)!
    double fact = 1.0;
    for (int k = 2; k <= i - 2; ++k) fact *= k;
    std::vector<int> exponents(n, 0);
    exponents[0] = i - 2;
    z2.push_back(monomial(n, 1.0 / fact, std::move(exponents),
                          "x1^" + std::to_string(i - 2) + "/" +
                              std::to_string(static_cast<long>(fact))));
  }
  std::vector<VectorField> frame{VectorField(std::move(z1), "Z1"),
                                 VectorField(std::move(z2), "Z2")};
  return MarkovTriple(std::move(frame), SmoothFunction(), kind, label)
      .with_kind(kind, label, n);
}

MarkovTriple make_grushin(int alpha) {
  const int n = 2;
  std::vector<SmoothFunction> z1{SmoothFunction::constant(n, 1.0),
                                 SmoothFunction::constant(n, 0.0)};
  std::vector<SmoothFunction> z2{
      SmoothFunction::constant(n, 0.0),
      monomial(n, 1.0, {alpha, 0}, "x1^" + std::to_string(alpha))};
  std::vector<VectorField> frame{VectorField(std::move(z1), "Z1"),
                                 VectorField(std::move(z2), "Z2")};
  std::string label = "grushin alpha=" + std::to_string(alpha) +
                      ": Z1 = d/dx, Z2 = x^alpha d/dy";
  return MarkovTriple(std::move(frame), SmoothFunction(), GeometryKind::Grushin,
                      label)
      .with_kind(GeometryKind::Grushin, label, alpha);
}

}  // namespace

MarkovTriple make_geometry(const GeometrySpec& spec) {
  switch (spec.kind) {
    case GeometryKind::EuclideanWeighted: {
      if (spec.dimension < 1)
        throw std::invalid_argument("euclidean dimension must be positive");
      SmoothFunction eta;
      if (!spec.eta_expression.empty())
        eta = parse_or_throw(spec.eta_expression, spec.dimension, "eta");
      std::string label = "euclidean n=" + std::to_string(spec.dimension) +
                          (spec.eta_expression.empty()
                               ? std::string(", eta = 0")
                               : ", eta = " + spec.eta_expression);
      return MarkovTriple(euclidean_frame(spec.dimension), std::move(eta),
                          GeometryKind::EuclideanWeighted, label)
          .with_kind(GeometryKind::EuclideanWeighted, label, spec.dimension);
    }
    case GeometryKind::OrnsteinUhlenbeck: {
      if (spec.dimension < 1)
        throw std::invalid_argument("dimension must be positive");
      std::string label =
          "ornstein-uhlenbeck n=" + std::to_string(spec.dimension) +
          ", eta = -|x|^2/2";
      return MarkovTriple(euclidean_frame(spec.dimension),
                          gaussian_log_weight(spec.dimension),
                          GeometryKind::OrnsteinUhlenbeck, label)
          .with_kind(GeometryKind::OrnsteinUhlenbeck, label, spec.dimension);
    }
    case GeometryKind::Heisenberg:
      return make_heisenberg();
    case GeometryKind::Engel:
      return make_filiform_like(
          4, GeometryKind::Engel,
          "engel: Z1 = d1, Z2 = d2 + x1 d3 + (x1^2/2) d4");
    case GeometryKind::Filiform:
      if (spec.dimension < 2)
        throw std::invalid_argument("filiform needs dimension >= 2");
      return make_filiform_like(
          spec.dimension, GeometryKind::Filiform,
          "filiform E" + std::to_string(spec.dimension) +
              ": Z1 = d1, Z2 = d2 + sum x1^(i-2)/(i-2)! di");
    case GeometryKind::Grushin:
      if (spec.alpha < 1)
        throw std::invalid_argument("grushin needs integer alpha >= 1");
      return make_grushin(spec.alpha);
    case GeometryKind::Custom: {
      if (spec.custom_frame.empty())
        throw std::invalid_argument("custom geometry needs frame expressions");
      const int n = static_cast<int>(spec.custom_frame.front().size());
      if (spec.dimension && spec.dimension != n)
        throw std::invalid_argument(
            "custom frame coefficients disagree with the declared dimension");
      std::vector<VectorField> frame;
      for (std::size_t j = 0; j < spec.custom_frame.size(); ++j) {
        const auto& coefs = spec.custom_frame[j];
        if (static_cast<int>(coefs.size()) != n)
          throw std::invalid_argument("custom frame row size mismatch");
        std::vector<SmoothFunction> fns;
        for (const std::string& src : coefs)
          fns.push_back(parse_or_throw(src, n, "frame coefficient"));
        frame.emplace_back(std::move(fns), "Z" + std::to_string(j + 1));
      }
      SmoothFunction eta;
      if (!spec.eta_expression.empty())
        eta = parse_or_throw(spec.eta_expression, n, "eta");
      return MarkovTriple(std::move(frame), std::move(eta),
                          GeometryKind::Custom,
                          "custom frame (" +
                              std::to_string(spec.custom_frame.size()) +
                              " fields, n=" + std::to_string(n) + ")");
    }
  }
  throw std::invalid_argument("unknown geometry kind");
}

}  // namespace carre
