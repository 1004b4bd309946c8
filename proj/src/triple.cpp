#include "carre/triple.hpp"

#include <cmath>
#include <stdexcept>

#include "carre/parallel.hpp"

namespace carre {

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::EuclideanWeighted: return "euclidean-weighted";
    case GeometryKind::OrnsteinUhlenbeck: return "ornstein-uhlenbeck";
    case GeometryKind::Heisenberg: return "heisenberg";
    case GeometryKind::Engel: return "engel";
    case GeometryKind::Filiform: return "filiform";
    case GeometryKind::Grushin: return "grushin";
    case GeometryKind::Custom: return "custom";
  }
  return "?";
}

MarkovTriple::MarkovTriple(std::vector<VectorField> frame, SmoothFunction eta,
                           GeometryKind kind, std::string description) {
  if (frame.empty())
    throw std::invalid_argument("a Markov triple needs at least one field");
  auto data = std::make_shared<Data>();
  data->dim = frame[0].dim();
  for (const VectorField& Z : frame)
    if (Z.dim() != data->dim)
      throw std::invalid_argument("frame fields disagree on dimension");
  data->weighted = eta.valid();
  data->eta = data->weighted ? std::move(eta)
                             : SmoothFunction::constant(data->dim, 0.0);
  if (data->eta.dim() != data->dim)
    throw std::invalid_argument("weight dimension mismatch");
  data->frame = std::move(frame);
  data->kind = kind;
  data->description = std::move(description);

  const int n = data->dim;
  for (std::size_t j = 0; j < data->frame.size(); ++j) {
    VectorField Z = data->frame[j];
    data->divergence.emplace_back(
        n,
        [Z](const Vector& x, int order) {
          auto jets = Z.coefficient_jets(x, order + 1);
          Jet sum(static_cast<int>(jets.size()), order, x);
          for (std::size_t i = 0; i < jets.size(); ++i)
            sum += jets[i].partial(static_cast<int>(i));
          return sum;
        },
        "div " + (Z.label().empty() ? "Z" + std::to_string(j + 1) : Z.label()));
  }

  // drift field Z_0 with coefficients sum_j Z_j(eta) Z_j^i
  {
    std::vector<SmoothFunction> coef;
    std::vector<VectorField> frame_copy = data->frame;
    SmoothFunction eta_fn = data->eta;
    const bool weighted = data->weighted;
    for (int i = 0; i < n; ++i) {
      coef.emplace_back(
          n,
          [frame_copy, eta_fn, weighted, i](const Vector& x, int order) {
            Jet sum(frame_copy[0].dim(), order, x);
            if (!weighted) return sum;
            Jet eta_jet = eta_fn.jet(x, order + 1);
            for (const VectorField& Z : frame_copy) {
              Jet zeta = Z.apply_to_jet(eta_jet);
              sum += zeta * Z.coefficient(i).jet(x, order);
            }
            return sum;
          },
          "Z0^" + std::to_string(i + 1));
    }
    data->drift = VectorField(std::move(coef), "Z0");
  }

  data_ = std::move(data);
}

MarkovTriple MarkovTriple::with_kind(GeometryKind kind, std::string description,
                                     int parameter) const {
  MarkovTriple out = *this;
  auto data = std::make_shared<Data>(*data_);
  data->kind = kind;
  data->description = std::move(description);
  data->parameter = parameter;
  out.data_ = std::move(data);
  return out;
}

double MarkovTriple::weight_density(const Vector& x) const {
  return data_->weighted ? std::exp(data_->eta(x)) : 1.0;
}

namespace {

// coefficient jets of every frame field, evaluated once per (point, order)
std::vector<std::vector<Jet>> frame_jets(const std::vector<VectorField>& frame,
                                         const Vector& x, int order) {
  std::vector<std::vector<Jet>> jets;
  jets.reserve(frame.size());
  for (const VectorField& Z : frame) jets.push_back(Z.coefficient_jets(x, order));
  return jets;
}

// (Z f)(x) as a jet: sum_i coef_i * d_i f, coefficients truncated to match
Jet contract(const std::vector<Jet>& coef, const Jet& f_jet) {
  const int order = f_jet.order() - 1;
  Jet sum(static_cast<int>(coef.size()), order, f_jet.point());
  for (std::size_t i = 0; i < coef.size(); ++i)
    sum += coef[i].truncated(order) * f_jet.partial(static_cast<int>(i));
  return sum;
}

}  // namespace

Jet MarkovTriple::gamma_jet(const SmoothFunction& f, const SmoothFunction& g,
                            const Vector& x, int order) const {
  Jet fj = f.jet(x, order + 1);
  const bool same = &f == &g;
  Jet gj = same ? fj : g.jet(x, order + 1);
  auto coef = frame_jets(data_->frame, x, order);
  Jet sum(data_->dim, order, x);
  for (std::size_t j = 0; j < coef.size(); ++j) {
    Jet zf = contract(coef[j], fj);
    Jet zg = same ? zf : contract(coef[j], gj);
    sum += zf * zg;
  }
  return sum;
}

double MarkovTriple::gamma(const SmoothFunction& f, const SmoothFunction& g,
                           const Vector& x) const {
  return gamma_jet(f, g, x, 0).value();
}

double MarkovTriple::gamma(const SmoothFunction& f, const Vector& x) const {
  return gamma_jet(f, f, x, 0).value();
}

Jet MarkovTriple::operator_L_jet(const SmoothFunction& f, const Vector& x,
                                 int order) const {
  Jet fj = f.jet(x, order + 2);
  auto coef = frame_jets(data_->frame, x, order + 1);
  Jet sum(data_->dim, order, x);
  Jet eta_jet;
  if (data_->weighted) eta_jet = data_->eta.jet(x, order + 1);
  for (std::size_t j = 0; j < coef.size(); ++j) {
    Jet zf = contract(coef[j], fj);  // order + 1
    sum += contract(coef[j], zf);    // Delta_Z part
    // div Z_j = sum_i d_i Z^i_j straight from the coefficient jets
    Jet div(data_->dim, order, x);
    for (std::size_t i = 0; i < coef[j].size(); ++i)
      div += coef[j][i].partial(static_cast<int>(i));
    sum += div * zf.truncated(order);
    if (data_->weighted) sum += contract(coef[j], eta_jet) * zf.truncated(order);
  }
  return sum;
}

double MarkovTriple::operator_L(const SmoothFunction& f, const Vector& x) const {
  return operator_L_jet(f, x, 0).value();
}

SmoothFunction MarkovTriple::gamma_function(const SmoothFunction& f,
                                            const SmoothFunction& g) const {
  MarkovTriple T = *this;
  SmoothFunction fc = f, gc = g;
  return SmoothFunction(
      data_->dim,
      [T, fc, gc](const Vector& x, int order) {
        return T.gamma_jet(fc, gc, x, order);
      },
      "Gamma(" + f.name() + "," + g.name() + ")");
}

SmoothFunction MarkovTriple::operator_L_function(const SmoothFunction& f) const {
  MarkovTriple T = *this;
  SmoothFunction fc = f;
  return SmoothFunction(
      data_->dim,
      [T, fc](const Vector& x, int order) {
        return T.operator_L_jet(fc, x, order);
      },
      "L[" + f.name() + "]");
}

SmoothFunction MarkovTriple::delta_z_function(const SmoothFunction& f) const {
  std::vector<VectorField> frame = data_->frame;
  SmoothFunction fc = f;
  return SmoothFunction(
      data_->dim,
      [frame, fc](const Vector& x, int order) {
        Jet fj = fc.jet(x, order + 2);
        Jet sum(static_cast<int>(x.size()), order, x);
        for (const VectorField& Z : frame) sum += Z.apply_to_jet(Z.apply_to_jet(fj));
        return sum;
      },
      "Delta_Z[" + f.name() + "]");
}

double MarkovTriple::gamma2(const SmoothFunction& f, const SmoothFunction& g,
                            const Vector& x) const {
  SmoothFunction gamma_fg = gamma_function(f, g);
  SmoothFunction Lf = operator_L_function(f);
  SmoothFunction Lg = operator_L_function(g);
  return 0.5 * (operator_L(gamma_fg, x) - gamma(f, Lg, x) - gamma(g, Lf, x));
}

double MarkovTriple::gamma2(const SmoothFunction& f, const Vector& x) const {
  return gamma2(f, f, x);
}

double MarkovTriple::gamma_sqrt_reg(const SmoothFunction& u, const Vector& x,
                                    double epsilon) const {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("gamma_sqrt_reg needs epsilon > 0");
  SmoothFunction gu = gamma_function(u, u);
  const double gamma_gamma = gamma(gu, gu, x);
  return gamma_gamma / (4.0 * (gu(x) + epsilon));
}

double sampled_sup_gamma(const MarkovTriple& T, const SmoothFunction& f,
                         const std::vector<Vector>& points) {
  std::vector<double> values(points.size(), 0.0);
  parallel_chunks(points.size(),
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i)
                      values[i] = T.gamma(f, points[i]);
                  });
  double sup = 0.0;
  for (double v : values) sup = std::max(sup, v);
  return sup;
}

double certify_cutoff(Cutoff& cutoff, const SmoothFunction& distance,
                      const MarkovTriple& T,
                      const std::vector<Vector>& points) {
  cutoff.sampled_sup_gamma = sampled_sup_gamma(T, cutoff.xi, points);
  cutoff.sampled_sup_gamma_distance = sampled_sup_gamma(T, distance, points);
  return cutoff.sampled_sup_gamma;
}

DepthReport hormander_depth_report(const MarkovTriple& T,
                                   const std::vector<Vector>& points,
                                   int max_depth, double tol) {
  DepthReport report;
  report.frame_only = hormander_depth(T.frame(), points, max_depth, tol);
  if (T.weighted()) {
    report.drift_included = true;
    std::vector<VectorField> extended = T.frame();
    extended.push_back(T.drift());
    report.with_drift = hormander_depth(extended, points, max_depth, tol);
  }
  return report;
}

GeneralOperator::GeneralOperator(int dim, std::vector<SmoothFunction> a,
                                 std::vector<SmoothFunction> b,
                                 std::string description)
    : dim_(dim), description_(std::move(description)) {
  if (static_cast<int>(a.size()) != dim * dim)
    throw std::invalid_argument("second-order coefficients must be dim x dim");
  if (b.empty())
    for (int i = 0; i < dim; ++i) b.push_back(SmoothFunction::constant(dim, 0.0));
  if (static_cast<int>(b.size()) != dim)
    throw std::invalid_argument("first-order coefficients must have length dim");
  // store the symmetrized matrix
  a_.reserve(a.size());
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      SmoothFunction aij = a[i * dim + j], aji = a[j * dim + i];
      a_.emplace_back(dim, [aij, aji](const Vector& x, int order) {
        return (aij.jet(x, order) + aji.jet(x, order)) * 0.5;
      });
    }
  b_ = std::move(b);
}

Jet GeneralOperator::apply_jet(const SmoothFunction& f, const Vector& x,
                               int order) const {
  Jet fj = f.jet(x, order + 2);
  Jet sum(dim_, order, x);
  for (int i = 0; i < dim_; ++i) {
    Jet fi = fj.partial(i);  // order + 1
    for (int j = 0; j < dim_; ++j)
      sum += a_[i * dim_ + j].jet(x, order) * fi.partial(j);
    sum += b_[i].jet(x, order) * fi.truncated(order);
  }
  return sum;
}

double GeneralOperator::apply(const SmoothFunction& f, const Vector& x) const {
  return apply_jet(f, x, 0).value();
}

double GeneralOperator::gamma_from_L(const SmoothFunction& f,
                                     const SmoothFunction& g,
                                     const Vector& x) const {
  SmoothFunction fc = f, gc = g;
  SmoothFunction fg(
      dim_,
      [fc, gc](const Vector& y, int order) {
        return fc.jet(y, order) * gc.jet(y, order);
      },
      "(" + f.name() + ")*(" + g.name() + ")");
  return 0.5 * (apply(fg, x) - fc(x) * apply(gc, x) - gc(x) * apply(fc, x));
}

GeneralOperator GeneralOperator::dalembert() {
  std::vector<SmoothFunction> a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      a.push_back(SmoothFunction::constant(
          2, i == j ? (i == 0 ? 1.0 : -1.0) : 0.0));
  return GeneralOperator(2, std::move(a), {}, "d'Alembert f_xx - f_yy");
}

GeneralOperator GeneralOperator::derivative_1d() {
  std::vector<SmoothFunction> a{SmoothFunction::constant(1, 0.0)};
  std::vector<SmoothFunction> b{SmoothFunction::constant(1, 1.0)};
  return GeneralOperator(1, std::move(a), std::move(b), "derivative f_x");
}

GeneralOperator GeneralOperator::nondivergence_form(
    int dim, std::vector<SmoothFunction> a) {
  return GeneralOperator(dim, std::move(a), {}, "nondivergence form");
}

GeneralOperator GeneralOperator::divergence_form(int dim,
                                                 std::vector<SmoothFunction> a) {
  // L_D f = sum (a_ij f_i)_j = sum a_ij f_ij + sum_i (sum_j d_j a_ij) f_i
  std::vector<SmoothFunction> b;
  for (int i = 0; i < dim; ++i) {
    std::vector<SmoothFunction> row;
    for (int j = 0; j < dim; ++j) row.push_back(a[i * dim + j]);
    b.emplace_back(dim, [row](const Vector& x, int order) {
      Jet sum(static_cast<int>(row.size()), order, x);
      for (std::size_t j = 0; j < row.size(); ++j)
        sum += row[j].jet(x, order + 1).partial(static_cast<int>(j));
      return sum;
    });
  }
  return GeneralOperator(dim, std::move(a), std::move(b), "divergence form");
}

GeneralOperator GeneralOperator::from_triple(const MarkovTriple& T) {
  const int n = T.dim();
  std::vector<SmoothFunction> a, b;
  for (int i = 0; i < n; ++i)
    for (int l = 0; l < n; ++l) {
      MarkovTriple Tc = T;
      a.emplace_back(n, [Tc, i, l](const Vector& x, int order) {
        Jet sum(Tc.dim(), order, x);
        for (const VectorField& Z : Tc.frame())
          sum += Z.coefficient(i).jet(x, order) * Z.coefficient(l).jet(x, order);
        return sum;
      });
    }
  for (int l = 0; l < n; ++l) {
    MarkovTriple Tc = T;
    b.emplace_back(n, [Tc, l](const Vector& x, int order) {
      Jet sum(Tc.dim(), order, x);
      Jet eta_jet;
      if (Tc.weighted()) eta_jet = Tc.eta().jet(x, order + 1);
      for (int j = 0; j < Tc.field_count(); ++j) {
        const VectorField& Z = Tc.frame()[j];
        Jet zl = Z.apply(Z.coefficient(l), x, order);
        sum += zl;
        sum += Tc.divergence(j).jet(x, order) *
               Z.coefficient(l).jet(x, order);
        if (Tc.weighted())
          sum += Z.apply_to_jet(eta_jet).truncated(order) *
                 Z.coefficient(l).jet(x, order);
      }
      return sum;
    });
  }
  return GeneralOperator(n, std::move(a), std::move(b),
                         "polarization route for " + to_string(T.kind()));
}

bool IdentityReport::all_pass() const {
  for (const auto& e : entries)
    if (!e.pass) return false;
  return true;
}

double IdentityReport::max_residual() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_residual);
  return m;
}

namespace {

struct Scan {
  double worst = 0.0;
  std::ptrdiff_t index = -1;
};

// deterministic max-scan: values computed in parallel, argmax by index order
Scan max_scan(std::size_t count, const std::function<double(std::size_t)>& fn) {
  std::vector<double> buf(count, 0.0);
  parallel_chunks(count, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) buf[i] = fn(i);
  });
  Scan scan;
  for (std::size_t i = 0; i < count; ++i)
    if (scan.index < 0 || buf[i] > scan.worst) {
      scan.worst = buf[i];
      scan.index = static_cast<std::ptrdiff_t>(i);
    }
  return scan;
}

std::string fn_label(const SmoothFunction& f, std::size_t idx) {
  return f.name().empty() ? "f" + std::to_string(idx) : f.name();
}

int default_ibp_nodes(int dim) {
  switch (dim) {
    case 1: return 64;
    case 2: return 48;
    case 3: return 24;
    case 4: return 14;
    case 5: return 10;
    default: return 8;
  }
}

SmoothFunction compose_cube(const SmoothFunction& f) {
  SmoothFunction fc = f;
  return SmoothFunction(f.dim(), [fc](const Vector& x, int order) {
    return pow_int(fc.jet(x, order), 3);
  });
}

SmoothFunction compose_tanh(const SmoothFunction& f) {
  SmoothFunction fc = f;
  return SmoothFunction(f.dim(), [fc](const Vector& x, int order) {
    return tanh(fc.jet(x, order));
  });
}

SmoothFunction compose_expm1(const SmoothFunction& f) {
  SmoothFunction fc = f;
  return SmoothFunction(f.dim(), [fc](const Vector& x, int order) {
    return exp(fc.jet(x, order)) - 1.0;
  });
}

SmoothFunction product_fn(const SmoothFunction& f, const SmoothFunction& g) {
  SmoothFunction fc = f, gc = g;
  return SmoothFunction(f.dim(), [fc, gc](const Vector& x, int order) {
    return fc.jet(x, order) * gc.jet(x, order);
  });
}

SmoothFunction square_fn(const SmoothFunction& f) { return product_fn(f, f); }

}  // namespace

IdentityReport validate_axioms(const MarkovTriple& T,
                               const AxiomSamples& samples, double tol) {
  IdentityReport report;
  report.title = "structural axioms on " + to_string(T.kind());
  const auto& fs = samples.functions;
  const auto& pts = samples.points;
  if (fs.size() < 2 || pts.empty())
    throw std::invalid_argument("validate_axioms needs functions and points");
  const std::size_t pairs = fs.size() / 2;
  const std::size_t cells = pairs * pts.size();
  auto decode = [&](std::ptrdiff_t idx, std::size_t& pair, std::size_t& pt) {
    pair = static_cast<std::size_t>(idx) / pts.size();
    pt = static_cast<std::size_t>(idx) % pts.size();
  };
  auto push = [&](const std::string& name, const Scan& scan, double tolerance,
                  const std::string& note = {}) {
    IdentityEntry entry;
    entry.name = name;
    entry.max_residual = scan.worst;
    entry.tolerance = tolerance;
    entry.pass = scan.worst <= tolerance;
    entry.note = note;
    if (scan.index >= 0) {
      std::size_t pair, pt;
      decode(scan.index, pair, pt);
      entry.witness_point = pts[pt];
      entry.witness_label = fn_label(fs[2 * pair], 2 * pair) + ", " +
                            fn_label(fs[2 * pair + 1], 2 * pair + 1);
    }
    report.entries.push_back(std::move(entry));
  };

  // symmetry and bilinearity of Gamma
  push("gamma symmetry", max_scan(cells, [&](std::size_t i) {
         const auto& f = fs[2 * (i / pts.size())];
         const auto& g = fs[2 * (i / pts.size()) + 1];
         const Vector& x = pts[i % pts.size()];
         return std::abs(T.gamma(f, g, x) - T.gamma(g, f, x));
       }),
       tol);
  push("gamma bilinearity", max_scan(cells, [&](std::size_t i) {
         const std::size_t pair = i / pts.size();
         const auto& f = fs[2 * pair];
         const auto& g = fs[2 * pair + 1];
         const auto& h = fs[(2 * pair + 2) % fs.size()];
         const Vector& x = pts[i % pts.size()];
         SmoothFunction combo(
             T.dim(), [f, g](const Vector& y, int order) {
               return f.jet(y, order) * 2.0 - g.jet(y, order) * 3.0;
             });
         return std::abs(T.gamma(combo, h, x) - 2.0 * T.gamma(f, h, x) +
                         3.0 * T.gamma(g, h, x));
       }),
       tol);

  // chain rule for Psi in {cubing, tanh, exp - 1}
  struct Chain {
    const char* name;
    SmoothFunction (*make)(const SmoothFunction&);
    double (*dpsi)(double);
  };
  const Chain chains[] = {
      {"chain rule s^3", &compose_cube,
       [](double s) { return 3.0 * s * s; }},
      {"chain rule tanh", &compose_tanh,
       [](double s) {
         const double t = std::tanh(s);
         return 1.0 - t * t;
       }},
      {"chain rule exp-1", &compose_expm1,
       [](double s) { return std::exp(s); }},
  };
  for (const Chain& chain : chains) {
    push(chain.name, max_scan(cells, [&](std::size_t i) {
           const auto& f = fs[2 * (i / pts.size())];
           const auto& g = fs[2 * (i / pts.size()) + 1];
           const Vector& x = pts[i % pts.size()];
           SmoothFunction psi_f = chain.make(f);
           return std::abs(T.gamma(psi_f, g, x) -
                           chain.dpsi(f(x)) * T.gamma(f, g, x));
         }),
         tol);
  }

  // product rule and the square identity
  push("product rule", max_scan(cells, [&](std::size_t i) {
         const auto& f = fs[2 * (i / pts.size())];
         const auto& g = fs[2 * (i / pts.size()) + 1];
         const auto& h = fs[(2 * (i / pts.size()) + 2) % fs.size()];
         const Vector& x = pts[i % pts.size()];
         return std::abs(T.gamma(product_fn(f, g), h, x) -
                         f(x) * T.gamma(g, h, x) - g(x) * T.gamma(f, h, x));
       }),
       tol);
  push("square identity", max_scan(cells, [&](std::size_t i) {
         const auto& f = fs[2 * (i / pts.size())];
         const auto& g = fs[2 * (i / pts.size()) + 1];
         const Vector& x = pts[i % pts.size()];
         return std::abs(T.gamma(square_fn(f), square_fn(g), x) -
                         4.0 * f(x) * g(x) * T.gamma(f, g, x));
       }),
       tol);

  // Gamma(1) = 0 and L(1) = 0
  {
    SmoothFunction one = SmoothFunction::constant(T.dim(), 1.0);
    push("gamma(1) = 0 and L(1) = 0",
         max_scan(pts.size(), [&](std::size_t i) {
           return std::abs(T.gamma(one, one, pts[i])) +
                  std::abs(T.operator_L(one, pts[i]));
         }),
         tol);
    report.entries.back().witness_label = "1";
  }

  // positivity of Gamma: report the most negative value found
  {
    Scan scan = max_scan(fs.size() * pts.size(), [&](std::size_t i) {
      const auto& f = fs[i / pts.size()];
      return -T.gamma(f, f, pts[i % pts.size()]);
    });
    IdentityEntry entry;
    entry.name = "gamma positivity";
    entry.max_residual = std::max(0.0, scan.worst);
    entry.tolerance = tol;
    entry.pass = scan.worst <= tol;
    if (scan.index >= 0) {
      entry.witness_point = pts[scan.index % pts.size()];
      entry.witness_label =
          fn_label(fs[scan.index / pts.size()], scan.index / pts.size());
    }
    report.entries.push_back(std::move(entry));
  }

  // polarization route through the frame-induced second-order operator
  {
    GeneralOperator op = GeneralOperator::from_triple(T);
    push("polarization consistency", max_scan(cells, [&](std::size_t i) {
           const auto& f = fs[2 * (i / pts.size())];
           const auto& g = fs[2 * (i / pts.size()) + 1];
           const Vector& x = pts[i % pts.size()];
           return std::abs(T.gamma(f, g, x) - op.gamma_from_L(f, g, x));
         }),
         tol);
  }

  // Cauchy-Schwarz for Gamma
  push("cauchy-schwarz", max_scan(cells, [&](std::size_t i) {
         const auto& f = fs[2 * (i / pts.size())];
         const auto& g = fs[2 * (i / pts.size()) + 1];
         const Vector& x = pts[i % pts.size()];
         const double gf = std::max(T.gamma(f, f, x), 0.0);
         const double gg = std::max(T.gamma(g, g, x), 0.0);
         return std::abs(T.gamma(f, g, x)) - std::sqrt(gf) * std::sqrt(gg);
       }),
       tol);

  // integration by parts over each compact bump's support box
  if (!samples.compact_support.empty()) {
    double worst = 0.0;
    std::string label;
    const std::size_t f_count = std::min<std::size_t>(3, fs.size());
    for (std::size_t s = 0; s < samples.compact_support.size(); ++s) {
      const Bump& bump = samples.compact_support[s];
      const Box support = bump.support_box();
      std::vector<int> nodes = samples.ibp_nodes_per_axis;
      if (nodes.empty())
        nodes.assign(T.dim(), default_ibp_nodes(T.dim()));
      QuadratureGrid grid = build_grid(support, nodes,
                                       QuadratureRule::GaussLegendre);
      if (T.weighted()) grid = grid.with_weight(T.eta());
      SmoothFunction g = bump.function();
      // one pass per node for Gamma(f, g) + g L f, sharing the frame jets
      auto integrand = [&T](const SmoothFunction& f, const SmoothFunction& gf,
                            const Vector& x) {
        const auto& frame = T.frame();
        const int n = T.dim();
        Jet fj = f.jet(x, 2);
        Jet gj = gf.jet(x, 1);
        Jet eta_jet;
        if (T.weighted()) eta_jet = T.eta().jet(x, 1);
        double gamma_fg = 0.0, lf = 0.0;
        std::vector<Jet> coef(n);
        for (int j = 0; j < T.field_count(); ++j) {
          for (int i = 0; i < n; ++i)
            coef[i] = frame[j].coefficient(i).jet(x, 1);
          Jet zjf(n, 1, x);
          double zjg = 0.0, div = 0.0, zj_eta = 0.0;
          for (int i = 0; i < n; ++i) {
            zjf += coef[i] * fj.partial(i);
            zjg += coef[i].value() * gj.first(i);
            div += coef[i].first(i);
            if (T.weighted()) zj_eta += coef[i].value() * eta_jet.first(i);
          }
          gamma_fg += zjf.value() * zjg;
          double zjzjf = 0.0;
          for (int i = 0; i < n; ++i)
            zjzjf += coef[i].value() * zjf.first(i);
          lf += zjzjf + div * zjf.value() + zj_eta * zjf.value();
        }
        return gamma_fg + gj.value() * lf;
      };
      for (std::size_t t = 0; t < f_count; ++t) {
        const SmoothFunction& f = fs[t];
        const double residual = std::abs(integrate(
            grid, [&](const Vector& x) { return integrand(f, g, x); }, true));
        if (residual > worst) {
          worst = residual;
          label = fn_label(f, t) + ", bump" + std::to_string(s);
        }
      }
    }
    IdentityEntry entry;
    entry.name = "integration by parts";
    entry.max_residual = worst;
    entry.tolerance = tol;
    entry.pass = worst <= tol;
    entry.witness_label = label;
    report.entries.push_back(std::move(entry));
  }

  // sampled contrapositive of nondegeneracy: a function whose Gamma vanishes
  // on all samples must not oscillate
  {
    IdentityEntry entry;
    entry.name = "nondegeneracy (sampled contrapositive)";
    entry.tolerance = tol;
    entry.pass = true;
    double diam = 0.0;
    for (std::size_t p = 1; p < pts.size(); ++p)
      diam = std::max(diam, (pts[p] - pts[0]).norm());
    for (std::size_t t = 0; t < fs.size(); ++t) {
      double sup_gamma = 0.0, lo = 0.0, hi = 0.0;
      for (std::size_t p = 0; p < pts.size(); ++p) {
        sup_gamma = std::max(sup_gamma, T.gamma(fs[t], fs[t], pts[p]));
        const double v = fs[t](pts[p]);
        if (p == 0) lo = hi = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (sup_gamma < tol) {
        const double oscillation = hi - lo;
        const double bound = std::sqrt(tol) * (1.0 + diam) * 10.0;
        if (oscillation < bound) {
          entry.note += fn_label(fs[t], t) + " constant within tolerance; ";
        } else {
          entry.pass = false;
          entry.max_residual = std::max(entry.max_residual, oscillation);
          entry.witness_label = fn_label(fs[t], t);
          entry.note += fn_label(fs[t], t) +
                        " has vanishing gamma but oscillates; ";
        }
      }
    }
    report.entries.push_back(std::move(entry));
  }

  return report;
}

IdentityReport validate_operator_positivity(
    const GeneralOperator& op, const std::vector<SmoothFunction>& functions,
    const std::vector<Vector>& points, double tol) {
  IdentityReport report;
  report.title = "carre du champ positivity for " + op.description();
  Scan scan = max_scan(functions.size() * points.size(), [&](std::size_t i) {
    const auto& f = functions[i / points.size()];
    return -op.gamma_from_L(f, f, points[i % points.size()]);
  });
  IdentityEntry entry;
  entry.name = "gamma positivity";
  entry.max_residual = std::max(0.0, scan.worst);
  entry.tolerance = tol;
  entry.pass = scan.worst <= tol;
  if (scan.index >= 0) {
    entry.witness_point = points[scan.index % points.size()];
    entry.witness_label = fn_label(functions[scan.index / points.size()],
                                   scan.index / points.size());
    entry.note = "most negative gamma(f) = " + std::to_string(-scan.worst);
  }
  report.entries.push_back(std::move(entry));
  return report;
}

}  // namespace carre
