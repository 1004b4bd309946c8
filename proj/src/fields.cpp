#include "carre/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "carre/parallel.hpp"

namespace carre {

VectorField::VectorField(std::vector<SmoothFunction> coefficients,
                         std::string label)
    : dim_(static_cast<int>(coefficients.size())),
      coef_(std::move(coefficients)),
      label_(std::move(label)) {
  if (dim_ == 0) throw std::invalid_argument("vector field needs coefficients");
  for (const SmoothFunction& c : coef_)
    if (c.dim() != dim_)
      throw std::invalid_argument(
          "vector field coefficients disagree on dimension");
}

std::vector<Jet> VectorField::coefficient_jets(const Vector& x,
                                               int order) const {
  std::vector<Jet> jets;
  jets.reserve(dim_);
  for (const SmoothFunction& c : coef_) jets.push_back(c.jet(x, order));
  return jets;
}

Jet VectorField::apply(const SmoothFunction& f, const Vector& x,
                       int order) const {
  return apply_to_jet(f.jet(x, order + 1));
}

Jet VectorField::apply_to_jet(const Jet& f_jet) const {
  const Vector& x = f_jet.point();
  const int order = f_jet.order() - 1;
  if (order < 0) throw std::invalid_argument("apply needs an order >= 1 jet");
  Jet sum(dim_, order, x);
  for (int i = 0; i < dim_; ++i)
    sum += coef_[i].jet(x, order) * f_jet.partial(i);
  return sum;
}

SmoothFunction VectorField::applied(const SmoothFunction& f) const {
  VectorField field = *this;
  SmoothFunction g = f;
  std::string name = (label_.empty() ? std::string("Z") : label_) + "[" +
                     f.name() + "]";
  return SmoothFunction(
      dim_,
      [field, g](const Vector& x, int order) {
        return field.apply(g, x, order);
      },
      std::move(name));
}

VectorField VectorField::coordinate(int dim, int axis) {
  std::vector<SmoothFunction> coef;
  coef.reserve(dim);
  for (int i = 0; i < dim; ++i)
    coef.push_back(SmoothFunction::constant(dim, i == axis ? 1.0 : 0.0));
  return VectorField(std::move(coef), "d/dx" + std::to_string(axis + 1));
}

std::vector<Jet> bracket_jets(const std::vector<Jet>& a_jets,
                              const std::vector<Jet>& b_jets) {
  const int n = static_cast<int>(a_jets.size());
  const int order = a_jets[0].order() - 1;
  std::vector<Jet> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Jet c(n, order, a_jets[0].point());
    for (int k = 0; k < n; ++k) {
      c += a_jets[k].truncated(order) * b_jets[i].partial(k);
      c -= b_jets[k].truncated(order) * a_jets[i].partial(k);
    }
    out.push_back(std::move(c));
  }
  return out;
}

VectorField bracket(const VectorField& A, const VectorField& B) {
  if (A.dim() != B.dim())
    throw std::invalid_argument("bracket of fields of different dimensions");
  const int n = A.dim();
  std::vector<SmoothFunction> coef;
  coef.reserve(n);
  for (int i = 0; i < n; ++i) {
    VectorField a = A, b = B;
    coef.emplace_back(
        n,
        [a, b, i](const Vector& x, int order) {
          auto a_jets = a.coefficient_jets(x, order + 1);
          auto b_jets = b.coefficient_jets(x, order + 1);
          return bracket_jets(a_jets, b_jets)[i];
        },
        "[" + A.label() + "," + B.label() + "]^" + std::to_string(i + 1));
  }
  std::string label = "[" + A.label() + "," + B.label() + "]";
  return VectorField(std::move(coef), std::move(label));
}

std::shared_ptr<const BracketTree> BracketTree::make_leaf(int j) {
  auto node = std::make_shared<BracketTree>();
  node->leaf = j;
  node->depth = 1;
  return node;
}

std::shared_ptr<const BracketTree> BracketTree::wrap(
    int outer, std::shared_ptr<const BracketTree> inner) {
  auto node = std::make_shared<BracketTree>();
  node->outer = outer;
  node->depth = 1 + inner->depth;
  node->inner = std::move(inner);
  return node;
}

std::string BracketTree::describe(
    const std::vector<VectorField>& frame) const {
  if (leaf >= 0) {
    const std::string& l = frame[leaf].label();
    return l.empty() ? "Z" + std::to_string(leaf + 1) : l;
  }
  const std::string& l = frame[outer].label();
  return "[" + (l.empty() ? "Z" + std::to_string(outer + 1) : l) + "," +
         inner->describe(frame) + "]";
}

std::vector<Jet> evaluate_tree(const BracketTree& tree,
                               const std::vector<VectorField>& frame,
                               const Vector& x, int order) {
  if (tree.leaf >= 0) return frame[tree.leaf].coefficient_jets(x, order);
  auto outer_jets = frame[tree.outer].coefficient_jets(x, order + 1);
  auto inner_jets = evaluate_tree(*tree.inner, frame, x, order + 1);
  return bracket_jets(outer_jets, inner_jets);
}

int rank_with_tolerance(Eigen::MatrixXd columns, double tol) {
  const int rows = static_cast<int>(columns.rows());
  const int cols = static_cast<int>(columns.cols());
  double scale = 0.0;
  for (int j = 0; j < cols; ++j) scale = std::max(scale, columns.col(j).norm());
  if (scale == 0.0) return 0;
  const double threshold = tol * scale;

  int rank = 0;
  for (int step = 0; step < rows && rank < cols; ++step) {
    // full pivot over the remaining block
    int pr = -1, pc = -1;
    double best = threshold;
    for (int j = rank; j < cols; ++j)
      for (int i = step; i < rows; ++i)
        if (std::abs(columns(i, j)) > best) {
          best = std::abs(columns(i, j));
          pr = i;
          pc = j;
        }
    if (pr < 0) break;
    columns.row(step).swap(columns.row(pr));
    columns.col(rank).swap(columns.col(pc));
    for (int i = step + 1; i < rows; ++i) {
      const double factor = columns(i, rank) / columns(step, rank);
      columns.row(i).tail(cols - rank) -=
          factor * columns.row(step).tail(cols - rank);
    }
    ++rank;
  }
  return rank;
}

HormanderScan hormander_depth(const std::vector<VectorField>& frame,
                              const std::vector<Vector>& points, int max_depth,
                              double tol) {
  if (frame.empty()) throw std::invalid_argument("empty frame");
  if (points.empty()) throw std::invalid_argument("no sample points");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  const int n = frame[0].dim();
  const int m = static_cast<int>(frame.size());

  HormanderScan scan;
  scan.per_point_depth.assign(points.size(), -1);
  scan.min_rank = n;
  std::vector<int> per_point_rank(points.size(), 0);
  std::vector<int> per_point_fields(points.size(), 0);

  auto scan_point = [&](std::size_t p) {
    int fields_tested = 0;
    const Vector& x = points[p];
    // levelwise evaluation, sharing each level's jets: a level-q field only
    // needs derivative order (levels still to wrap), so the jets shrink as
    // the brackets deepen
    std::vector<std::vector<Jet>> level;
    std::vector<Eigen::VectorXd> columns;
    int order = max_depth - 1;
    for (int j = 0; j < m; ++j)
      level.push_back(frame[j].coefficient_jets(x, order));
    auto record = [&](const std::vector<Jet>& jets) {
      Eigen::VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = jets[i].value();
      columns.push_back(std::move(v));
      ++fields_tested;
    };
    for (const auto& jets : level) record(jets);

    auto current_rank = [&]() {
      Eigen::MatrixXd mat(n, static_cast<int>(columns.size()));
      for (std::size_t c = 0; c < columns.size(); ++c) mat.col(c) = columns[c];
      return rank_with_tolerance(std::move(mat), tol);
    };

    int point_rank = current_rank();
    if (point_rank == n) scan.per_point_depth[p] = 1;
    for (int depth = 2; depth <= max_depth && point_rank < n; ++depth) {
      --order;
      std::vector<std::vector<Jet>> frame_jets;
      for (int j = 0; j < m; ++j)
        frame_jets.push_back(frame[j].coefficient_jets(x, order + 1));
      std::vector<std::vector<Jet>> next;
      next.reserve(level.size() * m);
      for (const auto& inner : level)
        for (int j = 0; j < m; ++j) {
          next.push_back(bracket_jets(frame_jets[j], inner));
          record(next.back());
        }
      level = std::move(next);
      point_rank = current_rank();
      if (point_rank == n) scan.per_point_depth[p] = depth;
    }
    per_point_rank[p] = point_rank;
    per_point_fields[p] = fields_tested;
  };

  parallel_chunks(points.size(),
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t p = begin; p < end; ++p) scan_point(p);
                  });

  // deterministic merge: minimum rank wins, ties broken by point index
  int needed = 0;
  bool all_spanned = true;
  for (std::size_t p = 0; p < points.size(); ++p) {
    scan.fields_tested = std::max(scan.fields_tested, per_point_fields[p]);
    if (scan.per_point_depth[p] < 0) {
      all_spanned = false;
      if (per_point_rank[p] < scan.min_rank) {
        scan.min_rank = per_point_rank[p];
        scan.worst_point = static_cast<int>(p);
      }
    } else {
      needed = std::max(needed, scan.per_point_depth[p]);
    }
  }
  scan.spans = all_spanned;
  scan.depth = all_spanned ? needed : 0;
  if (all_spanned) scan.min_rank = n;
  return scan;
}

}  // namespace carre
