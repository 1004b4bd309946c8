#pragma once

#include <functional>
#include <string>
#include <utility>

#include "carre/jet.hpp"

namespace carre {

/// A smooth scalar field known through its jets: an evaluator that produces
/// a truncated Taylor expansion at any requested point and order.  Instances
/// are immutable after construction and safe to share across threads.
class SmoothFunction {
 public:
  using Evaluator = std::function<Jet(const Vector&, int)>;

  SmoothFunction() = default;
  SmoothFunction(int dim, Evaluator eval, std::string name = {})
      : dim_(dim), eval_(std::move(eval)), name_(std::move(name)) {}

  bool valid() const { return static_cast<bool>(eval_); }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }

  Jet jet(const Vector& x, int order) const { return eval_(x, order); }
  double operator()(const Vector& x) const { return eval_(x, 0).value(); }

  SmoothFunction named(std::string name) const {
    SmoothFunction out = *this;
    out.name_ = std::move(name);
    return out;
  }

  static SmoothFunction constant(int dim, double c) {
    return SmoothFunction(
        dim, [c](const Vector& x, int order) { return Jet::constant(c, x, order); },
        std::to_string(c));
  }

  /// Coordinate function x_i, 0-based.
  static SmoothFunction coordinate(int dim, int i) {
    return SmoothFunction(
        dim, [i](const Vector& x, int order) { return Jet::variable(i, x, order); },
        "x" + std::to_string(i + 1));
  }

 private:
  int dim_ = 0;
  Evaluator eval_;
  std::string name_;
};

}  // namespace carre
