#pragma once

#include <string>
#include <vector>

#include "carre/triple.hpp"

namespace carre {

/// Declarative description of a built-in (or user supplied) geometry.
struct GeometrySpec {
  GeometryKind kind = GeometryKind::EuclideanWeighted;
  int dimension = 2;             // euclidean-weighted, ornstein-uhlenbeck, filiform, custom
  int alpha = 1;                 // grushin exponent
  std::string eta_expression;    // optional log-weight (empty = unweighted)
  std::vector<std::vector<std::string>> custom_frame;  // coefficients per field
};

/// Realizes the catalog:
///   euclidean-weighted  frame d_1..d_n, optional eta
///   ornstein-uhlenbeck  euclidean frame with eta = -|x|^2/2
///   heisenberg          X = d_x - (y/2) d_t,  Y = d_y + (x/2) d_t
///   engel               Z1 = d_1, Z2 = d_2 + x_1 d_3 + (x_1^2/2) d_4
///   filiform E_n        Z1 = d_1, Z2 = d_2 + sum_{i>=3} x_1^{i-2}/(i-2)! d_i
///   grushin             Z1 = d_x, Z2 = x^alpha d_y  (x^alpha, not |x|^alpha,
///                       so jets stay valid across {x = 0})
///   custom              user frame expressions plus optional eta
/// Throws std::invalid_argument on bad parameters.
MarkovTriple make_geometry(const GeometrySpec& spec);

}  // namespace carre
