#pragma once

#include <cstdint>
#include <vector>

#include "carre/smooth_function.hpp"

namespace carre {

/// Portable deterministic PRNG (splitmix64).  Used instead of <random>
/// distributions so that seeded runs are bit-reproducible everywhere.
struct SplitMix64 {
  std::uint64_t state = 0x9e3779b97f4a7c15ull;

  explicit SplitMix64(std::uint64_t seed = 0) { state += seed * 0x9e3779b97f4a7c15ull; }

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct Box {
  Vector lower, upper;
  int dim() const { return static_cast<int>(lower.size()); }
  double volume() const;
  static Box cube(int dim, double lo, double hi);
};

/// Halton low-discrepancy points in the box, Cranley-Patterson rotated by the
/// seed so distinct seeds give distinct (still deterministic) point sets.
std::vector<Vector> halton_points(const Box& box, int count,
                                  std::uint64_t seed);

/// Explicit multivariate polynomial; the test-suite workhorse for random
/// sample functions.
struct Polynomial {
  struct Term {
    double coefficient;
    std::vector<int> exponents;
  };

  int dim = 0;
  std::vector<Term> terms;

  double operator()(const Vector& x) const;
  Jet jet(const Vector& x, int order) const;
  SmoothFunction function(std::string name = "poly") const;
};

/// Dense random polynomial of total degree <= max_degree with coefficients
/// drawn from [-scale, scale] / (#terms), keeping values O(scale) on the
/// unit box.
Polynomial random_polynomial(int dim, int max_degree, SplitMix64& rng,
                             double scale = 1.0);

}  // namespace carre
