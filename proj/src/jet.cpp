#include "carre/jet.hpp"

#include <cmath>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>

namespace carre {

namespace {

void enumerate_degree(int dim, int degree, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (dim == 1) {
    current.push_back(degree);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int share = degree; share >= 0; --share) {
    current.push_back(share);
    enumerate_degree(dim - 1, degree - share, current, out);
    current.pop_back();
  }
}

}  // namespace

JetTable::JetTable(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1) throw std::invalid_argument("jet dimension must be positive");
  if (order < 0) throw std::invalid_argument("jet order must be nonnegative");

  offsets_.assign(order + 2, 0);
  for (int d = 0; d <= order; ++d) {
    offsets_[d] = static_cast<int>(exponents_.size());
    std::vector<int> current;
    enumerate_degree(dim, d, current, exponents_);
  }
  offsets_[order + 1] = static_cast<int>(exponents_.size());

  const int n = size();
  degrees_.resize(n);
  factorials_.resize(n);
  std::map<std::vector<int>, int> lookup;
  for (int i = 0; i < n; ++i) {
    int deg = 0;
    double fact = 1.0;
    for (int a : exponents_[i]) {
      deg += a;
      for (int k = 2; k <= a; ++k) fact *= k;
    }
    degrees_[i] = deg;
    factorials_[i] = fact;
    lookup[exponents_[i]] = i;
  }

  raise_.assign(static_cast<std::size_t>(dim) * n, -1);
  for (int i = 0; i < n; ++i) {
    if (degrees_[i] >= order) continue;
    std::vector<int> up = exponents_[i];
    for (int axis = 0; axis < dim; ++axis) {
      ++up[axis];
      raise_[static_cast<std::size_t>(axis) * n + i] = lookup.at(up);
      --up[axis];
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      std::vector<int> sum = exponents_[i];
      for (int axis = 0; axis < dim; ++axis) sum[axis] += exponents_[j][axis];
      mul_triples_.push_back({static_cast<std::uint32_t>(i),
                              static_cast<std::uint32_t>(j),
                              static_cast<std::uint32_t>(lookup.at(sum))});
    }
  }
}

const JetTable* JetTable::get(int dim, int order) {
  // lock-free fast path: jets are built constantly from worker threads, so
  // the common (dim, order) lookups must not share a mutex or a refcount
  constexpr int kMaxDim = 32, kMaxOrder = 12;
  static std::atomic<const JetTable*> fast[kMaxDim + 1][kMaxOrder + 1] = {};
  const bool small = dim <= kMaxDim && order <= kMaxOrder;
  if (small) {
    const JetTable* hit = fast[dim][order].load(std::memory_order_acquire);
    if (hit) return hit;
  }
  static std::mutex mutex;
  static std::map<std::pair<int, int>, const JetTable*> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(dim, order);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, new JetTable(dim, order)).first;  // interned
    if (small) fast[dim][order].store(it->second, std::memory_order_release);
  }
  return it->second;
}

std::string JetTable::key(int idx) const {
  std::string out;
  for (int axis = 0; axis < dim_; ++axis) {
    if (axis) out.push_back(',');
    out += std::to_string(exponents_[idx][axis]);
  }
  return out;
}

Jet::Jet(int dim, int order, Vector point)
    : table_(JetTable::get(dim, order)), point_(std::move(point)) {
  if (point_.size() != dim)
    throw std::invalid_argument("base point size does not match dimension");
  coef_ = Eigen::VectorXd::Zero(table_->size());
}

Jet Jet::constant(double c, Vector point, int order) {
  const int dim = static_cast<int>(point.size());
  Jet jet(dim, order, std::move(point));
  jet.coef_[0] = c;
  return jet;
}

Jet Jet::variable(int i, Vector point, int order) {
  const int dim = static_cast<int>(point.size());
  if (i < 0 || i >= dim) throw std::out_of_range("variable index out of range");
  Jet jet(dim, order, std::move(point));
  jet.coef_[0] = jet.point_[i];
  if (order >= 1) jet.coef_[1 + i] = 1.0;
  return jet;
}

Jet Jet::with_coefficients(int dim, int order, Vector point,
                           Eigen::VectorXd coefficients) {
  Jet jet(dim, order, std::move(point));
  if (coefficients.size() != jet.coef_.size())
    throw std::invalid_argument("coefficient table has the wrong size");
  jet.coef_ = std::move(coefficients);
  return jet;
}

double Jet::coefficient(const std::vector<int>& alpha) const {
  const JetTable& t = *table_;
  for (int i = 0; i < t.size(); ++i)
    if (t.exponent(i) == alpha) return coef_[i];
  throw std::out_of_range("multi-index not in jet table");
}

double Jet::derivative(const std::vector<int>& alpha) const {
  const JetTable& t = *table_;
  for (int i = 0; i < t.size(); ++i)
    if (t.exponent(i) == alpha) return coef_[i] * t.factorial(i);
  throw std::out_of_range("multi-index not in jet table");
}

double Jet::first(int i) const {
  if (order() < 1) throw std::out_of_range("jet has no first-order data");
  return coef_[1 + i];
}

Jet Jet::truncated(int target) const {
  if (target > order()) throw std::invalid_argument("cannot raise jet order");
  if (target == order()) return *this;
  Jet out(dim(), target, point_);
  out.coef_ = coef_.head(out.table_->size());
  return out;
}

Jet Jet::partial(int i) const {
  if (order() < 1) throw std::invalid_argument("partial of an order-0 jet");
  if (i < 0 || i >= dim()) throw std::out_of_range("axis out of range");
  const JetTable& t = *table_;
  Jet out(dim(), order() - 1, point_);
  const int m = out.table_->size();
  for (int idx = 0; idx < m; ++idx) {
    const int up = t.raise(i, idx);
    out.coef_[idx] = coef_[up] * (t.exponent(idx)[i] + 1);
  }
  return out;
}

void Jet::require_compatible(const Jet& a, const Jet& b) {
  if (!a.valid() || !b.valid())
    throw std::invalid_argument("arithmetic on an empty jet");
  if (a.table_ != b.table_ &&
      (a.dim() != b.dim() || a.order() != b.order()))
    throw std::invalid_argument("jet dimension/order mismatch");
  if (a.point_ != b.point_)
    throw std::invalid_argument("jet base point mismatch");
}

Jet Jet::operator-() const {
  Jet out = *this;
  out.coef_ = -out.coef_;
  return out;
}

Jet& Jet::operator+=(const Jet& rhs) {
  require_compatible(*this, rhs);
  coef_ += rhs.coef_;
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  require_compatible(*this, rhs);
  coef_ -= rhs.coef_;
  return *this;
}

Jet& Jet::operator+=(double c) {
  coef_[0] += c;
  return *this;
}

Jet& Jet::operator-=(double c) {
  coef_[0] -= c;
  return *this;
}

Jet& Jet::operator*=(double c) {
  coef_ *= c;
  return *this;
}

Jet& Jet::operator/=(double c) {
  coef_ /= c;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet::require_compatible(a, b);
  Jet out(a.dim(), a.order(), a.point_);
  const auto& triples = a.table_->mul_triples();
  const double* pa = a.coef_.data();
  const double* pb = b.coef_.data();
  double* pc = out.coef_.data();
  for (const auto& t : triples) pc[t.target] += pa[t.left] * pb[t.right];
  return out;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.value() == 0.0) throw EvalError("division by a jet with zero value");
  return a * compose(recip_series(b.value(), b.order()), b);
}

std::string Jet::debug_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"dim\":" << dim() << ",\"order\":" << order() << ",\"point\":[";
  for (int i = 0; i < dim(); ++i) os << (i ? "," : "") << point_[i];
  os << "],\"coefficients\":{";
  for (int idx = 0; idx < table_->size(); ++idx) {
    if (idx) os << ",";
    os << '"' << table_->key(idx) << "\":" << coef_[idx];
  }
  os << "}}";
  return os.str();
}

UnivariateSeries exp_series(double t0, int order) {
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  double c = std::exp(t0);
  for (int k = 0; k <= order; ++k) {
    s.c[k] = c;
    c /= (k + 1);
  }
  return s;
}

UnivariateSeries log_series(double t0, int order) {
  if (t0 <= 0.0) throw EvalError("log of non-positive value " + std::to_string(t0));
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  s.c[0] = std::log(t0);
  double p = 1.0;
  for (int k = 1; k <= order; ++k) {
    p /= -t0;
    s.c[k] = -p / k;
  }
  return s;
}

UnivariateSeries sqrt_series(double t0, int order) {
  if (t0 <= 0.0)
    throw EvalError("sqrt of non-positive value " + std::to_string(t0));
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  s.c[0] = std::sqrt(t0);
  for (int k = 1; k <= order; ++k)
    s.c[k] = s.c[k - 1] * (1.5 - k) / (k * t0);
  return s;
}

UnivariateSeries sin_series(double t0, int order) {
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  const double cycle[4] = {std::sin(t0), std::cos(t0), -std::sin(t0),
                           -std::cos(t0)};
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 1) fact *= k;
    s.c[k] = cycle[k % 4] / (k < 2 ? 1.0 : fact);
  }
  return s;
}

UnivariateSeries cos_series(double t0, int order) {
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  const double cycle[4] = {std::cos(t0), -std::sin(t0), -std::cos(t0),
                           std::sin(t0)};
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 1) fact *= k;
    s.c[k] = cycle[k % 4] / (k < 2 ? 1.0 : fact);
  }
  return s;
}

UnivariateSeries tanh_series(double t0, int order) {
  // T' = 1 - T^2 gives (k+1) c_{k+1} = [k == 0] - sum_j c_j c_{k-j}.
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  s.c[0] = std::tanh(t0);
  for (int k = 0; k < order; ++k) {
    double conv = 0.0;
    for (int j = 0; j <= k; ++j) conv += s.c[j] * s.c[k - j];
    s.c[k + 1] = ((k == 0 ? 1.0 : 0.0) - conv) / (k + 1);
  }
  return s;
}

UnivariateSeries abs_series(double t0, int order) {
  UnivariateSeries s{t0, Eigen::VectorXd::Zero(order + 1)};
  if (t0 == 0.0) {
    if (order >= 1) throw EvalError("abs is not differentiable at 0");
    return s;
  }
  s.c[0] = std::abs(t0);
  if (order >= 1) s.c[1] = t0 > 0.0 ? 1.0 : -1.0;
  return s;
}

UnivariateSeries pow_series(double t0, double exponent, int order) {
  if (t0 <= 0.0)
    throw EvalError("pow with non-positive base " + std::to_string(t0) +
                    " and non-integer exponent");
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  s.c[0] = std::pow(t0, exponent);
  for (int k = 1; k <= order; ++k)
    s.c[k] = s.c[k - 1] * (exponent - k + 1) / (k * t0);
  return s;
}

UnivariateSeries recip_series(double t0, int order) {
  if (t0 == 0.0) throw EvalError("reciprocal of zero");
  UnivariateSeries s{t0, Eigen::VectorXd(order + 1)};
  double p = 1.0 / t0;
  for (int k = 0; k <= order; ++k) {
    s.c[k] = p;
    p /= -t0;
  }
  return s;
}

Jet compose(const UnivariateSeries& psi, const Jet& a) {
  if (psi.order() != a.order())
    throw std::invalid_argument("series order does not match jet order");
  Jet w = a;
  w -= a.value();
  Jet res = Jet::constant(psi.c[psi.order()], a.point(), a.order());
  for (int k = psi.order() - 1; k >= 0; --k) {
    res = res * w;
    res += psi.c[k];
  }
  return res;
}

Jet pow_int(const Jet& a, long m) {
  if (m < 0) throw std::invalid_argument("pow_int wants a nonnegative power");
  Jet res = Jet::constant(1.0, a.point(), a.order());
  Jet base = a;
  while (m > 0) {
    if (m & 1) res = res * base;
    m >>= 1;
    if (m) base = base * base;
  }
  return res;
}

Jet sin(const Jet& a) { return compose(sin_series(a.value(), a.order()), a); }
Jet cos(const Jet& a) { return compose(cos_series(a.value(), a.order()), a); }
Jet exp(const Jet& a) { return compose(exp_series(a.value(), a.order()), a); }
Jet log(const Jet& a) { return compose(log_series(a.value(), a.order()), a); }
Jet sqrt(const Jet& a) { return compose(sqrt_series(a.value(), a.order()), a); }
Jet tanh(const Jet& a) { return compose(tanh_series(a.value(), a.order()), a); }
Jet abs(const Jet& a) { return compose(abs_series(a.value(), a.order()), a); }

Jet pow(const Jet& a, double exponent) {
  const double rounded = std::nearbyint(exponent);
  if (exponent == rounded && rounded >= 0.0 && rounded <= 64.0)
    return pow_int(a, static_cast<long>(rounded));
  return compose(pow_series(a.value(), exponent, a.order()), a);
}

}  // namespace carre
