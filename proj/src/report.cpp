#include "carre/report.hpp"

#include <cmath>
#include <cstdio>

namespace carre {

namespace {

// shortest round-trip decimal, printed the same way everywhere
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Json json_vector(const Vector& v) {
  Json arr = Json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json geometry_json(const MarkovTriple& T) {
  Json j;
  j["kind"] = to_string(T.kind());
  j["dimension"] = T.dim();
  j["fields"] = T.field_count();
  j["weighted"] = T.weighted();
  j["parameter"] = T.parameter();
  j["convention"] = T.description();
  return j;
}

Json to_json(const IdentityReport& report) {
  Json j;
  j["title"] = report.title;
  j["verdict"] = report.all_pass() ? "holds" : "violated";
  j["max_residual"] = report.max_residual();
  Json entries = Json::array();
  for (const auto& e : report.entries) {
    Json je;
    je["name"] = e.name;
    je["pass"] = e.pass;
    je["max_residual"] = e.max_residual;
    je["tolerance"] = e.tolerance;
    je["witness_point"] = json_vector(e.witness_point);
    je["witness"] = e.witness_label;
    if (!e.note.empty()) je["note"] = e.note;
    entries.push_back(std::move(je));
  }
  j["entries"] = std::move(entries);
  return j;
}

Json to_json(const ResidualReport& report) {
  Json j;
  j["pointwise_sup"] = report.pointwise_sup;
  j["worst_point"] = json_vector(report.worst_point);
  j["weak_form_sup"] = report.weak_sup;
  j["weak_form_worst_bump"] = report.weak_worst_index;
  j["points"] = report.points;
  j["test_functions"] = report.test_functions;
  return j;
}

Json to_json(const SpectrumReport& report) {
  Json j;
  j["basis"] = report.basis_description;
  j["matrix_dim"] = report.matrix_dim;
  Json eigs = Json::array();
  for (double v : report.smallest_eigenvalues) eigs.push_back(v);
  j["smallest_eigenvalues"] = std::move(eigs);
  j["tolerance"] = report.tol;
  j["verdict"] = report.stable ? "stable within tol" : "unstable";
  if (!report.stable) {
    Json witness = Json::array();
    for (int i = 0; i < report.witness_coefficients.size(); ++i)
      witness.push_back(report.witness_coefficients[i]);
    j["witness_coefficients"] = std::move(witness);
  }
  return j;
}

Json to_json(const InequalityReport& report) {
  Json j;
  j["name"] = report.name;
  if (!report.hypothesis_ok) {
    j["verdict"] = "values reported, hypotheses unverified";
    j["hypothesis_warning"] = report.hypothesis_warning;
  } else {
    j["verdict"] = report.holds ? "holds" : "violation found";
  }
  j["tolerance"] = report.tol;
  if (report.epsilon > 0.0) j["epsilon"] = report.epsilon;
  j["tests"] = report.tests;
  j["violations"] = report.violations;
  j["worst_margin"] = report.worst_margin;
  j["worst_index"] = report.worst_index;
  j["lhs_at_worst"] = report.lhs_at_worst;
  j["rhs_at_worst"] = report.rhs_at_worst;
  j["witness_point"] = json_vector(report.witness_point);
  j["witness"] = report.witness_label;
  if (!report.note.empty()) j["note"] = report.note;
  return j;
}

Json to_json(const RigidityReport& report) {
  Json j;
  j["K"] = report.K;
  j["gamma_integral"] = report.gamma_integral;
  j["gamma_sup"] = report.gamma_sup;
  j["gamma_mean"] = report.gamma_mean;
  j["k0_identity_sup"] = report.k0_identity_sup;
  j["epsilon"] = report.epsilon;
  j["lower_bound_violations"] = report.lower_bound_violations;
  j["lower_bound_worst_margin"] = report.lower_bound_worst_margin;
  j["worst_point"] = json_vector(report.worst_point);
  j["verdict"] = report.hypothesis_consistent
                     ? "diagnostics consistent with the claimed K"
                     : "hypothesis inconsistent";
  j["points"] = report.points;
  return j;
}

void write_csv(std::ostream& os, const PointTable& table,
               const std::string& check_name) {
  if (table.points.empty()) return;
  const int n = static_cast<int>(table.points.front().size());
  for (int a = 0; a < n; ++a) os << "x" << (a + 1) << ",";
  for (const auto& col : table.columns) os << col << ",";
  os << "check\n";
  for (std::size_t r = 0; r < table.points.size(); ++r) {
    for (int a = 0; a < n; ++a)
      os << format_double(table.points[r][a]) << ",";
    for (int c = 0; c < table.rows[r].size(); ++c)
      os << format_double(table.rows[r][c]) << ",";
    os << check_name << "\n";
  }
}

}  // namespace carre
