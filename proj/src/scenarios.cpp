#include "nsp/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace nsp {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::piecewise_constant: return "const";
    case ScenarioKind::piecewise_polynomial: return "poly";
    case ScenarioKind::custom_regression: return "custom";
  }
  return "unknown";
}

ScenarioKind scenario_from_string(const std::string& name) {
  if (name == "const" || name == "piecewise_constant") return ScenarioKind::piecewise_constant;
  if (name == "poly" || name == "piecewise_polynomial") return ScenarioKind::piecewise_polynomial;
  if (name == "custom" || name == "custom_regression") return ScenarioKind::custom_regression;
  throw std::invalid_argument("unknown scenario: " + name);
}

Index ScenarioSpec::base_columns() const {
  switch (kind) {
    case ScenarioKind::piecewise_constant: return 1;
    case ScenarioKind::piecewise_polynomial: return degree + 1;
    case ScenarioKind::custom_regression: return 0;
  }
  return 0;
}

Matrix build_design(const ScenarioSpec& spec, Index T, const std::optional<Matrix>& custom_x) {
  if (T < 1) throw std::invalid_argument("design length must be positive");
  if (spec.kind == ScenarioKind::custom_regression) {
    if (!custom_x) throw std::invalid_argument("custom scenario requires a design matrix");
    if (custom_x->rows() != T) {
      throw std::invalid_argument("design matrix has " + std::to_string(custom_x->rows()) + " rows, expected " +
                                  std::to_string(T));
    }
    if (custom_x->cols() < 1) throw std::invalid_argument("design matrix has no columns");
    return *custom_x;
  }
  if (custom_x) throw std::invalid_argument("a design matrix is only accepted for the custom scenario");
  if (spec.kind == ScenarioKind::piecewise_constant) return Matrix::Ones(T, 1);

  if (spec.degree < 0) throw std::invalid_argument("polynomial degree must be non-negative");
  Matrix x(T, spec.degree + 1);
  for (Index t = 1; t <= T; ++t) {
    const double u = static_cast<double>(t) / static_cast<double>(T);
    double power = 1.0;
    for (int i = 0; i <= spec.degree; ++i) {
      x(t - 1, i) = power;
      power *= u;
    }
  }
  return x;
}

AugmentedSeries augment_ar(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, int r) {
  const Index T = y.size();
  const Index p = x.cols();
  if (r < 1) throw std::invalid_argument("autoregressive order must be at least 1");
  if (x.rows() != T) throw std::invalid_argument("rows(X) != length(Y)");
  if (T <= r + p) throw std::invalid_argument("series too short for the autoregressive order");

  const Index rows = T - r;
  AugmentedSeries out{y.tail(rows), Matrix(rows, p + r)};
  out.x.leftCols(p) = x.bottomRows(rows);
  for (int k = 1; k <= r; ++k) out.x.col(p + k - 1) = y.segment(r - k, rows);
  return out;
}

}  // namespace nsp
