#include "nsp/noise_scale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nsp {

namespace {

constexpr double kMadConsistency = 1.4826;

void require_length(Index T) {
  if (T < 2) throw std::invalid_argument("scale estimation needs T >= 2");
}

// Per-window OLS residual variances, divisor w - p.
Vector window_variances(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x, Index w) {
  const Index T = y.size();
  const Index p = x.cols();
  if (x.rows() != T) throw std::invalid_argument("rows(X) != length(Y)");
  if (w <= p) throw std::invalid_argument("mols window must exceed the number of regressors");
  Vector out(T - w + 1);
  for (Index t = 0; t + w <= T; ++t) {
    const auto xw = x.middleRows(t, w);
    const auto yw = y.segment(t, w);
    const Eigen::ColPivHouseholderQR<Matrix> qr(xw);
    const Vector residual = yw - xw * qr.solve(Vector(yw));
    out[t] = residual.squaredNorm() / static_cast<double>(w - p);
  }
  return out;
}

}  // namespace

std::string to_string(ScaleMethod method) {
  switch (method) {
    case ScaleMethod::rice: return "rice";
    case ScaleMethod::mad: return "mad";
    case ScaleMethod::mols: return "mols";
    case ScaleMethod::user_supplied: return "user_supplied";
  }
  return "unknown";
}

double median(Vector v) {
  if (v.size() == 0) throw std::invalid_argument("median of empty vector");
  const auto n = static_cast<std::size_t>(v.size());
  double* data = v.data();
  std::nth_element(data, data + n / 2, data + n);
  const double upper = data[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(data, data + n / 2);
  return 0.5 * (lower + upper);
}

ScaleEstimate sigma_rice(const Eigen::Ref<const Vector>& y) {
  const Index T = y.size();
  require_length(T);
  const Vector diff = y.tail(T - 1) - y.head(T - 1);
  return {ScaleMethod::rice, std::sqrt(diff.squaredNorm() / (2.0 * static_cast<double>(T - 1))), 0};
}

ScaleEstimate sigma_mad(const Eigen::Ref<const Vector>& y) {
  const Index T = y.size();
  require_length(T);
  const Vector diff = (y.tail(T - 1) - y.head(T - 1)) / std::sqrt(2.0);
  const double centre = median(diff);
  return {ScaleMethod::mad, kMadConsistency * median((diff.array() - centre).abs().matrix()), 0};
}

Index mols_window(Index T) {
  const auto root = static_cast<Index>(std::ceil(std::sqrt(static_cast<double>(T))));
  return std::min(T, std::max<Index>(root, 20));
}

ScaleEstimate sigma_mols(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x) {
  const Index w = mols_window(y.size());
  const Vector variances = window_variances(y, x, w);
  return {ScaleMethod::mols, median(variances.cwiseSqrt()), w};
}

double vt_estimate(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x) {
  const Index T = y.size();
  const Index w = mols_window(T);
  const Vector variances = window_variances(y, x, w);
  return static_cast<double>(T) / static_cast<double>(T - w + 1) * variances.sum();
}

}  // namespace nsp
