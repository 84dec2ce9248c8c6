#ifndef NSP_NOISE_SCALE_HPP
#define NSP_NOISE_SCALE_HPP

#include "nsp/types.hpp"

#include <string>

namespace nsp {

enum class ScaleMethod { rice, mad, mols, user_supplied };

std::string to_string(ScaleMethod method);

struct ScaleEstimate {
  ScaleMethod method = ScaleMethod::user_supplied;
  double sigma_hat = 0.0;
  Index window = 0;  // mols only
};

/// Rice: sigma^2 = sum (Y_{t+1} - Y_t)^2 / (2 (T - 1)).
ScaleEstimate sigma_rice(const Eigen::Ref<const Vector>& y);

/// MAD (consistency constant 1.4826) of the differences (Y_{t+1} - Y_t)/sqrt(2).
ScaleEstimate sigma_mad(const Eigen::Ref<const Vector>& y);

/// min{T, max(ceil(sqrt(T)), 20)}.
Index mols_window(Index T);

/// Median over rolling windows of length w of the OLS residual standard
/// deviation (divisor w - p).
ScaleEstimate sigma_mols(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x);

/// V_T^2 = T/(T - w + 1) * sum_t sigma_t^2 from the mols window estimators.
double vt_estimate(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Matrix>& x);

/// Median of a copy of v (mean of the two central values for even sizes).
double median(Vector v);

}  // namespace nsp

#endif  // NSP_NOISE_SCALE_HPP
