#pragma once

namespace pckal {

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse standard normal CDF; p must lie in (0, 1).
double normal_quantile(double p);

}  // namespace pckal
