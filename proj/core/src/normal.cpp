#include "pckal/normal.hpp"

#include <boost/math/distributions/normal.hpp>

#include "pckal/errors.hpp"

namespace pckal {

double normal_cdf(double z) {
  return boost::math::cdf(boost::math::normal_distribution<double>{}, z);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::validation, "normal_quantile requires p in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

}  // namespace pckal
