#include "ssdgp/types.hpp"

#include <cmath>

namespace ssdgp {

bool TimeSeriesData::has_measurement(std::size_t k) const { return std::isfinite(y[k]); }

void TimeSeriesData::validate() const {
  const std::size_t n = times.size();
  if (y.size() != n || noise_var.size() != n) {
    throw ConfigError("time series: times, y and noise variances must have equal length");
  }
  if (truth && truth->size() != n) {
    throw ConfigError("time series: truth length differs from times");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(times[k])) throw ConfigError("time series: non-finite time stamp");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw ConfigError("time series: times must be strictly increasing (index " + std::to_string(k) + ")");
    }
    if (has_measurement(k) && !(noise_var[k] >= 0.0)) {
      throw ConfigError("time series: noise variance must be non-negative");
    }
  }
}

double default_initial_time(const TimeSeriesData& data) {
  if (data.times.empty()) return 0.0;
  const double step = data.times.size() > 1 ? data.times[1] - data.times[0] : 1.0;
  return data.times[0] - step;
}

}  // namespace ssdgp
