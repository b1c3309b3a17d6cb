#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gearnet/errors.hpp"
#include "gearnet/loads.hpp"

namespace gearnet {

TimeFunction::TimeFunction(double value) : value_(value) {}

TimeFunction TimeFunction::constant(double value) { return TimeFunction(value); }

TimeFunction TimeFunction::piecewise_linear(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw ValidationError("time series needs at least one sample");
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].first > samples[i - 1].first)) {
      throw ValidationError("time series sample times must be strictly increasing");
    }
  }
  TimeFunction f;
  if (samples.size() == 1) {
    f.value_ = samples.front().second;
    return f;
  }
  f.kind_ = Kind::table;
  f.samples_ = std::move(samples);
  return f;
}

TimeFunction TimeFunction::custom(std::function<double(double)> fn) {
  TimeFunction f;
  f.kind_ = Kind::custom;
  f.custom_ = std::move(fn);
  return f;
}

double TimeFunction::operator()(double t) const {
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::custom:
      return custom_(t);
    case Kind::table: {
      if (t <= samples_.front().first) return samples_.front().second;
      if (t >= samples_.back().first) return samples_.back().second;
      const auto hi = std::upper_bound(samples_.begin(), samples_.end(), t,
                                       [](double value, const auto& s) { return value < s.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return value_;
}

double TimeFunction::derivative(double t) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::custom: {
      const double h = 1e-6 * std::max(1.0, std::abs(t));
      return (custom_(t + h) - custom_(t - h)) / (2.0 * h);
    }
    case Kind::table: {
      if (t < samples_.front().first || t >= samples_.back().first) return 0.0;
      const auto hi = std::upper_bound(samples_.begin(), samples_.end(), t,
                                       [](double value, const auto& s) { return value < s.first; });
      const auto lo = hi - 1;
      return (hi->second - lo->second) / (hi->first - lo->first);
    }
  }
  return 0.0;
}

}  // namespace gearnet
