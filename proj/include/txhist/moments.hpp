#ifndef TXHIST_MOMENTS_HPP
#define TXHIST_MOMENTS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "txhist/core.hpp"

namespace txhist {

namespace detail {

// Empty sample: all zero. One sample or zero variance: m3 = m4 = 0.
template <typename Scalar>
Moments<Scalar> standardize(Scalar mean, Scalar central2, Scalar central3, Scalar central4,
                            std::size_t n) {
  Moments<Scalar> out;
  out.sample_count = n;
  if (n == 0) return out;
  out.m1 = mean;
  if (n == 1 || !(central2 > Scalar(0))) return out;
  out.m2 = central2;
  const Scalar sigma = std::sqrt(central2);
  out.m3 = central3 / (central2 * sigma);
  out.m4 = central4 / (central2 * central2);
  return out;
}

}  // namespace detail

/// Mean, population variance, standardized skewness and kurtosis of `samples`.
/// Two passes over the data; works on any Eigen vector or array expression.
template <typename Derived>
Moments<typename Derived::Scalar> raw_moments(const Eigen::DenseBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> x = samples.derived().reshaped().array();
  const auto n = static_cast<std::size_t>(x.size());
  if (n == 0) return {};
  const Scalar mean = x.mean();
  if (x.minCoeff() == x.maxCoeff()) return detail::standardize<Scalar>(x(0), 0, 0, 0, n);
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> d = x - mean;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> d2 = d.square();
  return detail::standardize<Scalar>(mean, d2.mean(), (d2 * d).mean(), d2.square().mean(), n);
}

template <typename Scalar>
Moments<Scalar> raw_moments(std::span<const Scalar> samples) {
  return raw_moments(
      Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>(samples.data(), samples.size()));
}

template <typename Scalar>
Moments<Scalar> raw_moments(const std::vector<Scalar>& samples) {
  return raw_moments(std::span<const Scalar>(samples));
}

/// raw_moments with m1 replaced by mean - min. Higher moments are central and
/// therefore unchanged by the shift.
template <typename Derived>
Moments<typename Derived::Scalar> min_shifted_moments(const Eigen::DenseBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Array<Scalar, Eigen::Dynamic, 1> x = samples.derived().reshaped().array();
  if (x.size() == 0) return {};
  auto out = raw_moments(x);
  out.m1 = (x - x.minCoeff()).mean();
  return out;
}

template <typename Scalar>
Moments<Scalar> min_shifted_moments(std::span<const Scalar> samples) {
  return min_shifted_moments(
      Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>(samples.data(), samples.size()));
}

template <typename Scalar>
Moments<Scalar> min_shifted_moments(const std::vector<Scalar>& samples) {
  return min_shifted_moments(std::span<const Scalar>(samples));
}

/// Single-pass accumulator for the first four moments (Pebay's update
/// formulas). Values are stored relative to the first sample so that the
/// min-shifted mean keeps full precision for large block heights.
template <typename Scalar>
class MomentAccumulator {
 public:
  void add(Scalar value) {
    if (count_ == 0) {
      pivot_ = value;
      min_ = value;
    }
    const Scalar x = value - pivot_;
    min_ = std::min(min_, value);

    const Scalar n1 = static_cast<Scalar>(count_);
    ++count_;
    const Scalar n = static_cast<Scalar>(count_);
    const Scalar delta = x - mean_;
    const Scalar delta_n = delta / n;
    const Scalar delta_n2 = delta_n * delta_n;
    const Scalar term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3 * n + 3) + 6 * delta_n2 * m2_ - 4 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2) - 3 * delta_n * m2_;
    m2_ += term1;
  }

  std::size_t count() const { return count_; }
  Scalar min() const { return min_; }
  Scalar mean() const { return count_ ? pivot_ + mean_ : Scalar(0); }

  /// Population variance.
  Scalar variance() const { return count_ ? m2_ / static_cast<Scalar>(count_) : Scalar(0); }

  Moments<Scalar> raw() const { return finish(pivot_ + mean_); }

  Moments<Scalar> min_shifted() const { return finish(mean_ - (min_ - pivot_)); }

 private:
  Moments<Scalar> finish(Scalar first) const {
    if (count_ == 0) return {};
    const Scalar n = static_cast<Scalar>(count_);
    return detail::standardize<Scalar>(first, m2_ / n, m3_ / n, m4_ / n, count_);
  }

  std::size_t count_ = 0;
  Scalar pivot_ = 0;
  Scalar min_ = 0;
  Scalar mean_ = 0;
  Scalar m2_ = 0;
  Scalar m3_ = 0;
  Scalar m4_ = 0;
};

}  // namespace txhist

#endif  // TXHIST_MOMENTS_HPP
