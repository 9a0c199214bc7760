#include "augtest/flattening.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace augtest {

AxisFlattening::AxisFlattening(std::vector<std::size_t> buckets) : buckets_(std::move(buckets)) {
  if (buckets_.empty()) throw std::invalid_argument("AxisFlattening: no symbols");
  offsets_.reserve(buckets_.size());
  for (auto b : buckets_) {
    if (b == 0) throw std::invalid_argument("AxisFlattening: every symbol needs at least one bucket");
    offsets_.push_back(flat_size_);
    flat_size_ += b;
  }
}

AxisFlattening AxisFlattening::identity(std::size_t n) { return AxisFlattening(std::vector<std::size_t>(n, 1)); }

Index AxisFlattening::base_of(Index flat) const {
  if (flat >= flat_size_) throw std::out_of_range("AxisFlattening: flattened id out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
  return static_cast<Index>(it - offsets_.begin()) - 1;
}

AxisFlattening build_axis_flattening(const JointDistribution& pred_marginal,
                                     std::span<const std::size_t> counts, std::optional<double> nu) {
  if (pred_marginal.domain().rank() != 1) {
    throw std::invalid_argument("build_axis_flattening: prediction must be one-dimensional");
  }
  const std::size_t n = pred_marginal.size();
  if (counts.size() != n) throw std::invalid_argument("build_axis_flattening: counts length mismatch");
  if (nu && !(*nu > 0.0)) throw std::invalid_argument("build_axis_flattening: nu must be positive");

  std::vector<std::size_t> buckets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = nu ? pred_marginal[i] / *nu : static_cast<double>(n) * pred_marginal[i];
    // n * (1/n) can land a hair below 1 in floating point.
    const auto whole = static_cast<std::size_t>(std::floor(scaled + 1e-9));
    buckets[i] = whole + counts[i] + 1;
  }
  return AxisFlattening(std::move(buckets));
}

namespace {

std::vector<std::size_t> base_dims(const std::vector<AxisFlattening>& axes) {
  std::vector<std::size_t> d;
  for (const auto& a : axes) d.push_back(a.base_size());
  return d;
}

std::vector<std::size_t> flat_dims(const std::vector<AxisFlattening>& axes) {
  std::vector<std::size_t> d;
  for (const auto& a : axes) d.push_back(a.flat_size());
  return d;
}

}  // namespace

ProductFlattening::ProductFlattening(std::vector<AxisFlattening> axes)
    : axes_(std::move(axes)), base_(base_dims(axes_)), flat_(flat_dims(axes_)) {}

std::size_t ProductFlattening::buckets_of(Index base_linear) const {
  std::size_t b = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) b *= axes_[a].buckets(base_.coordinate(base_linear, a));
  return b;
}

Index ProductFlattening::flatten(Index base_linear, Rng& rng) const {
  Index out = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    out = out * axes_[a].flat_size() + axes_[a].flatten(base_.coordinate(base_linear, a), rng);
  }
  return out;
}

Tuple flatten_sample(const ProductFlattening& flattening, std::span<const Index> base, Rng& rng) {
  const Index linear = flattening.base_domain().linear(base);
  return flattening.flat_domain().tuple(flattening.flatten(linear, rng));
}

JointDistribution flatten_distribution_explicit(const JointDistribution& p, const ProductFlattening& flattening) {
  if (!(p.domain() == flattening.base_domain())) {
    throw std::invalid_argument("flatten_distribution_explicit: domain mismatch");
  }
  const auto& flat = flattening.flat_domain();
  const std::size_t rank = flattening.rank();
  // Base symbol behind each flattened coordinate, per axis.
  std::vector<std::vector<Index>> owner(rank);
  for (std::size_t a = 0; a < rank; ++a) {
    const auto& ax = flattening.axis(a);
    owner[a].resize(ax.flat_size());
    for (Index i = 0; i < ax.base_size(); ++i) {
      std::fill_n(owner[a].begin() + static_cast<std::ptrdiff_t>(ax.offset(i)), ax.buckets(i), i);
    }
  }
  const auto& base = flattening.base_domain();
  std::vector<double> out(flat.size());
  for (Index f = 0; f < flat.size(); ++f) {
    Index b = 0;
    double denom = 1.0;
    for (std::size_t a = 0; a < rank; ++a) {
      const Index sym = owner[a][flat.coordinate(f, a)];
      b += sym * base.stride(a);
      denom *= static_cast<double>(flattening.axis(a).buckets(sym));
    }
    out[f] = p[b] / denom;
  }
  return {flat, std::move(out)};
}

Index sample_flattened_product(const Sampler& base, const ProductFlattening& flattening, Rng& rng) {
  if (!(base.domain == flattening.base_domain())) {
    throw std::invalid_argument("sample_flattened_product: flattening arity does not match the domain");
  }
  Index out = 0;
  for (std::size_t a = 0; a < flattening.rank(); ++a) {
    const Index draw = base.draw(rng);
    const auto& ax = flattening.axis(a);
    out = out * ax.flat_size() + ax.flatten(base.domain.coordinate(draw, a), rng);
  }
  return out;
}

}  // namespace augtest
