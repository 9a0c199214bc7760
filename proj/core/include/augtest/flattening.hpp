#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "augtest/domain.hpp"

namespace augtest {

/// Splits each symbol i of [n] into b_i equal-mass sub-buckets. Flattened
/// symbols are numbered contiguously: symbol i owns [offset(i), offset(i) + b_i).
class AxisFlattening {
 public:
  explicit AxisFlattening(std::vector<std::size_t> buckets);

  /// All-ones flattening of [n].
  static AxisFlattening identity(std::size_t n);

  std::size_t base_size() const noexcept { return buckets_.size(); }
  std::size_t flat_size() const noexcept { return flat_size_; }
  const std::vector<std::size_t>& buckets() const noexcept { return buckets_; }
  std::size_t buckets(Index symbol) const { return buckets_.at(symbol); }
  std::size_t offset(Index symbol) const { return offsets_.at(symbol); }

  /// Flattened id of sub-bucket `sub` of `symbol`.
  Index flat_index(Index symbol, std::size_t sub) const { return offsets_[symbol] + sub; }
  /// Maps `symbol` to one of its sub-buckets chosen uniformly.
  Index flatten(Index symbol, Rng& rng) const {
    return offsets_[symbol] + static_cast<Index>(rng.uniform_index(buckets_[symbol]));
  }
  /// Base symbol owning a flattened id.
  Index base_of(Index flat) const;

  bool operator==(const AxisFlattening& other) const noexcept { return buckets_ == other.buckets_; }

 private:
  std::vector<std::size_t> buckets_;
  std::vector<std::size_t> offsets_;
  std::size_t flat_size_ = 0;
};

/// Bucket counts b_i = floor(pred(i) / nu) + N_i + 1 over a one-axis
/// prediction. `nu` defaults to 1/n. Throws when nu <= 0 or the counts do not
/// match the prediction's length.
AxisFlattening build_axis_flattening(const JointDistribution& pred_marginal,
                                     std::span<const std::size_t> counts,
                                     std::optional<double> nu = std::nullopt);

/// Coordinate-wise flattening of a product domain: tuple (i_1, ..., i_d)
/// receives prod_l b^(l)_{i_l} buckets.
class ProductFlattening {
 public:
  explicit ProductFlattening(std::vector<AxisFlattening> axes);

  std::size_t rank() const noexcept { return axes_.size(); }
  const AxisFlattening& axis(std::size_t a) const { return axes_.at(a); }
  const std::vector<AxisFlattening>& axes() const noexcept { return axes_; }
  const ProductDomain& base_domain() const noexcept { return base_; }
  const ProductDomain& flat_domain() const noexcept { return flat_; }

  /// Number of buckets assigned to a base tuple.
  std::size_t buckets_of(Index base_linear) const;

  /// Flattened linear index of a base linear index; sub-buckets drawn
  /// independently per axis.
  Index flatten(Index base_linear, Rng& rng) const;

 private:
  std::vector<AxisFlattening> axes_;
  ProductDomain base_;
  ProductDomain flat_;
};

/// Validating tuple form of ProductFlattening::flatten.
Tuple flatten_sample(const ProductFlattening& flattening, std::span<const Index> base, Rng& rng);

/// p^(F)(x, sub) = p(x) / (buckets of x).
JointDistribution flatten_distribution_explicit(const JointDistribution& p, const ProductFlattening& flattening);

/// One draw from prod_l p_l^(F_l): axis l is read from the l-th of `rank`
/// independent joint draws and flattened on its own. Consumes rank draws.
Index sample_flattened_product(const Sampler& base, const ProductFlattening& flattening, Rng& rng);

}  // namespace augtest
