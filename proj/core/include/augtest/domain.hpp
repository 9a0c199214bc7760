#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "augtest/rng.hpp"

namespace augtest {

using Index = std::size_t;
using Tuple = std::vector<Index>;
/// Ordered partition of axis ids into blocks.
using Grouping = std::vector<std::vector<std::size_t>>;

/// Tolerance on the total mass of an explicit distribution.
inline constexpr double kNormalizationTolerance = 1e-9;

/// Product domain [n_1] x ... x [n_d], indices zero-based, row-major with the
/// last axis varying fastest.
class ProductDomain {
 public:
  explicit ProductDomain(std::vector<std::size_t> dims);

  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return size_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t stride(std::size_t axis) const { return strides_.at(axis); }

  Index linear(std::span<const Index> tuple) const;
  Tuple tuple(Index linear) const;
  Index coordinate(Index linear, std::size_t axis) const {
    return (linear / strides_[axis]) % dims_[axis];
  }

  bool operator==(const ProductDomain& other) const noexcept { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// Explicit probability table over a ProductDomain. Immutable once built.
class JointDistribution {
 public:
  /// Rejects negative or non-finite entries and totals outside 1 +- 1e-9.
  JointDistribution(ProductDomain domain, std::vector<double> probs);

  static JointDistribution uniform(const ProductDomain& domain);
  static JointDistribution point_mass(const ProductDomain& domain, Index at);

  const ProductDomain& domain() const noexcept { return domain_; }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](Index i) const { return probs_[i]; }
  double at(std::span<const Index> tuple) const { return probs_[domain_.linear(tuple)]; }
  std::size_t size() const noexcept { return probs_.size(); }

  double l2_squared() const;

 private:
  ProductDomain domain_;
  std::vector<double> probs_;
};

/// Half the l1 distance. Throws on domain mismatch.
double tv_distance(const JointDistribution& p, const JointDistribution& q);

/// Sums out every axis not in `axes`. Kept axes appear in ascending order.
JointDistribution marginal(const JointDistribution& p, std::vector<std::size_t> axes);

/// Product of the block marginals, laid out on p's domain.
JointDistribution product_of_marginals(const JointDistribution& p, const Grouping& grouping);
/// Product of the univariate marginals.
JointDistribution product_of_marginals(const JointDistribution& p);

/// Singleton blocks {0}, {1}, ..., {d-1}.
Grouping singleton_grouping(std::size_t rank);

/// True iff `grouping` partitions {0, ..., rank-1}.
bool is_partition(const Grouping& grouping, std::size_t rank);

// --- Coordinate reshaping -------------------------------------------------
//
// A row-major table keeps its linear order when contiguous axes are merged or
// split, so reshaping only relabels tuples. Two dims vectors are compatible
// when they share the boundaries of the coarser one.

/// True iff one dims vector is a contiguous refinement of the other.
bool reshape_compatible(std::span<const std::size_t> from, std::span<const std::size_t> to);

JointDistribution reshape(const JointDistribution& p, std::vector<std::size_t> target_dims);
Tuple reshape_tuple(std::span<const Index> tuple, const ProductDomain& from, const ProductDomain& to);

/// Dims obtained by merging each block of contiguous axes.
std::vector<std::size_t> merged_dims(std::span<const std::size_t> dims, const Grouping& grouping);

/// Reorders axes: axis k of the result is axis perm[k] of p.
JointDistribution permute_axes(const JointDistribution& p, std::span<const std::size_t> perm);
/// Maps a linear index of `from` to the linear index of the permuted domain.
Index permute_index(Index linear, const ProductDomain& from, std::span<const std::size_t> perm);

// --- Sampling ---------------------------------------------------------------

/// Cumulative-table sampler with binary search. Shares its table on copy.
class TableSampler {
 public:
  explicit TableSampler(const JointDistribution& p);

  const ProductDomain& domain() const noexcept { return *domain_; }
  Index operator()(Rng& rng) const;

 private:
  std::shared_ptr<const ProductDomain> domain_;
  std::shared_ptr<const std::vector<double>> cumulative_;
};

/// Sample access to a distribution: the testers see nothing else of p.
struct Sampler {
  ProductDomain domain;
  std::function<Index(Rng&)> draw;
};

Sampler make_sampler(const JointDistribution& p);

/// i.i.d. index tuples from p.
std::vector<Tuple> draw_samples(const JointDistribution& p, std::size_t count, Rng& rng);

/// Per-stage counts of draws from the distribution under test.
struct SampleAccount {
  std::uint64_t flatten = 0;
  std::uint64_t norm = 0;
  std::uint64_t closeness = 0;
  std::uint64_t learning = 0;

  std::uint64_t total() const noexcept { return flatten + norm + closeness + learning; }
  SampleAccount& operator+=(const SampleAccount& other) noexcept;
  bool operator==(const SampleAccount&) const = default;
};

}  // namespace augtest
