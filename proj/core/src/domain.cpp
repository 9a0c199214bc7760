#include "augtest/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace augtest {

ProductDomain::ProductDomain(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("ProductDomain: at least one axis required");
  strides_.assign(dims_.size(), 1);
  for (std::size_t a = dims_.size(); a-- > 0;) {
    if (dims_[a] < 2) {
      throw std::invalid_argument("ProductDomain: axis " + std::to_string(a) + " has size " +
                                  std::to_string(dims_[a]) + " (< 2)");
    }
    strides_[a] = size_;
    if (size_ > std::numeric_limits<std::size_t>::max() / dims_[a]) {
      throw std::overflow_error("ProductDomain: total size overflows");
    }
    size_ *= dims_[a];
  }
}

Index ProductDomain::linear(std::span<const Index> tuple) const {
  if (tuple.size() != dims_.size()) throw std::invalid_argument("ProductDomain: tuple rank mismatch");
  Index idx = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (tuple[a] >= dims_[a]) throw std::out_of_range("ProductDomain: coordinate out of range");
    idx += tuple[a] * strides_[a];
  }
  return idx;
}

Tuple ProductDomain::tuple(Index linear) const {
  if (linear >= size_) throw std::out_of_range("ProductDomain: linear index out of range");
  Tuple t(dims_.size());
  for (std::size_t a = dims_.size(); a-- > 0;) {
    t[a] = linear % dims_[a];
    linear /= dims_[a];
  }
  return t;
}

JointDistribution::JointDistribution(ProductDomain domain, std::vector<double> probs)
    : domain_(std::move(domain)), probs_(std::move(probs)) {
  if (probs_.size() != domain_.size()) {
    throw std::invalid_argument("JointDistribution: expected " + std::to_string(domain_.size()) +
                                " probabilities, got " + std::to_string(probs_.size()));
  }
  double total = 0.0;
  for (double v : probs_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("JointDistribution: probabilities must be finite and non-negative");
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("JointDistribution: probabilities sum to " + std::to_string(total));
  }
}

JointDistribution JointDistribution::uniform(const ProductDomain& domain) {
  return {domain, std::vector<double>(domain.size(), 1.0 / static_cast<double>(domain.size()))};
}

JointDistribution JointDistribution::point_mass(const ProductDomain& domain, Index at) {
  if (at >= domain.size()) throw std::out_of_range("point_mass: index out of range");
  std::vector<double> probs(domain.size(), 0.0);
  probs[at] = 1.0;
  return {domain, std::move(probs)};
}

double JointDistribution::l2_squared() const {
  double s = 0.0;
  for (double v : probs_) s += v * v;
  return s;
}

double tv_distance(const JointDistribution& p, const JointDistribution& q) {
  if (!(p.domain() == q.domain())) throw std::invalid_argument("tv_distance: domain mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return 0.5 * s;
}

namespace {

void check_axes(const std::vector<std::size_t>& axes, std::size_t rank, const char* what) {
  if (axes.empty()) throw std::invalid_argument(std::string(what) + ": empty axis set");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] >= rank) throw std::out_of_range(std::string(what) + ": axis out of range");
    if (i > 0 && axes[i] == axes[i - 1]) throw std::invalid_argument(std::string(what) + ": repeated axis");
  }
}

// Rescales a table whose total is within rounding of 1.
std::vector<double> renormalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

JointDistribution marginal(const JointDistribution& p, std::vector<std::size_t> axes) {
  std::sort(axes.begin(), axes.end());
  const auto& dom = p.domain();
  check_axes(axes, dom.rank(), "marginal");

  std::vector<std::size_t> out_dims;
  for (auto a : axes) out_dims.push_back(dom.dim(a));
  ProductDomain out_dom(out_dims);

  std::vector<double> out(out_dom.size(), 0.0);
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    Index j = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) j += dom.coordinate(i, axes[k]) * out_dom.stride(k);
    out[j] += p[i];
  }
  return {std::move(out_dom), renormalized(std::move(out))};
}

bool is_partition(const Grouping& grouping, std::size_t rank) {
  std::vector<int> seen(rank, 0);
  for (const auto& block : grouping) {
    if (block.empty()) return false;
    for (auto a : block) {
      if (a >= rank || seen[a]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

Grouping singleton_grouping(std::size_t rank) {
  Grouping g(rank);
  for (std::size_t a = 0; a < rank; ++a) g[a] = {a};
  return g;
}

JointDistribution product_of_marginals(const JointDistribution& p, const Grouping& grouping) {
  const auto& dom = p.domain();
  if (!is_partition(grouping, dom.rank())) {
    throw std::invalid_argument("product_of_marginals: grouping is not a partition of the axes");
  }
  struct Block {
    std::vector<std::size_t> axes;
    JointDistribution table;
  };
  std::vector<Block> blocks;
  for (const auto& g : grouping) {
    auto axes = g;
    std::sort(axes.begin(), axes.end());
    blocks.push_back({axes, marginal(p, axes)});
  }

  std::vector<double> out(dom.size());
  for (Index i = 0; i < dom.size(); ++i) {
    double v = 1.0;
    for (const auto& b : blocks) {
      Index j = 0;
      for (std::size_t k = 0; k < b.axes.size(); ++k) {
        j += dom.coordinate(i, b.axes[k]) * b.table.domain().stride(k);
      }
      v *= b.table[j];
    }
    out[i] = v;
  }
  return {dom, renormalized(std::move(out))};
}

JointDistribution product_of_marginals(const JointDistribution& p) {
  return product_of_marginals(p, singleton_grouping(p.domain().rank()));
}

namespace {

std::vector<std::size_t> prefix_products(std::span<const std::size_t> dims) {
  std::vector<std::size_t> out;
  std::size_t acc = 1;
  for (auto d : dims) out.push_back(acc *= d);
  return out;
}

bool is_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

bool reshape_compatible(std::span<const std::size_t> from, std::span<const std::size_t> to) {
  const auto a = prefix_products(from);
  const auto b = prefix_products(to);
  if (a.empty() || b.empty() || a.back() != b.back()) return false;
  return is_subset(a, b) || is_subset(b, a);
}

JointDistribution reshape(const JointDistribution& p, std::vector<std::size_t> target_dims) {
  if (!reshape_compatible(p.domain().dims(), target_dims)) {
    throw std::invalid_argument("reshape: target dims do not regroup the source axes");
  }
  return {ProductDomain(std::move(target_dims)), std::vector<double>(p.probs().begin(), p.probs().end())};
}

Tuple reshape_tuple(std::span<const Index> tuple, const ProductDomain& from, const ProductDomain& to) {
  if (!reshape_compatible(from.dims(), to.dims())) {
    throw std::invalid_argument("reshape_tuple: incompatible domains");
  }
  return to.tuple(from.linear(tuple));
}

std::vector<std::size_t> merged_dims(std::span<const std::size_t> dims, const Grouping& grouping) {
  std::vector<std::size_t> out;
  std::size_t next = 0;
  for (const auto& block : grouping) {
    if (block.empty()) throw std::invalid_argument("merged_dims: empty block");
    std::size_t prod = 1;
    for (auto a : block) {
      if (a != next || a >= dims.size()) {
        throw std::invalid_argument("merged_dims: blocks must be contiguous and in order");
      }
      prod *= dims[a];
      ++next;
    }
    out.push_back(prod);
  }
  if (next != dims.size()) throw std::invalid_argument("merged_dims: grouping does not cover all axes");
  return out;
}

namespace {

void check_permutation(std::span<const std::size_t> perm, std::size_t rank) {
  if (perm.size() != rank) throw std::invalid_argument("permutation rank mismatch");
  std::vector<int> seen(rank, 0);
  for (auto a : perm) {
    if (a >= rank || seen[a]++) throw std::invalid_argument("not a permutation of the axes");
  }
}

}  // namespace

Index permute_index(Index linear, const ProductDomain& from, std::span<const std::size_t> perm) {
  Index out = 0;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    out = out * from.dim(perm[k]) + from.coordinate(linear, perm[k]);
  }
  return out;
}

JointDistribution permute_axes(const JointDistribution& p, std::span<const std::size_t> perm) {
  const auto& dom = p.domain();
  check_permutation(perm, dom.rank());
  std::vector<std::size_t> dims;
  for (auto a : perm) dims.push_back(dom.dim(a));
  std::vector<double> out(dom.size());
  for (Index i = 0; i < dom.size(); ++i) out[permute_index(i, dom, perm)] = p[i];
  return {ProductDomain(std::move(dims)), std::move(out)};
}

TableSampler::TableSampler(const JointDistribution& p)
    : domain_(std::make_shared<const ProductDomain>(p.domain())) {
  std::vector<double> cum(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) cum[i] = (acc += p[i]);
  cumulative_ = std::make_shared<const std::vector<double>>(std::move(cum));
}

Index TableSampler::operator()(Rng& rng) const {
  const auto& cum = *cumulative_;
  const double u = rng.uniform() * cum.back();
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  // upper_bound skips zero-mass entries, which repeat the previous total.
  return static_cast<Index>(it - cum.begin());
}

Sampler make_sampler(const JointDistribution& p) {
  TableSampler table(p);
  return {p.domain(), [table](Rng& rng) { return table(rng); }};
}

std::vector<Tuple> draw_samples(const JointDistribution& p, std::size_t count, Rng& rng) {
  TableSampler table(p);
  std::vector<Tuple> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(p.domain().tuple(table(rng)));
  return out;
}

SampleAccount& SampleAccount::operator+=(const SampleAccount& other) noexcept {
  flatten += other.flatten;
  norm += other.norm;
  closeness += other.closeness;
  learning += other.learning;
  return *this;
}

}  // namespace augtest
