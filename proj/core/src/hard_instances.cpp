#include "augtest/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace augtest {

double HardInstance::measure_mass() const { return std::accumulate(measure.begin(), measure.end(), 0.0); }

HardInstance gen_hard_2d(const HardParams& params, Rng& rng) {
  const std::size_t n = params.n, m = params.m, k = params.k;
  if (m < 2 || n < m) throw std::invalid_argument("gen_hard_2d: need n >= m >= 2");
  if (k == 0 || 2 * k > n) throw std::invalid_argument("gen_hard_2d: need 1 <= k <= n/2");
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) throw std::invalid_argument("gen_hard_2d: alpha must lie in (0, 1]");
  if (!(params.eps > 0.0 && params.eps < 1.0)) throw std::invalid_argument("gen_hard_2d: eps must lie in (0, 1)");
  if (params.forced_x && *params.forced_x != 0 && *params.forced_x != 1) {
    throw std::invalid_argument("gen_hard_2d: forced X must be 0 or 1");
  }

  HardInstance inst;
  inst.n = n;
  inst.m = m;
  inst.k = k;
  inst.eps = params.eps;
  inst.alpha = params.alpha;
  inst.eps_meas = params.eps_meas_override.value_or(192.0 * params.eps);
  inst.alpha_meas = params.alpha_meas_override.value_or(2.0 * params.alpha / 3.0);
  if (params.eps_meas_override || params.alpha_meas_override) {
    inst.guarantees_void = true;
    inst.warnings.emplace_back("raw (eps', alpha') override: validity guarantees are void");
  }
  if (params.eps > kHardEpsMax && !params.eps_meas_override) {
    throw std::invalid_argument("gen_hard_2d: eps must be at most 1/192 (use the eps' override outside that regime)");
  }
  if (!(inst.eps_meas > 0.0 && inst.eps_meas <= 1.0)) throw std::invalid_argument("gen_hard_2d: eps' must lie in (0, 1]");
  if (!(inst.alpha_meas > 0.0 && inst.alpha_meas <= 1.0)) {
    throw std::invalid_argument("gen_hard_2d: alpha' must lie in (0, 1]");
  }
  const double heavy_rate = inst.alpha_meas * static_cast<double>(k) / static_cast<double>(n);
  if (heavy_rate > 1.0) throw std::invalid_argument("gen_hard_2d: alpha' k / n exceeds 1");
  if (std::log(static_cast<double>(n)) > static_cast<double>(m)) {
    inst.warnings.emplace_back("log n exceeds m; the row concentration argument does not apply");
  }

  inst.x = params.forced_x.value_or(static_cast<int>(rng.uniform_index(2)));

  const double heavy_c = 1.0 / static_cast<double>(k);
  const double light_c = 1.0 / static_cast<double>(n);
  inst.c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool heavy = rng.uniform() < heavy_rate;
    inst.c[i] = heavy ? heavy_c : light_c;
    if (heavy) inst.heavy.push_back(i);
  }

  inst.signs.assign(n * m, 0);
  inst.row_measure.assign(n * m, 1.0 / static_cast<double>(m));
  if (inst.x == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (inst.c[i] == heavy_c) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const std::int8_t s = rng.uniform_index(2) == 0 ? 1 : -1;
        inst.signs[i * m + j] = s;
        inst.row_measure[i * m + j] = (1.0 + s * inst.eps_meas) / static_cast<double>(m);
      }
    }
  }

  inst.measure.resize(n * m);
  inst.row_sums.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      inst.measure[i * m + j] = inst.c[i] * inst.row_measure[i * m + j];
      inst.row_sums[i] += inst.row_measure[i * m + j];
    }
  }
  inst.c_total = std::accumulate(inst.c.begin(), inst.c.end(), 0.0);

  std::vector<double> probs(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      probs[i * m + j] = inst.measure[i * m + j] / (inst.row_sums[i] * inst.c_total);
    }
  }
  ProductDomain dom({n, m});
  inst.p = JointDistribution(dom, std::move(probs));
  inst.prediction = JointDistribution::uniform(dom);
  return inst;
}

CountMatrix poissonized_counts(const HardInstance& inst, Rng& rng) {
  CountMatrix out;
  out.n = inst.n;
  out.m = inst.m;
  out.a.resize(inst.measure.size());
  const auto k = static_cast<double>(inst.k);
  for (std::size_t idx = 0; idx < inst.measure.size(); ++idx) {
    out.a[idx] = poisson(k * inst.measure[idx], rng);
    out.total += out.a[idx];
  }
  return out;
}

double hard_row_target(const HardInstance& inst) {
  const auto n = static_cast<double>(inst.n), m = static_cast<double>(inst.m);
  return inst.eps_meas * std::sqrt(2.0 / m * std::log(50.0 * n));
}

double hard_column_target(const HardInstance& inst) {
  const auto n = static_cast<double>(inst.n), m = static_cast<double>(inst.m);
  return inst.eps_meas * std::sqrt(2.0 / n * std::log(50.0 * m));
}

ValidityReport validity_check(const HardInstance& inst, const CountMatrix& counts) {
  if (counts.n != inst.n || counts.m != inst.m) throw std::invalid_argument("validity_check: count matrix shape mismatch");
  const std::size_t n = inst.n, m = inst.m;
  ValidityReport r;
  r.row_target = hard_row_target(inst);
  r.column_target = hard_column_target(inst);

  std::vector<double> column(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.is_heavy(i)) continue;
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double e = inst.signs[i * m + j] * inst.eps_meas;
      row += e;
      column[j] += e;
    }
    r.max_row_deviation = std::max(r.max_row_deviation, std::fabs(row / static_cast<double>(m)));
  }
  for (double col : column) {
    r.max_column_deviation = std::max(r.max_column_deviation, std::fabs(col / static_cast<double>(n)));
  }
  r.row_sums_ok = r.max_row_deviation <= r.row_target;
  r.column_sums_ok = r.max_column_deviation <= r.column_target;
  r.half_eps_sums_ok = std::max(r.max_row_deviation, r.max_column_deviation) <= inst.eps / 2.0;

  r.heavy_rows = inst.heavy.size();
  r.heavy_count_ok = static_cast<double>(r.heavy_rows) <= 1.5 * inst.alpha_meas * static_cast<double>(inst.k);

  r.sample_size = counts.total;
  r.sample_size_ok = static_cast<double>(counts.total) >= static_cast<double>(inst.k) / 100.0;

  r.valid = r.row_sums_ok && r.column_sums_ok && r.heavy_count_ok && r.sample_size_ok;

  r.tv_to_prediction = tv_distance(inst.p, inst.prediction);
  r.tv_to_product = tv_distance(inst.p, product_of_marginals(inst.p));
  if (inst.x == 0) {
    r.conclusion_holds = r.tv_to_product <= 1e-9 && r.tv_to_prediction <= inst.alpha;
  } else {
    r.conclusion_holds = r.tv_to_product >= 3.0 * inst.eps;
  }
  return r;
}

EmbeddedInstance embed_hard_to_d(const HardInstance& inst, const std::vector<std::size_t>& factors) {
  if (factors.empty()) throw std::invalid_argument("embed_hard_to_d: no target factors");
  const std::size_t prod = std::accumulate(factors.begin(), factors.end(), std::size_t{1}, std::multiplies<>());
  if (prod != inst.m) throw std::invalid_argument("embed_hard_to_d: factors must multiply to m");
  std::vector<std::size_t> dims{inst.n};
  dims.insert(dims.end(), factors.begin(), factors.end());
  return {reshape(inst.p, dims), reshape(inst.prediction, dims)};
}

}  // namespace augtest
