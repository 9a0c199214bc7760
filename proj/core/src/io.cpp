#include "augtest/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace augtest {

Json to_json(const JointDistribution& p) {
  return Json{{"dims", p.domain().dims()}, {"probs", std::vector<double>(p.probs().begin(), p.probs().end())}};
}

JointDistribution distribution_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("dims") || !j.contains("probs")) {
    throw std::invalid_argument("distribution JSON needs \"dims\" and \"probs\"");
  }
  auto dims = j.at("dims").get<std::vector<std::size_t>>();
  auto probs = j.at("probs").get<std::vector<double>>();
  ProductDomain domain(std::move(dims));
  if (probs.size() != domain.size()) {
    throw std::invalid_argument("distribution JSON: probs length does not match dims");
  }
  return JointDistribution(std::move(domain), std::move(probs));
}

Json to_json(const ProductFlattening& f) {
  Json j = Json::object();
  for (std::size_t a = 0; a < f.rank(); ++a) j["buckets_axis" + std::to_string(a + 1)] = f.axis(a).buckets();
  return j;
}

ProductFlattening flattening_from_json(const Json& j) {
  std::vector<AxisFlattening> axes;
  for (std::size_t a = 1;; ++a) {
    const auto key = "buckets_axis" + std::to_string(a);
    if (!j.contains(key)) break;
    axes.emplace_back(j.at(key).get<std::vector<std::size_t>>());
  }
  if (axes.empty()) throw std::invalid_argument("flattening JSON has no buckets_axis1");
  return ProductFlattening(std::move(axes));
}

Json to_json(const SampleAccount& a) {
  return Json{{"total", a.total()},
              {"flatten", a.flatten},
              {"norm", a.norm},
              {"closeness", a.closeness},
              {"learning", a.learning}};
}

SampleAccount account_from_json(const Json& j) {
  SampleAccount a;
  a.flatten = j.at("flatten").get<std::uint64_t>();
  a.norm = j.at("norm").get<std::uint64_t>();
  a.closeness = j.at("closeness").get<std::uint64_t>();
  a.learning = j.at("learning").get<std::uint64_t>();
  return a;
}

Json to_json(const Verdict& v, std::uint64_t seed) {
  return Json{{"outcome", to_string(v.outcome)},
              {"stage", v.stage_log.empty() ? std::string() : std::string(to_string(v.stage()))},
              {"samples", to_json(v.account)},
              {"seed", seed}};
}

Json to_json(const ValidityReport& r) {
  return Json{{"valid", r.valid},
              {"row_sums_ok", r.row_sums_ok},
              {"column_sums_ok", r.column_sums_ok},
              {"heavy_count_ok", r.heavy_count_ok},
              {"sample_size_ok", r.sample_size_ok},
              {"heavy_rows", r.heavy_rows},
              {"max_row_deviation", r.max_row_deviation},
              {"max_column_deviation", r.max_column_deviation},
              {"row_target", r.row_target},
              {"column_target", r.column_target},
              {"sample_size", r.sample_size},
              {"half_eps_sums_ok", r.half_eps_sums_ok},
              {"tv_to_prediction", r.tv_to_prediction},
              {"tv_to_product", r.tv_to_product},
              {"conclusion_holds", r.conclusion_holds}};
}

Json hard_instance_json(const HardInstance& inst, const ValidityReport& validity, std::uint64_t seed) {
  Json meta{{"X", inst.x},
            {"H", inst.heavy},
            {"k", inst.k},
            {"eps", inst.eps},
            {"alpha", inst.alpha},
            {"eps_meas", inst.eps_meas},
            {"alpha_meas", inst.alpha_meas},
            {"seed", seed},
            {"guarantees_void", inst.guarantees_void},
            {"warnings", inst.warnings}};
  return Json{{"instance", to_json(inst.p)}, {"meta", std::move(meta)}, {"validity", to_json(validity)}};
}

Json to_json(const EstimatorConfig& cfg) {
  return Json{{"norm_sample_mult", cfg.norm_sample_mult},
              {"closeness_sample_mult", cfg.closeness_sample_mult},
              {"closeness_threshold_mult", cfg.closeness_threshold_mult},
              {"repetition_mult", cfg.repetition_mult}};
}

EstimatorConfig estimator_config_from_json(const Json& j) {
  EstimatorConfig cfg;
  cfg.norm_sample_mult = j.value("norm_sample_mult", cfg.norm_sample_mult);
  cfg.closeness_sample_mult = j.value("closeness_sample_mult", cfg.closeness_sample_mult);
  cfg.closeness_threshold_mult = j.value("closeness_threshold_mult", cfg.closeness_threshold_mult);
  cfg.repetition_mult = j.value("repetition_mult", cfg.repetition_mult);
  cfg.validate();
  return cfg;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

JointDistribution load_distribution(const std::filesystem::path& path) {
  return distribution_from_json(read_json_file(path));
}

}  // namespace augtest
