#include "exldr/serialize.hpp"

#include <nlohmann/json.hpp>

#include "exldr/error.hpp"

namespace exldr {
namespace {

using nlohmann::json;

json vector_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

std::string candidate_list_to_json(const CandidateList& list, const PipelineConfig& cfg,
                                   int indent) {
  json doc;
  doc["config"] = {
      {"alpha", cfg.alpha},
      {"n_buckets", cfg.n_buckets},
      {"repetitions", cfg.repetitions},
      {"degree", cfg.degree},
      {"filter_rounds", cfg.filter_rounds},
      {"list_seeds", cfg.seeds},
      {"block_size", cfg.block_size},
      {"lambda", cfg.lambda},
      {"eta", cfg.eta},
      {"rho", cfg.rho},
      {"delta_radius", cfg.delta_radius},
      {"aggregation",
       cfg.aggregation_mode == AggregationMode::kMedianOfMeans ? "mom" : "geometric"},
      {"master_seed", cfg.master_seed},
  };
  json candidates = json::array();
  for (const auto& c : list.candidates) {
    json trace = json::array();
    for (const auto& r : c.trace) {
      trace.push_back({{"active_buckets", r.active_buckets},
                       {"top_eigenvalue", r.top_eigenvalue},
                       {"target_variance", r.target_variance}});
    }
    candidates.push_back({{"seed_index", c.seed_index},
                          {"ell_hat", vector_json(c.ell_hat)},
                          {"rounds_used", c.rounds_used},
                          {"final_top_eigenvalue", c.final_top_eigenvalue},
                          {"active_bucket_count", c.active_bucket_count},
                          {"lambda_used", c.lambda_used},
                          {"stop_reason", std::string(to_string(c.stop_reason))},
                          {"trace", trace}});
  }
  doc["candidates"] = candidates;
  json failures = json::array();
  for (const auto& f : list.failures) {
    failures.push_back({{"seed_index", f.seed_index}, {"message", f.message}});
  }
  doc["failures"] = failures;
  json centers = json::array();
  for (const auto& c : list.centers) centers.push_back(vector_json(c));
  doc["centers"] = centers;
  doc["members"] = list.members;
  return doc.dump(indent);
}

CandidateListDocument candidate_list_from_json(const std::string& text) {
  CandidateListDocument out;
  try {
    const json doc = json::parse(text);
    const json& c = doc.at("config");
    auto& cfg = out.config;
    cfg.alpha = c.at("alpha").get<double>();
    cfg.n_buckets = c.at("n_buckets").get<std::size_t>();
    cfg.repetitions = c.at("repetitions").get<std::size_t>();
    cfg.degree = c.at("degree").get<std::size_t>();
    cfg.filter_rounds = c.at("filter_rounds").get<std::size_t>();
    cfg.seeds = c.at("list_seeds").get<std::size_t>();
    cfg.block_size = c.at("block_size").get<std::size_t>();
    cfg.lambda = c.at("lambda").get<double>();
    cfg.eta = c.at("eta").get<double>();
    cfg.rho = c.at("rho").get<double>();
    cfg.delta_radius = c.at("delta_radius").get<double>();
    const auto mode = c.at("aggregation").get<std::string>();
    if (mode == "mom") cfg.aggregation_mode = AggregationMode::kMedianOfMeans;
    else if (mode == "geometric") cfg.aggregation_mode = AggregationMode::kGeometricMedian;
    else fail(ErrorCode::kFormat, "unknown aggregation '" + mode + "'");
    cfg.master_seed = c.at("master_seed").get<std::uint64_t>();

    for (const auto& j : doc.at("candidates")) {
      Candidate cand;
      cand.seed_index = j.at("seed_index").get<std::size_t>();
      cand.ell_hat = vector_from(j.at("ell_hat"));
      cand.rounds_used = j.at("rounds_used").get<std::size_t>();
      cand.final_top_eigenvalue = j.at("final_top_eigenvalue").get<double>();
      cand.active_bucket_count = j.at("active_bucket_count").get<std::size_t>();
      cand.lambda_used = j.at("lambda_used").get<double>();
      const auto reason = j.at("stop_reason").get<std::string>();
      if (reason == to_string(StopReason::kThreshold)) cand.stop_reason = StopReason::kThreshold;
      else if (reason == to_string(StopReason::kRoundLimit)) cand.stop_reason = StopReason::kRoundLimit;
      else fail(ErrorCode::kFormat, "unknown stop reason '" + reason + "'");
      for (const auto& r : j.at("trace")) {
        cand.trace.push_back({r.at("active_buckets").get<std::size_t>(),
                              r.at("top_eigenvalue").get<double>(),
                              r.at("target_variance").get<double>()});
      }
      out.list.candidates.push_back(std::move(cand));
    }
    for (const auto& j : doc.at("failures")) {
      out.list.failures.push_back(
          {j.at("seed_index").get<std::size_t>(), j.at("message").get<std::string>()});
    }
    for (const auto& j : doc.at("centers")) out.list.centers.push_back(vector_from(j));
    out.list.members = doc.at("members").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("candidate list json: ") + e.what());
  }
  return out;
}

}  // namespace exldr
