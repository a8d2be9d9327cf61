#include <doctest.h>

#include "exldr/data.hpp"
#include "exldr/error.hpp"
#include "exldr/serialize.hpp"

using namespace exldr;

TEST_CASE("candidate list json round trip") {
  SynthConfig synth;
  synth.n = 600;
  synth.d = 4;
  const Dataset d = gen_synthetic(synth);
  PipelineConfig cfg;
  cfg.n_buckets = 100;
  cfg.repetitions = 3;
  cfg.seeds = 3;
  cfg.filter_rounds = 2;
  cfg.master_seed = 12;
  const auto list = run_list(d.X, d.y, cfg);
  const std::string text = candidate_list_to_json(list, cfg);
  const auto doc = candidate_list_from_json(text);
  CHECK(doc.config.n_buckets == 100);
  CHECK(doc.config.master_seed == 12);
  CHECK(doc.config.seeds == 3);
  REQUIRE(doc.list.candidates.size() == list.candidates.size());
  for (std::size_t k = 0; k < list.candidates.size(); ++k) {
    CHECK(doc.list.candidates[k].ell_hat == list.candidates[k].ell_hat);
    CHECK(doc.list.candidates[k].trace.size() == list.candidates[k].trace.size());
    CHECK(doc.list.candidates[k].stop_reason == list.candidates[k].stop_reason);
  }
  CHECK(doc.list.members == list.members);
  CHECK(doc.list.centers.size() == list.centers.size());
  CHECK(candidate_list_to_json(doc.list, doc.config) == text);
}

TEST_CASE("malformed json is a format error") {
  try {
    candidate_list_from_json("{\"config\": {}}");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
  }
  CHECK_THROWS_AS(candidate_list_from_json("not json"), Error);
}
