#pragma once

#include <string>

#include "exldr/pipeline.hpp"

namespace exldr {

/// JSON document with the config echo, one object per candidate (estimate and
/// filter trace), failures and cluster centers.
std::string candidate_list_to_json(const CandidateList& list, const PipelineConfig& cfg,
                                   int indent = 2);

struct CandidateListDocument {
  PipelineConfig config;
  CandidateList list;
};

/// Inverse of candidate_list_to_json; malformed documents raise kFormat.
CandidateListDocument candidate_list_from_json(const std::string& text);

}  // namespace exldr
