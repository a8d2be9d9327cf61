#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exldr {

enum class ErrorCode {
  kParameter,
  kEmptyBucket,
  kAggregationImpossible,
  kIndefiniteMoments,
  kDegenerateState,
  kSingularDesign,
  kConsensusFailure,
  kInsufficientRows,
  kIo,
  kFormat,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the experiment harness in particular) can tag result rows.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::kParameter, what);
}

}  // namespace exldr
