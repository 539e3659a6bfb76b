#pragma once

#include <stdexcept>
#include <string>

namespace autonode {

// Every failure the library reports derives from Error so callers (the CLI,
// the service) can map it to an exit code or HTTP status in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define AUTONODE_DEFINE_ERROR(Name)            \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what_arg) \
        : Error(#Name ": " + what_arg) {}      \
  }

// world
AUTONODE_DEFINE_ERROR(SchemaError);
AUTONODE_DEFINE_ERROR(ConsistencyError);

// grounding / graph
AUTONODE_DEFINE_ERROR(NoCandidates);
AUTONODE_DEFINE_ERROR(UnknownNode);

// decision
AUTONODE_DEFINE_ERROR(ParseError);
AUTONODE_DEFINE_ERROR(ModelUnavailable);
AUTONODE_DEFINE_ERROR(IndexGap);

// exploration / graph building
AUTONODE_DEFINE_ERROR(EmptyTrace);
AUTONODE_DEFINE_ERROR(ReplayFailure);
AUTONODE_DEFINE_ERROR(StepCapExceeded);
AUTONODE_DEFINE_ERROR(UnknownStep);
AUTONODE_DEFINE_ERROR(AlreadyFinalized);
AUTONODE_DEFINE_ERROR(NotFinalized);

// engine
AUTONODE_DEFINE_ERROR(ConfigError);

#undef AUTONODE_DEFINE_ERROR

}  // namespace autonode
