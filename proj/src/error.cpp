#include "buildimpact/error.hpp"

namespace buildimpact {

namespace {

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

CycleError::CycleError(std::vector<std::string> witness)
    : Error("cycle", "dependency cycle (" + join(witness, ",") + ")"),
      witness_(std::move(witness)) {}

NoDataError::NoDataError(std::vector<std::string> targets)
    : Error("no_data", "no non-cached executions in window for: " +
                           join(targets, ", ")),
      targets_(std::move(targets)) {}

InsufficientSampleError::InsufficientSampleError(std::size_t past,
                                                 std::size_t future,
                                                 std::size_t required)
    : Error("insufficient_sample",
            "qualifying builds: past " + std::to_string(past) + ", future " +
                std::to_string(future) + " (need " + std::to_string(required) +
                " on each side)"),
      past_(past),
      future_(future) {}

}  // namespace buildimpact
