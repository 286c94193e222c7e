#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace buildimpact {

/// Base class of every data error raised by the library. Each error carries a
/// short machine-readable kind that the CLI copies into its JSON error object.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message) : Error("parse", message) {}
};

class SelfLoopError : public Error {
 public:
  explicit SelfLoopError(std::string target)
      : Error("self_loop", "self-loop on target '" + target + "'"),
        target_(std::move(target)) {}

  const std::string& target() const noexcept { return target_; }

 private:
  std::string target_;
};

/// Raised when a graph contains a cycle. The witness lists the cycle's
/// targets in edge order, rotated to start at the smallest name.
class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> witness);

  const std::vector<std::string>& witness() const noexcept { return witness_; }

 private:
  std::vector<std::string> witness_;
};

class DanglingEndpointError : public Error {
 public:
  explicit DanglingEndpointError(std::string target)
      : Error("dangling_endpoint",
              "edge endpoint '" + target + "' is not a declared target"),
        target_(std::move(target)) {}

  const std::string& target() const noexcept { return target_; }

 private:
  std::string target_;
};

class UnknownTargetError : public Error {
 public:
  UnknownTargetError(std::string target, const std::string& where)
      : Error("unknown_target",
              "unknown target '" + target + "' in " + where),
        target_(std::move(target)) {}

  const std::string& target() const noexcept { return target_; }

 private:
  std::string target_;
};

/// A build record that contradicts its graph: a cached target downstream of
/// an executed one, or a target missing from / repeated in the record.
class CoherenceError : public Error {
 public:
  CoherenceError(std::string build_id, std::string target,
                 const std::string& detail)
      : Error("coherence", "build '" + build_id + "': target '" + target +
                               "' " + detail),
        build_id_(std::move(build_id)),
        target_(std::move(target)) {}

  const std::string& build_id() const noexcept { return build_id_; }
  const std::string& target() const noexcept { return target_; }

 private:
  std::string build_id_;
  std::string target_;
};

class NoDataError : public Error {
 public:
  explicit NoDataError(std::vector<std::string> targets);

  const std::vector<std::string>& targets() const noexcept { return targets_; }

 private:
  std::vector<std::string> targets_;
};

class EmptyWindowError : public Error {
 public:
  explicit EmptyWindowError(const std::string& what)
      : Error("empty_window", what + ": no builds inside the window") {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition", message) {}
};

class InsufficientSampleError : public Error {
 public:
  InsufficientSampleError(std::size_t past, std::size_t future,
                          std::size_t required);

  std::size_t past() const noexcept { return past_; }
  std::size_t future() const noexcept { return future_; }

 private:
  std::size_t past_;
  std::size_t future_;
};

}  // namespace buildimpact
