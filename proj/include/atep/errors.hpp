#pragma once

#include <stdexcept>
#include <string>

namespace atep {

/// Violated precondition on a public call (arity mismatch, bad argument).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Genome that cannot be compiled, e.g. a cycle among enabled connections.
class MalformedGenomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fitness was read before the genome was evaluated.
class EvaluationOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run does not have enough solved environments for the generalization protocol.
class ShortfallError : public std::runtime_error {
 public:
  ShortfallError(std::string method, int needed, int available)
      : std::runtime_error("method '" + method + "' has " + std::to_string(available) +
                           " solved environments with a recorded solver, " +
                           std::to_string(needed) + " required"),
        method_(std::move(method)) {}
  const std::string& method() const noexcept { return method_; }

 private:
  std::string method_;
};

}  // namespace atep
