#pragma once

#include <stdexcept>
#include <string>

namespace vsr {

/// Base of every error the engine throws. `kind()` is a stable identifier
/// used in machine-readable error summaries.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& m) : Error("InvalidArgument", m) {}
};

// Backend transport and protocol failures.
class TransportError : public Error {
 public:
  TransportError(const std::string& m, int attempts)
      : Error("TransportError", m), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& m) : Error("ProtocolError", m) {}
};

class BackendError : public Error {
 public:
  BackendError(std::string backend_kind, const std::string& m)
      : Error("BackendError", m), backend_kind_(std::move(backend_kind)) {}
  /// The error kind reported by the backend, e.g. "UnknownVideo".
  const std::string& backend_kind() const noexcept { return backend_kind_; }

 private:
  std::string backend_kind_;
};

class MissingLogits : public Error {
 public:
  explicit MissingLogits(const std::string& m) : Error("MissingLogits", m) {}
};

class EmptySet : public Error {
 public:
  explicit EmptySet(const std::string& m) : Error("EmptySet", m) {}
};

class LengthMismatch : public Error {
 public:
  explicit LengthMismatch(const std::string& m) : Error("LengthMismatch", m) {}
};

class NoDivergentQuestions : public Error {
 public:
  NoDivergentQuestions() : Error("NoDivergentQuestions", "no divergent questions in report") {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("IoError", m) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& m) : Error("SchemaError", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("ConfigError", m) {}
};

// Simulated backend failures. The server maps these onto error bodies.
class UnknownVideo : public Error {
 public:
  explicit UnknownVideo(const std::string& id) : Error("UnknownVideo", "unknown video: " + id) {}
};

class UnknownQuestion : public Error {
 public:
  explicit UnknownQuestion(const std::string& id)
      : Error("UnknownQuestion", "unknown question: " + id) {}
};

class UnrecognizedPrompt : public Error {
 public:
  explicit UnrecognizedPrompt(const std::string& m) : Error("UnrecognizedPrompt", m) {}
};

}  // namespace vsr
