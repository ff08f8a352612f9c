#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace newscap {

// Coarse failure classes. The CLI maps each one to its own exit code.
enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kSchema,
  kProtocol,
  kTimeout,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kTimeout: return "timeout";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::kInvalidArgument, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what)
      : Error(ErrorKind::kSchema, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what)
      : Error(ErrorKind::kProtocol, what) {}
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(const std::string& what)
      : Error(ErrorKind::kTimeout, what) {}
};

}  // namespace newscap
