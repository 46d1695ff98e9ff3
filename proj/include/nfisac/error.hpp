#pragma once

#include <stdexcept>
#include <string>

namespace nfisac {

// Maps one-to-one onto the CLI exit codes (config=2, numerical=3, coverage=4).
enum class ErrorKind { InvalidArgument, Config, Numerical, Coverage };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::Numerical, w) {}
};
struct CoverageError : Error {
  explicit CoverageError(const std::string& w) : Error(ErrorKind::Coverage, w) {}
};

inline void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace nfisac
