#pragma once

#include <stdexcept>
#include <string>

namespace cirptc {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map the concrete class onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, out-of-range inputs, negative optical powers.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A weight (or compensated weight) that the MRR cannot reach on its branch.
class DeviceRangeError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class LutKeyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Dataset and checkpoint parsing failures; `kind` tells them apart.
class FormatError : public IoError {
 public:
  enum class Kind { bad_magic, truncated, label_out_of_range, bad_header, version };

  FormatError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace cirptc
