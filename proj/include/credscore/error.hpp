#pragma once

#include <stdexcept>
#include <string>

namespace credscore {

/// Base class for every error raised by the library. Messages are meant to be
/// shown to a user as-is (they carry line numbers, ids or row numbers).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, records, labels).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace credscore
