#pragma once

#include <stdexcept>
#include <string>

namespace textprint {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, impossible corpora, missing labels.
// The CLI maps this to exit code 2.
struct DataError : Error {
  using Error::Error;
};

// Bad configuration or API misuse: invalid ranges, incompatible shapes.
// The CLI maps this to exit code 1.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace textprint
