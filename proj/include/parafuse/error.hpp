#pragma once

#include <stdexcept>
#include <string>

namespace parafuse {

/// Runtime failure: unreadable input, malformed file, missing artifact.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments; the CLI maps this to exit code 2.
class ValidationError : public Error {
   public:
    using Error::Error;
};

}  // namespace parafuse
