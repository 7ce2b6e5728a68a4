#pragma once

#include <stdexcept>
#include <string>

namespace qos {

// Bad files, bad flags, violated preconditions on user-supplied input.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failures inside the prediction pipeline itself.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qos
