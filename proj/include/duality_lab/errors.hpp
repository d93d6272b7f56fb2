#pragma once

#include <stdexcept>
#include <string>

namespace duality_lab {

// Bad argument values: unnormalized states, non-finite couplings, overlapping supports.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Times or indices outside the domain an object was built for.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Integrator blew up, a fit had too few points, a frequency is undefined.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace duality_lab
