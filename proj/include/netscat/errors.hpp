#ifndef NETSCAT_ERRORS_HPP
#define NETSCAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace netscat {

// Base of every numerical/domain failure raised by the library. The CLI maps
// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class CentrosymmetryViolation : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// |S_in,out| too small for the dwell time to be defined.
class VanishingAmplitude : public Error {
 public:
  using Error::Error;
};

// A doublet energy sits on top of a bulk level; lowest-order shifts diverge.
class NearDegenerate : public Error {
 public:
  using Error::Error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace netscat

#endif  // NETSCAT_ERRORS_HPP
