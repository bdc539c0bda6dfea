#pragma once

#include <stdexcept>
#include <string>

namespace optdes {

// Linear predictor outside the domain of a link, or a mean outside the
// support of a family.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Requested combination of model/method is not implemented.
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An information or variance matrix could not be factorised.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A closed-form construction whose preconditions do not hold.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: designs, priors, configuration documents.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace optdes
