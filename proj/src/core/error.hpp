// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#ifndef PILLFIT_CORE_ERROR_HPP
#define PILLFIT_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pillfit {

// Base class; every library failure derives from this so the C layer can map
// it onto a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace pillfit

#endif
