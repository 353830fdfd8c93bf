#pragma once

#include <stdexcept>
#include <string>

namespace kinfluid {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Arrays whose sizes do not match the grid or each other.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numerical failure during a step; CFL, vacuum and positivity are subclasses.
class SolverError : public Error {
 public:
  using Error::Error;
};

class CflError : public SolverError {
 public:
  using SolverError::SolverError;
};

class VacuumError : public SolverError {
 public:
  using SolverError::SolverError;
};

class PositivityError : public SolverError {
 public:
  using SolverError::SolverError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kinfluid
