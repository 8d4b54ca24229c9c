#pragma once

#include <stdexcept>
#include <string>

namespace specdim {

/// Invalid configuration or parameter outside its documented domain.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Evaluation requested at (or too close to) a pole.
class PoleError : public std::domain_error {
  public:
    explicit PoleError(const std::string& msg) : std::domain_error(msg) {}
};

/// A closed-form constant sits on a regime boundary (Gamma pole, log case).
class BoundaryError : public std::domain_error {
  public:
    explicit BoundaryError(const std::string& msg) : std::domain_error(msg) {}
};

/// Step size violates a stability gate.
class StepSizeError : public std::domain_error {
  public:
    explicit StepSizeError(const std::string& msg) : std::domain_error(msg) {}
};

/// File input/output failure.
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace specdim
