#pragma once

#include <stdexcept>
#include <string>

namespace rpmd {

// Bad user input: configuration values, topology parameters, presets.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Two interaction sites (or a collapsed geometry) too close to evaluate.
class SingularityError : public std::runtime_error {
 public:
  explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

// Constraint iteration failed to reach tolerance, or its linear system was singular.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double max_residual, int iterations)
      : std::runtime_error(what), max_residual_(max_residual), iterations_(iterations) {}

  double max_residual() const { return max_residual_; }
  int iterations() const { return iterations_; }

 private:
  double max_residual_;
  int iterations_;
};

}  // namespace rpmd
