#pragma once

#include <stdexcept>
#include <string>

namespace bpk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// n_c is zero or negative where the model needs a formed condensate.
class SingularCondensate : public Error {
 public:
  using Error::Error;
};

/// The closed-form condensate radicand went negative.
class CondensateDepleted : public Error {
 public:
  using Error::Error;
};

/// n_c reached the configured floor. Carries the crossing time.
class StabilityLoss : public Error {
 public:
  StabilityLoss(const std::string& what, double crossing_time)
      : Error(what), crossing_time_(crossing_time) {}
  double crossing_time() const noexcept { return crossing_time_; }

 private:
  double crossing_time_;
};

/// Positivity could not be restored within the halving budget.
class StiffnessError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpk
