#pragma once

#include <stdexcept>
#include <string>

namespace plando {

/// Raised when a numerical procedure cannot produce a trustworthy result
/// (singular systems, blow-up, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration or rollout produced a non-finite state.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Kernel matrix too ill-conditioned to factor or solve against.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition_estimate)
      : NumericalError(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace plando
