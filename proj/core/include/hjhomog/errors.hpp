#pragma once

#include <stdexcept>
#include <string>

namespace homog {

// Base class for all library errors.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or violated operation precondition.
struct input_error : error {
  using error::error;
};

// A model evaluation produced a non-finite value; the message names the point.
struct model_eval_error : error {
  using error::error;
};

// An extremizer landed on the boundary of the velocity search ball, meaning
// the velocity bound is too small to certify the result.
struct radius_error : error {
  using error::error;
};

// The grid is too coarse for the requested step or oscillation scale.
struct resolution_error : error {
  resolution_error(const std::string& msg, int required_n_)
      : error(msg), required_n(required_n_) {}
  int required_n;
};

// An extremizer landed on a window boundary, a target fell outside the
// window, or the window would exceed the node budget.
struct window_error : error {
  explicit window_error(const std::string& msg, long long suggested_radius_ = -1)
      : error(msg), suggested_radius(suggested_radius_) {}
  long long suggested_radius;
};

// An iterative routine failed to converge or diverged within its budget.
struct convergence_error : error {
  using error::error;
};

// The model lacks the structure an operation needs (e.g. no usable
// derivatives for trajectory integration).
struct unsupported_model_error : error {
  using error::error;
};

// An internal consistency check failed; indicates a bug or a tolerance
// mismatch between cooperating routines.
struct internal_error : error {
  using error::error;
};

}  // namespace homog
