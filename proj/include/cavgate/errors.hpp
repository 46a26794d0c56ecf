#pragma once

#include <stdexcept>
#include <string>

namespace cavgate {

// Sample grid or integration step too coarse for the requested rates,
// or a sampled envelope carries significant power near the Nyquist edge.
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cavity/atom amplitudes failed to ring down below tolerance within the
// tail window appended after the pulse.
struct IncompleteDecayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameters fall outside the validity domain of a closed-form result
// (e.g. the weak-pulse scaling used for coherent-state inputs).
struct OutOfModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cavgate
