#include "loschmidt/errors.hpp"

namespace loschmidt {

const char* to_string(FitFailure f) noexcept {
  switch (f) {
    case FitFailure::no_peak:
      return "no-peak";
    case FitFailure::no_decay_window:
      return "no-decay-window";
    case FitFailure::insufficient_points:
      return "insufficient-points";
    case FitFailure::insufficient_tail:
      return "insufficient-tail";
    case FitFailure::not_converged:
      return "not-converged";
  }
  return "unknown";
}

}  // namespace loschmidt
