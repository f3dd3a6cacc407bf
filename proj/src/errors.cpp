#include "mdkit/errors.hpp"

namespace mdkit {

const char* to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::step_size_underflow:
      return "step_size_underflow";
    case IntegrationStatus::max_steps_exceeded:
      return "max_steps_exceeded";
    case IntegrationStatus::blow_up:
      return "blow_up";
    case IntegrationStatus::non_finite:
      return "non_finite";
  }
  return "unknown";
}

}  // namespace mdkit
