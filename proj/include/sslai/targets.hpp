#pragma once

#include <cstdint>

#include "sslai/world_model.hpp"

namespace sslai {

enum class Urgency : std::uint8_t { Normal, StopPhase };

/// What a role's skill asks the control block to achieve this frame.
struct MotionTarget {
  Pose target;
  int kick_power = 0;     // 0..100
  int dribble_power = 0;  // 0..100
  Urgency urgency = Urgency::Normal;

  bool operator==(const MotionTarget&) const = default;
};

}  // namespace sslai
