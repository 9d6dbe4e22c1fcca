#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ans/errors.hpp"
#include "ans/geometry.hpp"

namespace ans {

enum class Action { Forward, TurnLeft, TurnRight, Stop };

// Actions that carry a control command (and hence noise models).
inline constexpr std::array<Action, 3> kMotionActions = {
    Action::Forward, Action::TurnLeft, Action::TurnRight};

inline constexpr int motion_index(Action a) {
  switch (a) {
    case Action::Forward: return 0;
    case Action::TurnLeft: return 1;
    case Action::TurnRight: return 2;
    case Action::Stop: break;
  }
  return -1;
}

inline std::string_view action_name(Action a) {
  switch (a) {
    case Action::Forward: return "forward";
    case Action::TurnLeft: return "turn_left";
    case Action::TurnRight: return "turn_right";
    case Action::Stop: return "stop";
  }
  return "unknown";
}

inline std::optional<Action> parse_action(std::string_view name) {
  for (Action a : {Action::Forward, Action::TurnLeft, Action::TurnRight,
                   Action::Stop}) {
    if (action_name(a) == name) return a;
  }
  return std::nullopt;
}

inline constexpr double kForwardStep = 0.25;
inline constexpr double kTurnStep = 10.0 * std::numbers::pi / 180.0;

/// Commanded pose change for each motion action.
inline PoseDelta control_command(Action a) {
  switch (a) {
    case Action::Forward: return {kForwardStep, 0.0, 0.0};
    case Action::TurnLeft: return {0.0, 0.0, kTurnStep};
    case Action::TurnRight: return {0.0, 0.0, -kTurnStep};
    case Action::Stop: break;
  }
  throw InvalidAction("stop has no control command");
}

}  // namespace ans
