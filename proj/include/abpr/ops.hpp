#pragma once

#include <optional>
#include <string>

namespace abpr::logic {

enum class OpType { Xfx, Xfy, Yfx, Fy, Fx };

struct OpDef {
  int priority;
  OpType type;
};

std::optional<OpDef> infix_op(const std::string& name);
std::optional<OpDef> prefix_op(const std::string& name);

}  // namespace abpr::logic
