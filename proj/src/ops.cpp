#include "abpr/ops.hpp"

#include <map>

namespace abpr::logic {

namespace {

const std::map<std::string, OpDef>& infix_table() {
  static const std::map<std::string, OpDef> t = {
      {":-", {1200, OpType::Xfx}}, {"-->", {1200, OpType::Xfx}},
      {";", {1100, OpType::Xfy}},  {"->", {1050, OpType::Xfy}},
      {",", {1000, OpType::Xfy}},  {"=", {700, OpType::Xfx}},
      {"\\=", {700, OpType::Xfx}}, {"==", {700, OpType::Xfx}},
      {"\\==", {700, OpType::Xfx}},{"=..", {700, OpType::Xfx}},
      {"is", {700, OpType::Xfx}},  {"=:=", {700, OpType::Xfx}},
      {"=\\=", {700, OpType::Xfx}},{"<", {700, OpType::Xfx}},
      {">", {700, OpType::Xfx}},   {"=<", {700, OpType::Xfx}},
      {">=", {700, OpType::Xfx}},  {"@<", {700, OpType::Xfx}},
      {"@>", {700, OpType::Xfx}},  {"@=<", {700, OpType::Xfx}},
      {"@>=", {700, OpType::Xfx}}, {"+", {500, OpType::Yfx}},
      {"-", {500, OpType::Yfx}},   {"*", {400, OpType::Yfx}},
      {"/", {400, OpType::Yfx}},   {"//", {400, OpType::Yfx}},
      {"mod", {400, OpType::Yfx}}, {":", {200, OpType::Xfy}},
  };
  return t;
}

const std::map<std::string, OpDef>& prefix_table() {
  static const std::map<std::string, OpDef> t = {
      {":-", {1200, OpType::Fx}},
      {"?-", {1200, OpType::Fx}},
      {"\\+", {900, OpType::Fy}},
      {"-", {200, OpType::Fy}},
      {"+", {200, OpType::Fy}},
  };
  return t;
}

}  // namespace

std::optional<OpDef> infix_op(const std::string& name) {
  auto it = infix_table().find(name);
  if (it == infix_table().end()) return std::nullopt;
  return it->second;
}

std::optional<OpDef> prefix_op(const std::string& name) {
  auto it = prefix_table().find(name);
  if (it == prefix_table().end()) return std::nullopt;
  return it->second;
}

}  // namespace abpr::logic
