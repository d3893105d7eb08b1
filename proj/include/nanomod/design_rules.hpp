#pragma once

#include <string>
#include <vector>

#include "nanomod/kinds.hpp"
#include "nanomod/process_spec.hpp"
#include "nanomod/route.hpp"

namespace nanomod {

enum class RuleKind { width, spacing, blocked, foreign_pin, overlap };

struct Violation {
  RuleKind rule;
  std::string net;
  std::string other;  // second net for spacing/overlap, else empty
  PointNm at;
  std::string message;
};

const char* rule_name(RuleKind rule);

/// Width profile (contact width within 1 um of a terminal, interconnect
/// maximum elsewhere), spacing between distinct nets measured as centre
/// distance minus half widths, wires through component bodies or pads of
/// other nets, and cells shared by two nets. A registered bridge exempts its
/// straight span from spacing and overlap against the crossed net.
std::vector<Violation> check_design_rules(const RoutedLayout& layout, const KindLibrary& kinds,
                                          const ProcessSpec& spec);

}  // namespace nanomod
