#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nanomod/geometry.hpp"
#include "nanomod/kinds.hpp"

namespace nanomod {

struct Instance {
  std::string id;
  std::string kind;
  /// Intended position from the design, if the generator supplied one. Only
  /// used to seed the assignment heuristic.
  std::optional<PointNm> placement_hint;
};

struct PinRef {
  std::string instance;
  std::string pin;
  friend bool operator==(const PinRef&, const PinRef&) = default;
};

/// A set of pins made electrically common. The first pin is the driver.
struct Net {
  std::string id;
  std::vector<PinRef> pins;
};

struct Netlist {
  std::vector<Instance> instances;
  std::vector<Net> nets;
  std::vector<std::vector<std::string>> redundancy_groups;

  /// Index of instance `id`, or -1. Linear; build a map for hot loops.
  int instance_index(const std::string& id) const;
};

enum class Severity { error, warning };

struct Issue {
  Severity severity;
  std::string message;
  std::string locus;
  friend bool operator==(const Issue&, const Issue&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Issue> issues;  // sorted; independent of input order
};

/// Reports dangling references, short nets, unknown kinds and duplicate ids.
/// Never throws for content problems.
ValidationReport validate_netlist(const Netlist& netlist, const KindLibrary& kinds);

}  // namespace nanomod
