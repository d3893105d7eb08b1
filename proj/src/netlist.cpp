#include "nanomod/netlist.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace nanomod {

int Netlist::instance_index(const std::string& id) const {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

ValidationReport validate_netlist(const Netlist& netlist, const KindLibrary& kinds) {
  ValidationReport report;
  auto add = [&report](Severity sev, std::string msg, std::string locus) {
    report.issues.push_back({sev, std::move(msg), std::move(locus)});
  };

  std::map<std::string, std::string> kind_of;
  for (const auto& inst : netlist.instances) {
    if (!kinds.contains(inst.kind)) {
      add(Severity::error, "unknown kind '" + inst.kind + "'", "instance " + inst.id);
    }
    if (!kind_of.emplace(inst.id, inst.kind).second) {
      add(Severity::error, "duplicate instance id '" + inst.id + "'", "instance " + inst.id);
    }
  }

  std::set<std::string> net_ids;
  std::map<std::pair<std::string, std::string>, int> pin_uses;
  for (const auto& net : netlist.nets) {
    const std::string locus = "net " + net.id;
    if (!net_ids.insert(net.id).second) add(Severity::error, "duplicate net id '" + net.id + "'", locus);
    if (net.pins.size() < 2) {
      add(Severity::error, "net has " + std::to_string(net.pins.size()) + " endpoint(s); at least 2 required",
          locus);
    }
    for (const auto& ref : net.pins) {
      const auto it = kind_of.find(ref.instance);
      if (it == kind_of.end()) {
        add(Severity::error, "references missing instance '" + ref.instance + "'", locus);
        continue;
      }
      if (const ComponentKind* k = kinds.find(it->second); k != nullptr && k->pin_index(ref.pin) < 0) {
        add(Severity::error, "references missing pin '" + ref.instance + "." + ref.pin + "'", locus);
        continue;
      }
      ++pin_uses[{ref.instance, ref.pin}];
    }
  }
  for (const auto& [pin, uses] : pin_uses) {
    if (uses > 1) {
      add(Severity::warning, "pin used by " + std::to_string(uses) + " net endpoints",
          "pin " + pin.first + "." + pin.second);
    }
  }

  for (const auto& group : netlist.redundancy_groups) {
    std::set<std::string> group_kinds;
    for (const auto& id : group) {
      const auto it = kind_of.find(id);
      if (it == kind_of.end()) {
        add(Severity::error, "redundancy group references missing instance '" + id + "'", "redundancy_group");
      } else {
        group_kinds.insert(it->second);
      }
    }
    if (group_kinds.size() > 1) add(Severity::warning, "redundancy group mixes component kinds", "redundancy_group");
  }

  std::sort(report.issues.begin(), report.issues.end(), [](const Issue& a, const Issue& b) {
    return std::tie(a.severity, a.locus, a.message) < std::tie(b.severity, b.locus, b.message);
  });
  report.ok = std::none_of(report.issues.begin(), report.issues.end(),
                           [](const Issue& i) { return i.severity == Severity::error; });
  return report;
}

}  // namespace nanomod
