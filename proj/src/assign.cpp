#include "nanomod/assign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "nanomod/errors.hpp"
#include "nanomod/routing_grid.hpp"

namespace nanomod {

namespace {

using i128 = __int128;

/// Indexed view of one assignment problem.
struct Problem {
  std::size_t n_inst = 0;
  std::vector<int> inst_kind;                 // -1 when no component of the kind exists
  std::vector<std::vector<int>> inst_nets;
  std::vector<std::vector<int>> net_members;  // distinct instance indices
  std::vector<std::size_t> id_rank;           // rank of instance id in sorted order
  std::vector<PointNm> pos;                   // per observation index
  std::vector<std::uint32_t> obs_id;
  std::vector<bool> impaired;
  std::vector<std::vector<int>> pool;         // per kind, observation indices sorted by obs_id
  std::vector<std::size_t> demand;            // instances per kind
  double penalty = 0.0;
};

Problem build_problem(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                      const AssignParams& params) {
  Problem p;
  p.n_inst = netlist.instances.size();
  p.penalty = params.overlap_penalty_nm;

  std::unordered_map<std::string, int> inst_index;
  for (std::size_t i = 0; i < p.n_inst; ++i) inst_index.emplace(netlist.instances[i].id, static_cast<int>(i));

  std::vector<std::size_t> order(p.n_inst);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return netlist.instances[a].id < netlist.instances[b].id; });
  p.id_rank.resize(p.n_inst);
  for (std::size_t r = 0; r < order.size(); ++r) p.id_rank[order[r]] = r;

  std::map<std::string, int> kind_index;
  for (const auto& o : field.observations) kind_index.emplace(o.kind, 0);
  int next = 0;
  for (auto& [k, v] : kind_index) v = next++;
  p.pool.resize(kind_index.size());
  p.demand.assign(kind_index.size(), 0);

  p.inst_kind.resize(p.n_inst);
  for (std::size_t i = 0; i < p.n_inst; ++i) {
    const auto it = kind_index.find(netlist.instances[i].kind);
    p.inst_kind[i] = it == kind_index.end() ? -1 : it->second;
    if (p.inst_kind[i] >= 0) ++p.demand[p.inst_kind[i]];
  }

  p.inst_nets.resize(p.n_inst);
  for (const auto& net : netlist.nets) {
    std::vector<int> members;
    for (const auto& ref : net.pins) {
      const auto it = inst_index.find(ref.instance);
      if (it != inst_index.end()) members.push_back(it->second);
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    const int n = static_cast<int>(p.net_members.size());
    for (int m : members) p.inst_nets[m].push_back(n);
    p.net_members.push_back(std::move(members));
  }

  const std::size_t n_obs = field.observations.size();
  p.pos.resize(n_obs);
  p.obs_id.resize(n_obs);
  p.impaired.assign(n_obs, false);
  std::unordered_map<std::uint32_t, std::size_t> by_id;
  for (std::size_t o = 0; o < n_obs; ++o) {
    p.pos[o] = field.observations[o].center_est;
    p.obs_id[o] = field.observations[o].obs_id;
    by_id.emplace(p.obs_id[o], o);
  }
  for (const auto& [a, b] : detect_observed_overlaps(field, kinds)) {
    p.impaired[by_id.at(a)] = true;
    p.impaired[by_id.at(b)] = true;
  }
  // A pad outside the region cannot land on the routing grid.
  for (std::size_t o = 0; o < n_obs; ++o) {
    const auto& obs = field.observations[o];
    for (const auto& pin : kinds.at(obs.kind).pins) {
      if (!field.region.contains(pin_position(obs, pin))) p.impaired[o] = true;
    }
  }

  // Clean components first; impaired ones join only when a kind runs short.
  std::vector<std::vector<int>> clean(kind_index.size()), usable(kind_index.size());
  for (std::size_t o = 0; o < n_obs; ++o) {
    if (field.observations[o].classified_defective) continue;
    const int k = kind_index.at(field.observations[o].kind);
    usable[k].push_back(static_cast<int>(o));
    if (!p.impaired[o]) clean[k].push_back(static_cast<int>(o));
  }
  for (std::size_t k = 0; k < kind_index.size(); ++k) {
    p.pool[k] = clean[k].size() >= p.demand[k] ? clean[k] : usable[k];
    std::sort(p.pool[k].begin(), p.pool[k].end(), [&](int a, int b) { return p.obs_id[a] < p.obs_id[b]; });
  }
  return p;
}

double distance(PointNm a, PointNm b) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  return std::sqrt(dx * dx + dy * dy);
}

/// Prim's algorithm over the mapped members of one net.
double net_cost(const Problem& p, int net, const std::vector<int>& inst_phys) {
  thread_local std::vector<PointNm> pts;
  thread_local std::vector<double> best;
  pts.clear();
  for (int m : p.net_members[net]) {
    if (inst_phys[m] >= 0) pts.push_back(p.pos[inst_phys[m]]);
  }
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  best.assign(n, std::numeric_limits<double>::infinity());
  std::vector<bool> in_tree(n, false);
  double total = 0.0;
  std::size_t cur = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      best[j] = std::min(best[j], distance(pts[cur], pts[j]));
      if (pick == n || best[j] < best[pick]) pick = j;
    }
    in_tree[pick] = true;
    total += best[pick];
    cur = pick;
  }
  return total;
}

double total_cost(const Problem& p, const std::vector<int>& inst_phys) {
  double c = 0.0;
  for (std::size_t n = 0; n < p.net_members.size(); ++n) c += net_cost(p, static_cast<int>(n), inst_phys);
  for (int o : inst_phys) {
    if (o >= 0 && p.impaired[o]) c += p.penalty;
  }
  return c;
}

Assignment finish(const Netlist& netlist, const Problem& p, const std::vector<int>& inst_phys) {
  Assignment a;
  std::vector<bool> used(p.pos.size(), false);
  for (std::size_t i = 0; i < p.n_inst; ++i) {
    if (inst_phys[i] >= 0) {
      a.mapping.emplace(netlist.instances[i].id, p.obs_id[inst_phys[i]]);
      used[inst_phys[i]] = true;
    } else {
      a.unassigned_logical.push_back(netlist.instances[i].id);
    }
  }
  for (std::size_t o = 0; o < p.pos.size(); ++o) {
    if (!used[o]) a.unused_physical.push_back(p.obs_id[o]);
  }
  std::sort(a.unassigned_logical.begin(), a.unassigned_logical.end());
  std::sort(a.unused_physical.begin(), a.unused_physical.end());
  a.cost = total_cost(p, inst_phys);
  return a;
}

/// Target point kept as an exact rational (sum / count) so nearest-neighbour
/// decisions are unaffected by translating the whole field.
struct Target {
  i128 sx = 0;
  i128 sy = 0;
  i128 count = 0;
  void add(PointNm q) { sx += q.x; sy += q.y; ++count; }
  i128 dist2(PointNm q) const {
    const i128 dx = static_cast<i128>(q.x) * count - sx;
    const i128 dy = static_cast<i128>(q.y) * count - sy;
    return dx * dx + dy * dy;
  }
  double approx_x() const { return static_cast<double>(sx) / static_cast<double>(count); }
  double approx_y() const { return static_cast<double>(sy) / static_cast<double>(count); }
};

/// Static bucket grid over one kind pool.
class PoolIndex {
 public:
  PoolIndex(const Problem& p, const std::vector<int>& members) : p_(p), members_(members) {
    if (members_.empty()) return;
    std::int64_t x0 = INT64_MAX, y0 = INT64_MAX, x1 = INT64_MIN, y1 = INT64_MIN;
    for (int o : members_) {
      x0 = std::min(x0, p.pos[o].x);
      y0 = std::min(y0, p.pos[o].y);
      x1 = std::max(x1, p.pos[o].x);
      y1 = std::max(y1, p.pos[o].y);
    }
    origin_ = {x0, y0};
    const double area = static_cast<double>(x1 - x0 + 1) * static_cast<double>(y1 - y0 + 1);
    bucket_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(2.0 * std::sqrt(area / members_.size())));
    nx_ = (x1 - x0) / bucket_ + 1;
    ny_ = (y1 - y0) / bucket_ + 1;
    cells_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (int o : members_) cells_[cell_of(p.pos[o])].push_back(o);
  }

  /// Up to `k` nearest members accepted by `filter`, nearest first, ties by obs_id.
  template <typename Filter>
  std::vector<int> nearest(const Target& t, std::size_t k, Filter filter) const {
    std::vector<std::pair<i128, int>> found;
    if (members_.empty() || k == 0) return {};
    const auto bx = clamp_bucket((static_cast<std::int64_t>(std::floor(t.approx_x())) - origin_.x) / bucket_, nx_);
    const auto by = clamp_bucket((static_cast<std::int64_t>(std::floor(t.approx_y())) - origin_.y) / bucket_, ny_);
    const std::int64_t max_ring = std::max(nx_, ny_) + 1;
    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
      for (std::int64_t dx = -ring; dx <= ring; ++dx) {
        for (std::int64_t dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          const std::int64_t cx = bx + dx, cy = by + dy;
          if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) continue;
          for (int o : cells_[static_cast<std::size_t>(cy * nx_ + cx)]) {
            if (filter(o)) found.emplace_back(t.dist2(p_.pos[o]), o);
          }
        }
      }
      if (found.size() >= k) {
        // Anything in a later ring is at least (ring) buckets away from the
        // target's bucket; stop once the k-th candidate is closer than that.
        std::nth_element(found.begin(), found.begin() + static_cast<long>(k - 1), found.end(), cmp());
        const double kth = std::sqrt(static_cast<double>(found[k - 1].first)) / static_cast<double>(t.count);
        if (kth < static_cast<double>(ring * bucket_) - 2.0) break;
      }
    }
    std::sort(found.begin(), found.end(), cmp());
    if (found.size() > k) found.resize(k);
    std::vector<int> out;
    out.reserve(found.size());
    for (const auto& f : found) out.push_back(f.second);
    return out;
  }

 private:
  auto cmp() const {
    return [this](const std::pair<i128, int>& a, const std::pair<i128, int>& b) {
      if (a.first != b.first) return a.first < b.first;
      return p_.obs_id[a.second] < p_.obs_id[b.second];
    };
  }
  static std::int64_t clamp_bucket(std::int64_t v, std::int64_t n) { return std::clamp<std::int64_t>(v, 0, n - 1); }
  std::size_t cell_of(PointNm q) const {
    return static_cast<std::size_t>(((q.y - origin_.y) / bucket_) * nx_ + (q.x - origin_.x) / bucket_);
  }

  const Problem& p_;
  const std::vector<int>& members_;
  PointNm origin_;
  std::int64_t bucket_ = 1;
  std::int64_t nx_ = 0, ny_ = 0;
  std::vector<std::vector<int>> cells_;
};

/// Mutable assignment state with cached per-net costs.
class Search {
 public:
  Search(const Problem& p, const std::vector<PoolIndex>& index) : p_(p), index_(index) {
    inst_phys_.assign(p.n_inst, -1);
    phys_inst_.assign(p.pos.size(), -1);
  }

  const std::vector<int>& inst_phys() const { return inst_phys_; }

  void place(int inst, int phys) {
    inst_phys_[inst] = phys;
    phys_inst_[phys] = inst;
  }

  bool is_free(int phys) const { return phys_inst_[phys] < 0; }

  /// Exact centroid of the mapped net-mates of `inst`.
  Target mates_target(int inst) const {
    Target t;
    for (int n : p_.inst_nets[inst]) {
      for (int m : p_.net_members[n]) {
        if (m != inst && inst_phys_[m] >= 0) t.add(p_.pos[inst_phys_[m]]);
      }
    }
    return t;
  }

  Target pool_centroid(int kind) const {
    Target t;
    for (int o : p_.pool[kind]) t.add(p_.pos[o]);
    return t;
  }

  /// Greedy seed. Hinted instances go first in netlist order; the rest grow
  /// as a cluster, most-connected first. A non-negative `anchor_inst` starts
  /// on component `anchor_phys`.
  void seed(const Netlist& netlist, bool use_hints, int anchor_inst = -1, int anchor_phys = -1) {
    std::vector<bool> placed(p_.n_inst, false);
    if (anchor_inst >= 0) {
      placed[anchor_inst] = true;
      place(anchor_inst, anchor_phys);
    }
    auto put = [&](int i, const Target& t) {
      placed[i] = true;
      const int k = p_.inst_kind[i];
      if (k < 0 || t.count == 0) return;
      const auto pick = index_[k].nearest(t, 1, [this](int o) { return is_free(o); });
      if (!pick.empty()) place(i, pick.front());
    };

    if (use_hints) {
      for (std::size_t i = 0; i < p_.n_inst; ++i) {
        const auto& hint = netlist.instances[i].placement_hint;
        if (!hint) continue;
        Target t;
        t.add(*hint);
        put(static_cast<int>(i), t);
      }
    }

    std::vector<int> conn(p_.n_inst, 0), degree(p_.n_inst, 0);
    for (std::size_t i = 0; i < p_.n_inst; ++i) {
      for (int n : p_.inst_nets[i]) degree[i] += static_cast<int>(p_.net_members[n].size()) - 1;
    }
    using Key = std::tuple<int, int, std::size_t, int>;  // -conn, -degree, id rank, index
    std::set<Key> queue;
    auto key = [&](int i) { return Key{-conn[i], -degree[i], p_.id_rank[i], i}; };
    auto bump_mates = [&](int i) {
      for (int n : p_.inst_nets[i]) {
        for (int m : p_.net_members[n]) {
          if (m == i || placed[m]) continue;
          queue.erase(key(m));
          ++conn[m];
          queue.insert(key(m));
        }
      }
    };
    for (std::size_t i = 0; i < p_.n_inst; ++i) {
      if (placed[i]) {
        for (int n : p_.inst_nets[i]) {
          for (int m : p_.net_members[n]) {
            if (m != static_cast<int>(i) && !placed[m]) ++conn[m];
          }
        }
      }
    }
    for (std::size_t i = 0; i < p_.n_inst; ++i) {
      if (!placed[i]) queue.insert(key(static_cast<int>(i)));
    }
    while (!queue.empty()) {
      const int i = std::get<3>(*queue.begin());
      queue.erase(queue.begin());
      Target t = mates_target(i);
      if (t.count == 0 && p_.inst_kind[i] >= 0) t = pool_centroid(p_.inst_kind[i]);
      put(i, t);
      bump_mates(i);
    }
  }

  /// Applies one change regardless of its cost: a move or swap for a mapped
  /// instance, a take for an unmapped one.
  void force(int i, int q) {
    if (inst_phys_[i] < 0) {
      take(i, q);
    } else if (inst_phys_[i] != q) {
      apply(i, q);
    }
  }

  /// Move/swap local search until no single change lowers the cost.
  void refine(const AssignParams& params) {
    net_cost_.resize(p_.net_members.size());
    for (std::size_t n = 0; n < net_cost_.size(); ++n) net_cost_[n] = net_cost(p_, static_cast<int>(n), inst_phys_);
    double total = std::accumulate(net_cost_.begin(), net_cost_.end(), 0.0);
    for (int pass = 0; pass < params.max_passes; ++pass) {
      bool improved = false;
      for (std::size_t ii = 0; ii < p_.n_inst; ++ii) {
        const int i = static_cast<int>(ii);
        const int cur = inst_phys_[i];
        const int k = p_.inst_kind[i];
        if (cur < 0) {
          // An unmapped instance may take a component from its owner when
          // the kind runs short.
          if (k < 0) continue;
          double best = 0.0;
          int best_q = -1;
          for (int q : p_.pool[k]) {
            const double d = take_delta(i, q);
            if (best_q < 0 || d < best - 1e-9) {
              best = d;
              best_q = q;
            }
          }
          if (best_q >= 0 && best < -1e-9 * std::max(1.0, total)) {
            take(i, best_q);
            total += best;
            improved = true;
          }
          continue;
        }
        std::vector<int> candidates;
        if (p_.pool[k].size() <= params.full_scan_limit) {
          candidates = p_.pool[k];
        } else {
          Target t = mates_target(i);
          if (t.count == 0) t.add(p_.pos[cur]);
          candidates = index_[k].nearest(t, params.candidate_count, [](int) { return true; });
        }
        double best = 0.0;
        int best_q = -1;
        for (int q : candidates) {
          if (q == cur) continue;
          const double d = delta(i, q);
          if (best_q < 0 || d < best - 1e-9 || (d <= best + 1e-9 && p_.obs_id[q] < p_.obs_id[best_q])) {
            best = d;
            best_q = q;
          }
        }
        if (best_q >= 0 && best < -1e-9 * std::max(1.0, total)) {
          apply(i, best_q);
          total += best;
          improved = true;
        }
      }
      if (!improved) break;
    }
  }

 private:
  void touched_nets(int i, int j, std::vector<int>& out) const {
    out = p_.inst_nets[i];
    if (j >= 0) out.insert(out.end(), p_.inst_nets[j].begin(), p_.inst_nets[j].end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  void exchange(int i, int q) {
    const int cur = inst_phys_[i];
    const int j = phys_inst_[q];
    inst_phys_[i] = q;
    phys_inst_[q] = i;
    phys_inst_[cur] = j;
    if (j >= 0) inst_phys_[j] = cur;
  }

  double delta(int i, int q) {
    const int cur = inst_phys_[i];
    const int j = phys_inst_[q];
    thread_local std::vector<int> nets;
    touched_nets(i, j, nets);
    double before = 0.0, after = 0.0;
    for (int n : nets) before += net_cost_[n];
    exchange(i, q);
    for (int n : nets) after += net_cost(p_, n, inst_phys_);
    exchange(i, cur);
    double d = after - before;
    if (j < 0) d += p_.penalty * ((p_.impaired[q] ? 1 : 0) - (p_.impaired[cur] ? 1 : 0));
    return d;
  }

  /// Cost change when unmapped `i` takes `q`, unmapping its owner.
  double take_delta(int i, int q) {
    const int j = phys_inst_[q];
    thread_local std::vector<int> nets;
    touched_nets(i, j, nets);
    double before = 0.0, after = 0.0;
    for (int n : nets) before += net_cost_[n];
    inst_phys_[i] = q;
    if (j >= 0) inst_phys_[j] = -1;
    for (int n : nets) after += net_cost(p_, n, inst_phys_);
    inst_phys_[i] = -1;
    if (j >= 0) inst_phys_[j] = q;
    // The penalty on q is unchanged unless q was free.
    return after - before + (j < 0 && p_.impaired[q] ? p_.penalty : 0.0);
  }

  void take(int i, int q) {
    const int j = phys_inst_[q];
    std::vector<int> nets;
    touched_nets(i, j, nets);
    inst_phys_[i] = q;
    phys_inst_[q] = i;
    if (j >= 0) inst_phys_[j] = -1;
    for (int n : nets) net_cost_[n] = net_cost(p_, n, inst_phys_);
  }

  void apply(int i, int q) {
    const int j = phys_inst_[q];
    std::vector<int> nets;
    touched_nets(i, j, nets);
    exchange(i, q);
    for (int n : nets) net_cost_[n] = net_cost(p_, n, inst_phys_);
  }

  const Problem& p_;
  const std::vector<PoolIndex>& index_;
  std::vector<int> inst_phys_;
  std::vector<int> phys_inst_;
  std::vector<double> net_cost_;
};

bool better(double cost, const Assignment& cand, const Assignment& best) {
  const double tol = 1e-9 * std::max(1.0, std::fabs(best.cost));
  if (cost < best.cost - tol) return true;
  if (cost > best.cost + tol) return false;
  return cand.mapping < best.mapping;
}

}  // namespace

double assignment_cost(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                       const std::map<std::string, std::uint32_t>& mapping, const AssignParams& params) {
  const Problem p = build_problem(netlist, field, kinds, params);
  std::unordered_map<std::uint32_t, int> by_id;
  for (std::size_t o = 0; o < p.obs_id.size(); ++o) by_id.emplace(p.obs_id[o], static_cast<int>(o));
  std::vector<int> inst_phys(p.n_inst, -1);
  for (std::size_t i = 0; i < p.n_inst; ++i) {
    const auto it = mapping.find(netlist.instances[i].id);
    if (it == mapping.end()) continue;
    const auto o = by_id.find(it->second);
    if (o == by_id.end()) throw IntegrityError("mapping names unknown obs_id " + std::to_string(it->second));
    inst_phys[i] = o->second;
  }
  return total_cost(p, inst_phys);
}

Assignment assign(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                  const AssignParams& params) {
  const Problem p = build_problem(netlist, field, kinds, params);
  std::vector<PoolIndex> index;
  index.reserve(p.pool.size());
  for (const auto& members : p.pool) index.emplace_back(p, members);

  const bool has_hints =
      params.use_placement_hints &&
      std::any_of(netlist.instances.begin(), netlist.instances.end(), [](const Instance& i) { return i.placement_hint; });

  Search base(p, index);
  base.seed(netlist, params.use_placement_hints);
  base.refine(params);
  Assignment best = finish(netlist, p, base.inst_phys());
  std::optional<Search> best_search(base);

  if (!has_hints && p.n_inst > 0 && p.n_inst <= params.multistart_limit) {
    // Retry with each instance in turn pinned to each of the components
    // nearest its pool centre.
    for (std::size_t ii = 0; ii < p.n_inst; ++ii) {
      const int k = p.inst_kind[ii];
      if (k < 0 || p.inst_nets[ii].empty()) continue;
      Target centre;
      for (int o : p.pool[k]) centre.add(p.pos[o]);
      if (centre.count == 0) continue;
      for (int a : index[k].nearest(centre, 8, [](int) { return true; })) {
        Search s(p, index);
        s.seed(netlist, false, static_cast<int>(ii), a);
        s.refine(params);
        Assignment cand = finish(netlist, p, s.inst_phys());
        if (better(cand.cost, cand, best)) {
          best = std::move(cand);
          best_search.emplace(s);
        }
      }
    }

    // Kicks: force each single change on the best solution, descend, and
    // keep the result when it improves. Escapes optima that need a compound
    // change, such as swapping which instance stays unmapped.
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t ii = 0; ii < p.n_inst && !improved; ++ii) {
        const int k = p.inst_kind[ii];
        if (k < 0 || p.pool[k].size() > params.full_scan_limit) continue;
        for (int q : p.pool[k]) {
          Search s(*best_search);
          s.force(static_cast<int>(ii), q);
          s.refine(params);
          Assignment cand = finish(netlist, p, s.inst_phys());
          if (cand.mapping.size() == best.mapping.size() && better(cand.cost, cand, best)) {
            best = std::move(cand);
            best_search.emplace(std::move(s));
            improved = true;
            break;
          }
        }
      }
    }
  }
  return best;
}

Assignment assign_exhaustive(const Netlist& netlist, const ObservedField& field, const KindLibrary& kinds,
                             const AssignParams& params) {
  if (netlist.instances.size() > kExhaustiveLimit) {
    throw ConfigError("exhaustive assignment is limited to " + std::to_string(kExhaustiveLimit) + " instances, got " +
                      std::to_string(netlist.instances.size()));
  }
  const Problem p = build_problem(netlist, field, kinds, params);

  std::vector<int> order(p.n_inst);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return p.id_rank[a] < p.id_rank[b]; });

  std::vector<int> slack(p.pool.size(), 0);
  for (std::size_t k = 0; k < p.pool.size(); ++k) {
    slack[k] = std::max(0, static_cast<int>(p.demand[k]) - static_cast<int>(p.pool[k].size()));
  }

  std::vector<int> inst_phys(p.n_inst, -1);
  std::vector<bool> used(p.pos.size(), false);
  bool have_best = false;
  double best_cost = 0.0;
  std::vector<int> best_phys;
  std::vector<std::pair<std::size_t, std::uint32_t>> best_key;

  auto key_of = [&](const std::vector<int>& ip) {
    std::vector<std::pair<std::size_t, std::uint32_t>> key;
    for (int i : order) {
      if (ip[i] >= 0) key.emplace_back(p.id_rank[i], p.obs_id[ip[i]]);
    }
    return key;
  };

  auto dfs = [&](auto&& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      const double c = total_cost(p, inst_phys);
      const double tol = 1e-9 * std::max(1.0, std::fabs(best_cost));
      if (!have_best || c < best_cost - tol) {
        have_best = true;
        best_cost = c;
        best_phys = inst_phys;
        best_key = key_of(inst_phys);
      } else if (c <= best_cost + tol) {
        auto key = key_of(inst_phys);
        if (key < best_key) {
          best_cost = std::min(best_cost, c);
          best_phys = inst_phys;
          best_key = std::move(key);
        }
      }
      return;
    }
    const int i = order[depth];
    const int k = p.inst_kind[i];
    if (k < 0) {
      self(self, depth + 1);
      return;
    }
    for (int o : p.pool[k]) {
      if (used[o]) continue;
      used[o] = true;
      inst_phys[i] = o;
      self(self, depth + 1);
      inst_phys[i] = -1;
      used[o] = false;
    }
    if (slack[k] > 0) {
      --slack[k];
      self(self, depth + 1);
      ++slack[k];
    }
  };
  dfs(dfs, 0);
  if (!have_best) best_phys.assign(p.n_inst, -1);
  return finish(netlist, p, best_phys);
}

}  // namespace nanomod
