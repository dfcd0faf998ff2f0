#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "codednet/curves.hpp"

namespace codednet {

// Broadcast link (i, J): one transmitter, a non-empty receiver set J ⊆ N(i).
// `mask` encodes J as bits over the sorted neighbor list of the tail, which
// fixes the canonical hyperarc order (tail, mask) used everywhere.
struct Hyperarc {
  int tail = -1;
  std::vector<int> heads;       // internal node indices, sorted
  std::uint32_t mask = 0;       // bits over sorted N(tail)
};

struct Arc {
  int tail = -1;
  int head = -1;
};

struct Session {
  int source = -1;
  std::vector<int> sinks;  // internal node indices, sorted, non-empty
};

// Box set B for the stacked average-rate/power vector y = (a, z, x, c, p).
struct BoxBounds {
  std::vector<double> a_min;       // per session, > 0 for log utilities
  std::vector<double> a_max;       // per session
  std::vector<double> z_max;       // per hyperarc (same bound for every session)
  std::vector<double> x_max;       // per arc (same bound for every (m,t))
  std::vector<double> c_max;       // per hyperarc
  std::vector<double> p_max_node;  // per node, long-term average power
  std::vector<double> p_max_tone;  // per tone, spectral mask on p^f_{iJ}
};

// Flat layout of the five multiplier/constraint families. Ordering contract:
// (nu, eta, xi, lambda, mu) blocks, each lexicographic in its tuple:
//   nu    : (m, t, i) over i != t
//   eta   : (m, t, i, K) with K = 1 .. 2^{|N(i)|}-1 in mask order
//   xi    : hyperarc order
//   lambda: hyperarc order
//   mu    : node order
// The i = t flow equations are omitted entirely; no entry exists for them.
struct ConstraintIndex {
  int n_nodes = 0;
  int n_sessions = 0;
  int n_hyperarcs = 0;
  int n_arcs = 0;
  std::vector<std::pair<int, int>> mt;  // (session, sink node) pairs, in order
  std::vector<int> degree;              // |N(i)| per node

  int nu_offset = 0;
  std::vector<int> nu_entry;  // [mt_idx * n_nodes + i] -> flat index or -1
  int eta_offset = 0;
  std::vector<int> eta_base;  // [mt_idx * n_nodes + i] -> index of mask 1
  int xi_offset = 0;
  int lam_offset = 0;
  int mu_offset = 0;
  int total = 0;

  int n_mt() const { return static_cast<int>(mt.size()); }

  int nu(int mt_idx, int i) const { return nu_entry[mt_idx * n_nodes + i]; }

  int eta(int mt_idx, int i, std::uint32_t mask) const {
    return eta_base[mt_idx * n_nodes + i] + static_cast<int>(mask) - 1;
  }

  int xi(int h) const { return xi_offset + h; }
  int lam(int h) const { return lam_offset + h; }
  int mu(int i) const { return mu_offset + i; }
};

// Stacked primal vector y. Entries are plain arrays with the flat layouts
// z[h * n_sessions + m] and x[arc * n_mt + mt_idx].
struct PrimalVector {
  std::vector<double> a;
  std::vector<double> z;
  std::vector<double> x;
  std::vector<double> c;
  std::vector<double> p;

  double& z_at(int h, int m, int n_sessions) { return z[h * n_sessions + m]; }
  double z_at(int h, int m, int n_sessions) const {
    return z[h * n_sessions + m];
  }
  double& x_at(int arc, int mt_idx, int n_mt) { return x[arc * n_mt + mt_idx]; }
  double x_at(int arc, int mt_idx, int n_mt) const {
    return x[arc * n_mt + mt_idx];
  }
};

// Immutable after build; all evaluation helpers are pure functions of it.
struct NetworkModel {
  // topology
  std::vector<long long> node_ids;                // external ids, by index
  std::vector<std::array<double, 2>> positions;   // meters; may be empty
  std::vector<std::vector<int>> neighbors;        // sorted N(i)
  std::vector<Hyperarc> hyperarcs;                // canonical (tail, mask) order
  std::vector<Arc> arcs;                          // canonical (tail, head) order
  std::vector<std::vector<int>> node_hyperarcs;   // hyperarc ids per tail
  std::vector<std::vector<int>> out_arcs;         // arc ids per tail
  std::vector<std::vector<int>> in_arcs;          // arc ids per head

  std::vector<Session> sessions;
  int tones = 1;
  BoxBounds bounds;
  std::vector<UtilityCurve> utility;  // per session
  std::vector<CostCurve> cost;        // per node
  ConstraintIndex index;

  int n_nodes() const { return static_cast<int>(node_ids.size()); }
  int n_sessions() const { return static_cast<int>(sessions.size()); }
  int n_hyperarcs() const { return static_cast<int>(hyperarcs.size()); }
  int n_arcs() const { return static_cast<int>(arcs.size()); }

  int node_index(long long external_id) const {
    for (int i = 0; i < n_nodes(); ++i)
      if (node_ids[i] == external_id) return i;
    throw std::invalid_argument("unknown node id " + std::to_string(external_id));
  }

  int neighbor_rank(int i, int j) const {
    const auto& nb = neighbors[i];
    auto it = std::lower_bound(nb.begin(), nb.end(), j);
    if (it == nb.end() || *it != j) return -1;
    return static_cast<int>(it - nb.begin());
  }

  int arc_id(int i, int j) const {
    for (int a : out_arcs[i])
      if (arcs[a].head == j) return a;
    return -1;
  }

  PrimalVector zero_primal() const {
    PrimalVector y;
    y.a.assign(n_sessions(), 0.0);
    y.z.assign(static_cast<std::size_t>(n_hyperarcs()) * n_sessions(), 0.0);
    y.x.assign(static_cast<std::size_t>(n_arcs()) * index.n_mt(), 0.0);
    y.c.assign(n_hyperarcs(), 0.0);
    y.p.assign(n_nodes(), 0.0);
    return y;
  }
};

namespace detail {

inline void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace detail

// Structural + session + bound inputs for building a model. Node references
// are external ids; everything else is derived and validated.
struct ModelBuild {
  std::vector<long long> node_ids;
  std::vector<std::array<double, 2>> positions;  // optional (empty)
  std::vector<std::pair<long long, std::vector<long long>>> hyperarcs;
  std::vector<std::pair<long long, std::vector<long long>>> sessions;
  int tones = 1;
  int max_degree = 8;  // subset-enumeration cap, config override
  BoxBounds bounds;    // fully per-entity, sized to the derived structure
  std::vector<UtilityCurve> utility;
  std::vector<CostCurve> cost;
};

inline NetworkModel build_network_model(const ModelBuild& in) {
  NetworkModel mdl;
  const int n = static_cast<int>(in.node_ids.size());
  if (n == 0) detail::fail("model has no nodes");
  mdl.node_ids = in.node_ids;
  {
    auto sorted = in.node_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      detail::fail("duplicate node ids");
  }
  if (!in.positions.empty() && static_cast<int>(in.positions.size()) != n)
    detail::fail("positions size does not match nodes");
  mdl.positions = in.positions;
  if (in.tones < 1) detail::fail("tone count must be >= 1");
  mdl.tones = in.tones;

  auto idx_of = [&](long long id) {
    for (int i = 0; i < n; ++i)
      if (in.node_ids[i] == id) return i;
    detail::fail("unknown node id " + std::to_string(id));
    return -1;
  };

  // derive neighbor sets N(i) as the projection of the hyperarc set
  mdl.neighbors.assign(n, {});
  std::vector<std::pair<int, std::vector<int>>> raw;
  raw.reserve(in.hyperarcs.size());
  for (const auto& [tail_id, head_ids] : in.hyperarcs) {
    int tail = idx_of(tail_id);
    if (head_ids.empty())
      detail::fail("hyperarc from node " + std::to_string(tail_id) +
                   " has empty receiver set");
    std::vector<int> heads;
    for (long long hid : head_ids) heads.push_back(idx_of(hid));
    std::sort(heads.begin(), heads.end());
    if (std::adjacent_find(heads.begin(), heads.end()) != heads.end())
      detail::fail("hyperarc receiver set contains duplicates");
    if (std::binary_search(heads.begin(), heads.end(), tail))
      detail::fail("hyperarc from node " + std::to_string(tail_id) +
                   " contains its own transmitter");
    for (int h : heads) mdl.neighbors[tail].push_back(h);
    raw.emplace_back(tail, std::move(heads));
  }
  for (int i = 0; i < n; ++i) {
    auto& nb = mdl.neighbors[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (static_cast<int>(nb.size()) > in.max_degree)
      detail::fail("degree too large: node " + std::to_string(in.node_ids[i]) +
                   " has |N(i)| = " + std::to_string(nb.size()) +
                   " > cap " + std::to_string(in.max_degree) +
                   " (raise max_degree to override)");
  }

  // canonical hyperarcs: (tail, mask over sorted N(tail)), ascending
  for (auto& [tail, heads] : raw) {
    Hyperarc h;
    h.tail = tail;
    h.heads = heads;
    for (int j : heads) {
      auto it = std::lower_bound(mdl.neighbors[tail].begin(),
                                 mdl.neighbors[tail].end(), j);
      h.mask |= 1u << (it - mdl.neighbors[tail].begin());
    }
    mdl.hyperarcs.push_back(std::move(h));
  }
  std::sort(mdl.hyperarcs.begin(), mdl.hyperarcs.end(),
            [](const Hyperarc& a, const Hyperarc& b) {
              return a.tail != b.tail ? a.tail < b.tail : a.mask < b.mask;
            });
  for (std::size_t k = 1; k < mdl.hyperarcs.size(); ++k) {
    if (mdl.hyperarcs[k].tail == mdl.hyperarcs[k - 1].tail &&
        mdl.hyperarcs[k].mask == mdl.hyperarcs[k - 1].mask)
      detail::fail("duplicate hyperarc in input");
  }

  // arcs G = {(i,j) : j in N(i)}, canonical (tail, head) order
  mdl.node_hyperarcs.assign(n, {});
  for (int h = 0; h < static_cast<int>(mdl.hyperarcs.size()); ++h)
    mdl.node_hyperarcs[mdl.hyperarcs[h].tail].push_back(h);
  mdl.out_arcs.assign(n, {});
  mdl.in_arcs.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j : mdl.neighbors[i]) {
      mdl.arcs.push_back({i, j});
      int a = static_cast<int>(mdl.arcs.size()) - 1;
      mdl.out_arcs[i].push_back(a);
      mdl.in_arcs[j].push_back(a);
    }

  // consistency cross-check: neighbor sets are exactly the hyperarc projection
  {
    std::vector<std::vector<int>> proj(n);
    for (const auto& h : mdl.hyperarcs)
      for (int j : h.heads) proj[h.tail].push_back(j);
    for (int i = 0; i < n; ++i) {
      std::sort(proj[i].begin(), proj[i].end());
      proj[i].erase(std::unique(proj[i].begin(), proj[i].end()), proj[i].end());
      if (proj[i] != mdl.neighbors[i])
        detail::fail("inconsistent hyperarc/neighbor data");
    }
  }

  // sessions
  if (in.sessions.empty()) detail::fail("model needs at least one session");
  for (const auto& [src_id, sink_ids] : in.sessions) {
    Session s;
    s.source = idx_of(src_id);
    if (sink_ids.empty()) detail::fail("session has no sinks");
    for (long long t : sink_ids) s.sinks.push_back(idx_of(t));
    std::sort(s.sinks.begin(), s.sinks.end());
    s.sinks.erase(std::unique(s.sinks.begin(), s.sinks.end()), s.sinks.end());
    if (std::binary_search(s.sinks.begin(), s.sinks.end(), s.source))
      detail::fail("session source is also a sink");
    mdl.sessions.push_back(std::move(s));
  }

  // curves
  mdl.utility = in.utility;
  mdl.cost = in.cost;
  if (static_cast<int>(mdl.utility.size()) != static_cast<int>(mdl.sessions.size()))
    detail::fail("need one utility curve per session");
  if (static_cast<int>(mdl.cost.size()) != n)
    detail::fail("need one cost curve per node");

  // bounds
  const int H = mdl.n_hyperarcs();
  const int A = mdl.n_arcs();
  const auto& b = in.bounds;
  auto check_size = [&](const std::vector<double>& v, int want,
                        const char* name) {
    if (static_cast<int>(v.size()) != want)
      detail::fail(std::string("bounds.") + name + " has wrong size");
    for (double d : v)
      if (!std::isfinite(d) || d < 0.0)
        detail::fail(std::string("bounds.") + name +
                     " must be finite and non-negative");
  };
  check_size(b.a_min, mdl.n_sessions(), "a_min");
  check_size(b.a_max, mdl.n_sessions(), "a_max");
  check_size(b.z_max, H, "z_max");
  check_size(b.x_max, A, "x_max");
  check_size(b.c_max, H, "c_max");
  check_size(b.p_max_node, n, "p_max_node");
  check_size(b.p_max_tone, mdl.tones, "p_max_tone");
  for (int m = 0; m < mdl.n_sessions(); ++m) {
    if (b.a_min[m] > b.a_max[m]) detail::fail("a_min exceeds a_max");
    if (mdl.utility[m].kind == UtilityCurve::Kind::Log && b.a_min[m] <= 0.0)
      detail::fail("a_min must be > 0 for logarithmic utilities");
  }
  mdl.bounds = b;

  // constraint index
  ConstraintIndex& ix = mdl.index;
  ix.n_nodes = n;
  ix.n_sessions = mdl.n_sessions();
  ix.n_hyperarcs = H;
  ix.n_arcs = A;
  ix.degree.resize(n);
  for (int i = 0; i < n; ++i)
    ix.degree[i] = static_cast<int>(mdl.neighbors[i].size());
  for (int m = 0; m < mdl.n_sessions(); ++m)
    for (int t : mdl.sessions[m].sinks) ix.mt.emplace_back(m, t);

  const int MT = ix.n_mt();
  int pos = 0;
  ix.nu_offset = pos;
  ix.nu_entry.assign(static_cast<std::size_t>(MT) * n, -1);
  for (int k = 0; k < MT; ++k)
    for (int i = 0; i < n; ++i)
      if (i != ix.mt[k].second) ix.nu_entry[k * n + i] = pos++;
  ix.eta_offset = pos;
  ix.eta_base.assign(static_cast<std::size_t>(MT) * n, -1);
  for (int k = 0; k < MT; ++k)
    for (int i = 0; i < n; ++i) {
      ix.eta_base[k * n + i] = pos;
      pos += (1 << ix.degree[i]) - 1;
    }
  ix.xi_offset = pos;
  pos += H;
  ix.lam_offset = pos;
  pos += H;
  ix.mu_offset = pos;
  pos += n;
  ix.total = pos;

  return mdl;
}

// sigma_i^m: exogenous injection a^m at the source, zero elsewhere
// (the i = t rows never exist, so the -a^m case never appears).
inline double sigma(const NetworkModel& mdl, const PrimalVector& y, int m,
                    int i) {
  return i == mdl.sessions[m].source ? y.a[m] : 0.0;
}

// Flow-conservation residual at node i for (session m, sink t):
//   sigma_i^m - sum_out x + sum_in x;  positive value = violation.
inline double flow_divergence(const NetworkModel& mdl, const PrimalVector& y,
                              int m, int t, int i) {
  if (m < 0 || m >= mdl.n_sessions()) detail::fail("unknown session");
  if (i < 0 || i >= mdl.n_nodes()) detail::fail("unknown node");
  const auto& sinks = mdl.sessions[m].sinks;
  if (!std::binary_search(sinks.begin(), sinks.end(), t))
    detail::fail("unknown sink for session");
  if (i == t) detail::fail("flow_divergence is undefined at i = t");
  int mt_idx = -1;
  for (int k = 0; k < mdl.index.n_mt(); ++k)
    if (mdl.index.mt[k] == std::make_pair(m, t)) mt_idx = k;
  const int MT = mdl.index.n_mt();
  double v = sigma(mdl, y, m, i);
  for (int a : mdl.out_arcs[i]) v -= y.x_at(a, mt_idx, MT);
  for (int a : mdl.in_arcs[i]) v += y.x_at(a, mt_idx, MT);
  return v;
}

// Subset (max-flow) residual for K ⊆ N(i), K non-empty:
//   sum_{j in K} x_ij - sum_{J : J∩K != ∅} z_iJ.
inline double subset_violation(const NetworkModel& mdl, const PrimalVector& y,
                               int i, std::uint32_t kmask, int m, int t) {
  if (i < 0 || i >= mdl.n_nodes()) detail::fail("unknown node");
  const std::uint32_t full = (1u << mdl.index.degree[i]) - 1;
  if (kmask == 0 || (kmask & ~full) != 0)
    detail::fail("K must be a non-empty subset of N(i)");
  int mt_idx = -1;
  for (int k = 0; k < mdl.index.n_mt(); ++k)
    if (mdl.index.mt[k] == std::make_pair(m, t)) mt_idx = k;
  if (mt_idx < 0) detail::fail("unknown (session, sink) pair");
  const int MT = mdl.index.n_mt();
  double v = 0.0;
  for (int r = 0; r < mdl.index.degree[i]; ++r)
    if (kmask & (1u << r)) {
      int j = mdl.neighbors[i][r];
      v += y.x_at(mdl.arc_id(i, j), mt_idx, MT);
    }
  for (int h : mdl.node_hyperarcs[i])
    if (mdl.hyperarcs[h].mask & kmask) v -= y.z_at(h, m, mdl.n_sessions());
  return v;
}

// q(y, cbar, pbar): the stacked constraint vector. cbar/pbar are the
// physical-layer expectation terms E[sum_f C^f_iJ] and E[sum_{f,J} p^f_iJ],
// supplied by the caller; this module never computes expectations.
inline std::vector<double> constraint_vector(const NetworkModel& mdl,
                                             const PrimalVector& y,
                                             std::span<const double> cbar,
                                             std::span<const double> pbar) {
  const ConstraintIndex& ix = mdl.index;
  if (static_cast<int>(cbar.size()) != ix.n_hyperarcs ||
      static_cast<int>(pbar.size()) != ix.n_nodes)
    detail::fail("constraint_vector: cbar/pbar dimension mismatch");
  const int MT = ix.n_mt();
  std::vector<double> q(ix.total, 0.0);

  for (int k = 0; k < MT; ++k) {
    const auto [m, t] = ix.mt[k];
    for (int i = 0; i < ix.n_nodes; ++i) {
      int e = ix.nu(k, i);
      if (e < 0) continue;
      double v = sigma(mdl, y, m, i);
      for (int a : mdl.out_arcs[i]) v -= y.x_at(a, k, MT);
      for (int a : mdl.in_arcs[i]) v += y.x_at(a, k, MT);
      q[e] = v;
    }
    for (int i = 0; i < ix.n_nodes; ++i) {
      const int d = ix.degree[i];
      if (d == 0) continue;
      const int base = ix.eta_base[k * ix.n_nodes + i];
      // x-part per mask via subset DP over bits
      for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        int low = std::countr_zero(mask);
        std::uint32_t rest = mask & (mask - 1);
        double xs = y.x_at(mdl.arc_id(i, mdl.neighbors[i][low]), k, MT);
        if (rest) xs += q[base + static_cast<int>(rest) - 1];
        q[base + static_cast<int>(mask) - 1] = xs;
      }
      for (int h : mdl.node_hyperarcs[i]) {
        double zv = y.z_at(h, m, ix.n_sessions);
        if (zv == 0.0) continue;
        const std::uint32_t jm = mdl.hyperarcs[h].mask;
        for (std::uint32_t mask = 1; mask < (1u << d); ++mask)
          if (mask & jm) q[base + static_cast<int>(mask) - 1] -= zv;
      }
    }
  }
  for (int h = 0; h < ix.n_hyperarcs; ++h) {
    double zsum = 0.0;
    for (int m = 0; m < ix.n_sessions; ++m) zsum += y.z_at(h, m, ix.n_sessions);
    q[ix.xi(h)] = zsum - y.c[h];
    q[ix.lam(h)] = y.c[h] - cbar[h];
  }
  for (int i = 0; i < ix.n_nodes; ++i) q[ix.mu(i)] = pbar[i] - y.p[i];
  return q;
}

// f(y) = sum_m U_m(a^m) - sum_i V_i(p_i)
inline double objective_value(const NetworkModel& mdl, const PrimalVector& y) {
  double f = 0.0;
  for (int m = 0; m < mdl.n_sessions(); ++m) f += mdl.utility[m].value(y.a[m]);
  for (int i = 0; i < mdl.n_nodes(); ++i) f -= mdl.cost[i].value(y.p[i]);
  return f;
}

inline bool in_box(const NetworkModel& mdl, const PrimalVector& y,
                   double tol = 1e-12) {
  const auto& b = mdl.bounds;
  for (int m = 0; m < mdl.n_sessions(); ++m)
    if (y.a[m] < b.a_min[m] - tol || y.a[m] > b.a_max[m] + tol) return false;
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    if (y.c[h] < -tol || y.c[h] > b.c_max[h] + tol) return false;
    for (int m = 0; m < mdl.n_sessions(); ++m) {
      double zv = y.z_at(h, m, mdl.n_sessions());
      if (zv < -tol || zv > b.z_max[h] + tol) return false;
    }
  }
  for (int a = 0; a < mdl.n_arcs(); ++a)
    for (int k = 0; k < mdl.index.n_mt(); ++k) {
      double xv = y.x_at(a, k, mdl.index.n_mt());
      if (xv < -tol || xv > b.x_max[a] + tol) return false;
    }
  for (int i = 0; i < mdl.n_nodes(); ++i)
    if (y.p[i] < -tol || y.p[i] > b.p_max_node[i] + tol) return false;
  return true;
}

}  // namespace codednet
