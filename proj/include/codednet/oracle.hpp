#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "codednet/channel.hpp"
#include "codednet/model.hpp"
#include "codednet/phy.hpp"

// Brute-force verifiers used by tests and `validate`. Everything here is
// deliberately independent of the fast paths it cross-checks: separate rule
// logic, exhaustive scans, and a generic convex solver instead of the dual
// decomposition machinery.
namespace codednet::oracle {

struct GridResult {
  double x = 0.0;
  double value = 0.0;
};

// Exhaustive scan of a scalar objective over [lo, hi]; first maximum wins,
// so ties resolve toward the lower endpoint.
inline GridResult grid_argmax(const std::function<double(double)>& fn,
                              double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  GridResult best{lo, fn(lo)};
  if (hi <= lo) return best;
  const auto n = static_cast<std::uint64_t>(std::ceil((hi - lo) / step));
  for (std::uint64_t k = 1; k <= n; ++k) {
    double x = std::min(hi, lo + static_cast<double>(k) * step);
    double v = fn(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

namespace detail {

inline bool sorted_intersects(const std::vector<int>& u,
                              const std::vector<int>& v) {
  std::size_t i = 0, j = 0;
  while (i < u.size() && j < v.size()) {
    if (u[i] == v[j]) return true;
    u[i] < v[j] ? ++i : ++j;
  }
  return false;
}

}  // namespace detail

// Conflict rules re-derived here so the fast enumerator has a genuinely
// independent referee.
inline bool pair_conflicts(const NetworkModel& mdl, int ha, int hb,
                           bool secondary) {
  const auto& A = mdl.hyperarcs[ha];
  const auto& B = mdl.hyperarcs[hb];
  if (A.tail == B.tail) return true;  // (i) one transmission per node
  const bool half_duplex_violated =
      std::binary_search(A.heads.begin(), A.heads.end(), B.tail) ||
      std::binary_search(B.heads.begin(), B.heads.end(), A.tail);
  if (half_duplex_violated) return true;  // (ii)
  if (detail::sorted_intersects(A.heads, B.heads)) return true;  // (iii-a)
  if (secondary &&
      (detail::sorted_intersects(A.heads, mdl.neighbors[B.tail]) ||
       detail::sorted_intersects(B.heads, mdl.neighbors[A.tail])))
    return true;  // (iii-b)
  return false;
}

// All maximal conflict-free hyperarc sets by filtering every subset of A.
// Test-scale only: refuses |A| > 20.
inline std::vector<Matching> brute_matchings(const NetworkModel& mdl,
                                             bool secondary) {
  const int H = mdl.n_hyperarcs();
  if (H > 20)
    throw std::invalid_argument("brute_matchings is limited to |A| <= 20");
  std::vector<Matching> out;
  if (H == 0) return out;
  auto ok_pairwise = [&](const std::vector<int>& set) {
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j)
        if (pair_conflicts(mdl, set[i], set[j], secondary))
          return false;
    return true;
  };
  for (std::uint32_t bits = 1; bits < (1u << H); ++bits) {
    std::vector<int> set;
    for (int h = 0; h < H; ++h)
      if (bits & (1u << h)) set.push_back(h);
    if (!ok_pairwise(set)) continue;
    bool extendable = false;
    for (int h = 0; h < H && !extendable; ++h) {
      if (bits & (1u << h)) continue;
      bool fits = true;
      for (int m : set)
        if (pair_conflicts(mdl, h, m, secondary)) {
          fits = false;
          break;
        }
      extendable = fits;
    }
    if (!extendable) {
      Matching m;
      m.hyperarcs = set;
      out.push_back(std::move(m));
    }
  }
  std::sort(out.begin(), out.end(), [](const Matching& a, const Matching& b) {
    return a.hyperarcs < b.hyperarcs;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic-channel gap oracle.
//
// With a point-mass channel and conflict-graph scheduling, the achievable
// (capacity, power) region is the time-sharing hull of the per-matching
// outcomes. Substituting energies e = alpha * p makes the whole program
// jointly concave in (y, alpha, e):
//
//   max  U(a) - sum_i V_i(p_i)
//   s.t. flow, subset, z <= c boxes as in the network model,
//        c_h <= sum_{M : h in M} sum_f alpha_M log2(1 + (e/alpha_M) g_hf),
//        sum over i's scheduled energies <= p_i,
//        sum_M alpha_M <= 1,  0 <= e <= alpha_M p_max_f.
//
// Solved by an augmented-Lagrangian method with projected-gradient inner
// loops. Single-session instances with <= 4 nodes only; documented accuracy
// about 1e-3 in objective value.
// ---------------------------------------------------------------------------

struct GapOracleResult {
  double value = 0.0;          // optimal objective of the convexified program
  double max_violation = 0.0;  // residual infeasibility at the returned point
  PrimalVector y;              // network-layer part of the maximizer
};

namespace detail {

struct JointProgram {
  const NetworkModel& mdl;
  std::vector<Matching> matchings;
  std::vector<double> gain;  // [h * F + f]: worst gain-over-noise / rho
  // variable layout offsets
  int off_a = 0, off_z = 0, off_x = 0, off_c = 0, off_p = 0, off_alpha = 0;
  int off_e = 0, dim = 0;
  std::vector<std::pair<int, int>> e_items;  // (matching, hyperarc) per e-group
  std::vector<int> e_group_base;             // base index into vars, F per group

  int n_cons = 0;

  explicit JointProgram(const NetworkModel& m, const ChannelModel& cm,
                        const PhyConfig& cfg)
      : mdl(m) {
    if (m.n_sessions() != 1)
      throw std::invalid_argument(
          "deterministic_gap_oracle supports single-session instances only");
    if (m.n_nodes() > 4)
      throw std::invalid_argument(
          "deterministic_gap_oracle is limited to <= 4 nodes");
    if (cfg.model != PhyConfig::Model::ConflictGraph)
      throw std::invalid_argument(
          "deterministic_gap_oracle needs conflict-graph mode");
    if (!cm.is_point_mass())
      throw std::invalid_argument(
          "deterministic_gap_oracle needs a point-mass channel");
    matchings = brute_matchings(m, cfg.secondary_interference);
    const int F = m.tones;
    ChannelState atom = sample(cm, 0, RngStream::Bounds, 0);
    gain.assign(static_cast<std::size_t>(m.n_hyperarcs()) * F, 0.0);
    for (int h = 0; h < m.n_hyperarcs(); ++h)
      for (int f = 0; f < F; ++f)
        gain[h * F + f] = worst_gain_over_noise(m, cm, atom, h, f) / cfg.rho;

    const int MT = m.index.n_mt();
    off_a = 0;
    off_z = off_a + 1;
    off_x = off_z + m.n_hyperarcs();
    off_c = off_x + m.n_arcs() * MT;
    off_p = off_c + m.n_hyperarcs();
    off_alpha = off_p + m.n_nodes();
    off_e = off_alpha + static_cast<int>(matchings.size());
    for (int mi = 0; mi < static_cast<int>(matchings.size()); ++mi)
      for (int h : matchings[mi].hyperarcs) {
        e_group_base.push_back(off_e + static_cast<int>(e_items.size()) * F);
        e_items.emplace_back(mi, h);
      }
    dim = off_e + static_cast<int>(e_items.size()) * F;

    const ConstraintIndex& ix = m.index;
    n_cons = ix.total - m.n_hyperarcs() - m.n_nodes();  // nu/eta/xi rows
    n_cons += m.n_hyperarcs();                          // capacity rows
    n_cons += m.n_nodes();                              // power rows
    n_cons += 1;                                        // simplex row
    n_cons += static_cast<int>(e_items.size()) * F;     // e <= alpha p_max
  }

  void box_project(std::vector<double>& v) const {
    const auto& b = mdl.bounds;
    const int MT = mdl.index.n_mt();
    v[off_a] = std::clamp(v[off_a], b.a_min[0], b.a_max[0]);
    for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
      v[off_z + h] = std::clamp(v[off_z + h], 0.0, b.z_max[h]);
      v[off_c + h] = std::clamp(v[off_c + h], 0.0, b.c_max[h]);
    }
    for (int a = 0; a < mdl.n_arcs(); ++a)
      for (int k = 0; k < MT; ++k)
        v[off_x + a * MT + k] =
            std::clamp(v[off_x + a * MT + k], 0.0, b.x_max[a]);
    for (int i = 0; i < mdl.n_nodes(); ++i)
      v[off_p + i] = std::clamp(v[off_p + i], 0.0, b.p_max_node[i]);
    for (std::size_t mi = 0; mi < matchings.size(); ++mi)
      v[off_alpha + mi] = std::clamp(v[off_alpha + mi], 0.0, 1.0);
    for (std::size_t g = 0; g < e_items.size(); ++g)
      for (int f = 0; f < mdl.tones; ++f)
        v[e_group_base[g] + f] =
            std::clamp(v[e_group_base[g] + f], 0.0, b.p_max_tone[f]);
  }

  double objective(const std::vector<double>& v) const {
    return mdl.utility[0].value(v[off_a]) -
           [&] {
             double s = 0.0;
             for (int i = 0; i < mdl.n_nodes(); ++i)
               s += mdl.cost[i].value(v[off_p + i]);
             return s;
           }();
  }

  void objective_grad(const std::vector<double>& v,
                      std::vector<double>& grad) const {
    grad[off_a] += mdl.utility[0].deriv(v[off_a]);
    for (int i = 0; i < mdl.n_nodes(); ++i)
      grad[off_p + i] -= mdl.cost[i].deriv(v[off_p + i]);
  }

  static double perspective(double alpha, double e, double g) {
    constexpr double kInv = 1.4426950408889634;
    const double a = std::max(alpha, 1e-12);
    return a * std::log1p(e * g / a) * kInv;
  }

  // constraint values g_k(v) <= 0 and, optionally, the accumulation of
  // w_k * grad g_k into `grad` for the active weights
  template <bool WithGrad>
  void constraints(const std::vector<double>& v, std::vector<double>& vals,
                   const std::vector<double>* w,
                   std::vector<double>* grad) const {
    constexpr double kInv = 1.4426950408889634;
    const ConstraintIndex& ix = mdl.index;
    const int MT = ix.n_mt();
    const int F = mdl.tones;
    int row = 0;
    auto add = [&](int var, double coef) {
      if constexpr (WithGrad) (*grad)[var] += (*w)[row] * coef;
    };

    for (int k = 0; k < MT; ++k) {
      for (int i = 0; i < mdl.n_nodes(); ++i) {
        if (ix.nu(k, i) < 0) continue;
        double val = i == mdl.sessions[0].source ? v[off_a] : 0.0;
        if (i == mdl.sessions[0].source) add(off_a, 1.0);
        for (int a : mdl.out_arcs[i]) {
          val -= v[off_x + a * MT + k];
          add(off_x + a * MT + k, -1.0);
        }
        for (int a : mdl.in_arcs[i]) {
          val += v[off_x + a * MT + k];
          add(off_x + a * MT + k, 1.0);
        }
        vals[row++] = val;
      }
      for (int i = 0; i < mdl.n_nodes(); ++i) {
        const int d = ix.degree[i];
        for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
          double val = 0.0;
          for (int r = 0; r < d; ++r)
            if (mask & (1u << r)) {
              int a = mdl.arc_id(i, mdl.neighbors[i][r]);
              val += v[off_x + a * MT + k];
              add(off_x + a * MT + k, 1.0);
            }
          for (int h : mdl.node_hyperarcs[i])
            if (mdl.hyperarcs[h].mask & mask) {
              val -= v[off_z + h];
              add(off_z + h, -1.0);
            }
          vals[row++] = val;
        }
      }
    }
    for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
      vals[row] = v[off_z + h] - v[off_c + h];
      add(off_z + h, 1.0);
      add(off_c + h, -1.0);
      ++row;
    }
    // c_h <= time-shared ergodic capacity
    for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
      double cap = 0.0;
      for (std::size_t g = 0; g < e_items.size(); ++g) {
        if (e_items[g].second != h) continue;
        const int mi = e_items[g].first;
        const double alpha = std::max(v[off_alpha + mi], 1e-12);
        for (int f = 0; f < F; ++f) {
          const double e = v[e_group_base[g] + f];
          const double gf = gain[h * F + f];
          cap += perspective(v[off_alpha + mi], e, gf);
          if constexpr (WithGrad) {
            const double r = e * gf / alpha;
            add(off_alpha + mi,
                -(std::log1p(r) * kInv - (r / (1.0 + r)) * kInv));
            add(e_group_base[g] + f, -(gf / (1.0 + r)) * kInv);
          }
        }
      }
      vals[row] = v[off_c + h] - cap;
      add(off_c + h, 1.0);
      ++row;
    }
    for (int i = 0; i < mdl.n_nodes(); ++i) {
      double val = -v[off_p + i];
      add(off_p + i, -1.0);
      for (std::size_t g = 0; g < e_items.size(); ++g) {
        if (mdl.hyperarcs[e_items[g].second].tail != i) continue;
        for (int f = 0; f < F; ++f) {
          val += v[e_group_base[g] + f];
          add(e_group_base[g] + f, 1.0);
        }
      }
      vals[row++] = val;
    }
    {
      double val = -1.0;
      for (std::size_t mi = 0; mi < matchings.size(); ++mi) {
        val += v[off_alpha + mi];
        add(off_alpha + mi, 1.0);
      }
      vals[row++] = val;
    }
    for (std::size_t g = 0; g < e_items.size(); ++g) {
      const int mi = e_items[g].first;
      for (int f = 0; f < F; ++f) {
        vals[row] = v[e_group_base[g] + f] -
                    v[off_alpha + mi] * mdl.bounds.p_max_tone[f];
        add(e_group_base[g] + f, 1.0);
        add(off_alpha + mi, -mdl.bounds.p_max_tone[f]);
        ++row;
      }
    }
  }
};

}  // namespace detail

inline GapOracleResult deterministic_gap_oracle(const NetworkModel& mdl,
                                                const ChannelModel& cm,
                                                const PhyConfig& cfg) {
  detail::JointProgram prog(mdl, cm, cfg);
  const int n = prog.dim;
  const int m = prog.n_cons;

  std::vector<double> v(n, 0.0);
  v[prog.off_a] = mdl.bounds.a_min[0];
  prog.box_project(v);

  std::vector<double> mult(m, 0.0);
  double rho_pen = 10.0;
  std::vector<double> cons(m, 0.0), w(m, 0.0), grad(n, 0.0), trial(n, 0.0);

  auto al_value = [&](const std::vector<double>& vv) {
    prog.constraints<false>(vv, cons, nullptr, nullptr);
    double val = prog.objective(vv);
    for (int k = 0; k < m; ++k) {
      double t = std::max(0.0, mult[k] + rho_pen * cons[k]);
      val -= (t * t - mult[k] * mult[k]) / (2.0 * rho_pen);
    }
    return val;
  };

  double prev_viol = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < 80; ++outer) {
    // projected gradient ascent with Armijo backtracking on the AL objective
    double step = 1.0;
    double cur = al_value(v);
    for (int inner = 0; inner < 4000; ++inner) {
      prog.constraints<false>(v, cons, nullptr, nullptr);
      for (int k = 0; k < m; ++k)
        w[k] = -std::max(0.0, mult[k] + rho_pen * cons[k]);
      std::fill(grad.begin(), grad.end(), 0.0);
      prog.objective_grad(v, grad);
      prog.constraints<true>(v, cons, &w, &grad);

      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        for (int k = 0; k < n; ++k) trial[k] = v[k] + step * grad[k];
        prog.box_project(trial);
        double tv = al_value(trial);
        double gap2 = 0.0;
        for (int k = 0; k < n; ++k)
          gap2 += (trial[k] - v[k]) * (trial[k] - v[k]);
        if (tv >= cur + 1e-4 * gap2 / std::max(step, 1e-12)) {
          v = trial;
          cur = tv;
          moved = gap2 > 1e-20;
          step = std::min(step * 1.3, 1e3);
          break;
        }
        step *= 0.5;
        if (step < 1e-14) break;
      }
      if (!moved) break;
    }

    prog.constraints<false>(v, cons, nullptr, nullptr);
    double viol = 0.0;
    for (int k = 0; k < m; ++k) viol = std::max(viol, cons[k]);
    for (int k = 0; k < m; ++k)
      mult[k] = std::max(0.0, mult[k] + rho_pen * cons[k]);
    if (viol <= 1e-8 && outer >= 3) break;
    if (viol > 0.5 * prev_viol) rho_pen = std::min(rho_pen * 1.6, 1e7);
    prev_viol = std::max(viol, 1e-16);
  }

  GapOracleResult res;
  prog.constraints<false>(v, cons, nullptr, nullptr);
  for (int k = 0; k < m; ++k)
    res.max_violation = std::max(res.max_violation, cons[k]);
  res.value = prog.objective(v);
  res.y = mdl.zero_primal();
  res.y.a[0] = v[prog.off_a];
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    res.y.z_at(h, 0, 1) = v[prog.off_z + h];
    res.y.c[h] = v[prog.off_c + h];
  }
  const int MT = mdl.index.n_mt();
  for (int a = 0; a < mdl.n_arcs(); ++a)
    for (int k = 0; k < MT; ++k)
      res.y.x_at(a, k, MT) = v[prog.off_x + a * MT + k];
  for (int i = 0; i < mdl.n_nodes(); ++i) res.y.p[i] = v[prog.off_p + i];
  return res;
}

}  // namespace codednet::oracle
