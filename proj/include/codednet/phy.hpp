#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "codednet/channel.hpp"
#include "codednet/model.hpp"
#include "codednet/rng.hpp"

namespace codednet {

struct PhyConfig {
  enum class Model { ConflictGraph, Sinr };

  Model model = Model::ConflictGraph;
  bool secondary_interference = true;
  double rho = 1.0;        // SNR penalty, >= 1
  double beta = 1e3;       // SINR: broadcast-interference weight
  double self_gain = 1e3;  // SINR: h_jj, discourages full-duplex use
  std::uint64_t matching_limit = 1000000;
  int sinr_starts = 8;
  int sinr_sweeps = 200;
  double sinr_tol = 1e-6;
  std::uint64_t sinr_seed = 0;
};

// Set of hyperarcs scheduled in the same slot; ids sorted ascending.
struct Matching {
  std::vector<int> hyperarcs;
};

struct PowerAllocation {
  std::vector<double> p;  // [h * F + f]
};

struct PhyOutcome {
  PowerAllocation alloc;
  std::vector<double> cap;  // [h * F + f], zero off the schedule
  double objective = 0.0;   // sum over f,(i,J) of gamma
  int matching = -1;        // conflict-graph mode: index into the matching list
};

// Pairwise conflict in the scheduled-access model: shared transmitter, half-duplex,
// primary interference, and (optionally) secondary interference.
inline bool hyperarcs_conflict(const NetworkModel& mdl, int ha, int hb,
                               bool secondary) {
  const Hyperarc& A = mdl.hyperarcs[ha];
  const Hyperarc& B = mdl.hyperarcs[hb];
  if (A.tail == B.tail) return true;
  auto contains = [](const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
  };
  if (contains(B.heads, A.tail) || contains(A.heads, B.tail)) return true;
  auto intersects = [](const std::vector<int>& u, const std::vector<int>& v) {
    std::size_t i = 0, j = 0;
    while (i < u.size() && j < v.size()) {
      if (u[i] == v[j]) return true;
      u[i] < v[j] ? ++i : ++j;
    }
    return false;
  };
  if (intersects(A.heads, B.heads)) return true;
  if (secondary) {
    if (intersects(A.heads, mdl.neighbors[B.tail])) return true;
    if (intersects(B.heads, mdl.neighbors[A.tail])) return true;
  }
  return false;
}

namespace detail {

// Bron-Kerbosch with pivoting on the compatibility graph; maximal cliques
// there are exactly the non-extendable conflict-free hyperarc sets.
class MatchingEnumerator {
 public:
  MatchingEnumerator(const NetworkModel& mdl, bool secondary,
                     std::uint64_t limit)
      : n_(mdl.n_hyperarcs()), limit_(limit), adj_(n_ * n_, 0) {
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b)
        if (!hyperarcs_conflict(mdl, a, b, secondary))
          adj_[a * n_ + b] = adj_[b * n_ + a] = 1;
  }

  std::vector<Matching> run() {
    if (n_ == 0) return {};
    std::vector<int> p(n_), x, r;
    for (int v = 0; v < n_; ++v) p[v] = v;
    expand(r, p, x);
    std::sort(out_.begin(), out_.end(),
              [](const Matching& a, const Matching& b) {
                return a.hyperarcs < b.hyperarcs;
              });
    return std::move(out_);
  }

 private:
  void expand(std::vector<int>& r, std::vector<int> p, std::vector<int> x) {
    if (p.empty() && x.empty()) {
      if (out_.size() >= limit_)
        throw std::runtime_error(
            "matching enumeration exceeded the configured limit of " +
            std::to_string(limit_) + " matchings");
      Matching m;
      m.hyperarcs = r;
      std::sort(m.hyperarcs.begin(), m.hyperarcs.end());
      out_.push_back(std::move(m));
      return;
    }
    int pivot = -1, best = -1;
    for (int u : p) {
      int deg = 0;
      for (int v : p) deg += adj_[u * n_ + v];
      if (deg > best) best = deg, pivot = u;
    }
    for (int u : x) {
      int deg = 0;
      for (int v : p) deg += adj_[u * n_ + v];
      if (deg > best) best = deg, pivot = u;
    }
    std::vector<int> cands;
    for (int v : p)
      if (!adj_[pivot * n_ + v]) cands.push_back(v);
    for (int v : cands) {
      std::vector<int> pn, xn;
      for (int w : p)
        if (adj_[v * n_ + w]) pn.push_back(w);
      for (int w : x)
        if (adj_[v * n_ + w]) xn.push_back(w);
      r.push_back(v);
      expand(r, std::move(pn), std::move(xn));
      r.pop_back();
      p.erase(std::find(p.begin(), p.end(), v));
      x.push_back(v);
    }
  }

  int n_;
  std::uint64_t limit_;
  std::vector<char> adj_;
  std::vector<Matching> out_;
};

}  // namespace detail

// All maximal (non-extendable) conflict-free hyperarc sets, in deterministic
// lexicographic order. Aborts beyond cfg.matching_limit.
inline std::vector<Matching> enumerate_maximal_matchings(
    const NetworkModel& mdl, bool secondary, std::uint64_t limit = 1000000) {
  return detail::MatchingEnumerator(mdl, secondary, limit).run();
}

// Worst receiver's gain-to-noise over J on tone f (the min in the capacity
// expression makes that receiver binding).
inline double worst_gain_over_noise(const NetworkModel& mdl,
                                    const ChannelModel& cm,
                                    const ChannelState& st, int h, int f) {
  const Hyperarc& ha = mdl.hyperarcs[h];
  double g = std::numeric_limits<double>::infinity();
  for (int j : ha.heads)
    g = std::min(g, gain(cm, st, ha.tail, j, f) / noise_power(cm, j));
  return g;
}

namespace detail {

inline double log2_1p(double x) { return std::log1p(x) * 1.4426950408889634; }

// SINR at receiver j of hyperarc h with the full allocation active:
// noise plus inter-node, self-, and broadcast-interference terms.
inline double sinr_at(const NetworkModel& mdl, const ChannelModel& cm,
                      const PhyConfig& cfg, const ChannelState& st,
                      const PowerAllocation& alloc, int h, int j, int f) {
  const int F = mdl.tones;
  const Hyperarc& ha = mdl.hyperarcs[h];
  const int i = ha.tail;
  double denom = noise_power(cm, j);
  // interference from other nodes' transmissions heard at j
  for (int hk = 0; hk < mdl.n_hyperarcs(); ++hk) {
    const Hyperarc& hb = mdl.hyperarcs[hk];
    const int k = hb.tail;
    if (k == i || k == j) continue;
    if (!std::binary_search(hb.heads.begin(), hb.heads.end(), j)) continue;
    double pk = alloc.p[hk * F + f];
    if (pk > 0.0) denom += pk * gain(cm, st, k, j, f);
  }
  // self-interference from j's own transmissions
  double pj = 0.0;
  for (int hk : mdl.node_hyperarcs[j]) pj += alloc.p[hk * F + f];
  denom += cfg.self_gain * pj;
  // broadcast interference from i's other hyperarcs
  double pi_other = 0.0;
  for (int hk : mdl.node_hyperarcs[i])
    if (hk != h) pi_other += alloc.p[hk * F + f];
  denom += cfg.beta * gain(cm, st, i, j, f) * pi_other;
  return alloc.p[h * F + f] * gain(cm, st, i, j, f) / denom;
}

}  // namespace detail

// Instantaneous hyperarc capacity, bps/Hz: min over receivers of
// log2(1 + Gamma/rho). Gamma is SNR in conflict-graph mode and SINR with the
// interference terms otherwise.
inline double hyperarc_capacity(const NetworkModel& mdl, const ChannelModel& cm,
                                const PhyConfig& cfg, const ChannelState& st,
                                const PowerAllocation& alloc, int h, int f) {
  const double p = alloc.p[h * mdl.tones + f];
  if (p <= 0.0) return 0.0;
  if (cfg.model == PhyConfig::Model::ConflictGraph) {
    double g = worst_gain_over_noise(mdl, cm, st, h, f);
    return detail::log2_1p(p * g / cfg.rho);
  }
  double cap = std::numeric_limits<double>::infinity();
  for (int j : mdl.hyperarcs[h].heads) {
    double s = detail::sinr_at(mdl, cm, cfg, st, alloc, h, j, f);
    cap = std::min(cap, detail::log2_1p(s / cfg.rho));
  }
  return cap;
}

struct WaterfillResult {
  double power = 0.0;
  double gamma = 0.0;
};

// Closed-form maximizer of gamma(p) = lambda*log2(1 + p*g/rho) - mu*p over
// [0, p_max]. g is the worst receiver's gain-to-noise. mu = 0 with lambda > 0
// pushes to the mask; ties break to zero power.
inline WaterfillResult waterfill_hyperarc(double lambda, double mu, double g,
                                          double rho, double p_max) {
  WaterfillResult r;
  if (lambda <= 0.0 || g <= 0.0 || p_max <= 0.0) return r;
  constexpr double kLn2 = 0.6931471805599453;
  if (mu <= 0.0) {
    r.power = p_max;
  } else {
    r.power = std::clamp(lambda / (mu * kLn2) - rho / g, 0.0, p_max);
  }
  r.gamma = lambda * detail::log2_1p(r.power * g / rho) - mu * r.power;
  if (r.gamma < 0.0) {  // numerical guard; gamma(0) = 0 dominates
    r.power = 0.0;
    r.gamma = 0.0;
  }
  return r;
}

// Conflict-graph mode matchings, computed once and reused for every slot.
struct PhyContext {
  PhyConfig cfg;
  std::vector<Matching> matchings;
};

inline PhyContext make_phy_context(const NetworkModel& mdl, PhyConfig cfg) {
  PhyContext ctx;
  ctx.cfg = cfg;
  if (cfg.model == PhyConfig::Model::ConflictGraph)
    ctx.matchings = enumerate_maximal_matchings(
        mdl, cfg.secondary_interference, cfg.matching_limit);
  return ctx;
}

namespace detail {

inline double sinr_tone_objective(const NetworkModel& mdl,
                                  const ChannelModel& cm, const PhyConfig& cfg,
                                  const ChannelState& st,
                                  const PowerAllocation& alloc,
                                  std::span<const double> lambda,
                                  std::span<const double> mu, int f) {
  double val = 0.0;
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    double p = alloc.p[h * mdl.tones + f];
    if (p > 0.0 || lambda[h] > 0.0)
      val += lambda[h] * hyperarc_capacity(mdl, cm, cfg, st, alloc, h, f) -
             mu[mdl.hyperarcs[h].tail] * p;
  }
  return val;
}

inline PhyOutcome solve_power_sinr(const NetworkModel& mdl,
                                   const ChannelModel& cm, const PhyConfig& cfg,
                                   std::span<const double> lambda,
                                   std::span<const double> mu,
                                   const ChannelState& st) {
  const int H = mdl.n_hyperarcs();
  const int F = mdl.tones;
  PhyOutcome best;
  best.alloc.p.assign(static_cast<std::size_t>(H) * F, 0.0);
  best.cap.assign(static_cast<std::size_t>(H) * F, 0.0);
  best.objective = -std::numeric_limits<double>::infinity();

  PowerAllocation cur;
  for (int start = 0; start < std::max(1, cfg.sinr_starts); ++start) {
    cur.p.assign(static_cast<std::size_t>(H) * F, 0.0);
    for (int h = 0; h < H; ++h)
      for (int f = 0; f < F; ++f) {
        double pm = mdl.bounds.p_max_tone[f];
        if (start == 0)
          cur.p[h * F + f] = 0.0;
        else if (start == 1)
          cur.p[h * F + f] = pm;
        else
          cur.p[h * F + f] =
              pm * counter_uniform(cfg.sinr_seed, RngStream::Multistart,
                                   st.slot, static_cast<std::uint64_t>(start),
                                   static_cast<std::uint64_t>(h * F + f));
      }
    // per-tone projected coordinate ascent (tones do not couple)
    for (int f = 0; f < F; ++f) {
      double prev = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
      for (int sweep = 0; sweep < cfg.sinr_sweeps; ++sweep) {
        for (int h = 0; h < H; ++h) {
          const double pm = mdl.bounds.p_max_tone[f];
          double best_p = cur.p[h * F + f];
          double best_v = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
          const int grid = 32;
          for (int k = 0; k <= grid; ++k) {
            cur.p[h * F + f] = pm * k / grid;
            double v = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
            if (v > best_v + 1e-15) best_v = v, best_p = cur.p[h * F + f];
          }
          // golden-section refinement around the best grid point
          double lo = std::max(0.0, best_p - pm / grid);
          double hi = std::min(pm, best_p + pm / grid);
          for (int it = 0; it < 40; ++it) {
            double m1 = lo + 0.381966011 * (hi - lo);
            double m2 = hi - 0.381966011 * (hi - lo);
            cur.p[h * F + f] = m1;
            double v1 = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
            cur.p[h * F + f] = m2;
            double v2 = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
            if (v1 > v2) hi = m2; else lo = m1;
            double vm = std::max(v1, v2);
            if (vm > best_v + 1e-15) best_v = vm, best_p = (v1 > v2) ? m1 : m2;
          }
          cur.p[h * F + f] = best_p;
        }
        double now = sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
        if (now - prev < cfg.sinr_tol) break;
        prev = now;
      }
    }
    double total = 0.0;
    for (int f = 0; f < F; ++f)
      total += sinr_tone_objective(mdl, cm, cfg, st, cur, lambda, mu, f);
    if (total > best.objective + 1e-15) {
      best.objective = total;
      best.alloc = cur;
    }
  }
  for (int h = 0; h < H; ++h)
    for (int f = 0; f < F; ++f)
      best.cap[h * F + f] =
          hyperarc_capacity(mdl, cm, cfg, st, best.alloc, h, f);
  if (!std::isfinite(best.objective)) best.objective = 0.0;
  return best;
}

}  // namespace detail

// Per-fading-state Lagrangian maximization: pick the schedule and powers that
// maximize sum gamma = sum lambda*C - mu*p. Conflict-graph mode waterfills
// each (hyperarc, tone) of every maximal matching independently and keeps the
// best matching (ties: lexicographically first). SINR mode runs a multistart
// projected coordinate ascent; its objective value is best-effort.
inline PhyOutcome solve_power_subproblem(const NetworkModel& mdl,
                                         const ChannelModel& cm,
                                         const PhyContext& ctx,
                                         std::span<const double> lambda,
                                         std::span<const double> mu,
                                         const ChannelState& st) {
  if (ctx.cfg.model == PhyConfig::Model::Sinr)
    return detail::solve_power_sinr(mdl, cm, ctx.cfg, lambda, mu, st);

  const int H = mdl.n_hyperarcs();
  const int F = mdl.tones;
  PhyOutcome out;
  out.alloc.p.assign(static_cast<std::size_t>(H) * F, 0.0);
  out.cap.assign(static_cast<std::size_t>(H) * F, 0.0);
  if (ctx.matchings.empty()) return out;

  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int mi = 0; mi < static_cast<int>(ctx.matchings.size()); ++mi) {
    double val = 0.0;
    for (int h : ctx.matchings[mi].hyperarcs) {
      const int i = mdl.hyperarcs[h].tail;
      if (lambda[h] <= 0.0) continue;
      for (int f = 0; f < F; ++f) {
        double g = worst_gain_over_noise(mdl, cm, st, h, f);
        val += waterfill_hyperarc(lambda[h], mu[i], g, ctx.cfg.rho,
                                  mdl.bounds.p_max_tone[f])
                   .gamma;
      }
    }
    if (val > best_val) {
      best_val = val;
      best = mi;
    }
  }
  out.matching = best;
  out.objective = 0.0;
  for (int h : ctx.matchings[best].hyperarcs) {
    const int i = mdl.hyperarcs[h].tail;
    for (int f = 0; f < F; ++f) {
      double g = worst_gain_over_noise(mdl, cm, st, h, f);
      auto wf = waterfill_hyperarc(lambda[h], mu[i], g, ctx.cfg.rho,
                                   mdl.bounds.p_max_tone[f]);
      out.alloc.p[h * F + f] = wf.power;
      out.cap[h * F + f] =
          hyperarc_capacity(mdl, cm, ctx.cfg, st, out.alloc, h, f);
      out.objective += wf.gamma;
    }
  }
  return out;
}

}  // namespace codednet
