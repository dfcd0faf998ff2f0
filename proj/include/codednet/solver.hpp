#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "codednet/channel.hpp"
#include "codednet/dual.hpp"
#include "codednet/model.hpp"
#include "codednet/phy.hpp"
#include "codednet/subproblems.hpp"

namespace codednet {

struct SolverConfig {
  enum class Mode { Sync, Async };

  Mode mode = Mode::Async;
  double stepsize = 0.15;
  int iters = 5000;
  int window = 50;     // async: slots per physical-layer averaging window
  int mc_slots = 200;  // sync: Monte Carlo slots per expectation
  std::uint64_t seed = 1;
  int diag_cadence = 50;
  int diag_slots = 200;
  int burn_in = 0;  // iterations excluded from the running averages

  // test hooks
  bool record_iterates = false;
  bool record_duals = false;
  bool force_zero_delay = false;  // async consumes same-slot averages (D = 0)

  void validate() const {
    if (!(stepsize > 0.0)) throw std::invalid_argument("stepsize must be > 0");
    if (iters < 1) throw std::invalid_argument("iters must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (mc_slots < 1) throw std::invalid_argument("mc_slots must be >= 1");
    if (diag_cadence < 1) throw std::invalid_argument("diag_cadence >= 1");
    if (diag_slots < 1) throw std::invalid_argument("diag_slots >= 1");
    if (burn_in < 0 || burn_in >= iters)
      throw std::invalid_argument("burn_in must be in [0, iters)");
  }
};

struct TraceRow {
  int iter = 0;
  double f_avg = 0.0;
  double dual_est = 0.0;
  double dual_se = 0.0;
  double best_dual = 0.0;
  double viol_norm = 0.0;
  double zeta_norm = 0.0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;  // iteration 1, every cadence multiple, final
  PrimalVector y_avg;
  DualVector zeta_final;
  double G = 0.0;
  double Gbar = 0.0;
  double max_subgradient_norm = 0.0;
  bool subgradient_bound_violated = false;
  double wall_ms = 0.0;

  // populated only under the record_* hooks
  std::vector<PrimalVector> iterates;
  std::vector<DualVector> duals;  // zeta(l) before the update at l
};

// Index of the averaging window whose (Chat, Phat) are in use at slot l:
// tau(l) = max{ S*floor((l-S-1)/S) + 1, 1 }. Satisfies S <= l - tau(l)
// <= 2S-1 for all l > 2S-1.
inline int tau(int ell, int window) {
  if (ell < 1 || window < 1)
    throw std::invalid_argument("tau needs ell >= 1 and S >= 1");
  const long long num = static_cast<long long>(ell) - window - 1;
  long long fl = num >= 0 ? num / window : -(((-num) + window - 1) / window);
  long long t = static_cast<long long>(window) * fl + 1;
  return static_cast<int>(std::max<long long>(t, 1));
}

namespace detail {

// Exact incremental Cesaro mean of the primal iterates.
struct PrimalAverage {
  PrimalVector mean;
  long long n = 0;

  explicit PrimalAverage(const NetworkModel& mdl) : mean(mdl.zero_primal()) {}

  void add(const PrimalVector& y) {
    ++n;
    const double w = 1.0 / static_cast<double>(n);
    auto upd = [w](std::vector<double>& m, const std::vector<double>& v) {
      for (std::size_t k = 0; k < m.size(); ++k) m[k] += (v[k] - m[k]) * w;
    };
    upd(mean.a, y.a);
    upd(mean.z, y.z);
    upd(mean.x, y.x);
    upd(mean.c, y.c);
    upd(mean.p, y.p);
  }
};

struct VecAverage {
  std::vector<double> sum;
  long long n = 0;

  explicit VecAverage(std::size_t size) : sum(size, 0.0) {}

  void add(std::span<const double> v) {
    ++n;
    for (std::size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
  }

  std::vector<double> mean() const {
    std::vector<double> m(sum.size(), 0.0);
    if (n > 0)
      for (std::size_t k = 0; k < m.size(); ++k)
        m[k] = sum[k] / static_cast<double>(n);
    return m;
  }
};

inline double positive_part_norm(std::span<const double> q) {
  double s = 0.0;
  for (double v : q)
    if (v > 0.0) s += v * v;
  return std::sqrt(s);
}

inline double vec_norm(std::span<const double> q) {
  double s = 0.0;
  for (double v : q) s += v * v;
  return std::sqrt(s);
}

struct LoopDiag {
  const NetworkModel& mdl;
  const ChannelModel& cm;
  const PhyContext& ctx;
  const SolverConfig& cfg;
  SolverTrace& trace;
  double best_dual = std::numeric_limits<double>::infinity();

  bool due(int ell) const {
    return ell == 1 || ell % cfg.diag_cadence == 0 || ell == cfg.iters;
  }

  void emit(int ell, const DualVector& zeta, const PrimalVector& y_for_f,
            const std::vector<double>& cbar_cum,
            const std::vector<double>& pbar_cum) {
    auto est = dual_value_estimate(mdl, cm, ctx, zeta, cfg.diag_slots,
                                   cfg.seed, RngStream::Diagnostics, 1);
    best_dual = std::min(best_dual, est.value);
    auto q = constraint_vector(mdl, y_for_f, cbar_cum, pbar_cum);
    TraceRow row;
    row.iter = ell;
    row.f_avg = objective_value(mdl, y_for_f);
    row.dual_est = est.value;
    row.dual_se = est.std_error;
    row.best_dual = best_dual;
    row.viol_norm = positive_part_norm(q);
    row.zeta_norm = zeta.norm();
    trace.rows.push_back(row);
  }
};

}  // namespace detail

// Synchronous subgradient method: fresh Monte Carlo estimates of the
// physical-layer expectations at every iteration's current multipliers.
inline SolverTrace run_sync(const NetworkModel& mdl, const ChannelModel& cm,
                            const PhyContext& ctx, const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SolverTrace trace;
  auto bounds = subgradient_norm_bound(mdl, cm, ctx.cfg);
  trace.G = bounds.G;
  trace.Gbar = bounds.Gbar;

  DualVector zeta = DualVector::zeros(mdl);
  detail::PrimalAverage avg(mdl);
  detail::VecAverage cbar_cum(mdl.n_hyperarcs());
  detail::VecAverage pbar_cum(mdl.n_nodes());
  detail::LoopDiag diag{mdl, cm, ctx, cfg, trace};

  for (int ell = 1; ell <= cfg.iters; ++ell) {
    PrimalVector y = solve_network_subproblems(mdl, zeta);
    const std::uint64_t first_slot =
        static_cast<std::uint64_t>(ell - 1) * cfg.mc_slots + 1;
    auto e = estimate_expectations(mdl, cm, ctx, zeta, cfg.mc_slots, cfg.seed,
                                   RngStream::Slot, first_slot);
    auto g = assemble_subgradient(mdl, y, e.chat, e.phat);

    if (ell > cfg.burn_in) avg.add(y);
    cbar_cum.add(e.chat);
    pbar_cum.add(e.phat);

    if (cfg.record_iterates) trace.iterates.push_back(y);
    if (cfg.record_duals) trace.duals.push_back(zeta);
    if (diag.due(ell))
      diag.emit(ell, zeta, avg.n > 0 ? avg.mean : y, cbar_cum.mean(),
                pbar_cum.mean());

    double gn = detail::vec_norm(g);
    trace.max_subgradient_norm = std::max(trace.max_subgradient_norm, gn);
    if (gn > trace.G * (1.0 + 1e-9)) trace.subgradient_bound_violated = true;

    update_multipliers_inplace(zeta, g, cfg.stepsize);
  }
  trace.y_avg = avg.mean;
  trace.zeta_final = zeta;
  trace.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return trace;
}

// Asynchronous subgradient method: one channel draw per slot;
// the power allocation of each averaging window uses the multipliers frozen
// at the window's start, the window average becomes the delayed (Chat, Phat)
// summand once complete, and the lambda/mu updates consume it with staleness
// between S and 2S-1 slots.
inline SolverTrace run_async(const NetworkModel& mdl, const ChannelModel& cm,
                             const PhyContext& ctx, const SolverConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SolverTrace trace;
  auto bounds = subgradient_norm_bound(mdl, cm, ctx.cfg);
  trace.G = bounds.G;
  trace.Gbar = bounds.Gbar;

  const int H = mdl.n_hyperarcs();
  const int N = mdl.n_nodes();
  const int F = mdl.tones;
  const int S = cfg.window;

  DualVector zeta = DualVector::zeros(mdl);
  detail::PrimalAverage avg(mdl);
  detail::VecAverage cbar_cum(H);
  detail::VecAverage pbar_cum(N);
  detail::LoopDiag diag{mdl, cm, ctx, cfg, trace};

  std::vector<double> chat_cur(H, 0.0), phat_cur(N, 0.0);  // Chat(1)=Phat(1)=0
  std::vector<double> win_lam(H, 0.0), win_mu(N, 0.0);
  std::vector<double> win_cap(H, 0.0), win_pow(N, 0.0);
  std::vector<double> slot_cap(H, 0.0), slot_pow(N, 0.0);

  for (int ell = 1; ell <= cfg.iters; ++ell) {
    if (!cfg.force_zero_delay && (ell - 1) % S == 0) {
      if (ell > S) {
        // window [ell-S, ell-1] completed: publish Chat/Phat at tau(ell)=ell-S
        for (int h = 0; h < H; ++h) chat_cur[h] = win_cap[h] / S;
        for (int i = 0; i < N; ++i) phat_cur[i] = win_pow[i] / S;
      }
      auto lam = lambda_block(mdl, zeta);
      auto mu = mu_block(mdl, zeta);
      std::copy(lam.begin(), lam.end(), win_lam.begin());
      std::copy(mu.begin(), mu.end(), win_mu.begin());
      std::fill(win_cap.begin(), win_cap.end(), 0.0);
      std::fill(win_pow.begin(), win_pow.end(), 0.0);
    }

    PrimalVector y = solve_network_subproblems(mdl, zeta);

    ChannelState st = sample(cm, cfg.seed, RngStream::Slot,
                             static_cast<std::uint64_t>(ell));
    PhyOutcome out =
        cfg.force_zero_delay
            ? solve_power_subproblem(mdl, cm, ctx, lambda_block(mdl, zeta),
                                     mu_block(mdl, zeta), st)
            : solve_power_subproblem(mdl, cm, ctx, win_lam, win_mu, st);

    std::fill(slot_cap.begin(), slot_cap.end(), 0.0);
    std::fill(slot_pow.begin(), slot_pow.end(), 0.0);
    for (int h = 0; h < H; ++h) {
      const int i = mdl.hyperarcs[h].tail;
      for (int f = 0; f < F; ++f) {
        slot_cap[h] += out.cap[h * F + f];
        slot_pow[i] += out.alloc.p[h * F + f];
      }
    }
    if (cfg.force_zero_delay) {
      chat_cur = slot_cap;
      phat_cur = slot_pow;
    } else {
      for (int h = 0; h < H; ++h) win_cap[h] += slot_cap[h];
      for (int i = 0; i < N; ++i) win_pow[i] += slot_pow[i];
    }

    auto g = assemble_subgradient(mdl, y, chat_cur, phat_cur);

    if (ell > cfg.burn_in) avg.add(y);
    cbar_cum.add(slot_cap);
    pbar_cum.add(slot_pow);

    if (cfg.record_iterates) trace.iterates.push_back(y);
    if (cfg.record_duals) trace.duals.push_back(zeta);
    if (diag.due(ell))
      diag.emit(ell, zeta, avg.n > 0 ? avg.mean : y, cbar_cum.mean(),
                pbar_cum.mean());

    double gn = detail::vec_norm(g);
    trace.max_subgradient_norm = std::max(trace.max_subgradient_norm, gn);
    if (gn > trace.G * (1.0 + 1e-9)) trace.subgradient_bound_violated = true;

    update_multipliers_inplace(zeta, g, cfg.stepsize);
  }
  trace.y_avg = avg.mean;
  trace.zeta_final = zeta;
  trace.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  return trace;
}

inline SolverTrace run_solver(const NetworkModel& mdl, const ChannelModel& cm,
                              const PhyContext& ctx, const SolverConfig& cfg) {
  return cfg.mode == SolverConfig::Mode::Sync ? run_sync(mdl, cm, ctx, cfg)
                                              : run_async(mdl, cm, ctx, cfg);
}

}  // namespace codednet
