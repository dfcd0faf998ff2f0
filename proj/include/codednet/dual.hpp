#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "codednet/channel.hpp"
#include "codednet/model.hpp"
#include "codednet/phy.hpp"
#include "codednet/subproblems.hpp"
#include "codednet/util.hpp"

namespace codednet {

inline std::span<const double> lambda_block(const NetworkModel& mdl,
                                            const DualVector& zeta) {
  return {zeta.v.data() + mdl.index.lam_offset,
          static_cast<std::size_t>(mdl.n_hyperarcs())};
}

inline std::span<const double> mu_block(const NetworkModel& mdl,
                                        const DualVector& zeta) {
  return {zeta.v.data() + mdl.index.mu_offset,
          static_cast<std::size_t>(mdl.n_nodes())};
}

// Subgradient of the dual at zeta: identical to the constraint vector; the lambda/mu
// blocks accept delayed (Chat, Phat) averages in asynchronous operation.
inline std::vector<double> assemble_subgradient(const NetworkModel& mdl,
                                                const PrimalVector& y,
                                                std::span<const double> cbar,
                                                std::span<const double> pbar) {
  return constraint_vector(mdl, y, cbar, pbar);
}

// Projected multiplier step: zeta <- [zeta + eps q]^+ componentwise.
inline void update_multipliers_inplace(DualVector& zeta,
                                       std::span<const double> g, double eps) {
  if (g.size() != zeta.v.size())
    throw std::invalid_argument("update_multipliers: dimension mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("stepsize must be > 0");
  for (std::size_t k = 0; k < g.size(); ++k)
    zeta.v[k] = std::max(0.0, zeta.v[k] + eps * g[k]);
}

inline DualVector update_multipliers(DualVector zeta, std::span<const double> g,
                                     double eps) {
  update_multipliers_inplace(zeta, g, eps);
  return zeta;
}

struct ExpectationEstimate {
  std::vector<double> chat;  // per hyperarc: avg of sum_f C^f_iJ
  std::vector<double> phat;  // per node: avg of sum_{f,J} p^f_iJ
};

// Monte Carlo approximation of the physical-layer expectations at a fixed
// zeta: powers from the per-slot subproblem, averaged over S
// consecutive slots of the given stream.
inline ExpectationEstimate estimate_expectations(
    const NetworkModel& mdl, const ChannelModel& cm, const PhyContext& ctx,
    const DualVector& zeta, std::uint64_t slots, std::uint64_t seed,
    RngStream stream, std::uint64_t first_slot = 1) {
  if (slots < 1) throw std::invalid_argument("estimate_expectations: S >= 1");
  const int H = mdl.n_hyperarcs();
  const int N = mdl.n_nodes();
  const int F = mdl.tones;
  const auto lam = lambda_block(mdl, zeta);
  const auto mu = mu_block(mdl, zeta);

  constexpr std::uint64_t kBlock = 64;
  const std::uint64_t n_blocks = (slots + kBlock - 1) / kBlock;
  std::vector<std::vector<double>> partial(n_blocks);
  parallel_blocks(slots, kBlock, [&](std::uint64_t b, std::uint64_t lo,
                                     std::uint64_t hi) {
    std::vector<double> acc(H + N, 0.0);
    for (std::uint64_t s = lo; s < hi; ++s) {
      ChannelState st = sample(cm, seed, stream, first_slot + s);
      PhyOutcome out = solve_power_subproblem(mdl, cm, ctx, lam, mu, st);
      for (int h = 0; h < H; ++h)
        for (int f = 0; f < F; ++f) acc[h] += out.cap[h * F + f];
      for (int h = 0; h < H; ++h) {
        const int i = mdl.hyperarcs[h].tail;
        for (int f = 0; f < F; ++f) acc[H + i] += out.alloc.p[h * F + f];
      }
    }
    partial[b] = std::move(acc);
  });

  ExpectationEstimate e;
  e.chat.assign(H, 0.0);
  e.phat.assign(N, 0.0);
  for (const auto& acc : partial) {
    for (int h = 0; h < H; ++h) e.chat[h] += acc[h];
    for (int i = 0; i < N; ++i) e.phat[i] += acc[H + i];
  }
  const double inv = 1.0 / static_cast<double>(slots);
  for (double& v : e.chat) v *= inv;
  for (double& v : e.phat) v *= inv;
  return e;
}

struct DualValueEstimate {
  double value = 0.0;      // psi(zeta) + MC average of phi(zeta)
  double std_error = 0.0;  // of the phi part
};

// rho-hat(zeta): exact separable network part plus a Monte Carlo
// average of the per-slot physical-layer optimum. Reusing one (stream,
// first_slot) across evaluations gives common random numbers.
inline DualValueEstimate dual_value_estimate(
    const NetworkModel& mdl, const ChannelModel& cm, const PhyContext& ctx,
    const DualVector& zeta, std::uint64_t slots, std::uint64_t seed,
    RngStream stream = RngStream::Diagnostics, std::uint64_t first_slot = 1) {
  if (slots < 1) throw std::invalid_argument("dual_value_estimate: S >= 1");
  PrimalVector y = solve_network_subproblems(mdl, zeta);
  const double psi = network_subproblem_value(mdl, zeta, y);

  const auto lam = lambda_block(mdl, zeta);
  const auto mu = mu_block(mdl, zeta);
  std::vector<double> obj(slots, 0.0);
  parallel_blocks(slots, 64, [&](std::uint64_t, std::uint64_t lo,
                                 std::uint64_t hi) {
    for (std::uint64_t s = lo; s < hi; ++s) {
      ChannelState st = sample(cm, seed, stream, first_slot + s);
      obj[s] = solve_power_subproblem(mdl, cm, ctx, lam, mu, st).objective;
    }
  });
  double mean = 0.0;
  for (double v : obj) mean += v;
  mean /= static_cast<double>(slots);
  double var = 0.0;
  for (double v : obj) var += (v - mean) * (v - mean);
  var = slots > 1 ? var / static_cast<double>(slots - 1) : 0.0;

  DualValueEstimate est;
  est.value = psi + mean;
  est.std_error = std::sqrt(var / static_cast<double>(slots));
  return est;
}

struct SubgradientBounds {
  double G = 0.0;     // a.s. bound on the full subgradient norm
  double Gbar = 0.0;  // bound on the stacked (Chat, Phat) block
  std::vector<double> cap_hi;    // per hyperarc
  std::vector<double> power_hi;  // per node
};

// Analytic bounds from the box set and capped channel gains. cap_hi uses the
// per-link high quantile, so the bound holds almost surely over any
// desk-scale run; for point-mass channels it is exact.
inline SubgradientBounds subgradient_norm_bound(const NetworkModel& mdl,
                                                const ChannelModel& cm,
                                                const PhyConfig& cfg) {
  const auto& ix = mdl.index;
  const auto& b = mdl.bounds;
  const int F = mdl.tones;
  SubgradientBounds out;

  out.cap_hi.assign(mdl.n_hyperarcs(), 0.0);
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    const Hyperarc& ha = mdl.hyperarcs[h];
    for (int f = 0; f < F; ++f) {
      double g_hi = std::numeric_limits<double>::infinity();
      for (int j : ha.heads) {
        double mg = cm.mean_gain(ha.tail, j, f);
        g_hi = std::min(g_hi, gain_high_quantile(cm, mg) / noise_power(cm, j));
      }
      out.cap_hi[h] +=
          std::log2(1.0 + b.p_max_tone[f] * g_hi / cfg.rho);
    }
  }
  double tone_sum = 0.0;
  for (int f = 0; f < F; ++f) tone_sum += b.p_max_tone[f];
  out.power_hi.assign(mdl.n_nodes(), 0.0);
  for (int i = 0; i < mdl.n_nodes(); ++i) {
    // conflict-graph scheduling admits one hyperarc per transmitter; the SINR
    // box admits all of them at once
    double arcs = cfg.model == PhyConfig::Model::ConflictGraph
                      ? 1.0
                      : static_cast<double>(mdl.node_hyperarcs[i].size());
    out.power_hi[i] = arcs * tone_sum;
  }

  double ss = 0.0;
  for (int k = 0; k < ix.n_mt(); ++k) {
    const auto [m, t] = ix.mt[k];
    for (int i = 0; i < ix.n_nodes; ++i) {
      if (ix.nu(k, i) < 0) continue;
      double out_sum = 0.0, in_sum = 0.0;
      for (int a : mdl.out_arcs[i]) out_sum += b.x_max[a];
      for (int a : mdl.in_arcs[i]) in_sum += b.x_max[a];
      double smax = i == mdl.sessions[m].source ? b.a_max[m] : 0.0;
      double e = std::max(out_sum, smax + in_sum);
      ss += e * e;
    }
    for (int i = 0; i < ix.n_nodes; ++i) {
      const int d = ix.degree[i];
      for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        double xs = 0.0, zs = 0.0;
        for (int r = 0; r < d; ++r)
          if (mask & (1u << r))
            xs += b.x_max[mdl.arc_id(i, mdl.neighbors[i][r])];
        for (int h : mdl.node_hyperarcs[i])
          if (mdl.hyperarcs[h].mask & mask) zs += b.z_max[h];
        double e = std::max(xs, zs);
        ss += e * e;
      }
    }
  }
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    double e = std::max(b.c_max[h], mdl.n_sessions() * b.z_max[h]);
    ss += e * e;
    e = std::max(b.c_max[h], out.cap_hi[h]);
    ss += e * e;
  }
  for (int i = 0; i < mdl.n_nodes(); ++i) {
    double e = std::max(b.p_max_node[i], out.power_hi[i]);
    ss += e * e;
  }
  out.G = std::sqrt(ss);

  double gb = 0.0;
  for (double c : out.cap_hi) gb += c * c;
  for (double p : out.power_hi) gb += p * p;
  out.Gbar = std::sqrt(gb);
  return out;
}

}  // namespace codednet
