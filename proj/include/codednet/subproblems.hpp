#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "codednet/model.hpp"

namespace codednet {

// Multipliers (nu, eta, xi, lambda, mu), stored flat in ConstraintIndex
// order. Non-negative throughout.
struct DualVector {
  std::vector<double> v;

  static DualVector zeros(const NetworkModel& mdl) {
    DualVector z;
    z.v.assign(mdl.index.total, 0.0);
    return z;
  }

  double norm() const {
    double s = 0.0;
    for (double d : v) s += d * d;
    return std::sqrt(s);
  }
};

namespace detail {

// argmax of a concave phi over [lo, hi] given phi' and phi''; guarded Newton
// on the stationarity condition with bisection fallback.
template <class D1, class D2>
double concave_box_argmax(D1&& dphi, D2&& ddphi, double lo, double hi,
                          double tol = 1e-10) {
  if (hi <= lo) return lo;
  if (dphi(lo) <= 0.0) return lo;  // phi' decreasing: max at lower end
  if (dphi(hi) >= 0.0) return hi;
  double a = lo, b = hi;
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    double d1 = dphi(x);
    if (d1 > 0.0)
      a = x;
    else
      b = x;
    if (b - a < tol) break;
    double d2 = ddphi(x);
    double step = d2 < 0.0 ? x - d1 / d2 : a;
    x = (step > a && step < b) ? step : 0.5 * (a + b);
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Transport layer: argmax U_m(a) - (sum_t nu^{mt}_{s_m}) a over the box.
inline double solve_rate(const NetworkModel& mdl, const DualVector& zeta,
                         int m) {
  const auto& ix = mdl.index;
  const int s = mdl.sessions[m].source;
  double nu_sum = 0.0;
  for (int k = 0; k < ix.n_mt(); ++k)
    if (ix.mt[k].first == m) nu_sum += zeta.v[ix.nu(k, s)];
  const double lo = mdl.bounds.a_min[m], hi = mdl.bounds.a_max[m];
  const UtilityCurve& u = mdl.utility[m];
  if (u.has_closed_form()) {  // U = w ln a
    if (nu_sum <= 0.0) return hi;
    return std::clamp(u.weight / nu_sum, lo, hi);
  }
  return detail::concave_box_argmax(
      [&](double a) { return u.deriv(a) - nu_sum; },
      [&](double a) { return u.dderiv(a); }, lo, hi);
}

// Network flow layer: bang-bang on the sign of
//   sum_{K ∩ J != ∅} sum_t eta^{mt}_{iK} - xi_{iJ};  ties go to 0.
inline double solve_broadcast_flow(const NetworkModel& mdl,
                                   const DualVector& zeta, int h, int m) {
  const auto& ix = mdl.index;
  const Hyperarc& ha = mdl.hyperarcs[h];
  const int i = ha.tail;
  const int d = ix.degree[i];
  double coef = -zeta.v[ix.xi(h)];
  for (int k = 0; k < ix.n_mt(); ++k) {
    if (ix.mt[k].first != m) continue;
    const int base = ix.eta_base[k * ix.n_nodes + i];
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask)
      if (mask & ha.mask) coef += zeta.v[base + static_cast<int>(mask) - 1];
  }
  return coef > 0.0 ? mdl.bounds.z_max[h] : 0.0;
}

// Network code design layer: bang-bang on
//   nu_i 1{i!=t} - nu_j 1{j!=t} - sum_{K ∋ j} eta^{mt}_{iK};  ties go to 0.
inline double solve_virtual_flow(const NetworkModel& mdl,
                                 const DualVector& zeta, int arc, int mt_idx) {
  const auto& ix = mdl.index;
  const auto [m, t] = ix.mt[mt_idx];
  const int i = mdl.arcs[arc].tail;
  const int j = mdl.arcs[arc].head;
  double coef = 0.0;
  if (i != t) coef += zeta.v[ix.nu(mt_idx, i)];
  if (j != t) coef -= zeta.v[ix.nu(mt_idx, j)];
  const int d = ix.degree[i];
  const int r = mdl.neighbor_rank(i, j);
  const int base = ix.eta_base[mt_idx * ix.n_nodes + i];
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask)
    if (mask & (1u << r)) coef -= zeta.v[base + static_cast<int>(mask) - 1];
  return coef > 0.0 ? mdl.bounds.x_max[arc] : 0.0;
}

// Link capacity layer: bang-bang on xi - lambda; ties go to 0.
inline double solve_capacity(const NetworkModel& mdl, const DualVector& zeta,
                             int h) {
  const auto& ix = mdl.index;
  double coef = zeta.v[ix.xi(h)] - zeta.v[ix.lam(h)];
  return coef > 0.0 ? mdl.bounds.c_max[h] : 0.0;
}

// Data link power layer: argmax mu_i p - V_i(p) over [0, p_max_i].
inline double solve_node_power(const NetworkModel& mdl, const DualVector& zeta,
                               int i) {
  const double mu = zeta.v[mdl.index.mu(i)];
  const double hi = mdl.bounds.p_max_node[i];
  const CostCurve& vc = mdl.cost[i];
  if (vc.has_closed_form()) {  // V = v p^2
    if (vc.coeff <= 0.0) return mu > 0.0 ? hi : 0.0;
    return std::clamp(mu / (2.0 * vc.coeff), 0.0, hi);
  }
  return detail::concave_box_argmax([&](double p) { return mu - vc.deriv(p); },
                                    [&](double p) { return -vc.dderiv(p); },
                                    0.0, hi);
}

// All network-layer primal iterates at once.
inline PrimalVector solve_network_subproblems(const NetworkModel& mdl,
                                              const DualVector& zeta) {
  PrimalVector y = mdl.zero_primal();
  for (int m = 0; m < mdl.n_sessions(); ++m) y.a[m] = solve_rate(mdl, zeta, m);
  for (int h = 0; h < mdl.n_hyperarcs(); ++h)
    for (int m = 0; m < mdl.n_sessions(); ++m)
      y.z_at(h, m, mdl.n_sessions()) = solve_broadcast_flow(mdl, zeta, h, m);
  for (int a = 0; a < mdl.n_arcs(); ++a)
    for (int k = 0; k < mdl.index.n_mt(); ++k)
      y.x_at(a, k, mdl.index.n_mt()) = solve_virtual_flow(mdl, zeta, a, k);
  for (int h = 0; h < mdl.n_hyperarcs(); ++h)
    y.c[h] = solve_capacity(mdl, zeta, h);
  for (int i = 0; i < mdl.n_nodes(); ++i)
    y.p[i] = solve_node_power(mdl, zeta, i);
  return y;
}

// psi(zeta): the optimal value of the separable network-layer part of the
// Lagrangian (everything except the physical-layer expectation term).
inline double network_subproblem_value(const NetworkModel& mdl,
                                       const DualVector& zeta,
                                       const PrimalVector& y) {
  const auto& ix = mdl.index;
  double val = 0.0;
  for (int m = 0; m < mdl.n_sessions(); ++m) {
    const int s = mdl.sessions[m].source;
    double nu_sum = 0.0;
    for (int k = 0; k < ix.n_mt(); ++k)
      if (ix.mt[k].first == m) nu_sum += zeta.v[ix.nu(k, s)];
    val += mdl.utility[m].value(y.a[m]) - nu_sum * y.a[m];
  }
  for (int h = 0; h < mdl.n_hyperarcs(); ++h) {
    const Hyperarc& ha = mdl.hyperarcs[h];
    const int i = ha.tail;
    const int d = ix.degree[i];
    for (int m = 0; m < mdl.n_sessions(); ++m) {
      double coef = -zeta.v[ix.xi(h)];
      for (int k = 0; k < ix.n_mt(); ++k) {
        if (ix.mt[k].first != m) continue;
        const int base = ix.eta_base[k * ix.n_nodes + i];
        for (std::uint32_t mask = 1; mask < (1u << d); ++mask)
          if (mask & ha.mask) coef += zeta.v[base + static_cast<int>(mask) - 1];
      }
      val += coef * y.z_at(h, m, mdl.n_sessions());
    }
  }
  for (int a = 0; a < mdl.n_arcs(); ++a)
    for (int k = 0; k < ix.n_mt(); ++k) {
      const auto [m, t] = ix.mt[k];
      const int i = mdl.arcs[a].tail, j = mdl.arcs[a].head;
      double coef = 0.0;
      if (i != t) coef += zeta.v[ix.nu(k, i)];
      if (j != t) coef -= zeta.v[ix.nu(k, j)];
      const int base = ix.eta_base[k * ix.n_nodes + i];
      const int r = mdl.neighbor_rank(i, j);
      for (std::uint32_t mask = 1; mask < (1u << ix.degree[i]); ++mask)
        if (mask & (1u << r)) coef -= zeta.v[base + static_cast<int>(mask) - 1];
      val += coef * y.x_at(a, k, ix.n_mt());
    }
  for (int h = 0; h < mdl.n_hyperarcs(); ++h)
    val += (zeta.v[ix.xi(h)] - zeta.v[ix.lam(h)]) * y.c[h];
  for (int i = 0; i < mdl.n_nodes(); ++i)
    val += zeta.v[ix.mu(i)] * y.p[i] - mdl.cost[i].value(y.p[i]);
  return val;
}

}  // namespace codednet
