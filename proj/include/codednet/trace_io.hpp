#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "codednet/model.hpp"
#include "codednet/scenario.hpp"
#include "codednet/solver.hpp"

namespace codednet {

namespace detail {

// %.17g round-trips doubles exactly, keeping traces byte-reproducible.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

}  // namespace detail

// Column contract: iter,f_avg,dual_est,best_dual,viol_norm,zeta_norm.
// Rows appear at iteration 1, every diagnostics-cadence multiple, and the
// final iteration. Identical (config, seed) runs produce identical bytes.
inline void write_trace_csv(const std::string& path, const SolverTrace& trace) {
  auto out = detail::open_out(path);
  out << "iter,f_avg,dual_est,best_dual,viol_norm,zeta_norm\n";
  for (const TraceRow& r : trace.rows)
    out << r.iter << ',' << detail::fmt(r.f_avg) << ','
        << detail::fmt(r.dual_est) << ',' << detail::fmt(r.best_dual) << ','
        << detail::fmt(r.viol_norm) << ',' << detail::fmt(r.zeta_norm) << '\n';
}

// Running-average primal variables, one row per entry:
// var,m,t,i,j,J,value with external node ids and J as "{a;b;...}".
inline void write_final_primal_csv(const std::string& path,
                                   const NetworkModel& mdl,
                                   const PrimalVector& y) {
  auto out = detail::open_out(path);
  out << "var,m,t,i,j,J,value\n";
  auto set_str = [&](const Hyperarc& h) {
    std::string s = "{";
    for (std::size_t k = 0; k < h.heads.size(); ++k) {
      if (k) s += ';';
      s += std::to_string(mdl.node_ids[h.heads[k]]);
    }
    return s + "}";
  };
  for (int m = 0; m < mdl.n_sessions(); ++m)
    out << "a," << m << ",,,,," << detail::fmt(y.a[m]) << '\n';
  for (int h = 0; h < mdl.n_hyperarcs(); ++h)
    for (int m = 0; m < mdl.n_sessions(); ++m)
      out << "z," << m << ",," << mdl.node_ids[mdl.hyperarcs[h].tail] << ",,"
          << set_str(mdl.hyperarcs[h]) << ','
          << detail::fmt(y.z_at(h, m, mdl.n_sessions())) << '\n';
  for (int a = 0; a < mdl.n_arcs(); ++a)
    for (int k = 0; k < mdl.index.n_mt(); ++k) {
      const auto [m, t] = mdl.index.mt[k];
      out << "x," << m << ',' << mdl.node_ids[t] << ','
          << mdl.node_ids[mdl.arcs[a].tail] << ','
          << mdl.node_ids[mdl.arcs[a].head] << ",,"
          << detail::fmt(y.x_at(a, k, mdl.index.n_mt())) << '\n';
    }
  for (int h = 0; h < mdl.n_hyperarcs(); ++h)
    out << "c,,," << mdl.node_ids[mdl.hyperarcs[h].tail] << ",,"
        << set_str(mdl.hyperarcs[h]) << ',' << detail::fmt(y.c[h]) << '\n';
  for (int i = 0; i < mdl.n_nodes(); ++i)
    out << "p,,," << mdl.node_ids[i] << ",,," << detail::fmt(y.p[i]) << '\n';
}

inline void write_meta_json(const std::string& path, const BuiltScenario& sc,
                            const SolverTrace& trace) {
  json meta;
  meta["scenario"] = sc.name;
  meta["config_hash"] = config_hash(sc.config);
  meta["seed"] = sc.solver.seed;
  meta["mode"] =
      sc.solver.mode == SolverConfig::Mode::Sync ? "sync" : "async";
  meta["stepsize"] = sc.solver.stepsize;
  meta["iters"] = sc.solver.iters;
  meta["window"] = sc.solver.window;
  meta["mc_slots"] = sc.solver.mc_slots;
  meta["diag_cadence"] = sc.solver.diag_cadence;
  meta["diag_slots"] = sc.solver.diag_slots;
  meta["burn_in"] = sc.solver.burn_in;
  meta["G"] = trace.G;
  meta["Gbar"] = trace.Gbar;
  meta["max_subgradient_norm"] = trace.max_subgradient_norm;
  meta["subgradient_bound_violated"] = trace.subgradient_bound_violated;
  meta["matchings"] = sc.phy.matchings.size();
  meta["wall_ms"] = trace.wall_ms;
  meta["warnings"] = sc.warnings;
  auto out = detail::open_out(path);
  out << meta.dump(2) << '\n';
}

}  // namespace codednet
