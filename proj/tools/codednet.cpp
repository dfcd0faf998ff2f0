// codednet CLI: scenario ingestion, solver runs, window sweeps, and the
// built-in cross-check suite. Emits plot-ready CSV plus a meta sidecar; no
// rendering here.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codednet/codednet.hpp"

namespace fs = std::filesystem;
using namespace codednet;

namespace {

struct RunFlags {
  std::string config;
  std::string out = "out";
  std::string mode, phy_model, secondary;
  int iters = -1;
  double stepsize = -1.0;
  int window = -1;
  int mc_slots = -1;
  long long seed = -1;
  int burn_in = -1;
  std::string record_channel;
  int record_channel_slots = 1000;
};

void add_common_flags(CLI::App* cmd, RunFlags& fl) {
  cmd->add_option("--config", fl.config, "scenario JSON file")->required();
  cmd->add_option("--out", fl.out, "output directory");
  cmd->add_option("--mode", fl.mode, "solver mode")
      ->check(CLI::IsMember({"sync", "async"}));
  cmd->add_option("--iters", fl.iters, "subgradient iterations");
  cmd->add_option("--stepsize", fl.stepsize, "constant stepsize");
  cmd->add_option("--window", fl.window, "async averaging window S");
  cmd->add_option("--mc-slots", fl.mc_slots, "sync Monte Carlo slots");
  cmd->add_option("--seed", fl.seed, "run seed");
  cmd->add_option("--burn-in", fl.burn_in, "iterations excluded from averages");
  cmd->add_option("--secondary-interference", fl.secondary,
                  "conflict rule iii-b")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--phy", fl.phy_model, "physical-layer model")
      ->check(CLI::IsMember({"conflict", "sinr"}));
}

json apply_overrides(json cfg, const RunFlags& fl) {
  if (!cfg.contains("solver") || !cfg["solver"].is_object())
    cfg["solver"] = json::object();
  if (!cfg.contains("phy") || !cfg["phy"].is_object())
    cfg["phy"] = json::object();
  auto& sj = cfg["solver"];
  if (!fl.mode.empty()) sj["mode"] = fl.mode;
  if (fl.iters > 0) sj["iters"] = fl.iters;
  if (fl.stepsize > 0.0) sj["stepsize"] = fl.stepsize;
  if (fl.window > 0) sj["window"] = fl.window;
  if (fl.mc_slots > 0) sj["mc_slots"] = fl.mc_slots;
  if (fl.seed >= 0) sj["seed"] = fl.seed;
  if (fl.burn_in >= 0) sj["burn_in"] = fl.burn_in;
  if (!fl.secondary.empty())
    cfg["phy"]["secondary_interference"] = fl.secondary == "on";
  if (!fl.phy_model.empty())
    cfg["phy"]["model"] =
        fl.phy_model == "conflict" ? "conflict-graph" : "sinr";
  return cfg;
}

int cmd_run(const RunFlags& fl) {
  BuiltScenario sc = build_scenario(apply_overrides(load_json_file(fl.config), fl));
  for (const auto& w : sc.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "scenario '" << sc.name << "': " << sc.model.n_nodes()
            << " nodes, " << sc.model.n_hyperarcs() << " hyperarcs, "
            << sc.phy.matchings.size() << " matchings, zeta dim "
            << sc.model.index.total << '\n';

  if (!fl.record_channel.empty())
    write_channel_trace(fl.record_channel, sc.model, sc.channel,
                        sc.solver.seed, RngStream::Slot, 1,
                        fl.record_channel_slots);

  SolverTrace trace = run_solver(sc.model, sc.channel, sc.phy, sc.solver);

  fs::create_directories(fl.out);
  write_trace_csv((fs::path(fl.out) / "trace.csv").string(), trace);
  write_final_primal_csv((fs::path(fl.out) / "final_primal.csv").string(),
                         sc.model, trace.y_avg);
  write_meta_json((fs::path(fl.out) / "meta.json").string(), sc, trace);

  const TraceRow& last = trace.rows.back();
  std::printf("final: f_avg=%.6f best_dual=%.6f gap=%.6f viol=%.3e (%.1f ms)\n",
              last.f_avg, last.best_dual, last.best_dual - last.f_avg,
              last.viol_norm, trace.wall_ms);
  return 0;
}

int cmd_sweep(const RunFlags& fl, const std::vector<int>& windows) {
  if (windows.empty()) throw std::invalid_argument("sweep needs --windows");
  fs::create_directories(fl.out);
  std::ofstream out(fs::path(fl.out) / "sweep.csv", std::ios::binary);
  out << "S,iter,f_avg,dual_est,best_dual,viol_norm,zeta_norm\n";
  const json base = apply_overrides(load_json_file(fl.config), fl);
  for (int S : windows) {
    json cfg = base;
    cfg["solver"]["window"] = S;
    cfg["solver"]["mode"] = "async";
    BuiltScenario sc = build_scenario(cfg);
    SolverTrace trace = run_solver(sc.model, sc.channel, sc.phy, sc.solver);
    for (const TraceRow& r : trace.rows) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", S,
                    r.iter, r.f_avg, r.dual_est, r.best_dual, r.viol_norm,
                    r.zeta_norm);
      out << buf;
    }
    const TraceRow& last = trace.rows.back();
    std::printf("S=%d: f_avg=%.6f best_dual=%.6f gap=%.6f\n", S, last.f_avg,
                last.best_dual, last.best_dual - last.f_avg);
  }
  return 0;
}

int cmd_matchings(const RunFlags& fl) {
  json cfg = apply_overrides(load_json_file(fl.config), fl);
  BuiltScenario sc = build_scenario(cfg);
  for (const Matching& m : sc.phy.matchings) {
    for (std::size_t k = 0; k < m.hyperarcs.size(); ++k) {
      const Hyperarc& h = sc.model.hyperarcs[m.hyperarcs[k]];
      if (k) std::printf("  ");
      std::printf("%lld->{", sc.model.node_ids[h.tail]);
      for (std::size_t r = 0; r < h.heads.size(); ++r)
        std::printf("%s%lld", r ? "," : "", sc.model.node_ids[h.heads[r]]);
      std::printf("}");
    }
    std::printf("\n");
  }
  std::fprintf(stderr, "%zu maximal matchings\n", sc.phy.matchings.size());
  return 0;
}

// ---------------------------------------------------------------------------
// validate: oracle cross-checks on built-in scenarios
// ---------------------------------------------------------------------------

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

DualVector random_dual(const NetworkModel& mdl, std::uint64_t seed,
                       std::uint64_t draw, double scale) {
  DualVector z = DualVector::zeros(mdl);
  for (std::size_t k = 0; k < z.v.size(); ++k)
    z.v[k] = scale * counter_uniform(seed, RngStream::Scratch, draw, k);
  return z;
}

Check check_subproblems(bool quick, bool corrupt_tiebreak) {
  Check c{"subproblem-grid-equivalence"};
  BuiltScenario sc = build_scenario(builtin_relay3());
  const NetworkModel& mdl = sc.model;
  const int draws = quick ? 50 : 300;
  double worst = 0.0;
  for (int d = 0; d < draws; ++d) {
    DualVector zeta = random_dual(mdl, 17, d, d % 3 == 0 ? 0.3 : 2.0);
    if (d % 5 == 0) {  // force exact xi == lambda ties
      const int h = d % mdl.n_hyperarcs();
      zeta.v[mdl.index.lam(h)] = zeta.v[mdl.index.xi(h)];
    }
    {  // rate
      const int m = 0;
      double nu_sum = 0.0;
      for (int k = 0; k < mdl.index.n_mt(); ++k)
        if (mdl.index.mt[k].first == m)
          nu_sum += zeta.v[mdl.index.nu(k, mdl.sessions[m].source)];
      auto obj = [&](double a) {
        return mdl.utility[m].value(a) - nu_sum * a;
      };
      auto g = oracle::grid_argmax(obj, mdl.bounds.a_min[m], mdl.bounds.a_max[m],
                                   1e-4);
      worst = std::max(worst, g.value - obj(solve_rate(mdl, zeta, m)));
    }
    {  // broadcast flow + capacity + power on a rotating index
      const int h = d % mdl.n_hyperarcs();
      auto zcoef = [&](double zv) {
        PrimalVector y = mdl.zero_primal();
        y.z_at(h, 0, 1) = zv;
        return network_subproblem_value(mdl, zeta, y) -
               network_subproblem_value(mdl, zeta, mdl.zero_primal());
      };
      auto g = oracle::grid_argmax(zcoef, 0.0, mdl.bounds.z_max[h], 1e-4);
      worst = std::max(worst,
                       g.value - zcoef(solve_broadcast_flow(mdl, zeta, h, 0)));

      auto ccoef = [&](double cv) {
        return (zeta.v[mdl.index.xi(h)] - zeta.v[mdl.index.lam(h)]) * cv;
      };
      auto gc = oracle::grid_argmax(ccoef, 0.0, mdl.bounds.c_max[h], 1e-4);
      double cgot = solve_capacity(mdl, zeta, h);
      if (corrupt_tiebreak &&
          zeta.v[mdl.index.xi(h)] == zeta.v[mdl.index.lam(h)])
        cgot = mdl.bounds.c_max[h];
      worst = std::max(worst, gc.value - ccoef(cgot));
      if (zeta.v[mdl.index.xi(h)] == zeta.v[mdl.index.lam(h)] && cgot != 0.0) {
        c.detail = "tie-break-low invariant violated: solve_capacity must "
                   "return 0 on xi == lambda ties";
        c.pass = false;
        return c;
      }

      const int i = d % mdl.n_nodes();
      auto pobj = [&](double pv) {
        return zeta.v[mdl.index.mu(i)] * pv - mdl.cost[i].value(pv);
      };
      auto gp = oracle::grid_argmax(pobj, 0.0, mdl.bounds.p_max_node[i], 1e-4);
      worst = std::max(worst, gp.value - pobj(solve_node_power(mdl, zeta, i)));
    }
    {  // virtual flow
      const int a = d % mdl.n_arcs();
      const int k = d % mdl.index.n_mt();
      auto xcoef = [&](double xv) {
        PrimalVector y = mdl.zero_primal();
        y.x_at(a, k, mdl.index.n_mt()) = xv;
        return network_subproblem_value(mdl, zeta, y) -
               network_subproblem_value(mdl, zeta, mdl.zero_primal());
      };
      auto g = oracle::grid_argmax(xcoef, 0.0, mdl.bounds.x_max[a], 1e-4);
      worst =
          std::max(worst, g.value - xcoef(solve_virtual_flow(mdl, zeta, a, k)));
    }
  }
  c.pass = worst <= 1e-6;
  c.detail = "max objective shortfall " + std::to_string(worst);
  return c;
}

Check check_waterfilling(bool quick) {
  Check c{"waterfilling-grid-equivalence"};
  const int draws = quick ? 100 : 500;
  double worst = 0.0;
  for (int d = 0; d < draws; ++d) {
    auto u = [&](int k) {
      return counter_uniform(23, RngStream::Scratch, d, k);
    };
    const double lambda = u(0) < 0.1 ? 0.0 : 3.0 * u(1);
    const double mu = u(2) < 0.1 ? 0.0 : 2.0 * u(3);
    const double g = 0.01 + 50.0 * u(4);
    const double rho = 1.0 + u(5);
    const double pmax = 0.5 + 5.0 * u(6);
    auto wf = waterfill_hyperarc(lambda, mu, g, rho, pmax);
    auto obj = [&](double p) {
      return lambda * std::log2(1.0 + p * g / rho) - mu * p;
    };
    auto grid = oracle::grid_argmax(obj, 0.0, pmax, 1e-4);
    worst = std::max(worst, grid.value - wf.gamma);
  }
  c.pass = worst <= 1e-6;
  c.detail = "max objective shortfall " + std::to_string(worst);
  return c;
}

json random_hypergraph_json(int trial) {
  auto u = [&](int k) {
    return counter_uniform(31, RngStream::Scratch, trial, k);
  };
  const int n = 4 + static_cast<int>(u(0) * 3);  // 4..6 nodes
  json nodes = json::array();
  for (int i = 0; i < n; ++i)
    nodes.push_back(json{{"id", i + 1}, {"pos", {10.0 * i, 0.0}}});
  json harcs = json::array();
  int count = 0, k = 1;
  while (count < 12 && k < 200) {
    const int tail = 1 + static_cast<int>(u(k) * n);
    std::vector<long long> heads;
    for (int j = 1; j <= n; ++j)
      if (j != tail && u(k + 200 + j) < 0.35) heads.push_back(j);
    ++k;
    if (heads.empty() || u(k + 400) < 0.3) continue;
    json ha = json::array();
    ha.push_back(tail);
    ha.push_back(heads);
    bool dup = false;
    for (const auto& e : harcs) dup = dup || e == ha;
    if (!dup) {
      harcs.push_back(ha);
      ++count;
    }
  }
  return json{
      {"name", "random-hypergraph"},
      {"nodes", nodes},
      {"topology", {{"mode", "explicit"}, {"hyperarcs", harcs}}},
      {"sessions", json::array({json{{"source", 1}, {"sinks", {n}}}})},
      {"tones", 1},
      {"channel", {{"distribution", "point-mass"}, {"noise", {{"value", 1.0}}},
                   {"pathloss", {{"scale", 1.0}, {"d0_m", 10.0}, {"exponent", 2.0}}}}},
      {"bounds", {{"c_max", {{"value", 1.0}}}}},
      {"solver", {{"iters", 1}, {"mc_slots", 1}}}};
}

Check check_matchings(bool quick) {
  Check c{"matching-enumeration-equivalence"};
  const int trials = quick ? 5 : 20;
  for (int t = 0; t < trials; ++t) {
    json cfg = random_hypergraph_json(t);
    BuiltScenario sc = build_scenario(cfg);
    for (bool secondary : {false, true}) {
      auto fast = enumerate_maximal_matchings(sc.model, secondary);
      auto brute = oracle::brute_matchings(sc.model, secondary);
      if (fast.size() != brute.size()) {
        c.detail = "count mismatch on trial " + std::to_string(t);
        return c;
      }
      for (std::size_t i = 0; i < fast.size(); ++i)
        if (fast[i].hyperarcs != brute[i].hyperarcs) {
          c.detail = "set mismatch on trial " + std::to_string(t);
          return c;
        }
    }
  }
  c.pass = true;
  c.detail = std::to_string(trials) + " random hypergraphs";
  return c;
}

Check check_tau(bool quick) {
  Check c{"tau-delay-contract"};
  std::vector<int> windows;
  if (quick)
    windows = {1, 7, 50};
  else
    for (int S = 1; S <= 64; ++S) windows.push_back(S);
  for (int S : windows)
    for (int ell = 1; ell <= 10000; ++ell) {
      const int t = tau(ell, S);
      if (t < 1 || (ell > 2 * S - 1 &&
                    (ell - t < S || ell - t > 2 * S - 1))) {
        c.detail = "violated at S=" + std::to_string(S) +
                   " ell=" + std::to_string(ell);
        return c;
      }
    }
  c.pass = true;
  return c;
}

Check check_single_link_oracle() {
  Check c{"single-link-oracle-closed-form"};
  BuiltScenario sc = build_scenario(builtin_single_link());
  auto res = oracle::deterministic_gap_oracle(sc.model, sc.channel, sc.phy.cfg);
  // capacity-limited bottleneck: a* = min(a_max, x_max, z_max, c_max, cap)
  ChannelState atom = sample(sc.channel, 0, RngStream::Bounds, 0);
  const int h01 = [&] {
    for (int h = 0; h < sc.model.n_hyperarcs(); ++h)
      if (sc.model.hyperarcs[h].tail == sc.model.node_index(1)) return h;
    return -1;
  }();
  double cap = 0.0;
  for (int f = 0; f < sc.model.tones; ++f)
    cap += std::log2(1.0 + sc.model.bounds.p_max_tone[f] *
                               worst_gain_over_noise(sc.model, sc.channel,
                                                     atom, h01, f) /
                               sc.phy.cfg.rho);
  double a_star = std::min({sc.model.bounds.a_max[0],
                            sc.model.bounds.x_max[0], sc.model.bounds.z_max[h01],
                            sc.model.bounds.c_max[h01], cap});
  const double expect = std::log(a_star);
  c.pass = std::abs(res.value - expect) <= 2e-3;
  c.detail = "oracle " + std::to_string(res.value) + " vs closed form " +
             std::to_string(expect);
  return c;
}

Check check_relay_symmetry() {
  Check c{"parallel-relay-symmetry"};
  BuiltScenario sc = build_scenario(builtin_parallel_relays());
  auto res = oracle::deterministic_gap_oracle(sc.model, sc.channel, sc.phy.cfg);
  json swapped = builtin_parallel_relays();
  swapped["nodes"][1]["pos"] = {60.0, -40.0};
  swapped["nodes"][2]["pos"] = {60.0, 40.0};
  BuiltScenario sc2 = build_scenario(swapped);
  auto res2 = oracle::deterministic_gap_oracle(sc2.model, sc2.channel,
                                               sc2.phy.cfg);
  c.pass = std::abs(res.value - res2.value) <= 2e-3;
  c.detail = "values " + std::to_string(res.value) + " / " +
             std::to_string(res2.value);
  return c;
}

Check check_determinism() {
  Check c{"trace-determinism"};
  BuiltScenario sc = build_scenario(builtin_two_node());
  SolverTrace t1 = run_solver(sc.model, sc.channel, sc.phy, sc.solver);
  SolverTrace t2 = run_solver(sc.model, sc.channel, sc.phy, sc.solver);
  if (t1.rows.size() != t2.rows.size()) return c;
  for (std::size_t k = 0; k < t1.rows.size(); ++k) {
    const auto &a = t1.rows[k], &b = t2.rows[k];
    if (a.f_avg != b.f_avg || a.dual_est != b.dual_est ||
        a.viol_norm != b.viol_norm || a.zeta_norm != b.zeta_norm) {
      c.detail = "row " + std::to_string(k) + " differs";
      return c;
    }
  }
  c.pass = true;
  return c;
}

Check check_relay3_gap() {
  Check c{"relay3-sync-vs-oracle"};
  json cfg = builtin_relay3();
  cfg["solver"]["iters"] = 6000;
  BuiltScenario sc = build_scenario(cfg);
  auto res = oracle::deterministic_gap_oracle(sc.model, sc.channel, sc.phy.cfg);
  SolverTrace tr = run_solver(sc.model, sc.channel, sc.phy, sc.solver);
  const double f = tr.rows.back().f_avg;
  const double band = sc.solver.stepsize * tr.G * tr.G / 2.0 + 5e-2;
  c.pass = f >= res.value - band && f <= res.value + 5e-2;
  c.detail = "f_avg " + std::to_string(f) + " vs oracle " +
             std::to_string(res.value) + " (lower slack " +
             std::to_string(band) + ")";
  return c;
}

int cmd_validate(bool quick, bool corrupt_tiebreak) {
  std::vector<Check> checks;
  checks.push_back(check_subproblems(quick, corrupt_tiebreak));
  checks.push_back(check_waterfilling(quick));
  checks.push_back(check_matchings(quick));
  checks.push_back(check_tau(quick));
  checks.push_back(check_single_link_oracle());
  checks.push_back(check_relay_symmetry());
  checks.push_back(check_determinism());
  if (!quick) checks.push_back(check_relay3_gap());

  bool all = true;
  for (const Check& c : checks) {
    std::printf("%-36s %s  %s\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-layer coded multicast network optimizer"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run one scenario");
  add_common_flags(run, run_flags);
  run->add_option("--record-channel", run_flags.record_channel,
                  "record the run's fading states to this CSV for replay");
  run->add_option("--record-channel-slots", run_flags.record_channel_slots,
                  "slots to record");

  RunFlags match_flags;
  CLI::App* matchings =
      app.add_subcommand("matchings", "dump the maximal matching list");
  matchings->add_option("--config", match_flags.config, "scenario JSON file")
      ->required();
  matchings
      ->add_option("--secondary-interference", match_flags.secondary,
                   "conflict rule iii-b")
      ->check(CLI::IsMember({"on", "off"}));

  RunFlags sweep_flags;
  std::vector<int> windows;
  CLI::App* sweep =
      app.add_subcommand("sweep", "run a set of averaging windows S");
  add_common_flags(sweep, sweep_flags);
  sweep->add_option("--windows", windows, "window sizes, comma separated")
      ->required()
      ->delimiter(',');

  bool quick = false, corrupt = false;
  CLI::App* validate =
      app.add_subcommand("validate", "run the oracle cross-check suite");
  validate->add_flag("--quick", quick, "reduced draw counts");
  validate->add_flag("--corrupt-tiebreak", corrupt,
                     "test hook: violate the tie-break invariant")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, windows);
    if (matchings->parsed()) return cmd_matchings(match_flags);
    return cmd_validate(quick, corrupt);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() != 0) {
      std::cerr << e.what() << '\n';
      return 2;
    }
    return app.exit(e);  // --help
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
