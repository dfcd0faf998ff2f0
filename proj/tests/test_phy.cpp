#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "codednet/oracle.hpp"
#include "codednet/phy.hpp"
#include "codednet/scenario.hpp"

using namespace codednet;

namespace {

struct Fixture {
  NetworkModel mdl;
  ChannelModel cm;
};

// one transmitter 0 with receivers {1}, {2}, {1,2}; point-mass gains
Fixture broadcast3(double g1, double g2, double noise = 1.0) {
  ModelBuild mb;
  mb.node_ids = {0, 1, 2};
  mb.hyperarcs = {{0, {1}}, {0, {2}}, {0, {1, 2}}};
  mb.sessions = {{0, {1}}};
  mb.tones = 1;
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {5};
  mb.bounds.z_max = {5, 5, 5};
  mb.bounds.c_max = {20, 20, 20};
  mb.bounds.x_max = {5, 5};
  mb.bounds.p_max_node = {5, 5, 5};
  mb.bounds.p_max_tone = {1.0};
  Fixture fx;
  fx.mdl = build_network_model(mb);
  fx.cm.kind = FadeKind::Table;
  fx.cm.table_atoms = {1.0};
  fx.cm.table_cum = {1.0};
  fx.cm.tones = 1;
  fx.cm.reciprocal = true;
  fx.cm.pairs = {{0, 1}, {0, 2}};
  fx.cm.mean = {g1, g1, g2, g2};
  fx.cm.noise = {noise, noise, noise};
  return fx;
}

}  // namespace

TEST_CASE("broadcast capacity is the worst receiver's rate", "[phy]") {
  // SNRs 3 and 1 at unit power -> min(log2 4, log2 2) = 1 bps/Hz
  Fixture fx = broadcast3(3.0, 1.0);
  ChannelState st = sample(fx.cm, 1, RngStream::Slot, 1);
  PhyConfig cfg;
  PowerAllocation alloc;
  alloc.p.assign(3, 0.0);
  alloc.p[2] = 1.0;  // hyperarc (0,{1,2})
  REQUIRE_THAT(hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 2, 0),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
  // zero power -> zero rate
  alloc.p[2] = 0.0;
  REQUIRE(hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 2, 0) == 0.0);
}

TEST_CASE("capacity is monotone in power and in the SNR penalty", "[phy][property]") {
  Fixture fx = broadcast3(2.0, 0.7);
  ChannelState st = sample(fx.cm, 1, RngStream::Slot, 1);
  PhyConfig cfg;
  PowerAllocation alloc;
  alloc.p.assign(3, 0.0);
  double prev = 0.0;
  for (double p = 0.0; p <= 1.0; p += 0.1) {
    alloc.p[2] = p;
    double c = hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 2, 0);
    REQUIRE(c >= prev - 1e-15);
    prev = c;
  }
  alloc.p[2] = 1.0;
  double c1 = hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 2, 0);
  cfg.rho = 2.0;
  double c2 = hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 2, 0);
  REQUIRE(c2 < c1);
}

TEST_CASE("large beta suppresses simultaneous broadcast in SINR mode", "[phy]") {
  Fixture fx = broadcast3(2.0, 2.0);
  ChannelState st = sample(fx.cm, 1, RngStream::Slot, 1);
  PhyConfig cfg;
  cfg.model = PhyConfig::Model::Sinr;
  cfg.beta = 1e6;
  PowerAllocation alloc;
  alloc.p.assign(3, 1.0);  // all three hyperarcs of node 0 active
  REQUIRE(hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 0, 0) < 1e-4);
  REQUIRE(hyperarc_capacity(fx.mdl, fx.cm, cfg, st, alloc, 1, 0) < 1e-4);
  // alone on the medium the same hyperarc has full SNR capacity
  PowerAllocation solo;
  solo.p.assign(3, 0.0);
  solo.p[0] = 1.0;
  REQUIRE_THAT(hyperarc_capacity(fx.mdl, fx.cm, cfg, st, solo, 0, 0),
               Catch::Matchers::WithinAbs(std::log2(3.0), 1e-9));
}

TEST_CASE("two-node matchings: half-duplex forbids both directions", "[phy]") {
  ModelBuild mb;
  mb.node_ids = {1, 2};
  mb.hyperarcs = {{1, {2}}, {2, {1}}};
  mb.sessions = {{1, {2}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1};
  mb.bounds.z_max = {1, 1};
  mb.bounds.c_max = {1, 1};
  mb.bounds.x_max = {1, 1};
  mb.bounds.p_max_node = {1, 1};
  mb.bounds.p_max_tone = {1};
  NetworkModel m = build_network_model(mb);
  auto ms = enumerate_maximal_matchings(m, false);
  REQUIRE(ms.size() == 2);
  REQUIRE(ms[0].hyperarcs == std::vector<int>{0});
  REQUIRE(ms[1].hyperarcs == std::vector<int>{1});
  auto brute = oracle::brute_matchings(m, false);
  REQUIRE(brute.size() == 2);
}

TEST_CASE("no hyperarcs gives no matchings", "[phy]") {
  ModelBuild mb;
  mb.node_ids = {1, 2};
  mb.sessions = {{1, {2}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1};
  mb.bounds.p_max_node = {1, 1};
  mb.bounds.p_max_tone = {1};
  NetworkModel m = build_network_model(mb);
  REQUIRE(enumerate_maximal_matchings(m, true).empty());
  REQUIRE(oracle::brute_matchings(m, true).empty());
}

TEST_CASE("star network matchings match the brute-force count", "[phy]") {
  ModelBuild mb;
  mb.node_ids = {0, 1, 2, 3};
  mb.hyperarcs = {{0, {1}}, {0, {2}}, {0, {3}},
                  {1, {0}}, {2, {0}}, {3, {0}}};
  mb.sessions = {{0, {3}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = std::vector<CostCurve>(4);
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1};
  mb.bounds.z_max.assign(6, 1);
  mb.bounds.c_max.assign(6, 1);
  mb.bounds.x_max.assign(6, 1);
  mb.bounds.p_max_node.assign(4, 1);
  mb.bounds.p_max_tone = {1};
  NetworkModel m = build_network_model(mb);
  for (bool secondary : {false, true}) {
    auto fast = enumerate_maximal_matchings(m, secondary);
    auto brute = oracle::brute_matchings(m, secondary);
    REQUIRE(fast.size() == brute.size());
    for (std::size_t k = 0; k < fast.size(); ++k)
      REQUIRE(fast[k].hyperarcs == brute[k].hyperarcs);
  }
}

TEST_CASE("matching enumeration guard trips on a tiny limit", "[phy]") {
  BuiltScenario sc = build_scenario_file("scenarios/fig1.json");
  REQUIRE_THROWS_WITH(enumerate_maximal_matchings(sc.model, true, 3),
                      Catch::Matchers::ContainsSubstring("limit"));
}

TEST_CASE("every fig1 matching passes the independent rule checker",
          "[phy][fig1]") {
  BuiltScenario sc = build_scenario_file("scenarios/fig1.json");
  const auto& ms = sc.phy.matchings;
  REQUIRE_FALSE(ms.empty());
  REQUIRE(ms.size() <= 1000);  // desk scale per the runtime budget
  for (const Matching& m : ms) {
    for (std::size_t i = 0; i < m.hyperarcs.size(); ++i)
      for (std::size_t j = i + 1; j < m.hyperarcs.size(); ++j)
        REQUIRE_FALSE(oracle::pair_conflicts(sc.model, m.hyperarcs[i],
                                             m.hyperarcs[j], true));
  }
}

TEST_CASE("waterfilling closed form", "[phy]") {
  constexpr double kLn2 = 0.6931471805599453;
  // lambda/(mu ln2) = 10, rho/g = 2, p_max = 5 -> clamped at 5
  auto r1 = waterfill_hyperarc(1.0, 1.0 / (10.0 * kLn2), 0.5, 1.0, 5.0);
  REQUIRE_THAT(r1.power, Catch::Matchers::WithinAbs(5.0, 1e-12));
  // lambda = 0 -> idle
  auto r2 = waterfill_hyperarc(0.0, 0.3, 2.0, 1.0, 5.0);
  REQUIRE(r2.power == 0.0);
  REQUIRE(r2.gamma == 0.0);
  // interior: lambda/(mu ln2) - rho/g = 1.5
  const double mu = 1.0 / (2.5 * kLn2);
  auto r3 = waterfill_hyperarc(1.0, mu, 1.0, 1.0, 5.0);
  REQUIRE_THAT(r3.power, Catch::Matchers::WithinAbs(1.5, 1e-12));
  // mu = 0 with positive lambda -> spectral mask
  auto r4 = waterfill_hyperarc(0.7, 0.0, 1.0, 1.0, 5.0);
  REQUIRE(r4.power == 5.0);
}

TEST_CASE("waterfilling matches grid search", "[phy][oracle]") {
  for (int d = 0; d < 100; ++d) {
    auto u = [&](int k) { return counter_uniform(3, RngStream::Scratch, d, k); };
    const double lambda = u(0) < 0.1 ? 0.0 : 2.0 * u(1);
    const double mu = u(2) < 0.1 ? 0.0 : u(3);
    const double g = 0.05 + 20.0 * u(4);
    const double rho = 1.0 + 2.0 * u(5);
    const double pmax = 0.5 + 4.5 * u(6);
    auto wf = waterfill_hyperarc(lambda, mu, g, rho, pmax);
    auto obj = [&](double p) {
      return lambda * std::log2(1.0 + p * g / rho) - mu * p;
    };
    auto grid = oracle::grid_argmax(obj, 0.0, pmax, 1e-4);
    REQUIRE(grid.value - wf.gamma <= 1e-6);
  }
}

TEST_CASE("power subproblem at zero multipliers idles by tie-break", "[phy]") {
  Fixture fx = broadcast3(2.0, 1.0);
  PhyContext ctx = make_phy_context(fx.mdl, PhyConfig{});
  ChannelState st = sample(fx.cm, 1, RngStream::Slot, 1);
  std::vector<double> lam(3, 0.0), mu(3, 0.0);
  PhyOutcome out = solve_power_subproblem(fx.mdl, fx.cm, ctx, lam, mu, st);
  REQUIRE(out.objective == 0.0);
  for (double p : out.alloc.p) REQUIRE(p == 0.0);
  REQUIRE(out.matching == 0);  // lexicographically first among ties
}

TEST_CASE("single hyperarc subproblem equals the waterfilling solution",
          "[phy]") {
  ModelBuild mb;
  mb.node_ids = {1, 2};
  mb.hyperarcs = {{1, {2}}};
  mb.sessions = {{1, {2}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1};
  mb.bounds.z_max = {1};
  mb.bounds.c_max = {9};
  mb.bounds.x_max = {1};
  mb.bounds.p_max_node = {5, 5};
  mb.bounds.p_max_tone = {5.0};
  NetworkModel m = build_network_model(mb);
  ChannelModel cm;
  cm.kind = FadeKind::Table;
  cm.table_atoms = {1.0};
  cm.table_cum = {1.0};
  cm.tones = 1;
  cm.pairs = {{0, 1}};
  cm.mean = {0.8, 0.8};
  cm.noise = {0.1, 0.1};
  PhyContext ctx = make_phy_context(m, PhyConfig{});
  ChannelState st = sample(cm, 1, RngStream::Slot, 1);
  std::vector<double> lam = {1.3}, mu = {0.4, 0.0};
  PhyOutcome out = solve_power_subproblem(m, cm, ctx, lam, mu, st);
  auto wf = waterfill_hyperarc(1.3, 0.4, 8.0, 1.0, 5.0);
  REQUIRE_THAT(out.objective, Catch::Matchers::WithinAbs(wf.gamma, 1e-12));
  REQUIRE_THAT(out.alloc.p[0], Catch::Matchers::WithinAbs(wf.power, 1e-12));
  REQUIRE_THAT(out.cap[0], Catch::Matchers::WithinAbs(
                               std::log2(1.0 + wf.power * 8.0), 1e-12));
}

TEST_CASE("phy objective is convex in zeta along segments", "[phy][property]") {
  BuiltScenario sc = build_scenario(builtin_relay3());
  ChannelState st = sample(sc.channel, 1, RngStream::Slot, 1);
  const int H = sc.model.n_hyperarcs();
  const int N = sc.model.n_nodes();
  for (int d = 0; d < 20; ++d) {
    auto u = [&](int tag, int k) {
      return counter_uniform(77, RngStream::Scratch, d * 4 + tag, k);
    };
    std::vector<double> l1(H), l2(H), lc(H), m1(N), m2(N), mc(N);
    for (int h = 0; h < H; ++h) l1[h] = 2.0 * u(0, h), l2[h] = 2.0 * u(1, h);
    for (int i = 0; i < N; ++i) m1[i] = u(0, H + i), m2[i] = u(1, H + i);
    const double al = u(2, 0);
    for (int h = 0; h < H; ++h) lc[h] = al * l1[h] + (1 - al) * l2[h];
    for (int i = 0; i < N; ++i) mc[i] = al * m1[i] + (1 - al) * m2[i];
    double v1 = solve_power_subproblem(sc.model, sc.channel, sc.phy, l1, m1, st)
                    .objective;
    double v2 = solve_power_subproblem(sc.model, sc.channel, sc.phy, l2, m2, st)
                    .objective;
    double vc = solve_power_subproblem(sc.model, sc.channel, sc.phy, lc, mc, st)
                    .objective;
    REQUIRE(vc <= al * v1 + (1 - al) * v2 + 1e-9);
  }
}

TEST_CASE("subproblem objective dominates random feasible schedules",
          "[phy][property]") {
  BuiltScenario sc = build_scenario(builtin_relay3());
  ChannelState st = sample(sc.channel, 2, RngStream::Slot, 9);
  const int H = sc.model.n_hyperarcs();
  const int N = sc.model.n_nodes();
  std::vector<double> lam(H), mu(N);
  for (int h = 0; h < H; ++h)
    lam[h] = 2.0 * counter_uniform(13, RngStream::Scratch, 0, h);
  for (int i = 0; i < N; ++i)
    mu[i] = counter_uniform(13, RngStream::Scratch, 1, i);
  PhyOutcome best = solve_power_subproblem(sc.model, sc.channel, sc.phy, lam,
                                           mu, st);
  for (int d = 0; d < 50; ++d) {
    const auto& m = sc.phy.matchings[d % sc.phy.matchings.size()];
    double val = 0.0;
    for (int h : m.hyperarcs) {
      const int F = sc.model.tones;
      for (int f = 0; f < F; ++f) {
        double p = sc.model.bounds.p_max_tone[f] *
                   counter_uniform(13, RngStream::Scratch, 100 + d, h * F + f);
        double g = worst_gain_over_noise(sc.model, sc.channel, st, h, f);
        val += lam[h] * std::log2(1.0 + p * g) -
               mu[sc.model.hyperarcs[h].tail] * p;
      }
    }
    REQUIRE(val <= best.objective + 1e-9);
  }
}

TEST_CASE("conflict-mode optimum equals brute force over matchings with grid "
          "powers", "[phy][oracle][fig1]") {
  BuiltScenario sc = build_scenario_file("scenarios/fig1.json");
  ChannelState st = sample(sc.channel, 21, RngStream::Slot, 4);
  const int H = sc.model.n_hyperarcs();
  const int N = sc.model.n_nodes();
  const int F = sc.model.tones;
  std::vector<double> lam(H), mu(N);
  for (int h = 0; h < H; ++h)
    lam[h] = 1.5 * counter_uniform(19, RngStream::Scratch, 0, h);
  for (int i = 0; i < N; ++i)
    mu[i] = 0.8 * counter_uniform(19, RngStream::Scratch, 1, i);
  PhyOutcome fast = solve_power_subproblem(sc.model, sc.channel, sc.phy, lam,
                                           mu, st);
  double brute = 0.0;
  for (const Matching& m : sc.phy.matchings) {
    double val = 0.0;
    for (int h : m.hyperarcs)
      for (int f = 0; f < F; ++f) {
        double g = worst_gain_over_noise(sc.model, sc.channel, st, h, f);
        auto obj = [&](double p) {
          return lam[h] * std::log2(1.0 + p * g) -
                 mu[sc.model.hyperarcs[h].tail] * p;
        };
        val += oracle::grid_argmax(obj, 0.0, sc.model.bounds.p_max_tone[f],
                                   1e-4)
                   .value;
      }
    brute = std::max(brute, val);
  }
  REQUIRE_THAT(fast.objective, Catch::Matchers::WithinAbs(brute, 1e-4));
}
