#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "codednet/dual.hpp"
#include "codednet/oracle.hpp"
#include "codednet/scenario.hpp"
#include "codednet/subproblems.hpp"

using namespace codednet;

namespace {

// source 1 with sinks {2, 3}; N(1) = {2, 3}, all-subsets
NetworkModel fork3() {
  ModelBuild mb;
  mb.node_ids = {1, 2, 3};
  mb.hyperarcs = {{1, {2}}, {1, {3}}, {1, {2, 3}}, {2, {3}}, {3, {2}}};
  mb.sessions = {{1, {2, 3}}};
  mb.tones = 1;
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {5.0};
  mb.bounds.z_max = {3, 3, 3, 3, 3};
  mb.bounds.c_max = {3, 3, 3, 3, 3};
  mb.bounds.x_max = {2, 2, 2, 2};
  mb.bounds.p_max_node = {5, 5, 5};
  mb.bounds.p_max_tone = {5};
  return build_network_model(mb);
}

}  // namespace

TEST_CASE("rate subproblem closed form and clamps", "[subproblems]") {
  NetworkModel m = fork3();
  DualVector z = DualVector::zeros(m);
  // nu summed over both sinks at the source: 0.25 + 0.25 = 0.5 -> a* = 2
  z.v[m.index.nu(0, 0)] = 0.25;
  z.v[m.index.nu(1, 0)] = 0.25;
  REQUIRE_THAT(solve_rate(m, z, 0), Catch::Matchers::WithinAbs(2.0, 1e-12));
  // zero multipliers -> upper box
  DualVector z0 = DualVector::zeros(m);
  REQUIRE(solve_rate(m, z0, 0) == 5.0);
  // huge multipliers -> lower box
  z.v[m.index.nu(0, 0)] = 1e6;
  REQUIRE(solve_rate(m, z, 0) == m.bounds.a_min[0]);
}

TEST_CASE("broadcast flow bang-bang per enumerated K terms", "[subproblems]") {
  NetworkModel m = fork3();
  const int h = 0;  // (1,{2}), mask 0b01 over N(1) = {2,3}
  DualVector z = DualVector::zeros(m);
  z.v[m.index.xi(h)] = 1.0;
  REQUIRE(solve_broadcast_flow(m, z, h, 0) == 0.0);  // negative coefficient
  // one K with K ∩ J != 0 carrying eta = 2 > xi = 1 -> z* = z_max = 3
  z.v[m.index.eta(0, 0, 0b01)] = 2.0;
  REQUIRE(solve_broadcast_flow(m, z, h, 0) == 3.0);
  // exact tie -> 0
  DualVector zt = DualVector::zeros(m);
  zt.v[m.index.xi(h)] = 2.0;
  zt.v[m.index.eta(0, 0, 0b01)] = 2.0;
  REQUIRE(solve_broadcast_flow(m, zt, h, 0) == 0.0);
  // K ∩ J == 0 terms do not count: eta on K = {3} leaves coefficient negative
  DualVector zk = DualVector::zeros(m);
  zk.v[m.index.xi(h)] = 1.0;
  zk.v[m.index.eta(0, 0, 0b10)] = 5.0;
  REQUIRE(solve_broadcast_flow(m, zk, h, 0) == 0.0);
}

TEST_CASE("virtual flow indicators and eta sum", "[subproblems]") {
  NetworkModel m = fork3();
  const int mt02 = 0;  // (m=0, t=node index 1 i.e. id 2)
  const int arc12 = m.arc_id(0, 1);
  DualVector z = DualVector::zeros(m);
  // j = t: nu_j term is killed by the indicator
  z.v[m.index.nu(mt02, 0)] = 1.0;
  REQUIRE(solve_virtual_flow(m, z, arc12, mt02) == m.bounds.x_max[arc12]);
  // i and j interior with equal nu -> tie -> 0
  const int mt03 = 1;  // sink id 3
  z = DualVector::zeros(m);
  z.v[m.index.nu(mt03, 0)] = 1.0;
  z.v[m.index.nu(mt03, 1)] = 1.0;
  REQUIRE(solve_virtual_flow(m, z, arc12, mt03) == 0.0);
  // nu_i = 2, nu_j = 0.5, sum_{K ∋ j} eta = 1 -> coefficient 0.5 -> x_max
  z = DualVector::zeros(m);
  z.v[m.index.nu(mt03, 0)] = 2.0;
  z.v[m.index.nu(mt03, 1)] = 0.5;
  z.v[m.index.eta(mt03, 0, 0b01)] = 0.6;
  z.v[m.index.eta(mt03, 0, 0b11)] = 0.4;
  REQUIRE(solve_virtual_flow(m, z, arc12, mt03) == m.bounds.x_max[arc12]);
  // push the eta sum past the nu difference -> 0
  z.v[m.index.eta(mt03, 0, 0b01)] = 2.0;
  REQUIRE(solve_virtual_flow(m, z, arc12, mt03) == 0.0);
}

TEST_CASE("capacity subproblem sign and tie-break", "[subproblems]") {
  NetworkModel m = fork3();
  DualVector z = DualVector::zeros(m);
  z.v[m.index.xi(0)] = 2.0;
  z.v[m.index.lam(0)] = 1.0;
  REQUIRE(solve_capacity(m, z, 0) == 3.0);
  z.v[m.index.lam(0)] = 2.0;
  REQUIRE(solve_capacity(m, z, 0) == 0.0);  // tie
  z.v[m.index.xi(0)] = 0.0;
  z.v[m.index.lam(0)] = 1.0;
  REQUIRE(solve_capacity(m, z, 0) == 0.0);
}

TEST_CASE("node power closed form", "[subproblems]") {
  NetworkModel m = fork3();
  DualVector z = DualVector::zeros(m);
  z.v[m.index.mu(0)] = 2.0;
  REQUIRE_THAT(solve_node_power(m, z, 0),
               Catch::Matchers::WithinAbs(0.1, 1e-12));  // mu/(2v) = 2/20
  REQUIRE(solve_node_power(m, z, 1) == 0.0);             // mu = 0
  z.v[m.index.mu(2)] = 1e3;
  REQUIRE(solve_node_power(m, z, 2) == 5.0);  // clamp at p_max
}

TEST_CASE("Newton path handles non-logarithmic curves", "[subproblems]") {
  NetworkModel m = fork3();
  for (auto& u : m.utility) u = parse_utility("alpha-fair", 1.0, 2.0);
  m.cost[0] = parse_cost("power", 2.0, 3.0);
  DualVector z = DualVector::zeros(m);
  z.v[m.index.nu(0, 0)] = 0.4;
  z.v[m.index.nu(1, 0)] = 0.2;
  z.v[m.index.mu(0)] = 1.7;
  const double a = solve_rate(m, z, 0);
  auto uobj = [&](double av) { return m.utility[0].value(av) - 0.6 * av; };
  auto ga = oracle::grid_argmax(uobj, m.bounds.a_min[0], m.bounds.a_max[0], 1e-5);
  REQUIRE(ga.value - uobj(a) <= 1e-8);
  const double p = solve_node_power(m, z, 0);
  auto pobj = [&](double pv) { return 1.7 * pv - m.cost[0].value(pv); };
  auto gp = oracle::grid_argmax(pobj, 0.0, m.bounds.p_max_node[0], 1e-5);
  REQUIRE(gp.value - pobj(p) <= 1e-8);
}

TEST_CASE("subproblem outputs stay inside their boxes", "[subproblems][property]") {
  NetworkModel m = fork3();
  for (int d = 0; d < 200; ++d) {
    DualVector z = DualVector::zeros(m);
    for (std::size_t k = 0; k < z.v.size(); ++k)
      z.v[k] = 4.0 * counter_uniform(41, RngStream::Scratch, d, k);
    PrimalVector y = solve_network_subproblems(m, z);
    REQUIRE(in_box(m, y));
  }
}

TEST_CASE("Lagrangian value equals the sum of subproblem optima",
          "[subproblems][dual]") {
  // point-mass channel makes the expectation exact, so
  // f(y*) - zeta' q(y*, Chat, Phat) must equal psi + phi exactly
  BuiltScenario sc = build_scenario(builtin_relay3());
  const NetworkModel& m = sc.model;
  for (int d = 0; d < 25; ++d) {
    DualVector z = DualVector::zeros(m);
    for (std::size_t k = 0; k < z.v.size(); ++k)
      z.v[k] = 2.5 * counter_uniform(43, RngStream::Scratch, d, k);
    PrimalVector y = solve_network_subproblems(m, z);
    auto e = estimate_expectations(m, sc.channel, sc.phy, z, 1, 1,
                                   RngStream::Slot, 1);
    auto q = constraint_vector(m, y, e.chat, e.phat);
    double lhs = objective_value(m, y);
    for (std::size_t k = 0; k < q.size(); ++k) lhs -= z.v[k] * q[k];
    auto est = dual_value_estimate(m, sc.channel, sc.phy, z, 1, 1,
                                   RngStream::Slot, 1);
    REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(est.value, 1e-9));
  }
}
