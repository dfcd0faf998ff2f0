#include <catch2/catch_amalgamated.hpp>

#include "codednet/model.hpp"
#include "codednet/rng.hpp"
#include "codednet/scenario.hpp"

using namespace codednet;

namespace {

// 2-hop relay line 1 - 2 - 3, all-subsets hyperarcs
NetworkModel line3() {
  ModelBuild mb;
  mb.node_ids = {1, 2, 3};
  mb.hyperarcs = {{1, {2}}, {2, {1}}, {2, {3}}, {2, {1, 3}}, {3, {2}}};
  mb.sessions = {{1, {3}}};
  mb.tones = 1;
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {5.0};
  mb.bounds.z_max = {1, 1, 1, 1, 1};
  mb.bounds.c_max = {2, 2, 2, 2, 2};
  mb.bounds.x_max = {1, 1, 1, 1};
  mb.bounds.p_max_node = {5, 5, 5};
  mb.bounds.p_max_tone = {5};
  return build_network_model(mb);
}

}  // namespace

TEST_CASE("build derives neighbor sets, arcs and canonical order", "[model]") {
  NetworkModel m = line3();
  REQUIRE(m.n_nodes() == 3);
  REQUIRE(m.n_hyperarcs() == 5);
  REQUIRE(m.neighbors[0] == std::vector<int>{1});
  REQUIRE(m.neighbors[1] == (std::vector<int>{0, 2}));
  REQUIRE(m.n_arcs() == 4);
  // canonical order: (tail, mask) ascending; node 2's hyperarcs are
  // {1}, {3}, {1,3} in mask order
  REQUIRE(m.hyperarcs[1].tail == 1);
  REQUIRE(m.hyperarcs[1].heads == std::vector<int>{0});
  REQUIRE(m.hyperarcs[2].heads == std::vector<int>{2});
  REQUIRE(m.hyperarcs[3].heads == (std::vector<int>{0, 2}));
}

TEST_CASE("two-node line has exactly one hyperarc from node 1", "[model]") {
  ModelBuild mb;
  mb.node_ids = {1, 2};
  mb.hyperarcs = {{1, {2}}};
  mb.sessions = {{1, {2}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1.0};
  mb.bounds.z_max = {1};
  mb.bounds.c_max = {1};
  mb.bounds.x_max = {1};
  mb.bounds.p_max_node = {1, 1};
  mb.bounds.p_max_tone = {1};
  NetworkModel m = build_network_model(mb);
  REQUIRE(m.n_hyperarcs() == 1);
  REQUIRE(m.node_hyperarcs[0].size() == 1);
}

TEST_CASE("invalid models are rejected", "[model]") {
  ModelBuild mb;
  mb.node_ids = {1};
  mb.sessions = {{1, {1}}};  // source == sink
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {1.0};
  mb.bounds.p_max_node = {1};
  mb.bounds.p_max_tone = {1};
  REQUIRE_THROWS_AS(build_network_model(mb), std::invalid_argument);

  // transmitter inside its own receiver set
  ModelBuild mb2;
  mb2.node_ids = {1, 2};
  mb2.hyperarcs = {{1, {1, 2}}};
  mb2.sessions = {{1, {2}}};
  mb2.utility = {UtilityCurve{}};
  mb2.cost = {CostCurve{}, CostCurve{}};
  REQUIRE_THROWS_WITH(build_network_model(mb2),
                      Catch::Matchers::ContainsSubstring("transmitter"));
}

TEST_CASE("degree cap produces an explicit error", "[model]") {
  json cfg = builtin_two_node();
  cfg["topology"]["max_degree"] = 0;
  REQUIRE_THROWS_WITH(build_scenario(cfg),
                      Catch::Matchers::ContainsSubstring("degree too large"));
}

TEST_CASE("fig1 constraint index cardinalities", "[model][fig1]") {
  BuiltScenario sc = build_scenario_file("scenarios/fig1.json");
  const NetworkModel& m = sc.model;
  REQUIRE(m.n_nodes() == 8);
  // inner nodes 2,4,6,8 have 4 neighbors; outer nodes 1,3,5,7 have 2
  for (long long id : {2, 4, 6, 8})
    REQUIRE(m.neighbors[m.node_index(id)].size() == 4);
  for (long long id : {1, 3, 5, 7})
    REQUIRE(m.neighbors[m.node_index(id)].size() == 2);
  // hyperarcs from node 1 are exactly (1,{2}), (1,{8}), (1,{2,8})
  const int n1 = m.node_index(1);
  REQUIRE(m.node_hyperarcs[n1].size() == 3);
  auto heads_of = [&](int k) {
    std::vector<long long> ids;
    for (int j : m.hyperarcs[m.node_hyperarcs[n1][k]].heads)
      ids.push_back(m.node_ids[j]);
    return ids;
  };
  REQUIRE(heads_of(0) == std::vector<long long>{2});
  REQUIRE(heads_of(1) == std::vector<long long>{8});
  REQUIRE(heads_of(2) == (std::vector<long long>{2, 8}));
  // |A| = 4*(2^4-1) + 4*(2^2-1) = 72; |G| = 2*12 = 24
  REQUIRE(m.n_hyperarcs() == 72);
  REQUIRE(m.n_arcs() == 24);
  // exact constraint-family counts
  const int MT = m.index.n_mt();
  REQUIRE(MT == 4);
  int nu_count = 0;
  for (int k = 0; k < MT; ++k)
    for (int i = 0; i < m.n_nodes(); ++i)
      if (m.index.nu(k, i) >= 0) ++nu_count;
  REQUIRE(nu_count == 4 * 7);
  int subset_per_mt = 0;
  for (int i = 0; i < m.n_nodes(); ++i)
    subset_per_mt += (1 << m.index.degree[i]) - 1;
  REQUIRE(subset_per_mt == 72);
  REQUIRE(m.index.xi_offset - m.index.eta_offset == 4 * 72);
  REQUIRE(m.index.total == 28 + 288 + 72 + 72 + 8);
}

TEST_CASE("flow divergence evaluates sigma minus net outflow", "[model]") {
  NetworkModel m = line3();
  PrimalVector y = m.zero_primal();
  y.a[0] = 2.0;
  const int t = 2;
  // source with no outflow
  REQUIRE(flow_divergence(m, y, 0, t, 0) == 2.0);
  // interior node with zero flows
  REQUIRE(flow_divergence(m, y, 0, t, 1) == 0.0);
  // route a on (1,2): source balanced, relay now violating
  y.x_at(m.arc_id(0, 1), 0, 1) = 2.0;
  REQUIRE(flow_divergence(m, y, 0, t, 0) == 0.0);
  REQUIRE(flow_divergence(m, y, 0, t, 1) == 2.0);
  // and onward on (2,3): relay balanced again
  y.x_at(m.arc_id(1, 2), 0, 1) = 2.0;
  REQUIRE(flow_divergence(m, y, 0, t, 1) == 0.0);
  REQUIRE_THROWS_AS(flow_divergence(m, y, 0, t, t), std::invalid_argument);
  REQUIRE_THROWS_AS(flow_divergence(m, y, 7, t, 0), std::invalid_argument);
}

TEST_CASE("flow divergence summed over i != t telescopes", "[model]") {
  NetworkModel m = line3();
  PrimalVector y = m.zero_primal();
  y.a[0] = 1.5;
  y.x_at(m.arc_id(0, 1), 0, 1) = 0.9;
  y.x_at(m.arc_id(1, 2), 0, 1) = 0.4;
  y.x_at(m.arc_id(2, 1), 0, 1) = 0.1;
  double sum = 0.0;
  for (int i : {0, 1}) sum += flow_divergence(m, y, 0, 2, i);
  const double into_t =
      y.x_at(m.arc_id(1, 2), 0, 1) - y.x_at(m.arc_id(2, 1), 0, 1);
  REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(y.a[0] - into_t, 1e-12));
}

TEST_CASE("subset violation against a hand-enumerated case", "[model]") {
  // node with N(i) = {2, 8}: x_i2 = 1, z over {2} = 0.4, {2,8} = 0.4, {8} = 5
  ModelBuild mb;
  mb.node_ids = {1, 2, 8};
  mb.hyperarcs = {{1, {2}}, {1, {8}}, {1, {2, 8}}};
  mb.sessions = {{1, {2}}};
  mb.utility = {UtilityCurve{}};
  mb.cost = {CostCurve{}, CostCurve{}, CostCurve{}};
  mb.bounds.a_min = {1e-4};
  mb.bounds.a_max = {5};
  mb.bounds.z_max = {5, 5, 5};
  mb.bounds.c_max = {9, 9, 9};
  mb.bounds.x_max = {9, 9};
  mb.bounds.p_max_node = {1, 1, 1};
  mb.bounds.p_max_tone = {1};
  NetworkModel m = build_network_model(mb);
  PrimalVector y = m.zero_primal();
  y.x_at(m.arc_id(0, 1), 0, 1) = 1.0;
  y.z_at(0, 0, 1) = 0.4;  // (1,{2})
  y.z_at(2, 0, 1) = 0.4;  // (1,{2,8})
  y.z_at(1, 0, 1) = 5.0;  // (1,{8})
  REQUIRE_THAT(subset_violation(m, y, 0, 0b01, 0, 1),
               Catch::Matchers::WithinAbs(0.2, 1e-12));
  // x = 0 everywhere -> non-positive
  PrimalVector y0 = m.zero_primal();
  y0.z_at(0, 0, 1) = 0.3;
  REQUIRE(subset_violation(m, y0, 0, 0b01, 0, 1) <= 0.0);
  // K = N(i), all z = 0, positive x -> violation equals the x sum
  PrimalVector y1 = m.zero_primal();
  y1.x_at(m.arc_id(0, 1), 0, 1) = 0.7;
  y1.x_at(m.arc_id(0, 2), 0, 1) = 0.5;
  REQUIRE_THAT(subset_violation(m, y1, 0, 0b11, 0, 1),
               Catch::Matchers::WithinAbs(1.2, 1e-12));
  REQUIRE_THROWS_AS(subset_violation(m, y1, 0, 0, 0, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(subset_violation(m, y1, 0, 0b100, 0, 1),
                    std::invalid_argument);
}

TEST_CASE("constraint vector blocks and direct arithmetic", "[model]") {
  NetworkModel m = line3();
  PrimalVector y = m.zero_primal();
  std::vector<double> cbar(m.n_hyperarcs(), 0.0), pbar(m.n_nodes(), 0.0);

  // zero y: only the sigma entries are populated when a > 0; all-zero y gives
  // the zero vector (raw evaluation accepts a = 0 below the box)
  auto q0 = constraint_vector(m, y, cbar, pbar);
  for (double v : q0) REQUIRE(v == 0.0);

  // capacity entry: c = 1, cbar = 0.5 -> +0.5
  y.c[0] = 1.0;
  cbar[0] = 0.5;
  auto q1 = constraint_vector(m, y, cbar, pbar);
  REQUIRE_THAT(q1[m.index.lam(0)], Catch::Matchers::WithinAbs(0.5, 1e-12));
  // xi entry: z - c
  y.z_at(0, 0, 1) = 0.25;
  auto q2 = constraint_vector(m, y, cbar, pbar);
  REQUIRE_THAT(q2[m.index.xi(0)], Catch::Matchers::WithinAbs(-0.75, 1e-12));
  // mu entry: pbar - p
  pbar[1] = 0.3;
  y.p[1] = 0.1;
  auto q3 = constraint_vector(m, y, cbar, pbar);
  REQUIRE_THAT(q3[m.index.mu(1)], Catch::Matchers::WithinAbs(0.2, 1e-12));

  std::vector<double> bad(m.n_hyperarcs() + 1, 0.0);
  REQUIRE_THROWS_AS(constraint_vector(m, y, bad, pbar), std::invalid_argument);
}

TEST_CASE("constraint vector matches elementwise evaluators", "[model]") {
  NetworkModel m = line3();
  PrimalVector y = m.zero_primal();
  for (std::size_t k = 0; k < y.x.size(); ++k)
    y.x[k] = counter_uniform(5, RngStream::Scratch, 1, k);
  for (std::size_t k = 0; k < y.z.size(); ++k)
    y.z[k] = counter_uniform(5, RngStream::Scratch, 2, k);
  y.a[0] = 1.2;
  std::vector<double> cbar(m.n_hyperarcs(), 0.5), pbar(m.n_nodes(), 0.1);
  auto q = constraint_vector(m, y, cbar, pbar);
  for (int k = 0; k < m.index.n_mt(); ++k) {
    const auto [mm, t] = m.index.mt[k];
    for (int i = 0; i < m.n_nodes(); ++i) {
      if (i == t) continue;
      REQUIRE_THAT(q[m.index.nu(k, i)],
                   Catch::Matchers::WithinAbs(flow_divergence(m, y, mm, t, i),
                                              1e-12));
    }
    for (int i = 0; i < m.n_nodes(); ++i)
      for (std::uint32_t mask = 1; mask < (1u << m.index.degree[i]); ++mask)
        REQUIRE_THAT(q[m.index.eta(k, i, mask)],
                     Catch::Matchers::WithinAbs(
                         subset_violation(m, y, i, mask, mm, t), 1e-12));
  }
}

TEST_CASE("constraint vector is affine in y", "[model][property]") {
  NetworkModel m = line3();
  std::vector<double> cbar(m.n_hyperarcs(), 0.7), pbar(m.n_nodes(), 0.2);
  auto rand_y = [&](std::uint64_t d) {
    PrimalVector y = m.zero_primal();
    auto fill = [&](std::vector<double>& v, std::uint64_t tag) {
      for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = counter_uniform(9, RngStream::Scratch, d * 16 + tag, k);
    };
    fill(y.a, 0);
    fill(y.z, 1);
    fill(y.x, 2);
    fill(y.c, 3);
    fill(y.p, 4);
    return y;
  };
  for (std::uint64_t d = 0; d < 10; ++d) {
    PrimalVector y1 = rand_y(2 * d), y2 = rand_y(2 * d + 1);
    const double al = counter_uniform(9, RngStream::Scratch, 999, d);
    PrimalVector yc = m.zero_primal();
    auto mix = [&](std::vector<double>& c, const std::vector<double>& a,
                   const std::vector<double>& b) {
      for (std::size_t k = 0; k < c.size(); ++k)
        c[k] = al * a[k] + (1.0 - al) * b[k];
    };
    mix(yc.a, y1.a, y2.a);
    mix(yc.z, y1.z, y2.z);
    mix(yc.x, y1.x, y2.x);
    mix(yc.c, y1.c, y2.c);
    mix(yc.p, y1.p, y2.p);
    auto q1 = constraint_vector(m, y1, cbar, pbar);
    auto q2 = constraint_vector(m, y2, cbar, pbar);
    auto qc = constraint_vector(m, yc, cbar, pbar);
    for (std::size_t k = 0; k < qc.size(); ++k)
      REQUIRE_THAT(qc[k], Catch::Matchers::WithinAbs(
                              al * q1[k] + (1.0 - al) * q2[k], 1e-9));
  }
}
