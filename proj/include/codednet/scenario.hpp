#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "codednet/channel.hpp"
#include "codednet/dual.hpp"
#include "codednet/model.hpp"
#include "codednet/phy.hpp"
#include "codednet/solver.hpp"

namespace codednet {

using nlohmann::json;

// Fixed seed behind the waterfilling c_max rule: the derived bounds are part
// of the scenario, not of a particular run, so they must not move with the
// run seed.
inline constexpr std::uint64_t kBoundsSeed = 0xC0DE;

// A fully built scenario: everything the solver and CLI need, plus the
// config echo used for hashing and the meta sidecar.
struct BuiltScenario {
  std::string name;
  NetworkModel model;
  ChannelModel channel;
  PhyContext phy;
  SolverConfig solver;
  json config;
  std::vector<std::string> warnings;
};

namespace detail {

inline double dist(const std::array<double, 2>& a,
                   const std::array<double, 2>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Ergodic waterfilling capacity of one interference-free arc under the
// long-term budget E[sum_f p^f] <= p_budget, common water level across tones.
// gains: flat [slot * tones + f], already divided by (rho * noise).
inline double waterfill_arc_capacity(const std::vector<double>& gains,
                                     int tones, double p_budget) {
  const std::size_t slots = gains.size() / tones;
  if (slots == 0 || p_budget <= 0.0) return 0.0;
  auto mean_power = [&](double w) {
    double s = 0.0;
    for (double g : gains)
      if (g > 0.0) s += std::max(0.0, w - 1.0 / g);
    return s / static_cast<double>(slots);
  };
  double hi = 1.0;
  for (int it = 0; it < 200 && mean_power(hi) < p_budget; ++it) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (mean_power(mid) < p_budget ? lo : hi) = mid;
  }
  const double w = 0.5 * (lo + hi);
  double cap = 0.0;
  for (double g : gains)
    if (g > 0.0) cap += std::log2(std::max(1.0, w * g));
  return cap / static_cast<double>(slots);
}

inline std::vector<double> scalar_or_array(const json& j, int want,
                                           const char* name) {
  std::vector<double> v;
  if (j.is_number()) {
    v.assign(want, j.get<double>());
  } else if (j.is_array()) {
    for (const auto& e : j) v.push_back(e.get<double>());
    if (static_cast<int>(v.size()) != want)
      throw std::invalid_argument(std::string("scenario: '") + name +
                                  "' array has wrong length");
  } else {
    throw std::invalid_argument(std::string("scenario: '") + name +
                                "' must be a number or array");
  }
  return v;
}

}  // namespace detail

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  return j;
}

inline std::string config_hash(const json& j) {
  std::ostringstream os;
  os << std::hex << detail::fnv1a(j.dump());
  return os.str();
}

// Parse, validate and build a scenario from its JSON description. Schema in
// docs/scenario_schema.md; scenarios/fig1.json is the reference instance.
inline BuiltScenario build_scenario(const json& cfg) {
  BuiltScenario out;
  out.config = cfg;
  out.name = cfg.value("name", "scenario");

  // --- nodes --------------------------------------------------------------
  if (!cfg.contains("nodes") || !cfg["nodes"].is_array() || cfg["nodes"].empty())
    throw std::invalid_argument("scenario: 'nodes' array is required");
  ModelBuild mb;
  for (const auto& nd : cfg["nodes"]) {
    mb.node_ids.push_back(nd.at("id").get<long long>());
    if (nd.contains("pos"))
      mb.positions.push_back(
          {nd["pos"][0].get<double>(), nd["pos"][1].get<double>()});
  }
  const int n = static_cast<int>(mb.node_ids.size());
  if (!mb.positions.empty() && static_cast<int>(mb.positions.size()) != n)
    throw std::invalid_argument("scenario: every node needs a position or none");
  auto node_pos = [&](int i) { return mb.positions.at(i); };

  // --- topology -----------------------------------------------------------
  const json topo = cfg.value("topology", json::object());
  mb.max_degree = topo.value("max_degree", 8);
  const std::string tmode = topo.value("mode", "all-subsets");
  if (tmode == "explicit") {
    if (!topo.contains("hyperarcs"))
      throw std::invalid_argument("explicit topology needs 'hyperarcs'");
    for (const auto& ha : topo["hyperarcs"]) {
      std::vector<long long> heads;
      for (const auto& h : ha[1]) heads.push_back(h.get<long long>());
      mb.hyperarcs.emplace_back(ha[0].get<long long>(), std::move(heads));
    }
    if (topo.contains("neighbors")) {
      // cross-check: declared neighbor sets must be exactly the projection
      // of the hyperarc set
      std::vector<std::vector<long long>> proj(n);
      for (const auto& [tid, heads] : mb.hyperarcs)
        for (long long h : heads)
          for (int k = 0; k < n; ++k)
            if (mb.node_ids[k] == tid) proj[k].push_back(h);
      for (auto& v : proj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
      for (auto it = topo["neighbors"].begin(); it != topo["neighbors"].end();
           ++it) {
        std::vector<long long> declared;
        for (const auto& jj : it.value()) declared.push_back(jj.get<long long>());
        std::sort(declared.begin(), declared.end());
        int i = -1;
        for (int k = 0; k < n; ++k)
          if (mb.node_ids[k] == std::stoll(it.key())) i = k;
        if (i < 0 || proj[i] != declared)
          throw std::invalid_argument(
              "inconsistent hyperarc/neighbor data for node " + it.key());
      }
    }
  } else if (tmode == "all-subsets" || tmode == "point-to-point") {
    std::vector<std::vector<int>> nbr(n);
    if (topo.contains("neighbors")) {
      for (auto it = topo["neighbors"].begin(); it != topo["neighbors"].end();
           ++it) {
        const long long id = std::stoll(it.key());
        int i = -1;
        for (int k = 0; k < n; ++k)
          if (mb.node_ids[k] == id) i = k;
        if (i < 0)
          throw std::invalid_argument("topology.neighbors: unknown node id");
        for (const auto& jj : it.value()) {
          const long long njd = jj.get<long long>();
          int j = -1;
          for (int k = 0; k < n; ++k)
            if (mb.node_ids[k] == njd) j = k;
          if (j < 0)
            throw std::invalid_argument("topology.neighbors: unknown node id");
          nbr[i].push_back(j);
        }
      }
    } else if (topo.contains("neighbor_range_m")) {
      if (mb.positions.empty())
        throw std::invalid_argument("neighbor_range_m needs node positions");
      const double r = topo["neighbor_range_m"].get<double>();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && detail::dist(node_pos(i), node_pos(j)) <= r)
            nbr[i].push_back(j);
    } else {
      throw std::invalid_argument(
          "topology needs 'neighbors', 'neighbor_range_m', or explicit mode");
    }
    for (int i = 0; i < n; ++i) {
      auto& nb = nbr[i];
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
      const int d = static_cast<int>(nb.size());
      if (d == 0) continue;
      if (tmode == "all-subsets") {
        if (d > mb.max_degree)
          throw std::invalid_argument(
              "degree too large: node " + std::to_string(mb.node_ids[i]) +
              " has " + std::to_string(d) + " neighbors > max_degree " +
              std::to_string(mb.max_degree));
        for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
          std::vector<long long> heads;
          for (int r = 0; r < d; ++r)
            if (mask & (1u << r)) heads.push_back(mb.node_ids[nb[r]]);
          mb.hyperarcs.emplace_back(mb.node_ids[i], std::move(heads));
        }
      } else {
        for (int j : nb)
          mb.hyperarcs.emplace_back(mb.node_ids[i],
                                    std::vector<long long>{mb.node_ids[j]});
      }
    }
  } else {
    throw std::invalid_argument("unknown topology mode: " + tmode);
  }

  // --- sessions and curves --------------------------------------------------
  if (!cfg.contains("sessions") || cfg["sessions"].empty())
    throw std::invalid_argument("scenario: 'sessions' array is required");
  for (const auto& s : cfg["sessions"]) {
    std::vector<long long> sinks;
    for (const auto& t : s.at("sinks")) sinks.push_back(t.get<long long>());
    mb.sessions.emplace_back(s.at("source").get<long long>(), std::move(sinks));
  }
  mb.tones = cfg.value("tones", 1);

  const json uj = cfg.value("utility", json{{"kind", "log"}});
  const json vj = cfg.value("cost", json{{"kind", "quadratic"}, {"coeff", 10.0}});
  mb.utility.assign(mb.sessions.size(),
                    parse_utility(uj.value("kind", "log"),
                                  uj.value("weight", 1.0),
                                  uj.value("alpha", 2.0)));
  mb.cost.assign(n, parse_cost(vj.value("kind", "quadratic"),
                               vj.value("coeff", 10.0),
                               vj.value("exponent", 3.0)));

  // --- skeleton build (placeholder bounds) to derive the canonical structure
  NetworkModel skel;
  {
    ModelBuild probe = mb;
    std::vector<std::vector<int>> heads_per_tail(n);
    std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
    int arc_count = 0;
    for (const auto& [tid, heads] : mb.hyperarcs) {
      int ti = -1;
      for (int k = 0; k < n; ++k)
        if (mb.node_ids[k] == tid) ti = k;
      if (ti < 0) throw std::invalid_argument("hyperarc tail: unknown node id");
      for (long long hid : heads) {
        int hi = -1;
        for (int k = 0; k < n; ++k)
          if (mb.node_ids[k] == hid) hi = k;
        if (hi < 0) throw std::invalid_argument("hyperarc head: unknown node id");
        if (!seen[ti * n + hi]) {
          seen[ti * n + hi] = 1;
          ++arc_count;
        }
      }
    }
    probe.bounds.a_min.assign(mb.sessions.size(), 1e-4);
    probe.bounds.a_max.assign(mb.sessions.size(), 1.0);
    probe.bounds.z_max.assign(mb.hyperarcs.size(), 1.0);
    probe.bounds.c_max.assign(mb.hyperarcs.size(), 1.0);
    probe.bounds.x_max.assign(arc_count, 1.0);
    probe.bounds.p_max_node.assign(n, 1.0);
    probe.bounds.p_max_tone.assign(mb.tones, 1.0);
    skel = build_network_model(probe);
  }

  // --- channel --------------------------------------------------------------
  const json chj = cfg.value("channel", json::object());
  ChannelModel cm;
  cm.tones = mb.tones;
  cm.reciprocal = chj.value("reciprocal", true);
  std::string replay_file;
  {
    const std::string kind = chj.value("distribution", "exponential");
    if (kind == "replay") {
      replay_file = chj.at("file").get<std::string>();
    } else if (kind == "exponential") {
      cm.kind = FadeKind::Exponential;
    } else if (kind == "rician") {
      cm.kind = FadeKind::Rician;
      cm.rician_k = chj.value("rician_k", 4.0);
    } else if (kind == "nakagami") {
      cm.kind = FadeKind::NakagamiM;
      cm.nakagami_m = chj.value("nakagami_m", 2.0);
    } else if (kind == "table") {
      cm.kind = FadeKind::Table;
      const json tj = chj.at("table");
      double cum = 0.0;
      for (std::size_t k = 0; k < tj.at("atoms").size(); ++k) {
        cm.table_atoms.push_back(tj["atoms"][k].get<double>());
        cum += tj.at("probs")[k].get<double>();
        cm.table_cum.push_back(cum);
      }
    } else if (kind == "point-mass") {
      cm.kind = FadeKind::Table;
      cm.table_atoms = {1.0};
      cm.table_cum = {1.0};
    } else {
      throw std::invalid_argument("unknown channel distribution: " + kind);
    }
  }
  {
    // unordered pairs spanned by G
    std::vector<std::pair<int, int>> pairs;
    for (const Arc& a : skel.arcs) {
      auto pr = std::minmax(a.tail, a.head);
      pairs.emplace_back(pr.first, pr.second);
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
    cm.pairs = pairs;
    cm.mean.assign(static_cast<std::size_t>(cm.n_pairs()) * 2 * cm.tones, 0.0);
    if (!replay_file.empty()) {
      // placeholder means; the replay loader replaces them with empirical ones
      std::fill(cm.mean.begin(), cm.mean.end(), 1.0);
    } else if (chj.contains("mean_gains")) {
      for (const auto& mg : chj["mean_gains"]) {
        const int i = skel.node_index(mg[0].get<long long>());
        const int j = skel.node_index(mg[1].get<long long>());
        const int p = cm.pair_index(i, j);
        if (p < 0) throw std::invalid_argument("mean_gains: no such link");
        const int dir = i < j ? 0 : 1;
        for (int f = 0; f < cm.tones; ++f) {
          const double v = mg[2].is_array() ? mg[2][f].get<double>()
                                            : mg[2].get<double>();
          cm.mean[(p * 2 + dir) * cm.tones + f] = v;
          if (cm.reciprocal) cm.mean[(p * 2 + (1 - dir)) * cm.tones + f] = v;
        }
      }
      for (double v : cm.mean)
        if (!(v > 0.0))
          throw std::invalid_argument("mean_gains must cover every link");
    } else {
      const json pl = chj.value(
          "pathloss",
          json{{"scale", 0.1}, {"d0_m", 20.0}, {"exponent", 2.0}});
      if (mb.positions.empty())
        throw std::invalid_argument("pathloss channel needs node positions");
      const double scale = pl.value("scale", 0.1);
      const double d0 = pl.value("d0_m", 20.0);
      const double ex = pl.value("exponent", 2.0);
      for (int p = 0; p < cm.n_pairs(); ++p) {
        const auto [i, j] = cm.pairs[p];
        const double d = detail::dist(node_pos(i), node_pos(j));
        const double mean = scale * std::pow(d / d0, -ex);
        for (int dir = 0; dir < 2; ++dir)
          for (int f = 0; f < cm.tones; ++f)
            cm.mean[(p * 2 + dir) * cm.tones + f] = mean;
      }
    }
  }
  {
    const json nj = chj.value("noise", json{{"rule", "pathloss-at-distance"},
                                            {"distance_m", 100.0}});
    if (nj.contains("value")) {
      cm.noise.assign(n, nj["value"].get<double>());
    } else if (nj.value("rule", "") == "pathloss-at-distance") {
      const json pl = chj.value(
          "pathloss",
          json{{"scale", 0.1}, {"d0_m", 20.0}, {"exponent", 2.0}});
      const double d = nj.value("distance_m", 100.0);
      const double v = pl.value("scale", 0.1) *
                       std::pow(d / pl.value("d0_m", 20.0),
                                -pl.value("exponent", 2.0));
      cm.noise.assign(n, v);
    } else {
      throw std::invalid_argument("channel.noise needs 'value' or the rule");
    }
  }
  if (!replay_file.empty()) load_channel_replay(replay_file, skel, cm);
  cm.validate(n);
  if (cm.is_discrete())
    out.warnings.push_back(
        "channel distribution is discrete: the zero-duality-gap guarantee "
        "assumes continuous fading");

  // --- phy ------------------------------------------------------------------
  const json pj = cfg.value("phy", json::object());
  PhyConfig pc;
  {
    const std::string pm = pj.value("model", "conflict-graph");
    if (pm == "conflict-graph")
      pc.model = PhyConfig::Model::ConflictGraph;
    else if (pm == "sinr")
      pc.model = PhyConfig::Model::Sinr;
    else
      throw std::invalid_argument("unknown phy model: " + pm);
  }
  pc.secondary_interference = pj.value("secondary_interference", true);
  pc.rho = pj.value("rho", 1.0);
  if (pc.rho < 1.0) throw std::invalid_argument("phy.rho must be >= 1");
  pc.beta = pj.value("beta", 1e3);
  pc.self_gain = pj.value("self_gain", 1e3);
  pc.matching_limit = pj.value("matching_limit", std::uint64_t{1000000});

  // --- bounds -----------------------------------------------------------------
  const json bj = cfg.value("bounds", json::object());
  BoxBounds bb;
  bb.a_min = detail::scalar_or_array(bj.value("a_min", json(1e-4)),
                                     static_cast<int>(mb.sessions.size()),
                                     "a_min");
  bb.a_max = detail::scalar_or_array(bj.value("a_max", json(5.0)),
                                     static_cast<int>(mb.sessions.size()),
                                     "a_max");
  bb.p_max_tone =
      detail::scalar_or_array(bj.value("p_max_tone", json(5.0)), mb.tones,
                              "p_max_tone");
  bb.p_max_node = detail::scalar_or_array(bj.value("p_max_node", json(5.0)), n,
                                          "p_max_node");

  const int H = skel.n_hyperarcs();
  const int A = skel.n_arcs();
  {
    const json cj = bj.value("c_max", json{{"rule", "waterfilling"}});
    if (cj.contains("value")) {
      bb.c_max.assign(H, cj["value"].get<double>());
    } else if (cj.value("rule", "") == "waterfilling") {
      const auto slots =
          cm.is_point_mass() ? 1u : cj.value("slots", std::uint32_t{20000});
      // per-arc ergodic waterfilling capacity, then min over receivers
      std::vector<std::vector<double>> arc_gains(
          A, std::vector<double>(static_cast<std::size_t>(slots) * mb.tones));
      for (std::uint32_t s = 0; s < slots; ++s) {
        ChannelState st = sample(cm, kBoundsSeed, RngStream::Bounds, s + 1);
        for (int a = 0; a < A; ++a)
          for (int f = 0; f < mb.tones; ++f)
            arc_gains[a][static_cast<std::size_t>(s) * mb.tones + f] =
                gain(cm, st, skel.arcs[a].tail, skel.arcs[a].head, f) /
                (pc.rho * noise_power(cm, skel.arcs[a].head));
      }
      std::vector<double> arc_cap(A, 0.0);
      for (int a = 0; a < A; ++a)
        arc_cap[a] = detail::waterfill_arc_capacity(
            arc_gains[a], mb.tones, bb.p_max_node[skel.arcs[a].tail]);
      bb.c_max.assign(H, 0.0);
      for (int h = 0; h < H; ++h) {
        double cmin = std::numeric_limits<double>::infinity();
        for (int j : skel.hyperarcs[h].heads)
          cmin = std::min(cmin, arc_cap[skel.arc_id(skel.hyperarcs[h].tail, j)]);
        bb.c_max[h] = cmin;
      }
    } else {
      throw std::invalid_argument("bounds.c_max needs 'value' or waterfilling");
    }
  }
  {
    const json zj = bj.value("z_max", json{{"rule", "half-c-max"}});
    if (zj.contains("value"))
      bb.z_max.assign(H, zj["value"].get<double>());
    else if (zj.value("rule", "") == "half-c-max") {
      bb.z_max = bb.c_max;
      for (double& v : bb.z_max) v *= 0.5;
    } else {
      throw std::invalid_argument("bounds.z_max needs 'value' or half-c-max");
    }
  }
  {
    const json xj = bj.value("x_max", json{{"rule", "half-singleton-z-max"}});
    if (xj.contains("value")) {
      bb.x_max.assign(A, xj["value"].get<double>());
    } else if (xj.value("rule", "") == "half-singleton-z-max") {
      bb.x_max.assign(A, 0.0);
      for (int a = 0; a < A; ++a) {
        const int i = skel.arcs[a].tail, j = skel.arcs[a].head;
        const std::uint32_t jm = 1u << skel.neighbor_rank(i, j);
        double zref = -1.0;
        for (int h : skel.node_hyperarcs[i])
          if (skel.hyperarcs[h].mask == jm) zref = bb.z_max[h];
        if (zref < 0.0) {  // no singleton hyperarc: widest z bound over J ∋ j
          for (int h : skel.node_hyperarcs[i])
            if (skel.hyperarcs[h].mask & jm)
              zref = std::max(zref, bb.z_max[h]);
        }
        bb.x_max[a] = 0.5 * std::max(zref, 0.0);
      }
    } else {
      throw std::invalid_argument(
          "bounds.x_max needs 'value' or half-singleton-z-max");
    }
  }

  // --- final build ------------------------------------------------------------
  mb.bounds = bb;
  out.model = build_network_model(mb);
  out.channel = cm;

  // --- solver -------------------------------------------------------------------
  const json sj = cfg.value("solver", json::object());
  SolverConfig sc;
  {
    const std::string sm = sj.value("mode", "async");
    if (sm == "sync")
      sc.mode = SolverConfig::Mode::Sync;
    else if (sm == "async")
      sc.mode = SolverConfig::Mode::Async;
    else
      throw std::invalid_argument("unknown solver mode: " + sm);
  }
  sc.stepsize = sj.value("stepsize", 0.15);
  sc.iters = sj.value("iters", 5000);
  sc.window = sj.value("window", 50);
  sc.mc_slots = sj.value("mc_slots", 200);
  sc.seed = sj.value("seed", std::uint64_t{1});
  sc.diag_cadence = sj.value("diag_cadence", 50);
  sc.diag_slots = sj.value("diag_slots", 200);
  sc.burn_in = sj.value("burn_in", 0);
  sc.validate();
  out.solver = sc;

  pc.sinr_seed = sc.seed;
  out.phy = make_phy_context(out.model, pc);
  return out;
}

inline BuiltScenario build_scenario_file(const std::string& path) {
  return build_scenario(load_json_file(path));
}

// ---------------------------------------------------------------------------
// Built-in desk-scale scenarios used by `validate` and the test suites.
// ---------------------------------------------------------------------------

// 2-node line, exponential fading; smoke-test sized.
inline json builtin_two_node() {
  return json{
      {"name", "two-node"},
      {"nodes", json::array({json{{"id", 1}, {"pos", {0.0, 0.0}}},
                             json{{"id", 2}, {"pos", {40.0, 0.0}}}})},
      {"topology", {{"mode", "all-subsets"}, {"neighbor_range_m", 60.0}}},
      {"sessions", json::array({json{{"source", 1}, {"sinks", {2}}}})},
      {"tones", 2},
      {"channel", {{"distribution", "exponential"}, {"reciprocal", true}}},
      {"phy", {{"model", "conflict-graph"}, {"secondary_interference", true}}},
      {"solver", {{"mode", "async"}, {"stepsize", 0.1}, {"iters", 400},
                  {"window", 10}, {"mc_slots", 20}, {"seed", 3},
                  {"diag_cadence", 50}, {"diag_slots", 50}}}};
}

// Single point-mass link with zero power cost: the optimum is
// ln(min(a_max, x_max, z_max, c_max, full-power capacity)) in closed form.
inline json builtin_single_link() {
  return json{
      {"name", "single-link"},
      {"nodes", json::array({json{{"id", 1}, {"pos", {0.0, 0.0}}},
                             json{{"id", 2}, {"pos", {20.0, 0.0}}}})},
      {"topology", {{"mode", "all-subsets"}, {"neighbor_range_m", 30.0}}},
      {"sessions", json::array({json{{"source", 1}, {"sinks", {2}}}})},
      {"tones", 1},
      {"channel", {{"distribution", "point-mass"},
                   {"noise", {{"value", 0.004}}}}},
      {"cost", {{"kind", "quadratic"}, {"coeff", 0.0}}},
      {"phy", {{"model", "conflict-graph"}, {"secondary_interference", true}}},
      {"solver", {{"mode", "sync"}, {"stepsize", 0.05}, {"iters", 2000},
                  {"mc_slots", 1}, {"seed", 5}, {"diag_cadence", 100},
                  {"diag_slots", 1}}}};
}

// 3-node relay line over a point-mass channel: the deterministic-gap
// acceptance instance. Strong links and a cheap power cost keep the optimal
// multipliers small, so the running averages settle well inside the
// constant-stepsize bands by 2e4 iterations.
inline json builtin_relay3() {
  return json{
      {"name", "relay3"},
      {"nodes", json::array({json{{"id", 1}, {"pos", {0.0, 0.0}}},
                             json{{"id", 2}, {"pos", {25.0, 0.0}}},
                             json{{"id", 3}, {"pos", {50.0, 0.0}}}})},
      {"topology", {{"mode", "all-subsets"}, {"neighbor_range_m", 30.0}}},
      {"sessions", json::array({json{{"source", 1}, {"sinks", {3}}}})},
      {"tones", 2},
      {"channel", {{"distribution", "point-mass"},
                   {"noise", {{"value", 0.004}}}}},
      {"cost", {{"kind", "quadratic"}, {"coeff", 0.05}}},
      {"bounds", {{"a_max", 2.0}}},
      {"phy", {{"model", "conflict-graph"}, {"secondary_interference", true}}},
      {"solver", {{"mode", "sync"}, {"stepsize", 0.01}, {"iters", 20000},
                  {"mc_slots", 1}, {"seed", 11}, {"diag_cadence", 200},
                  {"diag_slots", 1}}}};
}

// Two symmetric relays between source and sink, point-mass channel.
inline json builtin_parallel_relays() {
  return json{
      {"name", "parallel-relays"},
      {"nodes", json::array({json{{"id", 1}, {"pos", {0.0, 0.0}}},
                             json{{"id", 2}, {"pos", {60.0, 40.0}}},
                             json{{"id", 3}, {"pos", {60.0, -40.0}}},
                             json{{"id", 4}, {"pos", {120.0, 0.0}}}})},
      {"topology", {{"mode", "all-subsets"}, {"neighbor_range_m", 75.0}}},
      {"sessions", json::array({json{{"source", 1}, {"sinks", {4}}}})},
      {"tones", 2},
      {"channel", {{"distribution", "point-mass"},
                   {"noise", {{"value", 0.004}}}}},
      {"cost", {{"kind", "quadratic"}, {"coeff", 10.0}}},
      {"phy", {{"model", "conflict-graph"}, {"secondary_interference", true}}},
      {"solver", {{"mode", "sync"}, {"stepsize", 0.01}, {"iters", 20000},
                  {"mc_slots", 1}, {"seed", 13}, {"diag_cadence", 200},
                  {"diag_slots", 1}}}};
}

}  // namespace codednet
