#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "codednet/model.hpp"
#include "codednet/rng.hpp"

namespace codednet {

enum class FadeKind { Exponential, Rician, NakagamiM, Table, Replay };

// Stationary per-slot fading model. Gains live on the unordered node pairs
// spanned by G; with reciprocity one draw per pair serves both directions.
// Table atoms are multipliers on the per-link mean gain, so a single atom of
// 1.0 gives a point-mass channel at the configured means.
struct ChannelModel {
  FadeKind kind = FadeKind::Exponential;
  double rician_k = 1.0;     // K-factor
  double nakagami_m = 1.0;   // shape
  std::vector<double> table_atoms;  // Table only
  std::vector<double> table_cum;    // cumulative probabilities, back() == 1

  bool reciprocal = true;
  int tones = 1;
  std::vector<std::pair<int, int>> pairs;  // (i, j) with i < j
  std::vector<double> mean;                // [pair * 2 * F + dir * F + f]
  std::vector<double> noise;               // per node

  // Replay kind: recorded states, served cyclically by slot index.
  std::uint64_t replay_slots = 0;
  std::vector<double> replay;  // [slot_idx * n_pairs * 2 * F + ...], > 0

  int n_pairs() const { return static_cast<int>(pairs.size()); }

  int pair_index(int i, int j) const {
    const int a = std::min(i, j), b = std::max(i, j);
    for (int p = 0; p < n_pairs(); ++p)
      if (pairs[p] == std::make_pair(a, b)) return p;
    return -1;
  }

  // dir 0 carries min(i,j) -> max(i,j)
  double mean_gain(int i, int j, int f) const {
    int p = pair_index(i, j);
    if (p < 0) throw std::invalid_argument("no channel between nodes");
    int dir = (reciprocal || i < j) ? 0 : 1;
    return mean[(p * 2 + dir) * tones + f];
  }

  bool is_discrete() const {
    return kind == FadeKind::Table || kind == FadeKind::Replay;
  }

  bool is_point_mass() const {
    return (kind == FadeKind::Table && table_atoms.size() == 1) ||
           (kind == FadeKind::Replay && replay_slots == 1);
  }

  void validate(int n_nodes) const {
    if (tones < 1) throw std::invalid_argument("channel: tones must be >= 1");
    if (static_cast<int>(noise.size()) != n_nodes)
      throw std::invalid_argument("channel: need noise power per node");
    for (double nj : noise)
      if (!(nj > 0.0)) throw std::invalid_argument("noise power must be > 0");
    if (mean.size() != static_cast<std::size_t>(n_pairs()) * 2 * tones)
      throw std::invalid_argument("channel: mean gain table has wrong size");
    for (double m : mean)
      if (!(m > 0.0) || !std::isfinite(m))
        throw std::invalid_argument("mean gains must be strictly positive");
    if (reciprocal) {
      for (int p = 0; p < n_pairs(); ++p)
        for (int f = 0; f < tones; ++f)
          if (mean[(p * 2 + 0) * tones + f] != mean[(p * 2 + 1) * tones + f])
            throw std::invalid_argument(
                "reciprocal channel needs symmetric mean gains");
    }
    if (kind == FadeKind::Table) {
      if (table_atoms.empty() || table_atoms.size() != table_cum.size())
        throw std::invalid_argument("channel: bad custom table");
      if (std::abs(table_cum.back() - 1.0) > 1e-12)
        throw std::invalid_argument("channel: table probabilities must sum to 1");
      for (double a : table_atoms)
        if (a < 0.0) throw std::invalid_argument("table atoms must be >= 0");
    }
    if (kind == FadeKind::NakagamiM && !(nakagami_m > 0.0))
      throw std::invalid_argument("nakagami m must be > 0");
    if (kind == FadeKind::Rician && !(rician_k >= 0.0))
      throw std::invalid_argument("rician K must be >= 0");
    if (kind == FadeKind::Replay &&
        (replay_slots == 0 || replay.size() != replay_slots * mean.size()))
      throw std::invalid_argument("channel: replay trace is empty or malformed");
  }
};

// One realization of all link gains for a slot.
struct ChannelState {
  std::uint64_t slot = 0;
  std::vector<double> g;  // same layout as ChannelModel::mean
};

inline double gain(const ChannelModel& cm, const ChannelState& st, int i,
                   int j, int f) {
  int p = cm.pair_index(i, j);
  if (p < 0) throw std::invalid_argument("no channel between nodes");
  int dir = (cm.reciprocal || i < j) ? 0 : 1;
  return st.g[(p * 2 + dir) * cm.tones + f];
}

inline double noise_power(const ChannelModel& cm, int j) {
  return cm.noise.at(j);
}

namespace detail {

inline double draw_gain(const ChannelModel& cm, double mean_gain,
                        SequentialRng& rng) {
  switch (cm.kind) {
    case FadeKind::Exponential:
      return rng.exponential(mean_gain);
    case FadeKind::Rician: {
      const double k = cm.rician_k;
      const double z1 = rng.normal(), z2 = rng.normal();
      const double s = std::sqrt(2.0 * k) + z1;
      return mean_gain / (2.0 * (k + 1.0)) * (s * s + z2 * z2);
    }
    case FadeKind::NakagamiM:
      return rng.gamma(cm.nakagami_m, mean_gain / cm.nakagami_m);
    case FadeKind::Table: {
      const double u = rng.uniform();
      auto it = std::upper_bound(cm.table_cum.begin(), cm.table_cum.end(), u);
      std::size_t k = std::min<std::size_t>(it - cm.table_cum.begin(),
                                            cm.table_atoms.size() - 1);
      return mean_gain * cm.table_atoms[k];
    }
  }
  return 0.0;
}

}  // namespace detail

// Draw the slot's gains. i.i.d. across slots; the draw is a pure function of
// (seed, stream, slot), so identical seeds replay identical sequences. A
// Replay model ignores the rng inputs and serves its recorded states
// cyclically by slot index.
inline ChannelState sample(const ChannelModel& cm, std::uint64_t seed,
                           RngStream stream, std::uint64_t slot) {
  ChannelState st;
  st.slot = slot;
  if (cm.kind == FadeKind::Replay) {
    const std::uint64_t idx = (slot - 1) % cm.replay_slots;
    st.g.assign(cm.replay.begin() + idx * cm.mean.size(),
                cm.replay.begin() + (idx + 1) * cm.mean.size());
    return st;
  }
  st.g.assign(cm.mean.size(), 0.0);
  const int dirs = cm.reciprocal ? 1 : 2;
  for (int p = 0; p < cm.n_pairs(); ++p) {
    for (int d = 0; d < dirs; ++d) {
      for (int f = 0; f < cm.tones; ++f) {
        SequentialRng rng(seed, stream, slot,
                          static_cast<std::uint64_t>(p * 2 + d), f);
        double g = detail::draw_gain(cm, cm.mean[(p * 2 + d) * cm.tones + f], rng);
        st.g[(p * 2 + d) * cm.tones + f] = g;
        if (cm.reciprocal) st.g[(p * 2 + 1) * cm.tones + f] = g;
      }
    }
  }
  return st;
}

// Record sampled fading states to CSV (slot,i,j,f,gain with external node
// ids) so a run's channel can be replayed via the "replay" distribution.
inline void write_channel_trace(const std::string& path,
                                const NetworkModel& mdl, const ChannelModel& cm,
                                std::uint64_t seed, RngStream stream,
                                std::uint64_t first_slot,
                                std::uint64_t n_slots) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write channel trace: " + path);
  out << "slot,i,j,f,gain\n";
  char buf[48];
  for (std::uint64_t s = 0; s < n_slots; ++s) {
    ChannelState st = sample(cm, seed, stream, first_slot + s);
    for (int p = 0; p < cm.n_pairs(); ++p) {
      const auto [a, b] = cm.pairs[p];
      for (int f = 0; f < cm.tones; ++f) {
        std::snprintf(buf, sizeof buf, "%.17g",
                      st.g[(p * 2 + 0) * cm.tones + f]);
        out << (first_slot + s) << ',' << mdl.node_ids[a] << ','
            << mdl.node_ids[b] << ',' << f << ',' << buf << '\n';
        std::snprintf(buf, sizeof buf, "%.17g",
                      st.g[(p * 2 + 1) * cm.tones + f]);
        out << (first_slot + s) << ',' << mdl.node_ids[b] << ','
            << mdl.node_ids[a] << ',' << f << ',' << buf << '\n';
      }
    }
  }
}

// Load a recorded trace into a Replay channel model. cm must already carry
// the pair list and tone count; means become the empirical averages.
inline void load_channel_replay(const std::string& path,
                                const NetworkModel& mdl, ChannelModel& cm) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open channel trace: " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("slot,i,j,f,gain", 0) != 0)
    throw std::runtime_error("channel trace: bad header in " + path);
  const std::size_t stride = cm.mean.size();
  std::vector<double> table;
  std::vector<std::uint64_t> slots;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    unsigned long long slot;
    long long i, j;
    int f;
    double g;
    if (std::sscanf(line.c_str(), "%llu,%lld,%lld,%d,%lf", &slot, &i, &j, &f,
                    &g) != 5)
      throw std::runtime_error("channel trace: malformed row: " + line);
    const int ii = mdl.node_index(i), jj = mdl.node_index(j);
    const int p = cm.pair_index(ii, jj);
    if (p < 0) throw std::runtime_error("channel trace: unknown link in row");
    if (slots.empty() || slots.back() != slot) {
      slots.push_back(slot);
      table.resize(slots.size() * stride, 0.0);
    }
    const int dir = (cm.reciprocal || ii < jj) ? 0 : 1;
    table[(slots.size() - 1) * stride + (p * 2 + dir) * cm.tones + f] = g;
    if (cm.reciprocal)
      table[(slots.size() - 1) * stride + (p * 2 + 1) * cm.tones + f] = g;
  }
  if (slots.empty()) throw std::runtime_error("channel trace: no rows");
  cm.kind = FadeKind::Replay;
  cm.replay_slots = slots.size();
  cm.replay = std::move(table);
  for (std::size_t k = 0; k < stride; ++k) {
    double sum = 0.0;
    for (std::uint64_t s = 0; s < cm.replay_slots; ++s)
      sum += cm.replay[s * stride + k];
    cm.mean[k] = sum / static_cast<double>(cm.replay_slots);
  }
}

// High quantile of the per-link gain, used for almost-sure capacity bounds.
// delta defaults to 2^-60: the chance any sample in a desk-scale run exceeds
// the cap is negligible. Exact for custom tables.
inline double gain_high_quantile(const ChannelModel& cm, double mean_gain,
                                 double log_inv_delta = 60.0 * 0.6931471805599453) {
  switch (cm.kind) {
    case FadeKind::Exponential:
      return mean_gain * log_inv_delta;
    case FadeKind::Rician: {
      const double k = cm.rician_k;
      const double s = std::sqrt(k) + std::sqrt(log_inv_delta);
      return mean_gain / (k + 1.0) * s * s;
    }
    case FadeKind::NakagamiM: {
      const double m = cm.nakagami_m;
      const double theta = mean_gain / m;
      return theta * (m + log_inv_delta + 2.0 * std::sqrt(m * log_inv_delta));
    }
    case FadeKind::Table: {
      double hi = 0.0;
      for (double a : cm.table_atoms) hi = std::max(hi, a);
      return mean_gain * hi;
    }
    case FadeKind::Replay: {
      double hi = 0.0;
      for (double g : cm.replay) hi = std::max(hi, g);
      return hi;
    }
  }
  return mean_gain;
}

}  // namespace codednet
