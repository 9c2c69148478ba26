#ifndef NETRECON_TYPES_HPP
#define NETRECON_TYPES_HPP

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netrecon/errors.hpp"

namespace netrecon {

using NodeId = std::uint32_t;
using ReporterId = std::uint32_t;
using Count = std::uint64_t;

struct Dyad {
  NodeId i = 0;
  NodeId j = 0;
  auto operator<=>(const Dyad&) const = default;
};

// One stored report: reporter m asserts the tie i -> j with count x >= 1.
struct ReportEntry {
  NodeId i = 0;
  NodeId j = 0;
  ReporterId m = 0;
  Count x = 0;
  auto operator<=>(const ReportEntry&) const = default;
};

struct MaskEntry {
  NodeId i = 0;
  NodeId j = 0;
  ReporterId m = 0;
  auto operator<=>(const MaskEntry&) const = default;
};

enum class MaskRule { SelfDyads, FullRoster, Custom };

// Which (i, j, m) triples the survey design made eligible.
//   SelfDyads:  m reports only ties involving m, i.e. m in {i, j}.
//   FullRoster: every reporter is eligible on every ordered dyad.
//   Custom:     exactly the provided triples.
struct ReporterMask {
  MaskRule rule = MaskRule::SelfDyads;
  std::vector<MaskEntry> custom_entries;  // used only when rule == Custom

  static ReporterMask self_dyads() { return {MaskRule::SelfDyads, {}}; }
  static ReporterMask full_roster() { return {MaskRule::FullRoster, {}}; }
  static ReporterMask custom(std::vector<MaskEntry> entries) {
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    return {MaskRule::Custom, std::move(entries)};
  }
};

// ReporterMask bound to concrete dimensions; precomputes the per-dyad
// grouping for custom masks so eligibility queries are cheap.
class BoundMask {
 public:
  BoundMask(const ReporterMask& mask, NodeId n_nodes, ReporterId n_reporters)
      : rule_(mask.rule), n_(n_nodes), m_(n_reporters) {
    if (rule_ == MaskRule::Custom) {
      custom_ = mask.custom_entries;
      std::sort(custom_.begin(), custom_.end());
      for (const auto& e : custom_) {
        if (e.i >= n_ || e.j >= n_)
          fail(ErrorCode::IndexOutOfRange, "mask node index out of range");
        if (e.m >= m_)
          fail(ErrorCode::IndexOutOfRange, "mask reporter index out of range");
        if (e.i == e.j) fail(ErrorCode::SelfLoop, "mask entry on the diagonal");
        if (dyads_.empty() || dyads_.back() != Dyad{e.i, e.j}) {
          dyads_.push_back({e.i, e.j});
          offsets_.push_back(&e - custom_.data());
        }
      }
      offsets_.push_back(custom_.size());
    }
  }

  MaskRule rule() const { return rule_; }
  NodeId n_nodes() const { return n_; }
  ReporterId n_reporters() const { return m_; }

  bool contains(NodeId i, NodeId j, ReporterId m) const {
    if (i == j || i >= n_ || j >= n_ || m >= m_) return false;
    switch (rule_) {
      case MaskRule::SelfDyads:
        return m == i || m == j;
      case MaskRule::FullRoster:
        return true;
      case MaskRule::Custom: {
        MaskEntry key{i, j, m};
        return std::binary_search(custom_.begin(), custom_.end(), key);
      }
    }
    return false;
  }

  std::size_t n_eligible(NodeId i, NodeId j) const {
    if (i == j || i >= n_ || j >= n_) return 0;
    switch (rule_) {
      case MaskRule::SelfDyads:
        return (i < m_ ? 1u : 0u) + (j < m_ ? 1u : 0u);
      case MaskRule::FullRoster:
        return m_;
      case MaskRule::Custom: {
        auto idx = dyad_index(i, j);
        return idx ? offsets_[*idx + 1] - offsets_[*idx] : 0;
      }
    }
    return 0;
  }

  // Sum of values[m] over reporters eligible on (i, j).
  double eligible_sum(NodeId i, NodeId j, std::span<const double> values) const {
    switch (rule_) {
      case MaskRule::SelfDyads: {
        double s = 0.0;
        if (i < m_) s += values[i];
        if (j < m_) s += values[j];
        return s;
      }
      case MaskRule::FullRoster: {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
      }
      case MaskRule::Custom: {
        auto idx = dyad_index(i, j);
        if (!idx) return 0.0;
        double s = 0.0;
        for (std::size_t t = offsets_[*idx]; t < offsets_[*idx + 1]; ++t)
          s += values[custom_[t].m];
        return s;
      }
    }
    return 0.0;
  }

  template <class F>
  void for_each_eligible_reporter(NodeId i, NodeId j, F&& f) const {
    switch (rule_) {
      case MaskRule::SelfDyads:
        if (i < m_) f(static_cast<ReporterId>(i));
        if (j < m_ && j != i) f(static_cast<ReporterId>(j));
        return;
      case MaskRule::FullRoster:
        for (ReporterId m = 0; m < m_; ++m) f(m);
        return;
      case MaskRule::Custom: {
        auto idx = dyad_index(i, j);
        if (!idx) return;
        for (std::size_t t = offsets_[*idx]; t < offsets_[*idx + 1]; ++t)
          f(custom_[t].m);
        return;
      }
    }
  }

  // Enumerates every ordered dyad with at least one eligible reporter.
  template <class F>
  void for_each_masked_dyad(F&& f) const {
    switch (rule_) {
      case MaskRule::SelfDyads:
        if (m_ == 0) return;
        for (NodeId i = 0; i < n_; ++i)
          for (NodeId j = 0; j < n_; ++j) {
            if (i == j) continue;
            if (i < m_ || j < m_) f(i, j);
          }
        return;
      case MaskRule::FullRoster:
        if (m_ == 0) return;
        for (NodeId i = 0; i < n_; ++i)
          for (NodeId j = 0; j < n_; ++j)
            if (i != j) f(i, j);
        return;
      case MaskRule::Custom:
        for (const Dyad& d : dyads_) f(d.i, d.j);
        return;
    }
  }

  std::size_t masked_dyad_count() const {
    switch (rule_) {
      case MaskRule::SelfDyads: {
        if (m_ == 0) return 0;
        if (m_ >= n_) return static_cast<std::size_t>(n_) * (n_ - 1);
        // pairs with at least one endpoint below m_
        std::size_t all = static_cast<std::size_t>(n_) * (n_ - 1);
        std::size_t far = static_cast<std::size_t>(n_ - m_) * (n_ - m_ - 1);
        return all - far;
      }
      case MaskRule::FullRoster:
        return m_ == 0 ? 0 : static_cast<std::size_t>(n_) * (n_ - 1);
      case MaskRule::Custom:
        return dyads_.size();
    }
    return 0;
  }

 private:
  std::optional<std::size_t> dyad_index(NodeId i, NodeId j) const {
    auto it = std::lower_bound(dyads_.begin(), dyads_.end(), Dyad{i, j});
    if (it == dyads_.end() || *it != Dyad{i, j}) return std::nullopt;
    return static_cast<std::size_t>(it - dyads_.begin());
  }

  MaskRule rule_;
  NodeId n_;
  ReporterId m_;
  std::vector<MaskEntry> custom_;   // sorted
  std::vector<Dyad> dyads_;         // sorted unique dyads (Custom only)
  std::vector<std::size_t> offsets_;  // CSR offsets into custom_
};

struct ReportRecord {
  NodeId ego = 0;
  NodeId alter = 0;
  ReporterId reporter = 0;
  Count weight = 1;
};

// Sparse report tensor X. Entries hold only positive counts, sorted by
// (i, j, m); absent keys mean X_ijm = 0.
class ReportTensor {
 public:
  ReportTensor(NodeId n_nodes, ReporterId n_reporters,
               std::vector<ReportEntry> entries)
      : n_(n_nodes), m_(n_reporters), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
  }

  NodeId n_nodes() const { return n_; }
  ReporterId n_reporters() const { return m_; }
  std::span<const ReportEntry> entries() const { return entries_; }

  Count count(NodeId i, NodeId j, ReporterId m) const {
    ReportEntry key{i, j, m, 0};
    auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                               [](const ReportEntry& a, const ReportEntry& b) {
                                 return std::tie(a.i, a.j, a.m) <
                                        std::tie(b.i, b.j, b.m);
                               });
    if (it == entries_.end() || it->i != i || it->j != j || it->m != m) return 0;
    return it->x;
  }

  // [begin, end) of entries on the ordered dyad (i, j).
  std::pair<std::size_t, std::size_t> dyad_range(NodeId i, NodeId j) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(),
                               ReportEntry{i, j, 0, 0},
                               [](const ReportEntry& a, const ReportEntry& b) {
                                 return std::tie(a.i, a.j, a.m) <
                                        std::tie(b.i, b.j, b.m);
                               });
    auto hi = lo;
    while (hi != entries_.end() && hi->i == i && hi->j == j) ++hi;
    return {static_cast<std::size_t>(lo - entries_.begin()),
            static_cast<std::size_t>(hi - entries_.begin())};
  }

  bool operator==(const ReportTensor& other) const {
    return n_ == other.n_ && m_ == other.m_ && entries_ == other.entries_;
  }

 private:
  NodeId n_;
  ReporterId m_;
  std::vector<ReportEntry> entries_;
};

// Validates records against the mask, sums duplicates, drops zero weights.
ReportTensor build_report_tensor(std::span<const ReportRecord> records,
                                 NodeId n_nodes, ReporterId n_reporters,
                                 const ReporterMask& mask);

// Priors. Per-entity vectors may be given as a single scalar value; validation
// broadcasts them to full length.
struct HyperParams {
  std::vector<double> alpha{1.0};  // theta prior shape, per reporter
  std::vector<double> beta{1.0};   // theta prior rate, per reporter
  std::vector<double> a{1.0};      // lambda prior shape, per level
  std::vector<double> b{1.0};      // lambda prior rate, per level
  double c = 1.0;                  // eta prior shape
  double d = 1.0;                  // eta prior rate
  std::vector<double> p;           // shared dyad prior over levels; empty = uniform
  // sparse per-dyad prior overrides, sorted by dyad
  std::vector<std::pair<Dyad, std::vector<double>>> p_overrides;

  bool operator==(const HyperParams&) const = default;
};

// Broadcasts scalars, checks positivity and the simplex constraints.
HyperParams validate_hyperparams(const HyperParams& h, std::size_t n_levels,
                                 NodeId n_nodes, ReporterId n_reporters);

// Directed binary network as a sorted edge list.
struct BinaryNetwork {
  NodeId n_nodes = 0;
  std::vector<Dyad> edges;  // sorted, no diagonal

  void normalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }
  bool has_edge(NodeId i, NodeId j) const {
    return std::binary_search(edges.begin(), edges.end(), Dyad{i, j});
  }
  std::size_t n_edges() const { return edges.size(); }
  bool operator==(const BinaryNetwork&) const = default;
};

// Planted configuration for synthetic benchmarks.
struct GroundTruth {
  NodeId n_nodes = 0;
  BinaryNetwork y;                    // binary latent network (K = 2)
  std::vector<double> theta;          // per-reporter reliability
  std::vector<double> lambda;         // per-level rates, ascending levels
  double eta = 0.0;                   // mutuality, in [0, 1)
  std::vector<int> communities;       // optional, empty if not planted
  // scenarios with tagged over/under-reporters generate reliable reporters'
  // entries deterministically
  bool deterministic_reliable = false;

  void check() const {
    if (!(eta >= 0.0 && eta < 1.0))
      fail(ErrorCode::InvalidProbability, "eta must lie in [0, 1)");
    for (const Dyad& e : y.edges)
      if (e.i == e.j) fail(ErrorCode::SelfLoop, "diagonal entry in ground truth");
  }
};

}  // namespace netrecon

#endif
