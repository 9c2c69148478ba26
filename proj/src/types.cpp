#include "netrecon/types.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace netrecon {

ReportTensor build_report_tensor(std::span<const ReportRecord> records,
                                 NodeId n_nodes, ReporterId n_reporters,
                                 const ReporterMask& mask) {
  BoundMask bound(mask, n_nodes, n_reporters);
  std::map<std::tuple<NodeId, NodeId, ReporterId>, Count> acc;
  for (const ReportRecord& r : records) {
    if (r.ego >= n_nodes || r.alter >= n_nodes) {
      std::ostringstream os;
      os << "node index out of range in record (" << r.ego << ", " << r.alter
         << ", " << r.reporter << ")";
      fail(ErrorCode::IndexOutOfRange, os.str());
    }
    if (r.reporter >= n_reporters)
      fail(ErrorCode::IndexOutOfRange, "reporter index out of range");
    if (r.ego == r.alter) {
      std::ostringstream os;
      os << "self-loop record on node " << r.ego;
      fail(ErrorCode::SelfLoop, os.str());
    }
    if (!bound.contains(r.ego, r.alter, r.reporter)) {
      std::ostringstream os;
      os << "record (" << r.ego << ", " << r.alter << ", " << r.reporter
         << ") outside reporter eligibility";
      fail(ErrorCode::MaskViolation, os.str());
    }
    if (r.weight == 0) continue;
    acc[{r.ego, r.alter, r.reporter}] += r.weight;
  }
  std::vector<ReportEntry> entries;
  entries.reserve(acc.size());
  for (const auto& [key, x] : acc)
    entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), x});
  return ReportTensor(n_nodes, n_reporters, std::move(entries));
}

namespace {

std::vector<double> broadcast(const std::vector<double>& v, std::size_t n,
                              const char* name) {
  if (v.size() == n) return v;
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  std::ostringstream os;
  os << name << " must have length 1 or " << n << ", got " << v.size();
  fail(ErrorCode::ShapeMismatch, os.str());
}

void check_positive(std::span<const double> v, const char* name) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) {
      std::ostringstream os;
      os << name << " must be strictly positive and finite";
      fail(ErrorCode::NonPositiveParameter, os.str());
    }
}

void check_simplex(std::span<const double> p, const char* name) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0))
      fail(ErrorCode::SimplexViolation, std::string(name) + " has negative mass");
    total += x;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << name << " must sum to 1, sums to " << total;
    fail(ErrorCode::SimplexViolation, os.str());
  }
}

}  // namespace

HyperParams validate_hyperparams(const HyperParams& h, std::size_t n_levels,
                                 NodeId n_nodes, ReporterId n_reporters) {
  (void)n_nodes;
  if (n_levels == 0) fail(ErrorCode::UnsupportedK, "need at least one level");
  HyperParams out;
  out.alpha = broadcast(h.alpha, n_reporters, "alpha");
  out.beta = broadcast(h.beta, n_reporters, "beta");
  out.a = broadcast(h.a, n_levels, "a");
  out.b = broadcast(h.b, n_levels, "b");
  out.c = h.c;
  out.d = h.d;
  check_positive(out.alpha, "alpha");
  check_positive(out.beta, "beta");
  check_positive(out.a, "a");
  check_positive(out.b, "b");
  const double cd[] = {out.c, out.d};
  check_positive(cd, "c/d");
  if (h.p.empty()) {
    out.p.assign(n_levels, 1.0 / static_cast<double>(n_levels));
  } else {
    if (h.p.size() != n_levels)
      fail(ErrorCode::ShapeMismatch, "dyad prior p has wrong length");
    out.p = h.p;
    check_simplex(out.p, "p");
  }
  out.p_overrides = h.p_overrides;
  std::sort(out.p_overrides.begin(), out.p_overrides.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [dyad, p] : out.p_overrides) {
    if (dyad.i == dyad.j) fail(ErrorCode::SelfLoop, "prior override on diagonal");
    if (p.size() != n_levels)
      fail(ErrorCode::ShapeMismatch, "prior override has wrong length");
    check_simplex(p, "p override");
  }
  return out;
}

}  // namespace netrecon
