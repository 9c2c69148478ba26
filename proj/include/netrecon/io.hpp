#ifndef NETRECON_IO_HPP
#define NETRECON_IO_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netrecon/state.hpp"
#include "netrecon/synth.hpp"
#include "netrecon/types.hpp"

namespace netrecon {

// Opaque survey labels mapped to dense indices in first-appearance order.
struct LabelMap {
  std::vector<std::string> labels;
  std::map<std::string, NodeId> index;

  NodeId get_or_add(const std::string& s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    NodeId id = static_cast<NodeId>(labels.size());
    labels.push_back(s);
    index.emplace(s, id);
    return id;
  }
  std::optional<NodeId> find(const std::string& s) const {
    auto it = index.find(s);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
  std::size_t size() const { return labels.size(); }
};

struct IngestedReports {
  LabelMap labels;  // shared node/reporter space (reporters are roster members)
  std::vector<std::string> tie_types;  // first-appearance order
  std::vector<ReportTensor> tensors;   // parallel to tie_types
};

// Reads `ego,alter,reporter,tie_type[,weight]` (RFC-4180 quoting, UTF-8).
// With a roster file (one label per line, optional `label` header) the index
// mapping is fixed up front; otherwise labels index in first-appearance
// order. One tensor per tie type; rows are validated against the mask with
// their line numbers.
IngestedReports ingest_reports(
    const std::filesystem::path& csv, const ReporterMask& mask,
    const std::optional<std::filesystem::path>& roster = {});

void write_reports_csv(const std::filesystem::path& path, const ReportTensor& x,
                       const LabelMap& labels, const std::string& tie_type);
void write_roster_csv(const std::filesystem::path& path, const LabelMap& labels);
void write_network_csv(const std::filesystem::path& path, const BinaryNetwork& net,
                       const LabelMap& labels);
BinaryNetwork read_network_csv(const std::filesystem::path& path,
                               const LabelMap& labels);

// Shortest round-trip decimal formatting; all CSV/JSON reals go through this.
std::string format_double(double v);

struct RunConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> roster;
  std::filesystem::path output_dir;
  MaskRule mask_rule = MaskRule::SelfDyads;
  std::optional<std::filesystem::path> custom_mask;  // ego,alter,reporter rows
  FitConfig fit;
  HyperParams hyper;
  bool two_step = false;
  std::optional<double> threshold_override;
  bool emit_rho = true;
  bool emit_theta = true;
  bool emit_elbo = true;
  bool emit_summary = true;
  bool emit_baselines = true;
};

// 64-bit FNV-1a over the canonical serialization of the semantically
// meaningful fields (everything except file locations).
std::string config_hash(const RunConfig& config);

// Fits every tie type in the input and writes the artifact set:
// rho.csv, theta.csv, eta.json, elbo.csv, summary.csv, manifest.json under
// output_dir/<tie_type>/. Returns 0 on success, 2 when any fit hit the
// iteration cap without converging, 1 on error (message to stderr).
int run(const RunConfig& config);

// Generates a benchmark instance and writes reports.csv, ground_truth.csv,
// theta_true.csv, nodes.csv and synth_config.json into out_dir.
int synth_cmd(const SynthConfig& cfg, const std::filesystem::path& out_dir);

// Compares an estimated network (edge list or rho.csv + threshold) against a
// ground-truth edge list; writes metrics.json and summary.csv.
struct EvalConfig {
  std::filesystem::path network;       // i,j edge list
  std::filesystem::path truth;         // i,j[,y] edge list
  std::filesystem::path roster;        // fixes N and the label space
  std::optional<std::filesystem::path> theta_est;   // theta.csv
  std::optional<std::filesystem::path> theta_true;  // reporter,value
  std::filesystem::path output_dir;
};
int eval_cmd(const EvalConfig& cfg);

// Independent fits over every *.csv in input_dir (one village per file),
// sharing one configuration; per-village artifacts plus a combined
// batch_summary.csv. jobs > 1 runs villages on worker threads.
int batch_cmd(const RunConfig& base, const std::filesystem::path& input_dir,
              std::size_t jobs = 1);

}  // namespace netrecon

#endif
