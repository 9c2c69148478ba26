#include "netrecon/io.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "netrecon/eval.hpp"
#include "netrecon/serialize.hpp"
#include "netrecon/vi.hpp"

namespace netrecon {

namespace fs = std::filesystem;

std::string format_double(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

namespace {

// RFC-4180 field splitting with quote escapes; tolerates trailing CR.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t t = 0; t < line.size(); ++t) {
    const char ch = line[t];
    if (quoted) {
      if (ch == '"') {
        if (t + 1 < line.size() && line[t + 1] == '"') {
          cur.push_back('"');
          ++t;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch == '\r' && t + 1 == line.size()) {
      // CRLF line ending
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Count parse_weight(const std::string& s, std::size_t row) {
  if (!s.empty() && s[0] == '-') {
    std::ostringstream os;
    os << "row " << row << ": negative weight '" << s << "'";
    fail(ErrorCode::NegativeWeight, os.str());
  }
  Count v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    std::ostringstream os;
    os << "row " << row << ": weight '" << s << "' is not a non-negative integer";
    fail(ErrorCode::NegativeWeight, os.str());
  }
  return v;
}

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream create_text(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings everywhere
  if (!out) fail(ErrorCode::IoError, "cannot create " + path.string());
  return out;
}

}  // namespace

IngestedReports ingest_reports(const fs::path& csv, const ReporterMask& mask,
                               const std::optional<fs::path>& roster) {
  IngestedReports out;
  if (roster) {
    std::ifstream in = open_text(*roster);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      auto fields = split_csv_line(line);
      if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
      if (first && fields[0] == "label") {
        first = false;
        continue;
      }
      first = false;
      out.labels.get_or_add(fields[0]);
    }
  }

  std::ifstream in = open_text(csv);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::MalformedHeader, csv.string() + ": empty file");
  auto header = split_csv_line(line);
  bool has_weight = false;
  if (header == std::vector<std::string>{"ego", "alter", "reporter", "tie_type",
                                         "weight"}) {
    has_weight = true;
  } else if (header ==
             std::vector<std::string>{"ego", "alter", "reporter", "tie_type"}) {
    has_weight = false;
  } else {
    fail(ErrorCode::MalformedHeader,
         csv.string() +
             ": header must be exactly 'ego,alter,reporter,tie_type[,weight]'");
  }

  struct RawRecord {
    ReportRecord rec;
    std::size_t row;
  };
  std::vector<std::vector<RawRecord>> layers;
  const bool fixed_roster = roster.has_value();
  auto resolve = [&](const std::string& label, std::size_t row) -> NodeId {
    if (!fixed_roster) return out.labels.get_or_add(label);
    auto id = out.labels.find(label);
    if (!id) {
      std::ostringstream os;
      os << "row " << row << ": label '" << label << "' not in roster";
      fail(ErrorCode::IndexOutOfRange, os.str());
    }
    return *id;
  };

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << "row " << row << ": expected " << header.size() << " fields, got "
         << fields.size();
      fail(ErrorCode::MalformedHeader, os.str());
    }
    ReportRecord rec;
    rec.ego = resolve(fields[0], row);
    rec.alter = resolve(fields[1], row);
    rec.reporter = resolve(fields[2], row);
    rec.weight = has_weight ? parse_weight(fields[4], row) : 1;
    if (rec.ego == rec.alter) {
      std::ostringstream os;
      os << "row " << row << ": self-loop on '" << fields[0] << "'";
      fail(ErrorCode::SelfLoop, os.str());
    }
    const std::string& tie = fields[3];
    auto it = std::find(out.tie_types.begin(), out.tie_types.end(), tie);
    std::size_t layer;
    if (it == out.tie_types.end()) {
      layer = out.tie_types.size();
      out.tie_types.push_back(tie);
      layers.emplace_back();
    } else {
      layer = static_cast<std::size_t>(it - out.tie_types.begin());
    }
    layers[layer].push_back({rec, row});
  }

  const NodeId n = static_cast<NodeId>(out.labels.size());
  const BoundMask bound(mask, n, n);  // reporters share the roster space
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<ReportRecord> records;
    records.reserve(layers[l].size());
    for (const RawRecord& r : layers[l]) {
      if (!bound.contains(r.rec.ego, r.rec.alter, r.rec.reporter)) {
        std::ostringstream os;
        os << "row " << r.row << ": reporter '" << out.labels.labels[r.rec.reporter]
           << "' is not eligible for tie '" << out.labels.labels[r.rec.ego]
           << "' -> '" << out.labels.labels[r.rec.alter] << "'";
        fail(ErrorCode::MaskViolation, os.str());
      }
      records.push_back(r.rec);
    }
    out.tensors.push_back(build_report_tensor(records, n, n, mask));
  }
  return out;
}

void write_reports_csv(const fs::path& path, const ReportTensor& x,
                       const LabelMap& labels, const std::string& tie_type) {
  std::ofstream outf = create_text(path);
  outf << "ego,alter,reporter,tie_type,weight\n";
  for (const ReportEntry& e : x.entries())
    outf << csv_quote(labels.labels[e.i]) << ',' << csv_quote(labels.labels[e.j])
         << ',' << csv_quote(labels.labels[e.m]) << ',' << csv_quote(tie_type)
         << ',' << e.x << '\n';
}

void write_roster_csv(const fs::path& path, const LabelMap& labels) {
  std::ofstream outf = create_text(path);
  outf << "label\n";
  for (const std::string& s : labels.labels) outf << csv_quote(s) << '\n';
}

void write_network_csv(const fs::path& path, const BinaryNetwork& net,
                       const LabelMap& labels) {
  std::ofstream outf = create_text(path);
  outf << "i,j\n";
  for (const Dyad& e : net.edges)
    outf << csv_quote(labels.labels[e.i]) << ',' << csv_quote(labels.labels[e.j])
         << '\n';
}

BinaryNetwork read_network_csv(const fs::path& path, const LabelMap& labels) {
  std::ifstream in = open_text(path);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::MalformedHeader, path.string() + ": empty file");
  auto header = split_csv_line(line);
  const bool has_y = header.size() == 3;
  if (!(header.size() == 2 || has_y))
    fail(ErrorCode::MalformedHeader, path.string() + ": expected i,j[,y] header");
  BinaryNetwork net;
  net.n_nodes = static_cast<NodeId>(labels.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (has_y && fields.at(2) == "0") continue;
    auto i = labels.find(fields.at(0));
    auto j = labels.find(fields.at(1));
    if (!i || !j) {
      std::ostringstream os;
      os << path.string() << " row " << row << ": unknown label";
      fail(ErrorCode::IndexOutOfRange, os.str());
    }
    net.edges.push_back({*i, *j});
  }
  net.normalize();
  return net;
}

std::string config_hash(const RunConfig& config) {
  json j{{"mask_rule", config.mask_rule},
         {"n_levels", config.fit.n_levels},
         {"seed", config.fit.seed},
         {"max_iterations", config.fit.max_iterations},
         {"elbo_rel_tol", config.fit.elbo_rel_tol},
         {"elbo_check_every", config.fit.elbo_check_every},
         {"init_offset_scale", config.fit.init_offset_scale},
         {"monotonicity_tol", config.fit.monotonicity_tol},
         {"two_step_scale", config.fit.two_step_scale},
         {"hyper", config.hyper},
         {"two_step", config.two_step},
         {"emit",
          json::array({config.emit_rho, config.emit_theta, config.emit_elbo,
                       config.emit_summary, config.emit_baselines})}};
  if (config.threshold_override) j["threshold_override"] = *config.threshold_override;
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace {

void write_summary_rows(std::ofstream& outf, const std::string& name,
                        const NetworkSummary& s) {
  outf << csv_quote(name) << ',' << s.n_edges << ','
       << format_double(s.mean_degree) << ',' << format_double(s.degree_std)
       << ',' << format_double(s.transitivity) << ','
       << format_double(s.reciprocity) << ',' << format_double(s.density)
       << '\n';
}

ReporterMask load_mask(const RunConfig& config, const LabelMap& labels) {
  if (config.mask_rule != MaskRule::Custom) return ReporterMask{config.mask_rule, {}};
  if (!config.custom_mask)
    fail(ErrorCode::InvalidConfig, "custom mask rule needs a mask file");
  std::ifstream in = open_text(*config.custom_mask);
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::MalformedHeader, "empty mask file");
  if (split_csv_line(line) != std::vector<std::string>{"ego", "alter", "reporter"})
    fail(ErrorCode::MalformedHeader, "mask header must be ego,alter,reporter");
  std::vector<MaskEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    auto i = labels.find(fields.at(0));
    auto j = labels.find(fields.at(1));
    auto m = labels.find(fields.at(2));
    if (!i || !j || !m)
      fail(ErrorCode::IndexOutOfRange, "mask label not present in reports/roster");
    entries.push_back({*i, *j, *m});
  }
  return ReporterMask::custom(std::move(entries));
}

struct TieFitOutput {
  FitResult result;
  BinaryNetwork point;
  bool emitted = false;
};

// Artifacts for one tie type under dir; returns the fit for summary purposes.
TieFitOutput run_one_tie(const RunConfig& config, const ReporterMask& mask,
                         const ReportTensor& x, const LabelMap& labels,
                         const fs::path& dir) {
  fs::create_directories(dir);
  TieFitOutput out;
  out.result = config.two_step ? two_step_fit(x, mask, config.hyper, config.fit)
                               : fit(x, mask, config.hyper, config.fit);
  const BoundMask bound(mask, x.n_nodes(), x.n_reporters());
  out.point = point_estimate(out.result.state, bound, config.threshold_override);

  const VariationalState& state = out.result.state;
  if (config.emit_theta) {
    std::ofstream f = create_text(dir / "theta.csv");
    f << "reporter,shape,rate,mean\n";
    for (std::size_t m = 0; m < state.gamma_shape.size(); ++m)
      f << csv_quote(labels.labels[m]) << ',' << format_double(state.gamma_shape[m])
        << ',' << format_double(state.gamma_rate[m]) << ','
        << format_double(state.gamma_shape[m] / state.gamma_rate[m]) << '\n';
  }
  if (config.emit_rho) {
    std::ofstream f = create_text(dir / "rho.csv");
    f << "i,j,k,probability\n";
    std::vector<double> row(state.n_levels());
    for (NodeId i = 0; i < x.n_nodes(); ++i)
      for (NodeId j = 0; j < x.n_nodes(); ++j) {
        if (i == j || bound.n_eligible(i, j) == 0) continue;
        state.rho.row(i, j, bound, row);
        for (std::size_t k = 0; k < row.size(); ++k)
          f << csv_quote(labels.labels[i]) << ',' << csv_quote(labels.labels[j])
            << ',' << k << ',' << format_double(row[k]) << '\n';
      }
  }
  if (config.emit_elbo) {
    std::ofstream f = create_text(dir / "elbo.csv");
    f << "iteration,elbo\n";
    for (std::size_t t = 0; t < out.result.elbo_trace.size(); ++t)
      f << (t + 1) * config.fit.elbo_check_every << ','
        << format_double(out.result.elbo_trace[t]) << '\n';
  }
  {
    std::ofstream f = create_text(dir / "eta.json");
    json j{{"shape", state.nu_shape},
           {"rate", state.nu_rate},
           {"mean", out.result.eta_est},
           {"threshold", point_estimate_threshold(out.result.eta_est)}};
    f << j.dump(2) << '\n';
  }
  write_network_csv(dir / "network.csv", out.point, labels);
  if (config.emit_summary) {
    std::ofstream f = create_text(dir / "summary.csv");
    f << "network,n_edges,mean_degree,degree_std,transitivity,reciprocity,density\n";
    write_summary_rows(f, "model", network_summary(out.point));
    if (config.emit_baselines) {
      write_summary_rows(f, "union", network_summary(union_baseline(x, bound)));
      write_summary_rows(f, "intersection",
                         network_summary(intersection_baseline(x, bound)));
    }
    if (bound.rule() == MaskRule::SelfDyads) {
      // raw question layers of the double-sampled design
      BinaryNetwork give{x.n_nodes(), {}}, receive{x.n_nodes(), {}};
      for (const ReportEntry& e : x.entries()) {
        if (e.m == e.i) give.edges.push_back({e.i, e.j});
        if (e.m == e.j) receive.edges.push_back({e.i, e.j});
      }
      give.normalize();
      receive.normalize();
      write_summary_rows(f, "give", network_summary(give));
      write_summary_rows(f, "receive", network_summary(receive));
    }
  }
  if (!out.result.warnings.empty()) {
    std::ofstream f = create_text(dir / "warnings.txt");
    for (const std::string& w : out.result.warnings) f << w << '\n';
  }
  out.emitted = true;
  return out;
}

void write_manifest(const RunConfig& config, const fs::path& dir) {
  json j{{"seed", config.fit.seed},
         {"config_hash", config_hash(config)},
         {"versions", json{{"netrecon", "0.1.0"}, {"artifact_format", 1}}},
         {"created_at",
          static_cast<std::int64_t>(
              std::chrono::duration_cast<std::chrono::seconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count())}};
  std::ofstream f = create_text(dir / "manifest.json");
  f << j.dump(2) << '\n';
}

}  // namespace

int run(const RunConfig& config) {
  try {
    IngestedReports data = ingest_reports(config.input,
                                          ReporterMask{config.mask_rule, {}},
                                          config.roster);
    // a custom mask needs the labels, so ingest ran with the rule mask first
    ReporterMask mask = load_mask(config, data.labels);
    if (config.mask_rule == MaskRule::Custom) {
      IngestedReports checked =
          ingest_reports(config.input, mask, config.roster);
      data = std::move(checked);
    }
    fs::create_directories(config.output_dir);
    bool all_converged = true;
    for (std::size_t l = 0; l < data.tie_types.size(); ++l) {
      const fs::path dir = data.tie_types.size() == 1
                               ? config.output_dir
                               : config.output_dir / data.tie_types[l];
      TieFitOutput out =
          run_one_tie(config, mask, data.tensors[l], data.labels, dir);
      all_converged &= out.result.converged;
    }
    write_manifest(config, config.output_dir);
    return all_converged ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int synth_cmd(const SynthConfig& cfg, const fs::path& out_dir) {
  try {
    fs::create_directories(out_dir);
    GroundTruth gt = generate_ground_truth(cfg);
    ReportTensor x = generate_reports(gt, ReporterMask::self_dyads(),
                                      cfg.n_reporters, cfg.seed + 1);
    LabelMap labels;
    for (NodeId i = 0; i < cfg.n_nodes; ++i)
      labels.get_or_add(std::to_string(i));
    write_reports_csv(out_dir / "reports.csv", x, labels, "synthetic");
    write_roster_csv(out_dir / "nodes.csv", labels);
    {
      std::ofstream f = create_text(out_dir / "ground_truth.csv");
      f << "i,j,y\n";
      for (const Dyad& e : gt.y.edges)
        f << labels.labels[e.i] << ',' << labels.labels[e.j] << ",1\n";
    }
    {
      std::ofstream f = create_text(out_dir / "theta_true.csv");
      f << "reporter,value\n";
      for (std::size_t m = 0; m < gt.theta.size(); ++m)
        f << labels.labels[m] << ',' << format_double(gt.theta[m]) << '\n';
    }
    {
      std::ofstream f = create_text(out_dir / "synth_config.json");
      f << json(cfg).dump(2) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int eval_cmd(const EvalConfig& cfg) {
  try {
    LabelMap labels;
    {
      std::ifstream in = open_text(cfg.roster);
      std::string line;
      bool first = true;
      while (std::getline(in, line)) {
        auto fields = split_csv_line(line);
        if (fields.empty() || fields[0].empty()) continue;
        if (first && fields[0] == "label") {
          first = false;
          continue;
        }
        first = false;
        labels.get_or_add(fields[0]);
      }
    }
    BinaryNetwork estimate = read_network_csv(cfg.network, labels);
    BinaryNetwork truth = read_network_csv(cfg.truth, labels);
    fs::create_directories(cfg.output_dir);

    json metrics{{"f1", f1_score(estimate, truth)}};
    auto load_theta = [&](const fs::path& p) {
      std::ifstream in = open_text(p);
      std::string line;
      std::getline(in, line);  // header
      std::vector<double> v(labels.size(), 0.0);
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        auto id = labels.find(fields.at(0));
        if (!id) fail(ErrorCode::IndexOutOfRange, "unknown reporter label");
        // theta.csv carries shape,rate,mean; plain exports carry one value
        v[*id] = std::stod(fields.back());
      }
      return v;
    };
    if (cfg.theta_est && cfg.theta_true) {
      std::vector<double> est = load_theta(*cfg.theta_est);
      std::vector<double> tru = load_theta(*cfg.theta_true);
      metrics["mse_theta"] = mse_theta(est, tru);
      metrics["wasserstein_theta"] = wasserstein_1d(est, tru);
    }
    {
      std::ofstream f = create_text(cfg.output_dir / "metrics.json");
      f << metrics.dump(2) << '\n';
    }
    {
      std::ofstream f = create_text(cfg.output_dir / "summary.csv");
      f << "network,n_edges,mean_degree,degree_std,transitivity,reciprocity,density\n";
      write_summary_rows(f, "estimate", network_summary(estimate));
      write_summary_rows(f, "truth", network_summary(truth));
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int batch_cmd(const RunConfig& base, const fs::path& input_dir,
              std::size_t jobs) {
  try {
    std::vector<fs::path> villages;
    for (const auto& entry : fs::directory_iterator(input_dir))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        villages.push_back(entry.path());
    std::sort(villages.begin(), villages.end());
    if (villages.empty())
      fail(ErrorCode::InvalidConfig, "no .csv files in " + input_dir.string());
    fs::create_directories(base.output_dir);

    std::mutex mu;
    std::vector<std::string> rows;
    std::vector<int> codes(villages.size(), 0);
    std::size_t next = 0;
    auto worker = [&]() {
      for (;;) {
        std::size_t v;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= villages.size()) return;
          v = next++;
        }
        const std::string name = villages[v].stem().string();
        RunConfig local = base;
        local.input = villages[v];
        local.output_dir = base.output_dir / name;
        const int code = run(local);
        // pull the per-tie summaries back into the combined table
        std::vector<std::string> local_rows;
        if (code != 1) {
          for (const auto& entry : fs::recursive_directory_iterator(local.output_dir))
            if (entry.path().filename() == "summary.csv") {
              std::ifstream f(entry.path());
              std::string line;
              std::getline(f, line);  // header
              const fs::path rel =
                  fs::relative(entry.path().parent_path(), local.output_dir);
              const std::string tie = rel == "." ? "all" : rel.string();
              while (std::getline(f, line))
                if (!line.empty())
                  local_rows.push_back(csv_quote(name) + "," + csv_quote(tie) +
                                       "," + line);
            }
        }
        std::lock_guard<std::mutex> lock(mu);
        codes[v] = code;
        for (auto& r : local_rows) rows.push_back(std::move(r));
      }
    };
    if (jobs <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    std::sort(rows.begin(), rows.end());
    std::ofstream f = create_text(base.output_dir / "batch_summary.csv");
    f << "village,tie_type,network,n_edges,mean_degree,degree_std,transitivity,"
         "reciprocity,density\n";
    for (const std::string& r : rows) f << r << '\n';

    int worst = 0;
    for (int c : codes) worst = std::max(worst, c);
    return worst;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace netrecon
