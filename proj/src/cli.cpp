#include "hgc/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgc/coding.hpp"
#include "hgc/config.hpp"
#include "hgc/error.hpp"
#include "hgc/jncss.hpp"
#include "hgc/scheme_io.hpp"
#include "hgc/schemes.hpp"
#include "hgc/sim.hpp"
#include "hgc/traindemo.hpp"
#include "hgc/tradeoff.hpp"

namespace hgc {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format = "json";
  std::optional<std::int64_t> trials;
  std::string scheme_path;
};

// Files are staged in memory and written only after the command succeeded.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
  void add_json(std::string name, const json& doc) { add(std::move(name), doc.dump(2) + "\n"); }
};

fs::path output_dir(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("HGC_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

void write_atomically(const fs::path& dir, const Artifacts& artifacts, std::ostream& out) {
  fs::create_directories(dir);
  for (const auto& [name, content] : artifacts.files) {
    const fs::path target = dir / name;
    const fs::path staging = dir / ("." + name + ".tmp");
    {
      std::ofstream f(staging, std::ios::binary | std::ios::trunc);
      if (!f) throw Error("cannot write " + staging.string());
      f << content;
      if (!f.flush()) throw Error("cannot write " + staging.string());
    }
    fs::rename(staging, target);
    out << "wrote " << target.string() << "\n";
  }
}

Config resolve_config(const Options& o) {
  if (!o.config_path.empty() && !o.preset_name.empty()) {
    throw ValidationError("give either --config or --preset, not both");
  }
  Config c;
  if (!o.config_path.empty()) {
    c = load_config(o.config_path);
  } else if (!o.preset_name.empty()) {
    c = preset(o.preset_name);
  } else {
    throw ValidationError("a config is required: pass --config FILE or --preset NAME");
  }
  if (o.seed) c.seed = *o.seed;
  c.verify.seed = c.seed;
  if (o.trials) {
    if (*o.trials < 1) throw ValidationError("--trials: expected a positive integer");
    c.trials = *o.trials;
    c.gap_trials = std::max<std::int64_t>(2, *o.trials);
  }
  c.validate();
  return c;
}

json tolerance_json(const Tolerance& t) {
  return {{"s_e", t.edge_stragglers}, {"s_w", t.worker_stragglers}};
}

json load_json(const LoadBound& b) {
  return {{"D_over_K", b.to_string()}, {"value", b.to_double()}};
}

void print_pairs(std::ostream& out, const std::string& format,
                 const std::vector<std::pair<std::string, std::string>>& rows) {
  if (format == "csv") {
    out << "quantity,value\n";
    for (const auto& [k, v] : rows) out << k << ',' << v << "\n";
    return;
  }
  for (const auto& [k, v] : rows) out << k << ": " << v << "\n";
}

std::string fixed(double x, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

int cmd_plan(const Config& c, const Options& o, Artifacts& a, std::ostream& out, std::ostream& err) {
  const LoadBound hier = hgc_min_load(c.topology, c.tolerance);
  const LoadBound conv = conventional_min_load(c.topology, c.tolerance);
  const Feasibility feas = check_feasibility(c.topology, c.tolerance);
  json doc{{"topology", {{"workers_per_edge", c.topology.workers_per_edge}}},
           {"tolerance", tolerance_json(c.tolerance)},
           {"K", c.datasets},
           {"hierarchical_load", load_json(hier)},
           {"conventional_load", load_json(conv)},
           {"flat_stragglers", flat_straggler_count(c.topology, c.tolerance)},
           {"feasible", feas.feasible},
           {"diagnostic", feas.diagnostic}};
  std::vector<std::pair<std::string, std::string>> rows{
      {"D/K", hier.to_string()}, {"conventional D/K", conv.to_string()}};
  try {
    const AllocationPlan plan = allocate(c.topology, c.tolerance, c.datasets);
    doc["allocation"] = plan_to_json(plan);
    rows.emplace_back("D", std::to_string(plan.worker_load));
  } catch (const DivisibilityError& e) {
    doc["allocation_error"] = e.what();
    doc["suggested_K"] = e.suggested_datasets();
    err << "warning: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    doc["allocation_error"] = e.what();
    err << "warning: " << e.what() << "\n";
  }
  rows.emplace_back("feasible", feas.feasible ? "yes" : "no");
  print_pairs(out, o.format, rows);
  a.add_json("plan.json", doc);
  return 0;
}

int cmd_build(const Config& c, const Options& o, Artifacts& a, std::ostream& out) {
  const CodingScheme scheme = build_scheme(allocate(c.topology, c.tolerance, c.datasets), c.seed);
  print_pairs(out, o.format,
              {{"edges", std::to_string(c.topology.edges())},
               {"K", std::to_string(c.datasets)},
               {"D", std::to_string(scheme.plan().worker_load)},
               {"seed", std::to_string(scheme.seed())},
               {"attempt", std::to_string(scheme.attempt())}});
  a.add_json("scheme.json", scheme_to_json(scheme));
  return 0;
}

int cmd_verify(const Config& c, const Options& o, Artifacts& a, std::ostream& out, std::ostream& err) {
  std::optional<CodingScheme> scheme;
  if (!o.scheme_path.empty()) {
    std::ifstream in(o.scheme_path);
    if (!in) throw ValidationError(o.scheme_path + ": cannot open scheme file");
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ValidationError(o.scheme_path + ": malformed JSON: " + e.what());
    }
    try {
      scheme = scheme_from_json(doc);
    } catch (const ValidationError& e) {
      throw ValidationError(o.scheme_path + ":" + e.what());
    }
  } else {
    scheme = build_scheme(allocate(c.topology, c.tolerance, c.datasets), c.seed);
  }
  const VerificationReport report = verify_decodability(*scheme, c.verify);
  out << report.passed << "/" << report.total << " patterns pass\n";
  if (o.format == "csv") {
    out << "total,passed,worst_relative_error\n"
        << report.total << ',' << report.passed << ',' << json(report.worst_relative_error).dump() << "\n";
  } else {
    out << "worst relative error: " << report.worst_relative_error << "\n";
  }
  a.add_json("verify.json", report_to_json(report, false));
  if (!report.all_passed()) {
    err << "error: " << (report.total - report.passed) << " straggler patterns failed to decode\n";
    return 2;
  }
  return 0;
}

int cmd_simulate(const Config& c, const Options& o, Artifacts& a, std::ostream& out) {
  const ExperimentReport report = run(c.experiment());
  json doc = experiment_to_json(report);
  json comparisons = json::array();
  for (int k : c.sweep) {
    json entry = comparison_to_json(compare_table(report, k));
    entry["K"] = k;
    comparisons.push_back(std::move(entry));
  }
  doc["comparisons"] = std::move(comparisons);
  a.add_json("report.json", doc);
  std::ostringstream jsonl, csv;
  write_samples_jsonl(report, jsonl);
  write_samples_csv(report, csv);
  a.add("samples.jsonl", jsonl.str());
  a.add("samples.csv", csv.str());

  if (o.format == "csv") {
    out << "scheme,K,mean_ms,standard_error_ms,p95_ms,master_comm_load,load_D\n";
  }
  for (const auto& r : report.results) {
    if (o.format == "csv") {
      out << r.scheme << ',' << r.datasets << ',';
      if (r.ok()) {
        out << json(r.stats.mean).dump() << ',' << json(r.stats.standard_error).dump() << ','
            << json(r.stats.p95).dump() << ',' << r.master_comm_load << ',' << r.load;
      } else {
        out << ",,,,";
      }
      out << "\n";
    } else if (r.ok()) {
      out << std::left << std::setw(11) << r.scheme << " K=" << std::setw(4) << r.datasets
          << " mean " << fixed(r.stats.mean, 1) << " ms (se " << fixed(r.stats.standard_error, 2)
          << ")  p95 " << fixed(r.stats.p95, 1) << " ms  master receives " << r.master_comm_load
          << "  D=" << r.load << "\n";
    } else {
      out << std::left << std::setw(11) << r.scheme << " K=" << r.datasets << " failed: " << r.error << "\n";
    }
  }
  return 0;
}

json selection_json(const Selection& s) {
  json skipped = json::array();
  for (const auto& k : s.skipped) {
    skipped.push_back({{"tolerance", tolerance_json(k.tolerance)}, {"reason", k.reason}});
  }
  return {{"tolerance", tolerance_json(s.tolerance)},
          {"load_D", s.load},
          {"edges", s.edges},
          {"workers", s.workers},
          {"objective_ms", s.objective},
          {"evaluations", s.evaluations},
          {"skipped", std::move(skipped)}};
}

json gap_json(const GapBound& g) {
  return {{"edge_term_ms", g.edge_term}, {"worker_terms_ms", g.worker_terms}, {"bound_ms", g.bound}};
}

int cmd_optimize(const Config& c, const Options& o, Artifacts& a, std::ostream& out) {
  const Selection sel = solve(c.topology, c.profiles, c.datasets);
  const GapBoundInputs inputs =
      estimate_gap_inputs(c.topology, c.profiles, sel.tolerance, sel.load, c.gap_trials, c.seed);
  const GapBound bound = runtime_gap_bound(sel, inputs);
  const double gap = std::abs(inputs.total_mean - sel.objective);
  json doc{{"K", c.datasets},
           {"selection", selection_json(sel)},
           {"monte_carlo",
            {{"trials", inputs.trials},
             {"seed", inputs.seed},
             {"mean_ms", inputs.total_mean},
             {"standard_error_ms", std::sqrt(inputs.total_variance / static_cast<double>(inputs.trials))},
             {"edge_means_ms", inputs.edge_means},
             {"edge_variances", inputs.edge_variances},
             {"worker_means_ms", inputs.worker_means},
             {"worker_variances", inputs.worker_variances}}},
           {"gap_ms", gap},
           {"gap_bound", gap_json(bound)},
           {"within_bound", gap <= bound.bound},
           {"notes",
            {"the per-edge worker spread subtracts m_i times the variance of the worker mean",
             "the variance of a mean assumes independent summands"}}};
  a.add_json("optimize.json", doc);
  print_pairs(out, o.format,
              {{"tolerance", to_string(sel.tolerance)},
               {"D", std::to_string(sel.load)},
               {"proxy runtime ms", fixed(sel.objective)},
               {"simulated mean ms", fixed(inputs.total_mean)},
               {"gap bound ms", fixed(bound.bound)},
               {"evaluations", std::to_string(sel.evaluations)},
               {"skipped tolerances", std::to_string(sel.skipped.size())}});
  return 0;
}

int cmd_train(const Config& c, const Options& o, Artifacts& a, std::ostream& out) {
  const TrainingSettings& t = c.training;
  const SyntheticTask task = make_task(t.samples, t.dimension, c.datasets, t.iterations, t.task_seed);
  const Scheme scheme = build(SchemeSpec{t.scheme, c.tolerance}, c.topology, &c.profiles, c.datasets,
                             BuildOptions{.with_code = true, .code_seed = c.seed});
  const TrainingResult result = run_training(task, scheme, t.policy);
  const TrainingResult reference = run_centralized(task);
  double worst = 0.0;
  for (double r : result.residuals) worst = std::max(worst, r);
  const double gap = trajectory_gap(result, reference);
  std::ostringstream csv;
  write_trajectory_csv(result, csv);
  a.add("trajectory.csv", csv.str());
  a.add_json("training.json", {{"scheme", scheme.name()},
                               {"tolerance", tolerance_json(scheme.tolerance())},
                               {"policy", policy_name(t.policy.mode)},
                               {"iterations", t.iterations},
                               {"final_loss", result.losses.back()},
                               {"max_recovery_residual", worst},
                               {"max_gap_to_centralized", gap}});
  print_pairs(out, o.format,
              {{"scheme", scheme.name()},
               {"final loss", json(result.losses.back()).dump()},
               {"max recovery residual", json(worst).dump()},
               {"max gap to centralized", json(gap).dump()}});
  return 0;
}

int cmd_bounds(const Config& c, const Options& o, Artifacts& a, std::ostream& out) {
  if (!c.bounds) throw ValidationError("/bounds: missing required section");
  json queries = json::array();
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t q = 0; q < c.bounds->order_statistics.size(); ++q) {
    const auto& query = c.bounds->order_statistics[q];
    const int n = static_cast<int>(query.means.size());
    double factor = 0.0, bound = 0.0;
    try {
      factor = order_stat_factor(n, query.rank);
      bound = order_stat_gap_bound(n, query.rank, query.means, query.variances);
    } catch (const ValidationError& e) {
      throw ValidationError("/bounds/order_statistics/" + std::to_string(q) + ": " + e.what());
    }
    queries.push_back({{"n", n}, {"rank", query.rank}, {"factor", factor}, {"bound", bound}});
    rows.emplace_back("order statistic " + std::to_string(q) + " bound", json(bound).dump());
  }
  json doc{{"order_statistics", std::move(queries)}};
  if (c.bounds->gap_tolerance) {
    Selection sel;
    sel.tolerance = *c.bounds->gap_tolerance;
    const auto& in = c.bounds->gap_inputs;
    sel.edges.assign(in.edge_means.size(), 1);
    for (const auto& w : in.worker_means) sel.workers.emplace_back(w.size(), 1);
    GapBound g;
    try {
      g = runtime_gap_bound(sel, in);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("/bounds/runtime_gap: ") + e.what());
    }
    doc["runtime_gap"] = gap_json(g);
    rows.emplace_back("runtime gap bound ms", json(g.bound).dump());
  }
  a.add_json("bounds.json", doc);
  print_pairs(out, o.format, rows);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical gradient coding toolkit"};
  app.require_subcommand(1);
  Options o;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Experiment config document (JSON)");
    sub->add_option("--preset", o.preset_name, "Built-in config: example-1, paper-sec6, paper-sec6-cifar");
    sub->add_option("--seed", o.seed, "Override the config seed");
    sub->add_option("--out", o.out_dir, "Output directory (default: $HGC_OUT_DIR or .)");
    sub->add_option("--format", o.format, "Summary format on standard output")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--trials", o.trials, "Override the Monte-Carlo trial count");
  };
  struct Command {
    std::string name;
    std::string help;
  };
  const std::vector<Command> commands{
      {"plan", "Load bounds, feasibility and data allocation"},
      {"build-scheme", "Construct and serialize a coding scheme"},
      {"verify", "Check decodability under every tolerated straggler pattern"},
      {"simulate", "Monte-Carlo runtime comparison of all schemes"},
      {"optimize", "Joint node and tolerance selection with its runtime gap bound"},
      {"demo-train", "Coded gradient descent on a synthetic regression task"},
      {"bounds", "Order-statistic and runtime gap bounds from given moments"}};
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    if (c.name == "verify") sub->add_option("--scheme", o.scheme_path, "Serialized scheme to verify");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const Config c = resolve_config(o);
    Artifacts artifacts;
    int status = 0;
    std::ostringstream summary;
    if (subs[0]->parsed()) status = cmd_plan(c, o, artifacts, summary, err);
    if (subs[1]->parsed()) status = cmd_build(c, o, artifacts, summary);
    if (subs[2]->parsed()) status = cmd_verify(c, o, artifacts, summary, err);
    if (subs[3]->parsed()) status = cmd_simulate(c, o, artifacts, summary);
    if (subs[4]->parsed()) status = cmd_optimize(c, o, artifacts, summary);
    if (subs[5]->parsed()) status = cmd_train(c, o, artifacts, summary);
    if (subs[6]->parsed()) status = cmd_bounds(c, o, artifacts, summary);
    write_atomically(output_dir(o), artifacts, err);
    out << summary.str();
    return status;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace hgc
