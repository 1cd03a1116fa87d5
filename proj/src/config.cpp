#include "hgc/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "hgc/json_util.hpp"

namespace hgc {

using nlohmann::json;
namespace ju = json_util;

namespace {

const EdgeProfile kDefaultEdge{20.0, 0.1};
const WorkerProfile kDefaultWorker{5.0, 0.1, 10.0, 0.1};

void allow_keys(const json& object, const std::string& path, std::initializer_list<const char*> keys) {
  if (!object.is_object()) ju::fail(path.empty() ? "/" : path, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) ju::fail(path + "/" + key, "unknown field");
  }
}

int as_positive_int(const json& v, const std::string& path) {
  const auto x = ju::as_int(v, path);
  if (x < 1 || x > std::numeric_limits<int>::max()) ju::fail(path, "expected a positive integer");
  return static_cast<int>(x);
}

int as_count(const json& v, const std::string& path) {
  const auto x = ju::as_int(v, path);
  if (x < 0 || x > std::numeric_limits<int>::max()) ju::fail(path, "expected a non-negative integer");
  return static_cast<int>(x);
}

double as_rate(const json& v, const std::string& path) {
  if (v.is_string() && v.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return ju::as_double(v, path);
}

json rate_json(double rate) {
  if (std::isinf(rate)) return "inf";
  return rate;
}

Tolerance parse_tolerance(const json& v, const std::string& path) {
  allow_keys(v, path, {"s_e", "s_w"});
  return Tolerance{as_count(ju::require(v, "s_e", path), path + "/s_e"),
                   as_count(ju::require(v, "s_w", path), path + "/s_w")};
}

json tolerance_json(const Tolerance& t) {
  return {{"s_e", t.edge_stragglers}, {"s_w", t.worker_stragglers}};
}

Topology parse_topology(const json& v, const std::string& path) {
  allow_keys(v, path, {"workers_per_edge", "edges", "workers"});
  Topology t;
  if (v.contains("workers_per_edge")) {
    if (v.contains("edges") || v.contains("workers")) {
      ju::fail(path, "give either workers_per_edge or edges/workers, not both");
    }
    t.workers_per_edge = ju::as_int_list(v["workers_per_edge"], path + "/workers_per_edge");
    for (std::size_t i = 0; i < t.workers_per_edge.size(); ++i) {
      if (t.workers_per_edge[i] < 1) {
        ju::fail(path + "/workers_per_edge/" + std::to_string(i), "expected a positive integer");
      }
    }
    if (t.workers_per_edge.empty()) ju::fail(path + "/workers_per_edge", "at least one edge is required");
  } else {
    t = Topology::uniform(as_positive_int(ju::require(v, "edges", path), path + "/edges"),
                          as_positive_int(ju::require(v, "workers", path), path + "/workers"));
  }
  return t;
}

EdgeProfile parse_edge_fields(const json& v, const std::string& path) {
  EdgeProfile e;
  e.link_ms = ju::as_double(ju::require(v, "link_ms", path), path + "/link_ms");
  e.failure = ju::as_double(ju::require(v, "failure_probability", path), path + "/failure_probability");
  try {
    e.validate();
  } catch (const ValidationError& err) {
    ju::fail(path, err.what());
  }
  return e;
}

WorkerProfile parse_worker_fields(const json& v, const std::string& path) {
  WorkerProfile w;
  w.compute_ms = ju::as_double(ju::require(v, "compute_ms_per_dataset", path), path + "/compute_ms_per_dataset");
  w.jitter_rate = as_rate(ju::require(v, "jitter_rate_per_ms", path), path + "/jitter_rate_per_ms");
  w.link_ms = ju::as_double(ju::require(v, "link_ms", path), path + "/link_ms");
  w.failure = ju::as_double(ju::require(v, "failure_probability", path), path + "/failure_probability");
  try {
    w.validate();
  } catch (const ValidationError& err) {
    ju::fail(path, err.what());
  }
  return w;
}

json edge_json(const EdgeProfile& e) {
  return {{"link_ms", e.link_ms}, {"failure_probability", e.failure}};
}

json worker_json(const WorkerProfile& w) {
  return {{"compute_ms_per_dataset", w.compute_ms},
          {"jitter_rate_per_ms", rate_json(w.jitter_rate)},
          {"link_ms", w.link_ms},
          {"failure_probability", w.failure}};
}

SystemProfile parse_profiles(const json& v, const std::string& path) {
  allow_keys(v, path, {"edge_classes", "worker_classes", "edges"});
  std::map<std::string, EdgeProfile> edge_classes;
  std::map<std::string, WorkerProfile> worker_classes;
  if (v.contains("edge_classes")) {
    const auto& c = v["edge_classes"];
    if (!c.is_object()) ju::fail(path + "/edge_classes", "expected an object");
    for (const auto& [name, body] : c.items()) {
      const std::string p = path + "/edge_classes/" + name;
      allow_keys(body, p, {"link_ms", "failure_probability"});
      edge_classes[name] = parse_edge_fields(body, p);
    }
  }
  if (v.contains("worker_classes")) {
    const auto& c = v["worker_classes"];
    if (!c.is_object()) ju::fail(path + "/worker_classes", "expected an object");
    for (const auto& [name, body] : c.items()) {
      const std::string p = path + "/worker_classes/" + name;
      allow_keys(body, p, {"compute_ms_per_dataset", "jitter_rate_per_ms", "link_ms", "failure_probability"});
      worker_classes[name] = parse_worker_fields(body, p);
    }
  }
  const auto worker_class = [&](const json& name, const std::string& p) {
    const std::string key = ju::as_string(name, p);
    auto it = worker_classes.find(key);
    if (it == worker_classes.end()) ju::fail(p, "unknown worker class '" + key + "'");
    return it->second;
  };

  SystemProfile out;
  const auto& edges = ju::as_array(ju::require(v, "edges", path), path + "/edges");
  if (edges.empty()) ju::fail(path + "/edges", "at least one edge is required");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = path + "/edges/" + std::to_string(i);
    const auto& e = edges[i];
    allow_keys(e, p, {"class", "link_ms", "failure_probability", "workers"});
    if (e.contains("class")) {
      if (e.contains("link_ms") || e.contains("failure_probability")) {
        ju::fail(p, "give either a class or inline link fields, not both");
      }
      const std::string key = ju::as_string(e["class"], p + "/class");
      auto it = edge_classes.find(key);
      if (it == edge_classes.end()) ju::fail(p + "/class", "unknown edge class '" + key + "'");
      out.edges.push_back(it->second);
    } else {
      out.edges.push_back(parse_edge_fields(e, p));
    }
    std::vector<WorkerProfile> workers;
    const auto& list = ju::as_array(ju::require(e, "workers", p), p + "/workers");
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::string wp = p + "/workers/" + std::to_string(j);
      const auto& w = list[j];
      if (w.is_string()) {
        workers.push_back(worker_class(w, wp));
      } else if (w.is_object() && w.contains("class")) {
        allow_keys(w, wp, {"class", "count"});
        const WorkerProfile profile = worker_class(w["class"], wp + "/class");
        const int count = w.contains("count") ? as_positive_int(w["count"], wp + "/count") : 1;
        workers.insert(workers.end(), static_cast<std::size_t>(count), profile);
      } else {
        allow_keys(w, wp, {"compute_ms_per_dataset", "jitter_rate_per_ms", "link_ms", "failure_probability"});
        workers.push_back(parse_worker_fields(w, wp));
      }
    }
    if (workers.empty()) ju::fail(p + "/workers", "every edge needs at least one worker");
    out.workers.push_back(std::move(workers));
  }
  return out;
}

json profiles_json(const SystemProfile& p) {
  json edges = json::array();
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    json e = edge_json(p.edges[i]);
    json workers = json::array();
    for (const auto& w : p.workers[i]) workers.push_back(worker_json(w));
    e["workers"] = std::move(workers);
    edges.push_back(std::move(e));
  }
  return {{"edges", std::move(edges)}};
}

Topology topology_of(const SystemProfile& p) {
  Topology t;
  for (const auto& w : p.workers) t.workers_per_edge.push_back(static_cast<int>(w.size()));
  return t;
}

SchemeSpec parse_scheme(const json& v, const std::string& path, const Tolerance& fallback) {
  if (v.is_string()) {
    try {
      return SchemeSpec{parse_scheme_kind(v.get<std::string>()), fallback};
    } catch (const UnknownKindError& e) {
      ju::fail(path, e.what());
    }
  }
  allow_keys(v, path, {"kind", "s_e", "s_w"});
  SchemeSpec spec{SchemeKind::kHgc, fallback};
  const std::string kind = ju::as_string(ju::require(v, "kind", path), path + "/kind");
  try {
    spec.kind = parse_scheme_kind(kind);
  } catch (const UnknownKindError& e) {
    ju::fail(path + "/kind", e.what());
  }
  if (v.contains("s_e")) spec.tolerance.edge_stragglers = as_count(v["s_e"], path + "/s_e");
  if (v.contains("s_w")) spec.tolerance.worker_stragglers = as_count(v["s_w"], path + "/s_w");
  return spec;
}

StragglerPattern parse_pattern(const json& v, const std::string& path) {
  allow_keys(v, path, {"edges", "workers"});
  StragglerPattern p;
  p.edges = ju::as_int_list(ju::require(v, "edges", path), path + "/edges");
  const auto& workers = ju::as_array(ju::require(v, "workers", path), path + "/workers");
  for (std::size_t i = 0; i < workers.size(); ++i) {
    p.workers.push_back(ju::as_int_list(workers[i], path + "/workers/" + std::to_string(i)));
  }
  return p;
}

void parse_training(const json& v, const std::string& path, TrainingSettings& t) {
  allow_keys(v, path, {"samples", "dimension", "iterations", "scheme", "policy", "task_seed"});
  if (v.contains("samples")) t.samples = as_positive_int(v["samples"], path + "/samples");
  if (v.contains("dimension")) t.dimension = as_positive_int(v["dimension"], path + "/dimension");
  if (v.contains("iterations")) t.iterations = as_count(v["iterations"], path + "/iterations");
  if (v.contains("task_seed")) t.task_seed = ju::as_u64(v["task_seed"], path + "/task_seed");
  if (v.contains("scheme")) {
    try {
      t.scheme = parse_scheme_kind(ju::as_string(v["scheme"], path + "/scheme"));
    } catch (const UnknownKindError& e) {
      ju::fail(path + "/scheme", e.what());
    }
  }
  if (v.contains("policy")) {
    const std::string p = path + "/policy";
    const auto& pv = v["policy"];
    allow_keys(pv, p, {"mode", "s_e", "s_w", "seed", "pattern"});
    StragglerPolicy policy;
    try {
      policy.mode = parse_policy_mode(ju::as_string(ju::require(pv, "mode", p), p + "/mode"));
    } catch (const UnknownKindError& e) {
      ju::fail(p + "/mode", e.what());
    }
    if (policy.mode == StragglerPolicy::Mode::kRandom) {
      policy.tolerance = Tolerance{as_count(ju::require(pv, "s_e", p), p + "/s_e"),
                                   as_count(ju::require(pv, "s_w", p), p + "/s_w")};
      if (pv.contains("seed")) policy.seed = ju::as_u64(pv["seed"], p + "/seed");
    }
    if (policy.mode == StragglerPolicy::Mode::kFixed) {
      policy.pattern = parse_pattern(ju::require(pv, "pattern", p), p + "/pattern");
    }
    t.policy = std::move(policy);
  }
}

json training_json(const TrainingSettings& t) {
  json policy{{"mode", policy_name(t.policy.mode)}};
  if (t.policy.mode == StragglerPolicy::Mode::kRandom) {
    policy["s_e"] = t.policy.tolerance.edge_stragglers;
    policy["s_w"] = t.policy.tolerance.worker_stragglers;
    policy["seed"] = t.policy.seed;
  }
  if (t.policy.mode == StragglerPolicy::Mode::kFixed) {
    policy["pattern"] = {{"edges", t.policy.pattern.edges}, {"workers", t.policy.pattern.workers}};
  }
  return {{"samples", t.samples},        {"dimension", t.dimension},
          {"iterations", t.iterations},  {"scheme", scheme_name(t.scheme)},
          {"policy", std::move(policy)}, {"task_seed", t.task_seed}};
}

BoundsSettings parse_bounds(const json& v, const std::string& path) {
  allow_keys(v, path, {"order_statistics", "runtime_gap"});
  BoundsSettings b;
  if (v.contains("order_statistics")) {
    const auto& list = ju::as_array(v["order_statistics"], path + "/order_statistics");
    for (std::size_t q = 0; q < list.size(); ++q) {
      const std::string p = path + "/order_statistics/" + std::to_string(q);
      allow_keys(list[q], p, {"rank", "means", "variances"});
      OrderStatisticQuery query;
      query.rank = as_positive_int(ju::require(list[q], "rank", p), p + "/rank");
      query.means = ju::as_double_list(ju::require(list[q], "means", p), p + "/means");
      query.variances = ju::as_double_list(ju::require(list[q], "variances", p), p + "/variances");
      if (query.means.size() != query.variances.size()) ju::fail(p, "means and variances differ in length");
      b.order_statistics.push_back(std::move(query));
    }
  }
  if (v.contains("runtime_gap")) {
    const std::string p = path + "/runtime_gap";
    const auto& g = v["runtime_gap"];
    allow_keys(g, p, {"s_e", "s_w", "edge_means", "edge_variances", "worker_means", "worker_variances"});
    b.gap_tolerance = Tolerance{as_count(ju::require(g, "s_e", p), p + "/s_e"),
                                as_count(ju::require(g, "s_w", p), p + "/s_w")};
    b.gap_inputs.edge_means = ju::as_double_list(ju::require(g, "edge_means", p), p + "/edge_means");
    b.gap_inputs.edge_variances = ju::as_double_list(ju::require(g, "edge_variances", p), p + "/edge_variances");
    const auto& wm = ju::as_array(ju::require(g, "worker_means", p), p + "/worker_means");
    const auto& wv = ju::as_array(ju::require(g, "worker_variances", p), p + "/worker_variances");
    for (std::size_t i = 0; i < wm.size(); ++i) {
      b.gap_inputs.worker_means.push_back(ju::as_double_list(wm[i], p + "/worker_means/" + std::to_string(i)));
    }
    for (std::size_t i = 0; i < wv.size(); ++i) {
      b.gap_inputs.worker_variances.push_back(ju::as_double_list(wv[i], p + "/worker_variances/" + std::to_string(i)));
    }
    const std::size_t n = b.gap_inputs.edge_means.size();
    if (b.gap_inputs.edge_variances.size() != n || b.gap_inputs.worker_means.size() != n ||
        b.gap_inputs.worker_variances.size() != n) {
      ju::fail(p, "edge and worker moment lists must all have one entry per edge");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (b.gap_inputs.worker_means[i].size() != b.gap_inputs.worker_variances[i].size()) {
        ju::fail(p + "/worker_variances/" + std::to_string(i), "length differs from worker_means");
      }
    }
  }
  return b;
}

json bounds_json(const BoundsSettings& b) {
  json out = json::object();
  json list = json::array();
  for (const auto& q : b.order_statistics) {
    list.push_back({{"rank", q.rank}, {"means", q.means}, {"variances", q.variances}});
  }
  out["order_statistics"] = std::move(list);
  if (b.gap_tolerance) {
    out["runtime_gap"] = {{"s_e", b.gap_tolerance->edge_stragglers},
                          {"s_w", b.gap_tolerance->worker_stragglers},
                          {"edge_means", b.gap_inputs.edge_means},
                          {"edge_variances", b.gap_inputs.edge_variances},
                          {"worker_means", b.gap_inputs.worker_means},
                          {"worker_variances", b.gap_inputs.worker_variances}};
  }
  return out;
}

std::vector<SchemeSpec> all_schemes(const Tolerance& t) {
  std::vector<SchemeSpec> out;
  for (SchemeKind k : kAllSchemeKinds) out.push_back(SchemeSpec{k, t});
  return out;
}

}  // namespace

ExperimentConfig Config::experiment() const {
  ExperimentConfig e;
  e.topology = topology;
  e.profiles = profiles;
  e.datasets = sweep;
  e.schemes = schemes;
  e.trials = trials;
  e.seed = seed;
  e.threads = threads;
  return e;
}

void Config::validate() const {
  topology.validate();
  validate_tolerance(topology, tolerance);
  if (datasets < 1) throw ValidationError("/K: expected a positive integer");
  profiles.validate(topology);
  if (trials < 1) throw ValidationError("/experiment/trials: expected a positive integer");
  if (gap_trials < 2) throw ValidationError("/experiment/gap_trials: at least 2 trials are required");
  if (threads < 1) throw ValidationError("/experiment/threads: expected a positive integer");
}

std::vector<std::string> preset_names() { return {"example-1", "paper-sec6", "paper-sec6-cifar"}; }

Config preset(const std::string& name) {
  Config c;
  if (name == "example-1") {
    c.topology = Topology::uniform(3, 3);
    c.tolerance = Tolerance{1, 1};
    c.datasets = 9;
    c.profiles = SystemProfile::uniform(c.topology, kDefaultEdge, kDefaultWorker);
    c.sweep = {9};
    c.schemes = all_schemes(c.tolerance);
    c.training.samples = 360;
    return c;
  }
  if (name == "paper-sec6" || name == "paper-sec6-cifar") {
    const ExperimentConfig e = testbed_preset(name == "paper-sec6-cifar");
    c.topology = e.topology;
    c.tolerance = Tolerance{1, 2};
    c.datasets = 40;
    c.profiles = e.profiles;
    c.sweep = e.datasets;
    c.schemes = e.schemes;
    c.trials = e.trials;
    c.seed = e.seed;
    c.training.samples = 400;
    c.verify = VerifyMode::sampled(2000, 1);
    return c;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
}

Config parse_config(const json& doc) {
  allow_keys(doc, "", {"preset", "topology", "tolerance", "K", "seed", "profiles", "experiment",
                       "verify", "training", "bounds"});
  Config c;
  bool has_base = false;
  if (doc.contains("preset")) {
    try {
      c = preset(ju::as_string(doc["preset"], "/preset"));
    } catch (const ValidationError& e) {
      ju::fail("/preset", e.what());
    }
    has_base = true;
  }
  const bool has_topology = doc.contains("topology");
  const bool has_profiles = doc.contains("profiles");
  if (has_topology) c.topology = parse_topology(doc["topology"], "/topology");
  if (has_profiles) {
    c.profiles = parse_profiles(doc["profiles"], "/profiles");
    const Topology derived = topology_of(c.profiles);
    if (has_topology && !(derived == c.topology)) {
      ju::fail("/profiles/edges", "worker counts do not match /topology");
    }
    c.topology = derived;
  } else if (has_topology || !has_base) {
    if (c.topology.workers_per_edge.empty()) ju::fail("/topology", "missing required field");
    c.profiles = SystemProfile::uniform(c.topology, kDefaultEdge, kDefaultWorker);
  }
  if (doc.contains("tolerance")) c.tolerance = parse_tolerance(doc["tolerance"], "/tolerance");
  try {
    validate_tolerance(c.topology, c.tolerance);
  } catch (const ValidationError& e) {
    ju::fail("/tolerance", e.what());
  }
  if (doc.contains("K")) {
    c.datasets = as_positive_int(doc["K"], "/K");
  } else if (!has_base) {
    ju::fail("/K", "missing required field");
  }
  if (doc.contains("seed")) c.seed = ju::as_u64(doc["seed"], "/seed");

  if (!has_base) {
    c.sweep = {c.datasets};
    c.schemes = all_schemes(c.tolerance);
  }
  if (doc.contains("experiment")) {
    const auto& e = doc["experiment"];
    allow_keys(e, "/experiment", {"K_sweep", "schemes", "trials", "threads", "gap_trials"});
    if (e.contains("K_sweep")) {
      c.sweep = ju::as_int_list(e["K_sweep"], "/experiment/K_sweep");
      if (c.sweep.empty()) ju::fail("/experiment/K_sweep", "at least one K is required");
      for (std::size_t i = 0; i < c.sweep.size(); ++i) {
        if (c.sweep[i] < 1) ju::fail("/experiment/K_sweep/" + std::to_string(i), "expected a positive integer");
      }
    }
    if (e.contains("schemes")) {
      const auto& list = ju::as_array(e["schemes"], "/experiment/schemes");
      if (list.empty()) ju::fail("/experiment/schemes", "at least one scheme is required");
      c.schemes.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        c.schemes.push_back(parse_scheme(list[i], "/experiment/schemes/" + std::to_string(i), c.tolerance));
      }
    }
    if (e.contains("trials")) c.trials = as_positive_int(e["trials"], "/experiment/trials");
    if (e.contains("threads")) c.threads = as_positive_int(e["threads"], "/experiment/threads");
    if (e.contains("gap_trials")) c.gap_trials = as_positive_int(e["gap_trials"], "/experiment/gap_trials");
  }
  if (doc.contains("verify")) {
    const auto& v = doc["verify"];
    allow_keys(v, "/verify", {"mode", "count"});
    const std::string mode = ju::as_string(ju::require(v, "mode", "/verify"), "/verify/mode");
    if (mode == "exhaustive") {
      c.verify = VerifyMode::exhaustive(c.seed);
    } else if (mode == "sampled") {
      c.verify = VerifyMode::sampled(as_positive_int(ju::require(v, "count", "/verify"), "/verify/count"), c.seed);
    } else {
      ju::fail("/verify/mode", "expected 'exhaustive' or 'sampled'");
    }
  }
  if (doc.contains("training")) parse_training(doc["training"], "/training", c.training);
  if (doc.contains("bounds")) c.bounds = parse_bounds(doc["bounds"], "/bounds");

  try {
    c.validate();
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    if (!what.empty() && what.front() == '/') throw;
    ju::fail("/", what);
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ":" + e.what());
  }
}

json config_to_json(const Config& c) {
  json schemes = json::array();
  for (const auto& s : c.schemes) {
    schemes.push_back({{"kind", scheme_name(s.kind)},
                       {"s_e", s.tolerance.edge_stragglers},
                       {"s_w", s.tolerance.worker_stragglers}});
  }
  json verify{{"mode", c.verify.kind == VerifyMode::Kind::kExhaustive ? "exhaustive" : "sampled"}};
  if (c.verify.kind == VerifyMode::Kind::kSampled) verify["count"] = c.verify.count;
  json out{{"topology", {{"workers_per_edge", c.topology.workers_per_edge}}},
           {"tolerance", tolerance_json(c.tolerance)},
           {"K", c.datasets},
           {"seed", c.seed},
           {"profiles", profiles_json(c.profiles)},
           {"experiment",
            {{"K_sweep", c.sweep},
             {"schemes", std::move(schemes)},
             {"trials", c.trials},
             {"threads", c.threads},
             {"gap_trials", c.gap_trials}}},
           {"verify", std::move(verify)},
           {"training", training_json(c.training)}};
  if (c.bounds) out["bounds"] = bounds_json(*c.bounds);
  return out;
}

}  // namespace hgc
