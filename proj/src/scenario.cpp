#include "swnet/scenario.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "swnet/collapse.hpp"
#include "swnet/error.hpp"
#include "swnet/fluid.hpp"
#include "swnet/lift.hpp"
#include "swnet/parallel.hpp"
#include "swnet/sim.hpp"
#include "swnet/static_plan.hpp"

namespace swnet {

namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "1.0.0";

[[noreturn]] void schema_error(const std::string& ptr, const std::string& msg) {
  throw Error(ErrorCode::kSchemaError, (ptr.empty() ? std::string("/") : ptr) + ": " + msg);
}

std::string escape_key(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

/// Object view that records which keys were read, so leftovers can be rejected.
class Obj {
 public:
  Obj(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {
    if (!j_.is_object()) schema_error(ptr_, "expected an object");
  }
  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return ptr_ + "/" + escape_key(key); }
  const std::string& ptr() const { return ptr_; }
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) schema_error(at(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string ptr_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& ptr) {
  if (!j.is_number()) schema_error(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(ptr, "expected a finite number");
  return v;
}

double as_positive(const json& j, const std::string& ptr) {
  const double v = as_number(j, ptr);
  if (!(v > 0.0)) schema_error(ptr, "expected a positive number");
  return v;
}

std::uint64_t as_uint(const json& j, const std::string& ptr) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    schema_error(ptr, "expected a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

bool as_bool(const json& j, const std::string& ptr) {
  if (!j.is_boolean()) schema_error(ptr, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) schema_error(ptr, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& ptr) {
  if (!j.is_array()) schema_error(ptr, "expected an array");
  return j;
}

Rational as_rational(const json& j, const std::string& ptr) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_unsigned()) return Rational(std::to_string(j.get<std::uint64_t>()));
    if (j.is_number_integer()) return Rational(std::to_string(j.get<std::int64_t>()));
    // Floats go through their shortest decimal form, so 0.1 becomes 1/10.
    if (j.is_number_float()) return parse_rational(format_double(as_number(j, ptr)));
  } catch (const Error& e) {
    schema_error(ptr, e.what());
  }
  schema_error(ptr, "expected a number or a \"p/q\" string");
}

Vec as_vec(const json& j, const std::string& ptr) {
  Vec out;
  const json& a = as_array(j, ptr);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_number(a[i], ptr + "/" + std::to_string(i)));
  return out;
}

RatVec as_ratvec(const json& j, const std::string& ptr) {
  RatVec out;
  const json& a = as_array(j, ptr);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_rational(a[i], ptr + "/" + std::to_string(i)));
  return out;
}

std::vector<Vec> as_matrix(const json& j, const std::string& ptr) {
  std::vector<Vec> out;
  const json& a = as_array(j, ptr);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(as_vec(a[i], ptr + "/" + std::to_string(i)));
  return out;
}

void require_size(const Vec& v, std::size_t n, const std::string& ptr) {
  if (v.size() != n) schema_error(ptr, "expected " + std::to_string(n) + " entries");
}

NetworkModel parse_network(const json& j, const std::string& ptr) {
  Obj o(j, ptr);
  const json* jq = o.get("queues");
  const json* js = o.get("schedules");
  if (!jq) schema_error(o.at("queues"), "missing");
  if (!js) schema_error(o.at("schedules"), "missing");
  const std::uint64_t n = as_uint(*jq, o.at("queues"));
  if (n == 0) schema_error(o.at("queues"), "need at least one queue");
  std::vector<Vec> sched = as_matrix(*js, o.at("schedules"));
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const std::string p = o.at("schedules") + "/" + std::to_string(i);
    require_size(sched[i], n, p);
    for (double v : sched[i]) {
      if (v < 0.0) schema_error(p, "service amounts must be >= 0");
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (const json* jr = o.get("routing")) {
    const json& a = as_array(*jr, o.at("routing"));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = o.at("routing") + "/" + std::to_string(i);
      if (!a[i].is_array() || a[i].size() != 2) schema_error(p, "expected a pair [m, n]");
      const auto m = as_uint(a[i][0], p + "/0");
      const auto k = as_uint(a[i][1], p + "/1");
      if (m < 1 || m > n || k < 1 || k > n) schema_error(p, "queue index out of range (1-based)");
      pairs.emplace_back(m, k);
    }
  }
  bool closure = false;
  if (const json* jc = o.get("monotone_closure")) closure = as_bool(*jc, o.at("monotone_closure"));
  std::string name = "custom";
  if (const json* jn = o.get("name")) name = as_string(*jn, o.at("name"));
  o.finish();
  ScheduleSet set(std::move(sched));
  if (closure) set = monotone_closure(set);
  return validate_network(std::move(set), routing_from_pairs(n, pairs), name);
}

WeightFunction parse_weight(Obj& o) {
  std::string kind = "power";
  if (const json* jw = o.get("weight")) kind = as_string(*jw, o.at("weight"));
  const json* ja = o.get("alpha");
  if (kind == "power") {
    const double alpha = ja ? as_positive(*ja, o.at("alpha")) : 1.0;
    return WeightFunction::power(alpha);
  }
  if (kind == "log1p") {
    if (ja) schema_error(o.at("alpha"), "alpha only applies to the power weight");
    return WeightFunction::log1p();
  }
  schema_error(o.at("weight"), "expected \"power\" or \"log1p\"");
}

Policy parse_policy(const json* j, const std::string& ptr, const std::optional<NetworkModel>& model) {
  const bool multi = model && model->hop_kind == HopKind::kMulti;
  if (!j) return multi ? Policy::backpressure(WeightFunction::power(1.0)) : Policy::mw(WeightFunction::power(1.0));
  Obj o(*j, ptr);
  std::string kind = multi ? "backpressure" : "mw";
  if (const json* jk = o.get("kind")) kind = as_string(*jk, o.at("kind"));
  Policy p;
  if (kind == "mw") {
    p = Policy::mw(parse_weight(o));
  } else if (kind == "backpressure") {
    p = Policy::backpressure(parse_weight(o));
  } else if (kind == "msmw_log") {
    p = Policy::msmw_log();
  } else {
    schema_error(o.at("kind"), "expected mw, backpressure or msmw_log");
  }
  if (const json* jt = o.get("tie_break")) {
    const std::string tb = as_string(*jt, o.at("tie_break"));
    if (tb == "highest_index") p.tie_break = TieBreak::kHighestIndex;
    else if (tb == "random") p.tie_break = TieBreak::kRandom;
    else if (tb == "round_robin") p.tie_break = TieBreak::kRoundRobin;
    else schema_error(o.at("tie_break"), "expected highest_index, random or round_robin");
  }
  if (const json* jr = o.get("rel_tol")) {
    p.rel_tol = as_number(*jr, o.at("rel_tol"));
    if (p.rel_tol < 0.0) schema_error(o.at("rel_tol"), "must be >= 0");
  }
  o.finish();
  if (model) {
    try {
      check_policy_model(*model, p);
    } catch (const Error& e) {
      schema_error(ptr, e.what());
    }
  }
  return p;
}

ArrivalModel parse_arrivals(const json* j, const std::string& ptr, const RatVec& lambda) {
  const Vec rate = to_double(lambda);
  const std::size_t n = rate.size();
  std::string kind = "bernoulli";
  std::optional<Obj> o;
  if (j) {
    o.emplace(*j, ptr);
    if (const json* jk = o->get("kind")) kind = as_string(*jk, o->at("kind"));
  }
  auto field = [&](const char* key) -> const json* { return o ? o->get(key) : nullptr; };
  ArrivalModel m;
  try {
    if (kind == "deterministic") {
      m = ArrivalModel::deterministic(rate);
    } else if (kind == "bernoulli") {
      Vec batch(n, 1.0);
      if (const json* jb = field("batch")) {
        batch = as_vec(*jb, o->at("batch"));
        require_size(batch, n, o->at("batch"));
      }
      Vec prob(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(batch[i] > 0.0)) schema_error(o->at("batch"), "batches must be positive");
        prob[i] = rate[i] / batch[i];
      }
      m = ArrivalModel::bernoulli(prob, batch);
    } else if (kind == "iid_batch") {
      const json* jv = field("values");
      const json* jp = field("probs");
      if (!jv || !jp) schema_error(ptr, "iid_batch needs values and probs");
      m = ArrivalModel::iid_batch(as_matrix(*jv, o->at("values")), as_matrix(*jp, o->at("probs")));
    } else if (kind == "markov_modulated") {
      const json* jt = field("transition");
      const json* ji = field("increments");
      if (!jt || !ji) schema_error(ptr, "markov_modulated needs transition and increments");
      m = ArrivalModel::markov_modulated(as_matrix(*jt, o->at("transition")),
                                         as_matrix(*ji, o->at("increments")));
    } else {
      schema_error(o ? o->at("kind") : ptr, "unknown arrival kind");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) throw;
    schema_error(ptr, e.what());
  }
  if (o) o->finish();
  if (m.rate.size() != n) schema_error(ptr, "arrival dimension differs from lambda");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(m.rate[i] - rate[i]) > 1e-9 * (1.0 + rate[i])) {
      schema_error(ptr, "mean increment differs from lambda at queue " + std::to_string(i + 1));
    }
  }
  return m;
}

ExperimentParams parse_experiment(const json& j, const std::string& ptr, std::size_t n) {
  Obj o(j, ptr);
  ExperimentParams e;
  const json* jk = o.get("kind");
  if (!jk) schema_error(o.at("kind"), "missing");
  try {
    e.kind = parse_experiment_kind(as_string(*jk, o.at("kind")));
  } catch (const Error& err) {
    if (err.code() == ErrorCode::kSchemaError) throw;
    schema_error(o.at("kind"), err.what());
  }
  auto num = [&](const char* key, double& dst) {
    if (const json* v = o.get(key)) dst = as_number(*v, o.at(key));
  };
  auto pos = [&](const char* key, double& dst) {
    if (const json* v = o.get(key)) dst = as_positive(*v, o.at(key));
  };
  auto count = [&](const char* key, auto& dst) {
    if (const json* v = o.get(key)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(as_uint(*v, o.at(key)));
  };
  auto state = [&](const char* key, bool required) {
    const json* v = o.get(key);
    if (!v) {
      if (required) schema_error(o.at(key), "missing");
      return Vec(n, 0.0);
    }
    Vec q = as_vec(*v, o.at(key));
    require_size(q, n, o.at(key));
    for (double x : q) {
      if (x < 0.0) schema_error(o.at(key), "queue lengths must be >= 0");
    }
    return q;
  };

  switch (e.kind) {
    case ExperimentKind::kAnalyze:
      pos("budget", e.budget);
      break;
    case ExperimentKind::kSimulate:
      if (const json* v = o.get("audit_csv")) e.audit_csv = as_string(*v, o.at("audit_csv"));
      e.q0 = state("q0", false);
      count("horizon", e.horizon);
      count("stride", e.stride);
      count("pair_samples", e.pair_samples);
      if (!e.audit_csv && e.horizon == 0) schema_error(o.at("horizon"), "a positive horizon is required");
      if (e.stride == 0) schema_error(o.at("stride"), "must be >= 1");
      break;
    case ExperimentKind::kFluid:
      e.q0 = state("q0", true);
      pos("h", e.h);
      num("T", e.T);
      pos("epsilon", e.epsilon);
      count("lift_stride", e.lift_stride);
      if (const json* v = o.get("use_clvr_plus")) e.use_clvr_plus = as_bool(*v, o.at("use_clvr_plus"));
      if (e.h > 0.1) schema_error(o.at("h"), "h must lie in (0, 0.1]");
      if (!(e.T >= 0.0)) schema_error(o.at("T"), "must be >= 0");
      break;
    case ExperimentKind::kLift:
      e.q0 = state("q", true);
      if (const json* v = o.get("use_clvr_plus")) e.use_clvr_plus = as_bool(*v, o.at("use_clvr_plus"));
      break;
    case ExperimentKind::kCollapse:
      e.q0 = state("q0", true);
      if (const json* v = o.get("r")) {
        e.r_list = as_vec(*v, o.at("r"));
        if (e.r_list.empty()) schema_error(o.at("r"), "need at least one scale");
        for (double r : e.r_list) {
          if (!(r >= 1.0)) schema_error(o.at("r"), "scales must be >= 1");
        }
      }
      e.T = 1.0;
      pos("T", e.T);
      count("reps", e.reps);
      count("grid", e.grid);
      if (e.reps == 0) schema_error(o.at("reps"), "must be >= 1");
      if (e.grid < 2) schema_error(o.at("grid"), "must be >= 2");
      if (const json* v = o.get("gamma")) {
        e.gamma = as_vec(*v, o.at("gamma"));
        require_size(e.gamma, n, o.at("gamma"));
      }
      pos("median_threshold", e.median_threshold);
      break;
    case ExperimentKind::kIqcheck:
      if (const json* v = o.get("alphas")) e.alphas = as_vec(*v, o.at("alphas"));
      pos("grid_step", e.grid_step);
      pos("w_max", e.w_max);
      pos("wtot_max", e.wtot_max);
      if (const json* v = o.get("M")) {
        e.m_list.clear();
        const json& a = as_array(*v, o.at("M"));
        for (std::size_t i = 0; i < a.size(); ++i) {
          const auto m = as_uint(a[i], o.at("M") + "/" + std::to_string(i));
          if (m < 1 || m > 3) schema_error(o.at("M") + "/" + std::to_string(i), "M must lie in 1..3");
          e.m_list.push_back(m);
        }
      }
      count("closure_samples", e.closure_samples);
      count("coverage_samples", e.coverage_samples);
      break;
  }
  o.finish();
  return e;
}

Tolerances parse_tolerances(const json& j, const std::string& ptr) {
  Obj o(j, ptr);
  Tolerances t;
  auto pos = [&](const char* key, double& dst) {
    if (const json* v = o.get(key)) dst = as_positive(*v, o.at(key));
  };
  pos("invariant", t.invariant);
  pos("drift", t.drift);
  pos("feasibility", t.feasibility);
  pos("kkt", t.kkt);
  pos("monotone_slack", t.monotone_slack);
  o.finish();
  return t;
}

NetworkModel expand_preset(const std::string& name, Obj& o) {
  const json* jm = o.get("M");
  const json* jn = o.get("N");
  if (name == "ex2") {
    if (jm) schema_error(o.at("M"), "only used by iq_switch");
    if (jn) schema_error(o.at("N"), "only used by tandem");
    return presets::ex2();
  }
  if (name == "iq_switch") {
    if (!jm) schema_error(o.at("M"), "iq_switch needs M");
    if (jn) schema_error(o.at("N"), "only used by tandem");
    const auto m = as_uint(*jm, o.at("M"));
    if (m < 1 || m > 8) schema_error(o.at("M"), "M must lie in 1..8");
    return presets::iq_switch(m);
  }
  if (name == "tandem") {
    if (!jn) schema_error(o.at("N"), "tandem needs N");
    if (jm) schema_error(o.at("M"), "only used by iq_switch");
    const auto n = as_uint(*jn, o.at("N"));
    if (n < 1 || n > 16) schema_error(o.at("N"), "N must lie in 1..16");
    return presets::tandem(n);
  }
  throw Error(ErrorCode::kPresetUnknown, "unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Output helpers

json rat_json(const RatVec& v) {
  json a = json::array();
  for (const Rational& x : v) a.push_back(to_string(x));
  return a;
}

json rat_list(const std::vector<RatVec>& vs) {
  json a = json::array();
  for (const RatVec& v : vs) a.push_back(rat_json(v));
  return a;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
  void write(const ScenarioConfig& cfg, int status) {
    std::filesystem::create_directories(dir_);
    json manifest;
    manifest["config_sha256"] = sha256_hex(cfg.canonical);
    manifest["seed"] = cfg.seed;
    manifest["experiment"] = to_string(cfg.experiment.kind);
    manifest["status"] = status;
    manifest["versions"] = {
        {"swnet", kVersion},
        {"gmp", gmp_version},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"openssl", OPENSSL_VERSION_TEXT},
    };
    json files = json::array();
    for (const auto& [name, content] : files_) {
      files.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }
    manifest["outputs"] = files;
    files_.emplace_back("manifest.json", manifest.dump(2) + "\n");
    for (const auto& [name, content] : files_) {
      std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
      f << content;
      if (!f) throw Error(ErrorCode::kIo, "cannot write " + (dir_ / name).string());
    }
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

json context(const ScenarioConfig& cfg) {
  json c;
  if (cfg.model) c["model"] = cfg.model->name;
  if (cfg.lambda) c["lambda"] = rat_json(*cfg.lambda);
  c["f"] = cfg.policy.weight.describe();
  c["policy"] = cfg.policy.describe();
  if (cfg.arrivals) c["arrivals"] = to_string(cfg.arrivals->kind);
  c["seed"] = cfg.seed;
  return c;
}

json audit_json(const AuditReport& rep) {
  json v = json::array();
  for (std::size_t i = 0; i < rep.violations.size() && i < 100; ++i) {
    const auto& x = rep.violations[i];
    v.push_back({{"tau", x.tau}, {"check", x.check}, {"magnitude", x.magnitude}});
  }
  return {{"ok", rep.ok()},
          {"rows_checked", rep.rows_checked},
          {"pairs_checked", rep.pairs_checked},
          {"violation_count", rep.violations.size()},
          {"violations", v}};
}

const NetworkModel& need_model(const ScenarioConfig& cfg) {
  if (!cfg.model) schema_error("/preset", "this experiment needs a network");
  return *cfg.model;
}

const RatVec& need_lambda(const ScenarioConfig& cfg) {
  if (!cfg.lambda) schema_error("/lambda", "this experiment needs lambda");
  return *cfg.lambda;
}

bool mw_family(const Policy& p) { return p.kind != PolicyKind::kMsmwLog; }

// ---------------------------------------------------------------------------
// Experiments

int run_analyze(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const NetworkModel& model = need_model(cfg);
  const RatVec& lambda = need_lambda(cfg);
  json j;
  j["context"] = context(cfg);
  j["n_queues"] = model.n_queues;
  j["hop"] = model.hop_kind == HopKind::kMulti ? "multi" : "single";
  json sched = json::array();
  for (const Vec& pi : model.schedules) sched.push_back(vec_json(pi));
  j["schedules"] = sched;

  const LoadClass lc = classify_load(model, lambda);
  const PrimalResult pr = solve_primal(model, lambda);
  j["primal"] = {{"finite", pr.feasible},
                 {"value", pr.feasible ? to_string(pr.value) : "inf"},
                 {"alpha", pr.feasible ? rat_json(pr.alpha) : json::array()}};
  j["load"] = to_string(lc.kind);
  const DualResult dr = solve_dual(model, critical_rate(model, lambda));
  j["dual"] = {{"bounded", dr.bounded},
               {"value", dr.bounded ? to_string(dr.value) : "inf"},
               {"xi", dr.bounded ? rat_json(dr.xi) : json::array()}};

  const VirtualResourceSet vrs = enumerate_dual_vertices(model, cfg.experiment.budget);
  const CriticalSets crit = critically_loaded(vrs, critical_rate(model, lambda));
  const CompleteLoading cl = complete_loading_check(model, vrs, crit);
  j["vertices"] = rat_list(vrs.vertices);
  j["s_star"] = rat_list(vrs.s_star());
  j["xi"] = rat_list(crit.xi(vrs));
  j["xi_plus"] = rat_list(crit.xi_plus(vrs));
  j["critical_rate"] = rat_json(critical_rate(model, lambda));
  j["complete_loading"] = {{"holds", cl.holds}, {"target", rat_json(cl.target)}, {"weights", rat_json(cl.weights)}};
  out.add_json("analysis.json", j);
  log << "load " << to_string(lc.kind) << ", |S*| = " << vrs.maximal.size() << ", |Xi| = " << crit.clvr.size()
      << "\n";
  return 0;
}

int run_simulate(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const NetworkModel& model = need_model(cfg);
  const ExperimentParams& e = cfg.experiment;
  SystemPath path;
  if (e.audit_csv) {
    std::ifstream in(*e.audit_csv);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + *e.audit_csv);
    path = read_csv(in, model);
  } else {
    need_lambda(cfg);
    RunOptions opts;
    opts.stride = e.stride;
    path = run(model, cfg.policy, *cfg.arrivals, e.q0, e.horizon, cfg.seed, opts);
    std::ostringstream csv;
    write_csv(csv, path);
    out.add("path.csv", csv.str());
  }
  const AuditReport rep = conservation_audit(path, e.pair_samples);
  json j;
  j["context"] = context(cfg);
  if (e.audit_csv) j["audited_file"] = *e.audit_csv;
  j["horizon"] = path.horizon();
  j["rows"] = path.rows();
  j["sup_q"] = path.sup_q;
  j["audit"] = audit_json(rep);
  out.add_json("audit.json", j);
  log << "audit: " << rep.violations.size() << " violation(s) over " << rep.rows_checked << " rows\n";
  return rep.ok() ? 0 : 2;
}

int run_fluid(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const NetworkModel& model = need_model(cfg);
  const RatVec& lambda = need_lambda(cfg);
  const ExperimentParams& e = cfg.experiment;
  const Tolerances& tol = cfg.tolerances;
  const Vec lam = to_double(lambda);
  const FluidTrajectory tr =
      integrate_fluid(model, cfg.policy, lam, e.q0, e.h, e.T, derive_seed(cfg.seed, {2}));
  const AuditReport audit = fluid_audit(tr);

  const VirtualResourceSet vrs = enumerate_dual_vertices(model);
  const CriticalSets crit = critically_loaded(vrs, critical_rate(model, lambda));
  const CompleteLoading cl = complete_loading_check(model, vrs, crit);

  const std::size_t K = tr.points();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Vec L(K, nan);
  DriftCheck dc;
  dc.formula.assign(K, nan);
  dc.finite_difference.assign(K, nan);
  ConvergenceResult conv;
  conv.distance.assign(K, nan);
  FeasibilityCheck feas;
  double monotone_excess = 0.0;
  bool properties = audit.ok();
  json j;
  j["context"] = context(cfg);
  j["h"] = e.h;
  j["T"] = e.T;
  j["audit"] = audit_json(audit);
  if (mw_family(cfg.policy)) {
    const WeightFunction& f = cfg.policy.weight;
    double running_min = HUGE_VAL;
    for (std::size_t k = 0; k < K; ++k) {
      L[k] = lyapunov(f, tr.q[k]);
      running_min = std::min(running_min, L[k]);
      monotone_excess = std::max(monotone_excess, L[k] - running_min);
    }
    dc = lyapunov_drift_check(model, lam, f, tr);
    const LiftMap lift = make_lift_map(model, lambda, f, vrs, e.use_clvr_plus);
    feas = feasibility_preservation_check(model, lambda, lift.xis(), tr, tol.feasibility);
    if (!crit.clvr.empty() || e.use_clvr_plus) conv = convergence_to_invariant(lift, tr, e.epsilon, e.lift_stride);
    const bool mono_ok = monotone_excess <= tol.monotone_slack * e.h;
    const bool drift_ok = dc.max_residual <= tol.drift;
    properties = properties && mono_ok && drift_ok && feas.ok;
    j["lyapunov"] = {{"max_increase", monotone_excess}, {"slack", tol.monotone_slack * e.h}, {"ok", mono_ok}};
    j["drift"] = {{"max_residual", dc.max_residual}, {"checked", dc.checked}, {"skipped", dc.skipped},
                  {"tolerance", tol.drift}, {"ok", drift_ok}};
    j["feasibility"] = {{"max_violation", feas.max_violation}, {"tolerance", tol.feasibility}, {"ok", feas.ok}};
    j["xi"] = rat_list(lift.xis());
    j["convergence"] = {{"epsilon", e.epsilon},
                        {"hitting_time", conv.hitting_time ? json(*conv.hitting_time) : json(nullptr)},
                        {"final_distance", conv.final_distance}};
  }
  std::optional<double> alpha;
  if (cfg.policy.kind == PolicyKind::kMw && cfg.policy.weight.is_power()) alpha = cfg.policy.weight.alpha();
  if (model.hop_kind == HopKind::kSingle) {
    const NearOptimalityReport no = near_optimality_audit(model.n_queues, alpha, cl.holds, {&tr});
    const double slack = tol.monotone_slack * e.h;
    json nj{{"complete_loading", cl.holds}, {"slack", slack}};
    if (no.upper_factor) nj["upper_factor"] = *no.upper_factor;
    const NearOptimalityRow& row = no.rows.front();
    if (row.upper_violation) {
      nj["upper_violation"] = *row.upper_violation;
      properties = properties && *row.upper_violation <= slack;
    }
    if (row.lower_violation) {
      nj["lower_violation"] = *row.lower_violation;
      properties = properties && *row.lower_violation <= slack;
    }
    j["near_optimality"] = nj;
  }
  j["properties_ok"] = properties;

  std::ostringstream csv;
  csv << "t";
  for (std::size_t i = 0; i < model.n_queues; ++i) csv << ",q_" << i + 1;
  csv << ",L,drift_formula,drift_fd,dist_to_lift\n";
  auto cell = [](double x) { return std::isnan(x) ? std::string() : format_double(x); };
  for (std::size_t k = 0; k < K; ++k) {
    csv << format_double(tr.t[k]);
    for (double x : tr.q[k]) csv << ',' << format_double(x);
    csv << ',' << cell(L[k]) << ',' << cell(dc.formula[k]) << ',' << cell(dc.finite_difference[k]) << ','
        << cell(conv.distance[k]) << '\n';
  }
  out.add("fluid.csv", csv.str());
  out.add_json("summary.json", j);
  log << "fluid: " << K << " points, properties " << (properties ? "ok" : "FAILED") << "\n";
  return properties ? 0 : 2;
}

int run_lift(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const NetworkModel& model = need_model(cfg);
  const RatVec& lambda = need_lambda(cfg);
  const ExperimentParams& e = cfg.experiment;
  if (!mw_family(cfg.policy)) schema_error("/policy/kind", "the lift needs a weight function f");
  const WeightFunction& f = cfg.policy.weight;
  const VirtualResourceSet vrs = enumerate_dual_vertices(model);
  LiftOptions opts;
  opts.kkt_tol = std::min(opts.kkt_tol, cfg.tolerances.kkt);
  const LiftMap lift = make_lift_map(model, lambda, f, vrs, e.use_clvr_plus, opts);
  const LiftResult r = lift(e.q0);
  const Vec lam = to_double(lambda);
  const double gap = sup_distance(r.r_star, e.q0);
  const bool fixed = gap <= cfg.tolerances.invariant * (1.0 + sup_norm(e.q0));
  const bool inv = invariant_state_test(model, lam, f, e.q0, cfg.tolerances.invariant);
  const RepresentationCheck rc = representation_check(model, lam, e.q0, r.r_star, cfg.tolerances.invariant);
  json j;
  j["context"] = context(cfg);
  j["xi"] = rat_list(lift.xis());
  j["q"] = vec_json(e.q0);
  j["r_star"] = vec_json(r.r_star);
  j["multipliers"] = vec_json(r.multipliers);
  j["kkt_residual"] = r.kkt_residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["is_fixed_point"] = fixed;
  j["invariant_state_test"] = inv;
  j["representation"] = {{"ok", rc.ok}, {"residual", rc.residual}, {"t", rc.t}, {"sigma", vec_json(rc.sigma)}};
  const bool ok = r.converged && r.kkt_residual <= cfg.tolerances.kkt && rc.ok;
  j["properties_ok"] = ok;
  out.add_json("lift.json", j);
  log << "lift: kkt " << r.kkt_residual << ", fixed point " << (fixed ? "yes" : "no") << "\n";
  return ok ? 0 : 2;
}

int run_collapse(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const ExperimentParams& e = cfg.experiment;
  MsscConfig m;
  m.model = need_model(cfg);
  m.policy = cfg.policy;
  m.lambda = need_lambda(cfg);
  m.arrival_kind = cfg.arrivals->kind;
  if (m.arrival_kind == ArrivalKind::kBernoulli) m.batch = cfg.arrivals->batch;
  m.gamma = e.gamma;
  m.q0_hat = e.q0;
  m.r_list = e.r_list;
  m.T = e.T;
  m.reps = e.reps;
  m.seed = cfg.seed;
  m.grid = e.grid;
  m.threads = resolve_threads(cfg.threads);
  if (!mw_family(cfg.policy)) schema_error("/policy/kind", "the collapse experiment needs a weight function f");
  const CollapseReport rep = mssc_experiment(m);

  std::ostringstream csv;
  csv << "r,rep,ratio,sup_q,sup_dev\n";
  for (const MsscRow& row : rep.rows) {
    csv << format_double(row.r) << ',' << row.rep << ',' << format_double(row.ratio) << ','
        << format_double(row.sup_q) << ',' << format_double(row.sup_dev) << '\n';
  }
  json per = json::array();
  for (const MsscSummary& s : rep.per_r) {
    per.push_back({{"r", s.r}, {"median", s.median}, {"p90", s.p90}, {"sub_asymptotic", s.sub_asymptotic}});
  }
  const bool decreasing = rep.strictly_decreasing();
  const bool below = rep.per_r.back().median <= e.median_threshold;
  const bool ok = decreasing && below && !rep.trivial_lift;
  json j;
  j["context"] = context(cfg);
  j["q0"] = vec_json(e.q0);
  j["T"] = e.T;
  j["reps"] = e.reps;
  j["grid"] = e.grid;
  j["per_r"] = per;
  j["median_threshold"] = e.median_threshold;
  j["strictly_decreasing"] = decreasing;
  j["final_median_below_threshold"] = below;
  j["trivial_lift"] = rep.trivial_lift;
  j["probe"] = rep.probe;
  j["q0_invariant"] = rep.q0_invariant;
  j["properties_ok"] = ok;
  out.add("mssc.csv", csv.str());
  out.add_json("summary.json", j);
  for (const MsscSummary& s : rep.per_r) log << "r = " << s.r << ": median ratio " << s.median << "\n";
  if (rep.trivial_lift) log << "warning: Xi(lambda) is empty, the lift is identically zero\n";
  return ok ? 0 : 2;
}

int run_iqcheck(const ScenarioConfig& cfg, Outputs& out, std::ostream& log) {
  const ExperimentParams& e = cfg.experiment;
  const MonotonicityReport mono = alpha_monotonicity_probe(e.alphas, e.grid_step, e.w_max, e.wtot_max);
  json pairs = json::array();
  for (const MonotonicityPair& p : mono.pairs) {
    json pj{{"alpha_hi", p.alpha_hi},
            {"alpha_lo", p.alpha_lo},
            {"nesting_violations", p.nesting_violations},
            {"strict_witnesses", p.strict_witnesses}};
    if (p.first_witness) pj["first_witness"] = {p.first_witness->w1r, p.first_witness->w1c, p.first_witness->wtot};
    pairs.push_back(pj);
  }
  bool ok = mono.pass();
  json matchings = json::array();
  for (std::size_t m : e.m_list) {
    const MatchingReport mr = matching_structure_checks(m, e.closure_samples, e.coverage_samples,
                                                        derive_seed(cfg.seed, {m}));
    ok = ok && mr.pass();
    matchings.push_back({{"M", m},
                         {"closure_samples", mr.closure_samples},
                         {"closure_violations", mr.closure_violations},
                         {"coverage_samples", mr.coverage_samples},
                         {"coverage_violations", mr.coverage_violations},
                         {"non_invariant_samples", mr.non_invariant_samples},
                         {"ok", mr.pass()}});
  }
  json j;
  j["context"] = {{"lambda", "uniform 1/M for the 2x2 probe; random doubly stochastic for matchings"},
                  {"f", "x^alpha"},
                  {"policy", "mw"},
                  {"seed", cfg.seed}};
  j["alphas"] = vec_json(e.alphas);
  j["grid_points"] = mono.grid_points;
  j["monotonicity"] = pairs;
  j["matchings"] = matchings;
  j["properties_ok"] = ok;
  out.add_json("iqcheck.json", j);
  log << "iqcheck: " << (ok ? "ok" : "FAILED") << "\n";
  return ok ? 0 : 2;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kAnalyze: return "analyze";
    case ExperimentKind::kSimulate: return "simulate";
    case ExperimentKind::kFluid: return "fluid";
    case ExperimentKind::kLift: return "lift";
    case ExperimentKind::kCollapse: return "collapse";
    case ExperimentKind::kIqcheck: return "iqcheck";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kAnalyze, ExperimentKind::kSimulate, ExperimentKind::kFluid,
                 ExperimentKind::kLift, ExperimentKind::kCollapse, ExperimentKind::kIqcheck}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kSchemaError, "/experiment/kind: unknown experiment '" + name + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

ScenarioConfig parse_scenario_text(const std::string& text, const CliOverrides& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error("", std::string("invalid JSON: ") + e.what());
  }
  Obj o(root, "");
  ScenarioConfig cfg;

  const json* jpreset = o.get("preset");
  const json* jnet = o.get("network");
  if (jpreset && jnet) schema_error("/network", "give either preset or network, not both");
  if (jpreset) {
    cfg.model = expand_preset(as_string(*jpreset, "/preset"), o);
  } else {
    if (o.has("M")) schema_error("/M", "only used with preset iq_switch");
    if (o.has("N")) schema_error("/N", "only used with preset tandem");
    if (jnet) {
      try {
        cfg.model = parse_network(*jnet, "/network");
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kSchemaError) throw;
        schema_error("/network", e.what());
      }
    }
  }
  const std::size_t n = cfg.model ? cfg.model->n_queues : 0;

  if (const json* jl = o.get("lambda")) {
    if (!cfg.model) schema_error("/lambda", "lambda needs a network");
    cfg.lambda = as_ratvec(*jl, "/lambda");
    if (cfg.lambda->size() != n) schema_error("/lambda", "expected " + std::to_string(n) + " entries");
    for (const Rational& x : *cfg.lambda) {
      if (sgn(x) < 0) schema_error("/lambda", "rates must be >= 0");
    }
  }
  const json* ja = o.get("arrivals");
  if (cfg.lambda) {
    cfg.arrivals = parse_arrivals(ja, "/arrivals", *cfg.lambda);
  } else if (ja) {
    schema_error("/arrivals", "arrivals need lambda");
  }
  cfg.policy = parse_policy(o.get("policy"), "/policy", cfg.model);

  const json* je = o.get("experiment");
  if (!je) schema_error("/experiment", "missing");
  cfg.experiment = parse_experiment(*je, "/experiment", n);

  if (const json* js = o.get("seed")) cfg.seed = as_uint(*js, "/seed");
  if (const json* jo = o.get("out")) cfg.out = as_string(*jo, "/out");
  if (const json* jt = o.get("tolerances")) cfg.tolerances = parse_tolerances(*jt, "/tolerances");
  if (const json* jth = o.get("threads")) {
    cfg.threads = as_uint(*jth, "/threads");
    if (*cfg.threads == 0) schema_error("/threads", "must be >= 1");
  }
  o.finish();

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out) cfg.out = *overrides.out;
  if (overrides.threads) cfg.threads = *overrides.threads;

  json canon = root;
  canon["seed"] = cfg.seed;
  canon.erase("out");
  canon.erase("threads");
  cfg.canonical = canon.dump();
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& path, const CliOverrides& overrides) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_scenario_text(text, overrides);
}

int execute(const ScenarioConfig& cfg, std::ostream& log) {
  Outputs out{std::filesystem::path(cfg.out)};
  int status = 0;
  switch (cfg.experiment.kind) {
    case ExperimentKind::kAnalyze: status = run_analyze(cfg, out, log); break;
    case ExperimentKind::kSimulate: status = run_simulate(cfg, out, log); break;
    case ExperimentKind::kFluid: status = run_fluid(cfg, out, log); break;
    case ExperimentKind::kLift: status = run_lift(cfg, out, log); break;
    case ExperimentKind::kCollapse: status = run_collapse(cfg, out, log); break;
    case ExperimentKind::kIqcheck: status = run_iqcheck(cfg, out, log); break;
  }
  out.write(cfg, status);
  return status;
}

}  // namespace swnet
