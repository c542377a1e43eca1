// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <filesystem>
#include <set>

#include "error.hpp"
#include "json.hpp"
#include "study.hpp"

namespace pillfit {

using nlohmann::json;

RunConfig::RunConfig() {
  model = five_bar_settings();
  model.solver.max_step = 0.05;
  stages = default_stages();
}

void RunConfig::validate() const {
  model.grid.validate();
  model.constraints.validate();
  model.solver.validate();
  if (model.threads < 1) throw ValidationError("threads must be >= 1");
  if (stages.empty()) throw ValidationError("stages must not be empty");
  for (size_t s = 0; s < stages.size(); ++s) {
    const auto& st = stages[s];
    if (!(st.ext >= 0.0)) throw ValidationError("stage ext must be >= 0");
    if (!(st.tol > 0.0)) throw ValidationError("stage tol must be > 0");
    if (st.max_iter < 1) throw ValidationError("stage max_iter must be >= 1");
    if (st.fixed_radius && !(*st.fixed_radius > 0.0)) {
      throw ValidationError("stage fixed_radius must be > 0");
    }
    if (s > 0 && st.ext > stages[s - 1].ext) {
      throw ValidationError("stage ext must be non-increasing");
    }
  }
  if (init.n < 1) throw ValidationError("init.n must be >= 1");
  if (!(init.r0 > 0.0)) throw ValidationError("init.r0 must be > 0");
  if (!(init.theta_max >= 0.0)) {
    throw ValidationError("init.theta_max must be >= 0");
  }
  if (init.mode == InitMode::Pills && init.pills_path.empty()) {
    throw ValidationError("init.mode \"pills\" needs init.pills");
  }
  heuristics.validate();
  refinement.validate();
  if (study.pills < 1 || study.history < 1) {
    throw ValidationError("study.pills and study.history must be >= 1");
  }
  for (const auto& [nx, ny] : study.resolutions) {
    if (nx < 1 || ny < 1) throw ValidationError("study resolutions must be >= 1");
  }
  for (int q : study.orders) {
    if (q < 1 || q > kMaxQuadOrder) {
      throw ValidationError("study orders must lie in [1, 8]");
    }
  }
  for (int n : study.counts) {
    if (n < 1) throw ValidationError("study counts must be >= 1");
  }
}

namespace {

// Reads the members of one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  template <class T>
  bool get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ValidationError(name(key) + ": wrong type");
    }
    return true;
  }

  template <class T>
  bool get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return false;
    if (it->is_null()) {
      out.reset();
      return true;
    }
    T v{};
    get(key, v);
    out = v;
    return true;
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ValidationError("unknown key \"" + name(it.key()) + "\"");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

TransitionSpec parse_transition(const json& j, const std::string& path) {
  Section s(j, path);
  std::string kind = "smoothstep";
  double delta = 0.05;
  s.get("kind", kind);
  s.get("delta", delta);
  TransitionSpec out;
  if (kind == "smoothstep") {
    int k = 3;
    s.get("k", k);
    out = TransitionSpec::smoothstep(k, delta);
  } else if (kind == "tanh") {
    double beta = 8.0;
    s.get("beta", beta);
    out = TransitionSpec::tanh(beta, delta);
  } else if (kind == "asymmetric") {
    int k = 2;
    double ext = 0.0;
    s.get("k", k);
    s.get("ext", ext);
    out = TransitionSpec::asymmetric(k, ext, delta);
  } else {
    throw ValidationError(s.name("kind") + ": unknown transition \"" + kind +
                          "\"");
  }
  s.finish();
  return out;
}

json transition_json(const TransitionSpec& t) {
  json j;
  j["delta"] = t.delta();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SmoothstepKind>) {
          j["kind"] = "smoothstep";
          j["k"] = k.k;
        } else if constexpr (std::is_same_v<K, TanhKind>) {
          j["kind"] = "tanh";
          j["beta"] = k.beta;
        } else {
          j["kind"] = "asymmetric";
          j["k"] = k.k;
          j["ext"] = k.ext;
        }
      },
      t.kind());
  return j;
}

AggregatorSpec parse_aggregation(const json& j, const std::string& path) {
  Section s(j, path);
  std::string kind = "pnorm";
  s.get("kind", kind);
  AggregatorSpec out;
  if (kind == "sum") {
    out = AggregatorSpec::sum();
  } else if (kind == "pnorm") {
    double p = 7.0;
    s.get("p", p);
    if (!(p >= 1.0)) throw ValidationError(s.name("p") + ": must be >= 1");
    out = AggregatorSpec::pnorm(p);
  } else if (kind == "softmax") {
    double beta = 10.0;
    s.get("beta", beta);
    if (!(beta > 0.0)) throw ValidationError(s.name("beta") + ": must be > 0");
    out = AggregatorSpec::softmax(beta);
  } else if (kind == "sum_softcap") {
    double tau = 1.1, beta_c = 18.0;
    s.get("tau", tau);
    s.get("beta_c", beta_c);
    if (!(beta_c > 0.0)) {
      throw ValidationError(s.name("beta_c") + ": must be > 0");
    }
    out = AggregatorSpec::sum_softcap(tau, beta_c);
  } else if (kind == "cosine") {
    double n = 2.0;
    s.get("n", n);
    if (!(n > 0.0)) throw ValidationError(s.name("n") + ": must be > 0");
    out = AggregatorSpec::cosine(n);
  } else {
    throw ValidationError(s.name("kind") + ": unknown aggregation \"" + kind +
                          "\"");
  }
  s.finish();
  return out;
}

json aggregation_json(const AggregatorSpec& a) {
  json j;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, SumKind>) {
          j["kind"] = "sum";
        } else if constexpr (std::is_same_v<K, PNormKind>) {
          j["kind"] = "pnorm";
          j["p"] = k.p;
        } else if constexpr (std::is_same_v<K, SoftmaxKind>) {
          j["kind"] = "softmax";
          j["beta"] = k.beta;
        } else if constexpr (std::is_same_v<K, SumSoftcapKind>) {
          j["kind"] = "sum_softcap";
          j["tau"] = k.tau;
          j["beta_c"] = k.beta_c;
        } else {
          j["kind"] = "cosine";
          j["n"] = k.n;
        }
      },
      a.kind());
  return j;
}

ObjectiveKind parse_objective(const std::string& s, const std::string& key) {
  if (s == "tracking") return ObjectiveKind::Tracking;
  if (s == "reward") return ObjectiveKind::Reward;
  throw ValidationError(key + ": expected \"tracking\" or \"reward\"");
}

StageConfig parse_stage(const json& j, const std::string& path) {
  Section s(j, path);
  StageConfig st;
  std::string obj = "tracking";
  s.get("name", st.name);
  if (s.get("objective", obj)) st.objective = parse_objective(obj, s.name("objective"));
  s.get("ext", st.ext);
  s.get("tol", st.tol);
  s.get("max_iter", st.max_iter);
  s.get("radius_frozen", st.radius_frozen);
  s.get("fixed_radius", st.fixed_radius);
  if (const json* t = s.child("transition")) {
    st.tspec = parse_transition(*t, s.name("transition"));
  }
  if (const json* a = s.child("aggregation")) {
    st.aspec = parse_aggregation(*a, s.name("aggregation"));
  }
  s.finish();
  return st;
}

json stage_json(const StageConfig& st) {
  json j;
  j["name"] = st.name;
  j["objective"] = objective_name(st.objective);
  j["ext"] = st.ext;
  j["tol"] = st.tol;
  j["max_iter"] = st.max_iter;
  j["radius_frozen"] = st.radius_frozen;
  j["fixed_radius"] = st.fixed_radius ? json(*st.fixed_radius) : json(nullptr);
  if (st.tspec) j["transition"] = transition_json(*st.tspec);
  if (st.aspec) j["aggregation"] = aggregation_json(*st.aspec);
  return j;
}

DesignVector parse_pill_rows(const json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path + ": expected an array");
  DesignVector out;
  for (size_t i = 0; i < j.size(); ++i) {
    const std::string where = path + "[" + std::to_string(i) + "]";
    std::vector<double> row;
    try {
      row = j[i].get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ValidationError(where + ": expected [px, py, qx, qy, r]");
    }
    if (row.size() != 5) {
      throw ValidationError(where + ": expected [px, py, qx, qy, r]");
    }
    try {
      out.push_back(PillParams(row[0], row[1], row[2], row[3], row[4]));
    } catch (const Error& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return out;
}

FieldFormat parse_format(const std::string& s, const std::string& key) {
  if (s == "auto") return FieldFormat::Auto;
  if (s == "csv") return FieldFormat::CSV;
  if (s == "pgm") return FieldFormat::PGM;
  throw ValidationError(key + ": expected \"auto\", \"csv\" or \"pgm\"");
}

const char* format_name(FieldFormat f) {
  switch (f) {
    case FieldFormat::CSV:
      return "csv";
    case FieldFormat::PGM:
      return "pgm";
    default:
      return "auto";
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  RunConfig cfg;
  Section top(root, "");
  ModelSettings& ms = cfg.model;

  if (const json* g = top.child("grid")) {
    Section s(*g, "grid");
    const bool has_nx = s.get("nx", ms.grid.nx);
    const bool has_ny = s.get("ny", ms.grid.ny);
    if (has_nx != has_ny) {
      throw ValidationError("grid: give both nx and ny or neither");
    }
    cfg.grid_size_explicit = has_nx;
    s.get("x0", ms.grid.x0);
    s.get("y0", ms.grid.y0);
    s.get("lx", ms.grid.lx);
    s.get("ly", ms.grid.ly);
    s.get("pad", ms.grid.pad);
    s.get("quad_order", ms.grid.quad_order);
    s.finish();
  }
  // The design box follows the grid unless overridden below.
  ms.constraints.x0 = ms.grid.x0;
  ms.constraints.y0 = ms.grid.y0;
  ms.constraints.x1 = ms.grid.x0 + ms.grid.lx;
  ms.constraints.y1 = ms.grid.y0 + ms.grid.ly;

  if (const json* t = top.child("transition")) {
    ms.tspec = parse_transition(*t, "transition");
  }
  if (const json* a = top.child("aggregation")) {
    ms.aspec = parse_aggregation(*a, "aggregation");
  }
  if (const json* c = top.child("constraints")) {
    Section s(*c, "constraints");
    s.get("r_min", ms.constraints.r_min);
    s.get("r_max", ms.constraints.r_max);
    s.get("l_min", ms.constraints.l_min);
    s.get("l_max", ms.constraints.l_max);
    s.finish();
  }
  if (const json* i = top.child("init")) {
    Section s(*i, "init");
    std::string mode;
    if (s.get("mode", mode)) {
      if (mode == "cross") {
        cfg.init.mode = InitMode::Cross;
      } else if (mode == "randcross") {
        cfg.init.mode = InitMode::RandomizedCross;
      } else if (mode == "pills") {
        cfg.init.mode = InitMode::Pills;
      } else {
        throw ValidationError(
            "init.mode: expected \"cross\", \"randcross\" or \"pills\"");
      }
    }
    s.get("n", cfg.init.n);
    s.get("r0", cfg.init.r0);
    s.get("theta_max", cfg.init.theta_max);
    s.get("pills", cfg.init.pills_path);
    s.finish();
  }
  if (const json* st = top.child("stages")) {
    if (!st->is_array()) throw ValidationError("stages: expected an array");
    cfg.stages.clear();
    for (size_t k = 0; k < st->size(); ++k) {
      cfg.stages.push_back(
          parse_stage((*st)[k], "stages[" + std::to_string(k) + "]"));
    }
  }
  if (const json* h = top.child("heuristics")) {
    Section s(*h, "heuristics");
    HeuristicConfig& hc = cfg.heuristics;
    s.get("enabled", cfg.heuristics_enabled);
    s.get("reconverge", cfg.heuristics_reconverge);
    s.get("ar_min", hc.ar_min);
    s.get("ur_min", hc.ur_min);
    s.get("theta_lim", hc.theta_lim);
    s.get("d_min", hc.d_min);
    std::string prox;
    if (s.get("proximity", prox)) {
      if (prox == "center") {
        hc.proximity = Proximity::CenterDistance;
      } else if (prox == "segment") {
        hc.proximity = Proximity::SegmentDistance;
      } else {
        throw ValidationError(
            "heuristics.proximity: expected \"center\" or \"segment\"");
      }
    }
    s.finish();
  }
  if (const json* r = top.child("refinement")) {
    Section s(*r, "refinement");
    RefinementConfig& rc = cfg.refinement;
    s.get("enabled", cfg.refinement_enabled);
    s.get("tau_res", rc.tau_res);
    s.get("r_seed", rc.r_seed);
    s.get("fixed_r", rc.fixed_r);
    s.get("k_max", rc.k_max);
    s.get("eps_abs", rc.eps_abs);
    s.get("eps_rel", rc.eps_rel);
    s.finish();
  }
  if (const json* so = top.child("solver")) {
    Section s(*so, "solver");
    SolveOptions& o = ms.solver;
    std::string hess;
    if (s.get("hessian", hess)) {
      if (hess == "exact") {
        o.hessian_mode = HessianMode::Exact;
      } else if (hess == "lbfgs") {
        o.hessian_mode = HessianMode::LBFGS;
      } else {
        throw ValidationError("solver.hessian: expected \"exact\" or \"lbfgs\"");
      }
    }
    s.get("history", o.history);
    s.get("barrier_mu0", o.barrier_mu0);
    s.get("ls_max_backtracks", o.ls_max_backtracks);
    s.get("max_step", o.max_step);
    s.finish();
  }
  top.get("seed", cfg.seed);
  ms.solver.rng_seed = cfg.seed;
  top.get("threads", ms.threads);
  top.get("output_dir", cfg.output_dir);
  if (const json* t = top.child("target")) {
    Section s(*t, "target");
    s.get("path", cfg.target.path);
    std::string fmt;
    if (s.get("format", fmt)) cfg.target.format = parse_format(fmt, "target.format");
    if (const json* p = s.child("pills")) {
      cfg.target.pills = parse_pill_rows(*p, "target.pills");
    }
    s.get("five_bar", cfg.target.five_bar);
    s.finish();
    const int sources = !cfg.target.path.empty() + cfg.target.pills.has_value() +
                        cfg.target.five_bar;
    if (sources > 1) {
      throw ValidationError("target: give only one of path, pills, five_bar");
    }
  }
  if (const json* st = top.child("study")) {
    Section s(*st, "study");
    StudyConfig& sc = cfg.study;
    s.get("resolutions", sc.resolutions);
    s.get("orders", sc.orders);
    s.get("quadrature_nx", sc.quadrature_nx);
    s.get("quadrature_ny", sc.quadrature_ny);
    s.get("counts", sc.counts);
    s.get("pills", sc.pills);
    s.get("history", sc.history);
    s.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ValidationError("config file '" + path + "' does not exist");
  }
  return parse_config(read_file(path), path);
}

std::string config_to_json(const RunConfig& cfg) {
  const ModelSettings& ms = cfg.model;
  json j;
  json grid = {{"x0", ms.grid.x0},   {"y0", ms.grid.y0},
               {"lx", ms.grid.lx},   {"ly", ms.grid.ly},
               {"pad", ms.grid.pad}, {"quad_order", ms.grid.quad_order}};
  if (cfg.grid_size_explicit) {
    grid["nx"] = ms.grid.nx;
    grid["ny"] = ms.grid.ny;
  }
  j["grid"] = grid;
  j["transition"] = transition_json(ms.tspec);
  j["aggregation"] = aggregation_json(ms.aspec);
  j["constraints"] = {
      {"r_min", ms.constraints.r_min},
      {"r_max", ms.constraints.r_max ? json(*ms.constraints.r_max) : json(nullptr)},
      {"l_min", ms.constraints.l_min},
      {"l_max", ms.constraints.l_max ? json(*ms.constraints.l_max) : json(nullptr)}};
  const char* modes[] = {"cross", "randcross", "pills"};
  j["init"] = {{"mode", modes[static_cast<int>(cfg.init.mode)]},
               {"n", cfg.init.n},
               {"r0", cfg.init.r0},
               {"theta_max", cfg.init.theta_max},
               {"pills", cfg.init.pills_path}};
  json stages = json::array();
  for (const auto& st : cfg.stages) stages.push_back(stage_json(st));
  j["stages"] = stages;
  const HeuristicConfig& hc = cfg.heuristics;
  j["heuristics"] = {
      {"enabled", cfg.heuristics_enabled},
      {"reconverge", cfg.heuristics_reconverge},
      {"ar_min", hc.ar_min},
      {"ur_min", hc.ur_min},
      {"theta_lim", hc.theta_lim},
      {"d_min", hc.d_min},
      {"proximity",
       hc.proximity == Proximity::CenterDistance ? "center" : "segment"}};
  const RefinementConfig& rc = cfg.refinement;
  j["refinement"] = {{"enabled", cfg.refinement_enabled},
                     {"tau_res", rc.tau_res},
                     {"r_seed", rc.r_seed},
                     {"fixed_r", rc.fixed_r ? json(*rc.fixed_r) : json(nullptr)},
                     {"k_max", rc.k_max},
                     {"eps_abs", rc.eps_abs},
                     {"eps_rel", rc.eps_rel}};
  const SolveOptions& o = ms.solver;
  j["solver"] = {
      {"hessian", o.hessian_mode == HessianMode::Exact ? "exact" : "lbfgs"},
      {"history", o.history},
      {"barrier_mu0", o.barrier_mu0},
      {"ls_max_backtracks", o.ls_max_backtracks},
      {"max_step", o.max_step}};
  j["seed"] = cfg.seed;
  j["threads"] = ms.threads;
  j["output_dir"] = cfg.output_dir;
  json target = json::object();
  if (!cfg.target.path.empty()) {
    target["path"] = cfg.target.path;
    target["format"] = format_name(cfg.target.format);
  } else if (cfg.target.pills) {
    json rows = json::array();
    for (const auto& p : cfg.target.pills->pills) {
      rows.push_back({p.px(), p.py(), p.qx(), p.qy(), p.r()});
    }
    target["pills"] = rows;
  } else if (cfg.target.five_bar) {
    target["five_bar"] = true;
  }
  j["target"] = target;
  const StudyConfig& sc = cfg.study;
  j["study"] = {{"resolutions", sc.resolutions},
                {"orders", sc.orders},
                {"quadrature_nx", sc.quadrature_nx},
                {"quadrature_ny", sc.quadrature_ny},
                {"counts", sc.counts},
                {"pills", sc.pills},
                {"history", sc.history}};
  return j.dump(2) + "\n";
}

}  // namespace pillfit
