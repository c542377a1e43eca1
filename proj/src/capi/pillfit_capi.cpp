// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include "pillfit/pillfit.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "error.hpp"
#include "gradcheck.hpp"
#include "run.hpp"

struct pf_config {
  pillfit::RunConfig cfg;
};

struct pf_pills {
  pillfit::DesignVector design;
};

struct pf_result {
  pillfit::RunResult res;
};

namespace {

thread_local std::string g_last_error;

pf_status fail(pf_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs fn and maps library exceptions onto status codes.
template <class Fn>
pf_status guarded(Fn&& fn) {
  try {
    fn();
    return PF_OK;
  } catch (const pillfit::ParseError& e) {
    return fail(PF_ERR_PARSE, e.what());
  } catch (const pillfit::ValidationError& e) {
    return fail(PF_ERR_VALIDATION, e.what());
  } catch (const pillfit::InvalidGeometry& e) {
    return fail(PF_ERR_GEOMETRY, e.what());
  } catch (const pillfit::IoError& e) {
    return fail(PF_ERR_IO, e.what());
  } catch (const pillfit::SolverError& e) {
    return fail(PF_ERR_SOLVER, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PF_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw pillfit::ValidationError(std::string(what) + " is NULL");
}

const pillfit::RunConfig& config_or_default(const pf_config* cfg,
                                            pillfit::RunConfig& scratch) {
  return cfg ? cfg->cfg : scratch;
}

}  // namespace

extern "C" {

const char* pf_version(void) { return "0.1.0"; }

const char* pf_last_error(void) { return g_last_error.c_str(); }

const char* pf_status_name(pf_status status) {
  switch (status) {
    case PF_OK:
      return "ok";
    case PF_ERR_VALIDATION:
      return "validation error";
    case PF_ERR_PARSE:
      return "parse error";
    case PF_ERR_IO:
      return "i/o error";
    case PF_ERR_GEOMETRY:
      return "invalid geometry";
    case PF_ERR_SOLVER:
      return "solver failure";
    case PF_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void pf_string_free(char* s) { std::free(s); }

pf_status pf_config_default(pf_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new pf_config{};
  });
}

pf_status pf_config_load(const char* path, pf_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new pf_config{pillfit::load_config(path)};
  });
}

pf_status pf_config_parse(const char* json, pf_config** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new pf_config{pillfit::parse_config(json, "<string>")};
  });
}

void pf_config_free(pf_config* cfg) { delete cfg; }

pf_status pf_config_set_target(pf_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "cfg");
    require(path, "path");
    cfg->cfg.target = pillfit::TargetSource{};
    cfg->cfg.target.path = path;
  });
}

pf_status pf_config_set_output_dir(pf_config* cfg, const char* dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(dir, "dir");
    cfg->cfg.output_dir = dir;
  });
}

pf_status pf_config_output_dir(const pf_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(cfg->cfg.output_dir);
  });
}

pf_status pf_config_set_threads(pf_config* cfg, int threads) {
  return guarded([&] {
    require(cfg, "cfg");
    if (threads < 1) throw pillfit::ValidationError("threads must be >= 1");
    cfg->cfg.model.threads = threads;
  });
}

pf_status pf_config_to_json(const pf_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(pillfit::config_to_json(cfg->cfg));
  });
}

pf_status pf_pills_create(const double* values, int n, pf_pills** out) {
  return guarded([&] {
    require(out, "out");
    if (n < 0) throw pillfit::ValidationError("n must be >= 0");
    if (n > 0) require(values, "values");
    auto* p = new pf_pills{};
    try {
      for (int m = 0; m < n; ++m) {
        const double* v = values + 5 * m;
        p->design.push_back(pillfit::PillParams(v[0], v[1], v[2], v[3], v[4]));
      }
    } catch (...) {
      delete p;
      throw;
    }
    *out = p;
  });
}

pf_status pf_pills_load(const char* path, pf_pills** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new pf_pills{pillfit::load_pills_csv(path)};
  });
}

pf_status pf_pills_save(const pf_pills* pills, const char* path) {
  return guarded([&] {
    require(pills, "pills");
    require(path, "path");
    pillfit::save_pills_csv(pills->design, path);
  });
}

pf_status pf_pills_to_csv(const pf_pills* pills, char** out) {
  return guarded([&] {
    require(pills, "pills");
    require(out, "out");
    *out = dup_string(pillfit::pills_to_csv(pills->design));
  });
}

int pf_pills_count(const pf_pills* pills) {
  return pills ? pills->design.size() : 0;
}

pf_status pf_pills_get(const pf_pills* pills, double* values, int capacity) {
  return guarded([&] {
    require(pills, "pills");
    const int n = std::min(capacity, pills->design.size());
    if (n > 0) require(values, "values");
    for (int m = 0; m < n; ++m) {
      const auto v = pills->design.pills[m].to_vector();
      for (int k = 0; k < 5; ++k) values[5 * m + k] = v[k];
    }
  });
}

void pf_pills_free(pf_pills* pills) { delete pills; }

pf_status pf_init(const pf_config* cfg, const char* mode, int n, double r0,
                  double theta_max, uint64_t seed, pf_pills** out) {
  return guarded([&] {
    require(mode, "mode");
    require(out, "out");
    pillfit::RunConfig scratch;
    pillfit::RunConfig c = config_or_default(cfg, scratch);
    const std::string m = mode;
    if (m == "cross") {
      c.init.mode = pillfit::InitMode::Cross;
    } else if (m == "randcross") {
      c.init.mode = pillfit::InitMode::RandomizedCross;
    } else {
      throw pillfit::ValidationError("init mode must be cross or randcross");
    }
    c.init.n = n;
    c.init.r0 = r0;
    c.init.theta_max = theta_max;
    c.seed = seed;
    c.validate();
    *out = new pf_pills{pillfit::make_init(c)};
  });
}

pf_status pf_run(const pf_config* cfg, pf_result** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    pillfit::RunConfig c = cfg->cfg;
    const pillfit::ElementField target = pillfit::resolve_target(c);
    const pillfit::DesignVector init = pillfit::make_init(c);
    *out = new pf_result{pillfit::run_pipeline(c, target, init)};
  });
}

pf_status pf_refine(const pf_config* cfg, const pf_pills* pills,
                    pf_result** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(pills, "pills");
    require(out, "out");
    pillfit::RunConfig c = cfg->cfg;
    const pillfit::ElementField target = pillfit::resolve_target(c);
    auto* r = new pf_result{};
    pillfit::RunResult& res = r->res;
    try {
      const pillfit::DesignVector start =
          pillfit::make_feasible(pills->design, c.model.constraints);
      pillfit::RefineResult rr = pillfit::refine_loop(
          target, start, c.refinement, c.stages, c.model);
      res.config = c;
      res.config.refinement_enabled = true;
      res.target = target;
      res.design = rr.design;
      res.trace = rr.trace;
      res.objective_norm = pillfit::tracking_mse(target, res.design, c.model);
      res.objective = res.objective_norm * c.model.grid.element_count();
      res.refinement = std::move(rr);
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

pf_status pf_result_write(const pf_result* res, const char* dir) {
  return guarded([&] {
    require(res, "res");
    pillfit::write_outputs(res->res, dir ? std::string(dir)
                                         : res->res.config.output_dir);
  });
}

pf_status pf_result_objective(const pf_result* res, double* objective,
                              double* objective_norm) {
  return guarded([&] {
    require(res, "res");
    if (objective) *objective = res->res.objective;
    if (objective_norm) *objective_norm = res->res.objective_norm;
  });
}

pf_status pf_result_pills(const pf_result* res, pf_pills** out) {
  return guarded([&] {
    require(res, "res");
    require(out, "out");
    *out = new pf_pills{res->res.design};
  });
}

pf_status pf_result_summary(const pf_result* res, char** out) {
  return guarded([&] {
    require(res, "res");
    require(out, "out");
    std::string s = pillfit::stages_to_csv(res->res.stages);
    if (res->res.refinement) {
      s += pillfit::audit_to_csv(res->res.refinement->audit);
      s += "stop_reason," + res->res.refinement->stop_reason + "\n";
    }
    *out = dup_string(s);
  });
}

void pf_result_free(pf_result* res) { delete res; }

pf_status pf_heuristics(const pf_config* cfg, const pf_pills* pills,
                        char** report_csv, pf_pills** pruned,
                        pf_pills** merged) {
  return guarded([&] {
    require(pills, "pills");
    pillfit::RunConfig scratch;
    const pillfit::RunConfig& c = config_or_default(cfg, scratch);
    if (pills->design.empty()) {
      throw pillfit::ValidationError("heuristics need at least one pill");
    }
    const pillfit::HeuristicsReport rep =
        pillfit::apply_heuristics(pills->design, c.model, c.heuristics);
    std::string csv = "id,area,ar,ur,kept\n";
    char buf[160];
    std::vector<bool> kept(pills->design.size(), false);
    for (const auto& p : rep.pruned.pills) {
      for (int m = 0; m < pills->design.size(); ++m) {
        if (!kept[m] && pills->design.pills[m] == p) {
          kept[m] = true;
          break;
        }
      }
    }
    for (int m = 0; m < pills->design.size(); ++m) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", m,
                    rep.ratios.area[m], rep.ratios.ar[m], rep.ratios.ur[m],
                    kept[m] ? 1 : 0);
      csv += buf;
    }
    if (report_csv) *report_csv = dup_string(csv);
    if (pruned) *pruned = new pf_pills{rep.pruned};
    if (merged) *merged = new pf_pills{rep.merged};
  });
}

pf_status pf_gradcheck(const pf_config* cfg, int samples, uint64_t seed,
                       char** report_csv, int* all_passed) {
  return guarded([&] {
    if (samples < 1) throw pillfit::ValidationError("samples must be >= 1");
    pillfit::RunConfig scratch;
    const pillfit::RunConfig& c = config_or_default(cfg, scratch);
    const auto entries =
        pillfit::gradcheck_suite(c.model.tspec, c.model.aspec, samples, seed);
    std::string csv = "check,samples,inactive,max_grad_rel_err,"
                      "max_hess_rel_err,grad_tol,hess_tol,passed\n";
    bool ok = true;
    char buf[256];
    for (const auto& e : entries) {
      std::snprintf(buf, sizeof buf, "%s,%d,%d,%.3e,%.3e,%.0e,%.0e,%d\n",
                    e.name.c_str(), e.samples, e.inactive, e.max_grad_rel_err,
                    e.max_hess_rel_err, e.grad_tol, e.hess_tol,
                    e.passed() ? 1 : 0);
      csv += buf;
      ok = ok && e.passed();
    }
    if (report_csv) *report_csv = dup_string(csv);
    if (all_passed) *all_passed = ok ? 1 : 0;
  });
}

pf_status pf_study(const pf_config* cfg, const char* kind, char** summary_csv) {
  return guarded([&] {
    require(kind, "kind");
    require(summary_csv, "summary_csv");
    pillfit::RunConfig scratch;
    const pillfit::RunConfig& c = config_or_default(cfg, scratch);
    *summary_csv = dup_string(pillfit::study_to_csv(pillfit::run_study(c, kind)));
  });
}

}  // extern "C"
