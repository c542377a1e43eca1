// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library through the C API only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "pillfit/pillfit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitGradcheck = 3;

struct Failure {
  pf_status status;
  bool reported = false;  // message already printed
};

int exit_code(pf_status s) {
  switch (s) {
    case PF_OK:
      return kExitOk;
    case PF_ERR_VALIDATION:
    case PF_ERR_PARSE:
    case PF_ERR_GEOMETRY:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void check(pf_status s) {
  if (s != PF_OK) throw Failure{s};
}

struct ConfigDel {
  void operator()(pf_config* p) const { pf_config_free(p); }
};
struct PillsDel {
  void operator()(pf_pills* p) const { pf_pills_free(p); }
};
struct ResultDel {
  void operator()(pf_result* p) const { pf_result_free(p); }
};
struct StringDel {
  void operator()(char* p) const { pf_string_free(p); }
};
using Config = std::unique_ptr<pf_config, ConfigDel>;
using Pills = std::unique_ptr<pf_pills, PillsDel>;
using Result = std::unique_ptr<pf_result, ResultDel>;
using String = std::unique_ptr<char, StringDel>;

Config load_config(const std::string& path) {
  pf_config* c = nullptr;
  check(path.empty() ? pf_config_default(&c) : pf_config_load(path.c_str(), &c));
  return Config(c);
}

Pills load_pills(const std::string& path) {
  pf_pills* p = nullptr;
  check(pf_pills_load(path.c_str(), &p));
  return Pills(p);
}

// Writes text to path, or stdout when path is empty.
void emit(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  os << text;
  os.close();
  if (!os) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{PF_ERR_IO, true};
  }
}

void apply_common(pf_config* cfg, const std::string& target,
                  const std::string& out, int threads) {
  if (!target.empty()) check(pf_config_set_target(cfg, target.c_str()));
  if (!out.empty()) check(pf_config_set_output_dir(cfg, out.c_str()));
  if (threads > 0) check(pf_config_set_threads(cfg, threads));
}

void report_result(pf_result* res) {
  double f = 0.0, fn = 0.0;
  check(pf_result_objective(res, &f, &fn));
  std::printf("objective %.6e  objective_norm %.6e\n", f, fn);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pillfit: capsule reconstruction of 2D density fields"};
  app.set_version_flag("--version", std::string(pf_version()));
  app.require_subcommand(1);

  std::string config, target, out, pills_path, mode = "cross", kind;
  int threads = 0, n = 8, samples = 200;
  double r0 = 0.05, theta_max = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "staged pipeline end to end");
  run->add_option("--config", config, "run configuration (JSON)")->required();
  run->add_option("--target", target, "target field (CSV or PGM)");
  run->add_option("--out", out, "output directory");
  run->add_option("--threads", threads, "grid evaluation threads");

  auto* init = app.add_subcommand("init", "emit an initial pill table");
  init->add_option("--mode", mode, "cross or randcross")
      ->check(CLI::IsMember({"cross", "randcross"}));
  init->add_option("--n", n, "number of pills")->required();
  init->add_option("--r0", r0, "initial radius");
  init->add_option("--theta-max", theta_max, "max rotation for randcross");
  init->add_option("--seed", seed, "random seed");
  init->add_option("--config", config, "configuration supplying the grid");
  init->add_option("--out", out, "output CSV (default stdout)");

  auto* grad = app.add_subcommand("gradcheck", "finite-difference report");
  grad->add_option("--config", config, "run configuration (JSON)");
  grad->add_option("--samples", samples, "random samples per check");
  grad->add_option("--seed", seed, "random seed");
  grad->add_option("--out", out, "report CSV (default stdout)");

  auto* refine = app.add_subcommand("refine", "refinement loop only");
  refine->add_option("--config", config, "run configuration (JSON)")
      ->required();
  refine->add_option("--pills", pills_path, "starting pill table")->required();
  refine->add_option("--target", target, "target field (CSV or PGM)");
  refine->add_option("--out", out, "output directory");
  refine->add_option("--threads", threads, "grid evaluation threads");

  auto* heur = app.add_subcommand("heuristics", "AR/UR report, prune, merge");
  heur->add_option("--pills", pills_path, "pill table")->required();
  heur->add_option("--config", config, "run configuration (JSON)");
  heur->add_option("--out", out, "output directory (default stdout)");

  auto* study = app.add_subcommand("study", "parameter sweeps");
  study->add_option("kind", kind, "resolution|quadrature|hessian|count")
      ->required()
      ->check(CLI::IsMember({"resolution", "quadrature", "hessian", "count"}));
  study->add_option("--config", config, "run configuration (JSON)");
  study->add_option("--out", out, "summary CSV (default stdout)");
  study->add_option("--threads", threads, "grid evaluation threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) {
      Config cfg = load_config(config);
      apply_common(cfg.get(), target, out, threads);
      pf_result* r = nullptr;
      check(pf_run(cfg.get(), &r));
      Result res(r);
      check(pf_result_write(res.get(), nullptr));
      report_result(res.get());
    } else if (*init) {
      Config cfg = load_config(config);
      pf_pills* p = nullptr;
      check(pf_init(cfg.get(), mode.c_str(), n, r0, theta_max, seed, &p));
      Pills pills(p);
      if (out.empty()) {
        char* s = nullptr;
        check(pf_pills_to_csv(pills.get(), &s));
        String text(s);
        emit("", text.get());
      } else {
        check(pf_pills_save(pills.get(), out.c_str()));
      }
    } else if (*grad) {
      Config cfg = load_config(config);
      char* s = nullptr;
      int ok = 0;
      check(pf_gradcheck(cfg.get(), samples, seed, &s, &ok));
      String text(s);
      emit(out, text.get());
      if (!ok) {
        std::cerr << "gradcheck: at least one check failed\n";
        return kExitGradcheck;
      }
    } else if (*refine) {
      Config cfg = load_config(config);
      apply_common(cfg.get(), target, out, threads);
      Pills start = load_pills(pills_path);
      pf_result* r = nullptr;
      check(pf_refine(cfg.get(), start.get(), &r));
      Result res(r);
      check(pf_result_write(res.get(), nullptr));
      report_result(res.get());
    } else if (*heur) {
      Config cfg = load_config(config);
      Pills pills = load_pills(pills_path);
      char* s = nullptr;
      pf_pills *pr = nullptr, *mg = nullptr;
      check(pf_heuristics(cfg.get(), pills.get(), &s, &pr, &mg));
      String text(s);
      Pills pruned(pr), merged(mg);
      if (out.empty()) {
        emit("", text.get());
      } else {
        std::error_code ec;
        std::filesystem::create_directories(out, ec);
        if (ec) {
          std::cerr << "error: cannot create " << out << ": " << ec.message()
                    << "\n";
          return kExitRuntime;
        }
        emit(out + "/heuristics.csv", text.get());
        check(pf_pills_save(pruned.get(), (out + "/pruned.csv").c_str()));
        check(pf_pills_save(merged.get(), (out + "/merged.csv").c_str()));
      }
    } else if (*study) {
      Config cfg = load_config(config);
      if (threads > 0) check(pf_config_set_threads(cfg.get(), threads));
      char* s = nullptr;
      check(pf_study(cfg.get(), kind.c_str(), &s));
      String text(s);
      emit(out, text.get());
    }
  } catch (const Failure& f) {
    if (!f.reported) {
      std::cerr << "error (" << pf_status_name(f.status)
                << "): " << pf_last_error() << "\n";
    }
    return exit_code(f.status);
  }
  return kExitOk;
}
