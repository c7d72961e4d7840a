// SPDX-License-Identifier: Apache-2.0
// Command-line front end: validate, solve, pgf eval, fluid pe, sim run,
// experiment and compare.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polling/cli/csv.hpp"
#include "polling/cli/experiment.hpp"
#include "polling/cli/report.hpp"
#include "polling/error.hpp"
#include "polling/fluid/fluid.hpp"
#include "polling/model/config.hpp"
#include "polling/model/validate.hpp"
#include "polling/pgf/pgf.hpp"
#include "polling/sim/replications.hpp"

namespace fs = std::filesystem;
using namespace polling;

namespace {

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream cell(item);
    T v{};
    cell >> v;
    if (!cell || !(cell >> std::ws).eof()) throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  return out;
}

/// "bep:1,0.6,..." / "bgp:..." / "bsp:0,6,...".
Policy parse_policy_arg(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("policy '" + text + "' must look like kind:v1,v2,...");
  const auto kind = text.substr(0, colon);
  const auto rest = text.substr(colon + 1);
  if (kind == "bep") return Bep{parse_list<double>(rest, "policy")};
  if (kind == "bgp") return Bgp{parse_list<double>(rest, "policy")};
  if (kind == "bsp") return Bsp{parse_list<long>(rest, "policy")};
  throw ConfigError("unknown policy kind '" + kind + "' (expected bep, bgp or bsp)");
}

Policy config_policy(const Config& cfg) {
  if (!cfg.policy) throw ConfigError("config has no policy section");
  return *cfg.policy;
}

/// Writes to DIR/name when an output directory was given, otherwise to stdout.
void emit(const std::string& out_dir, const std::string& name, const std::function<void(std::ostream&)>& body) {
  if (out_dir.empty()) {
    body(std::cout);
    return;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  const auto path = fs::path(out_dir) / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  body(f);
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
  std::cerr << "wrote " << path.string() << '\n';
}

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConvergenceError& err) {
    std::cerr << "error (numerics): " << err.what() << '\n';
    return 3;
  } catch (const IoError& err) {
    std::cerr << "error (i/o): " << err.what() << '\n';
    return 4;
  } catch (const ValidationError& err) {
    std::cerr << "error (validation): " << err.what() << '\n';
    return 2;
  } catch (const ConfigError& err) {
    std::cerr << "error (config): " << err.what() << '\n';
    return 2;
  } catch (const DomainError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moments of queue lengths and busy times in polling systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::size_t cycles = 2000;
  std::size_t warmup = 0;
  std::size_t reps = 1;
  std::string scales = "1,10,100";
  std::string orders = "1,2,3";
  int order = 1;
  std::size_t stage = 1;
  std::string z_text;
  std::vector<std::string> policy_args;
  double scale = 1.0;
  unsigned threads = 0;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "model configuration (JSON)")->required();
  };

  auto* validate_cmd = app.add_subcommand("validate", "check stability and policy admissibility");
  add_config(validate_cmd);

  auto* solve_cmd = app.add_subcommand("solve", "buffer-occupancy moments at polling epochs");
  add_config(solve_cmd);
  solve_cmd->add_option("--order", order, "1: means; 2: also second factorial moments")->default_val(1);
  solve_cmd->add_option("--out", out_dir, "output directory (stdout when omitted)");

  auto* pgf_cmd = app.add_subcommand("pgf", "joint generating function at a polling epoch");
  pgf_cmd->require_subcommand(1);
  auto* pgf_eval = pgf_cmd->add_subcommand("eval", "evaluate F_i(z)");
  add_config(pgf_eval);
  pgf_eval->add_option("--stage", stage, "stage index (1-based)")->default_val(1);
  pgf_eval->add_option("--z", z_text, "comma-separated point in [0,1]^K")->required();

  auto* fluid_cmd = app.add_subcommand("fluid", "fluid periodic equilibrium");
  fluid_cmd->require_subcommand(1);
  auto* fluid_pe_cmd = fluid_cmd->add_subcommand("pe", "PE trajectory and summary");
  add_config(fluid_pe_cmd);
  fluid_pe_cmd->add_option("--policy", policy_args, "override policy, e.g. bgp:1,0.6,1,1,0.4");
  fluid_pe_cmd->add_option("--out", out_dir, "output directory (stdout when omitted)");

  auto* sim_cmd = app.add_subcommand("sim", "discrete-event simulation");
  sim_cmd->require_subcommand(1);
  auto* sim_run = sim_cmd->add_subcommand("run", "simulate and estimate moments");
  add_config(sim_run);
  sim_run->add_option("--seed", seed, "base seed")->default_val(1);
  sim_run->add_option("--cycles", cycles, "cycles per replication")->default_val(2000);
  sim_run->add_option("--warmup", warmup, "cycles discarded at the start")->default_val(0);
  sim_run->add_option("--reps", reps, "independent replications")->default_val(1);
  sim_run->add_option("--orders", orders, "moment orders, comma-separated")->default_val("1,2,3");
  sim_run->add_option("--threads", threads, "worker threads (0: hardware)")->default_val(0);
  sim_run->add_option("--out", out_dir, "output directory (summary to stdout when omitted)");

  auto* exp_cmd = app.add_subcommand("experiment", "asymptotic approximations against simulation");
  add_config(exp_cmd);
  exp_cmd->add_option("--seed", seed, "base seed")->default_val(1);
  exp_cmd->add_option("--cycles", cycles, "cycles per replication")->default_val(2000);
  exp_cmd->add_option("--warmup", warmup, "cycles discarded at the start")->default_val(0);
  exp_cmd->add_option("--reps", reps, "independent replications")->default_val(1);
  exp_cmd->add_option("--scales", scales, "switchover scales n, comma-separated")->default_val("1,10,100");
  exp_cmd->add_option("--orders", orders, "moment orders, comma-separated")->default_val("1,2,3");
  exp_cmd->add_option("--threads", threads, "worker threads (0: hardware)")->default_val(0);
  exp_cmd->add_option("--out", out_dir, "output directory (stdout when omitted)");

  auto* cmp_cmd = app.add_subcommand("compare", "fluid PE of several policies side by side");
  add_config(cmp_cmd);
  cmp_cmd->add_option("--policy", policy_args, "policy kind:values, repeatable")->required();
  cmp_cmd->add_option("--scale", scale, "switchover scale n")->default_val(1.0);
  cmp_cmd->add_option("--out", out_dir, "output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto cfg = load_config(config_path);
    const auto& model = cfg.model;

    if (validate_cmd->parsed()) {
      const auto rep = validate(model, config_policy(cfg));
      if (rep.ok()) {
        std::cout << "ok\n";
        return 0;
      }
      for (const auto& v : rep.violations) std::cout << "violation: " << v.message << '\n';
      return 2;
    }
    if (solve_cmd->parsed()) {
      const auto policy = config_policy(cfg);
      require_valid(model, policy);
      emit(out_dir, "solve.csv", [&](std::ostream& os) { solve_report(os, model, policy, order); });
      return 0;
    }
    if (pgf_eval->parsed()) {
      const auto policy = config_policy(cfg);
      const auto* bep = std::get_if<Bep>(&policy);
      if (!bep) throw DomainError("pgf eval needs a bep policy");
      const auto zs = parse_list<double>(z_text, "--z");
      if (stage < 1 || stage > model.stage_count()) throw DomainError("--stage out of range");
      Vector z(static_cast<Eigen::Index>(zs.size()));
      for (std::size_t k = 0; k < zs.size(); ++k) z(static_cast<Eigen::Index>(k)) = zs[k];
      const auto ev = log_pgf(model, bep->r, stage - 1, z);
      csv::Writer w(std::cout);
      w.row({"stage", "value", "log_value", "steps", "tail_bound"});
      w.row({std::to_string(stage), csv::num(ev.value()), csv::num(ev.log_value), std::to_string(ev.steps),
             csv::num(ev.tail_bound)});
      return 0;
    }
    if (fluid_pe_cmd->parsed()) {
      const Policy policy = policy_args.empty() ? config_policy(cfg) : parse_policy_arg(policy_args.front());
      const auto pe = fluid_pe(model, policy);
      emit(out_dir, "fluid_pe.csv", [&](std::ostream& os) { write_fluid_pe(os, pe); });
      return 0;
    }
    if (sim_run->parsed()) {
      const auto policy = config_policy(cfg);
      const auto ords = parse_list<int>(orders, "--orders");
      ReplicationPlan plan{reps, cycles, warmup, seed, std::nullopt, threads};
      const auto runs = run_replications(model, policy, plan);
      const auto merged = merge(runs);
      if (!out_dir.empty()) emit(out_dir, "samples.csv", [&](std::ostream& os) { write_samples(os, runs); });
      emit(out_dir, "summary.csv", [&](std::ostream& os) { write_summary(os, merged, ords); });
      return 0;
    }
    if (exp_cmd->parsed()) {
      ExperimentSpec spec{model, config_policy(cfg)};
      spec.scales = parse_list<long>(scales, "--scales");
      spec.orders = parse_list<int>(orders, "--orders");
      spec.cycles = cycles;
      spec.warmup = warmup;
      spec.reps = reps;
      spec.seed = seed;
      spec.threads = threads;
      const auto table = run_experiment(spec);
      emit(out_dir, "experiment.csv", [&](std::ostream& os) { table.write_csv(os); });
      return 0;
    }
    if (cmp_cmd->parsed()) {
      std::vector<Policy> policies;
      for (const auto& p : policy_args) policies.push_back(parse_policy_arg(p));
      for (const auto& p : policies) require_valid(model, p);
      emit(out_dir, "compare.csv", [&](std::ostream& os) { compare_policies(os, model, policies, scale); });
      return 0;
    }
  } catch (...) {
    return exit_code_for(std::current_exception());
  }
  return 0;
}
