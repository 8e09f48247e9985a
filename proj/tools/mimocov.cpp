// mimocov: run covariance-control experiments, fit baselines, call the
// per-slot solvers directly, and run the property suite.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimocov/config.hpp"
#include "mimocov/errors.hpp"
#include "mimocov/harness.hpp"
#include "mimocov/io.hpp"
#include "mimocov/solvers.hpp"
#include "mimocov/validation.hpp"

namespace {

using nlohmann::json;
using namespace mimocov;

constexpr int kExitCertification = 1;
constexpr int kExitError = 2;

json read_matrix_arg(const std::string& arg) {
  if (arg == "-") return json::parse(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  return read_json_file(arg);
}

std::string run_report(const RunResult& r, bool verbose) {
  const auto& s = r.summary;
  std::ostringstream os;
  os << s.name << " [" << s.controller << "] horizon " << s.horizon << " seed " << s.seed << ": avg utility "
     << format_double(s.final_avg_r) << " nats, avg power " << format_double(s.final_avg_tr_q);
  if (s.reference_r) os << ", reference " << format_double(*s.reference_r);
  if (s.ledger && s.ledger->completed_at) {
    os << ", payload delivered at slot " << *s.ledger->completed_at << " (relative overhead "
       << format_double(s.ledger->relative_overhead) << ")";
  }
  os << '\n';
  for (const auto& c : s.certificates) {
    if (!verbose && c.passed && c.applicable) continue;
    const char* verdict = !c.applicable ? "n/a " : c.passed ? "PASS" : (c.hard ? "FAIL" : "miss");
    os << "  " << verdict << (c.hard ? "  " : " ~") << c.name << " (margin " << format_double(c.worst_margin) << "; "
       << c.detail << ")\n";
  }
  return os.str();
}

int cmd_run(const std::vector<std::string>& paths, unsigned jobs, bool verbose) {
  std::vector<ExperimentConfig> configs;
  for (const auto& p : paths) configs.push_back(load_config(p));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> cert_failed{false};
  std::atomic<bool> errored{false};
  std::mutex out_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const RunResult r = run_experiment(configs[i]);
        emit_outputs(r, configs[i].output);
        if (!r.summary.all_hard_passed()) cert_failed = true;
        std::lock_guard lock(out_mu);
        std::cout << run_report(r, verbose) << std::flush;
      } catch (const std::exception& e) {
        errored = true;
        std::lock_guard lock(out_mu);
        std::cerr << paths[i] << ": " << e.what() << '\n';
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (errored) return kExitError;
  return cert_failed ? kExitCertification : 0;
}

int cmd_baseline(const std::string& path, const std::string& out) {
  const ExperimentConfig cfg = load_config(path);
  if (!std::holds_alternative<BaselineSpec>(cfg.controller)) throw ConfigError(path + ": controller is not a baseline");
  ExperimentConfig fit = cfg;
  std::get<BaselineSpec>(fit.controller).policy_file.reset();
  const std::string text = policy_to_json(build_baseline(fit)).dump(2) + "\n";
  std::filesystem::path dest = out.empty() ? cfg.output.policy.value_or("") : std::filesystem::path(out);
  if (dest.empty() || dest == "-") {
    std::cout << text;
  } else {
    write_text_file(dest, text);
    std::cerr << "wrote " << dest.string() << '\n';
  }
  return 0;
}

int cmd_validate(std::uint64_t seed, bool invariants, bool acceptance) {
  std::vector<validation::CheckResult> results;
  auto report = [&](const validation::CheckResult& r) {
    std::printf("%-4s %-6s %-52s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL",
                r.criterion ? ("[" + std::to_string(r.criterion) + "]").c_str() : "[inv]", r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    results.push_back(r);
  };
  if (invariants) {
    for (const auto& r : validation::run_invariant_suite(seed)) report(r);
  }
  if (acceptance) {
    for (const auto& r : validation::run_acceptance_suite(seed)) report(r);
  }
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  std::printf("%zu checks, %ld failed\n", results.size(), static_cast<long>(failed));
  return failed ? kExitCertification : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO transmit-covariance control under inexact CSIT"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one or more experiment configs");
  std::vector<std::string> run_paths;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool verbose = false;
  run->add_option("configs", run_paths, "Experiment config files (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-j,--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber);
  run->add_flag("-v,--verbose", verbose, "List every certificate, not only failures");

  auto* base = app.add_subcommand("baseline", "Fit a baseline policy and store it as JSON");
  std::string base_path;
  std::string base_out;
  base->add_option("config", base_path, "Config with a baseline controller")->required()->check(CLI::ExistingFile);
  base->add_option("-o,--out", base_out, "Output file (default: output.policy, else stdout)");

  auto* wf = app.add_subcommand("solve-waterfill", "Maximize log det(I + H Q H^H) - (Z/V) tr Q, tr Q <= cap");
  std::string wf_matrix;
  double wf_zv = 0.0;
  double wf_cap = 0.0;
  bool wf_full = false;
  wf->add_option("matrix", wf_matrix, "Channel matrix JSON file, or - for stdin")->required();
  wf->add_option("--z-over-v", wf_zv, "Queue penalty Z/V (>= 0)")->default_val(0.0);
  wf->add_option("--cap", wf_cap, "Trace cap (> 0)")->required();
  wf->add_flag("--full", wf_full, "Also print mu, theta and sigma");

  auto* pj = app.add_subcommand("project", "Project a Hermitian matrix onto {Q PSD, tr Q <= cap}");
  std::string pj_matrix;
  double pj_cap = 0.0;
  bool pj_full = false;
  pj->add_option("matrix", pj_matrix, "Hermitian matrix JSON file, or - for stdin")->required();
  pj->add_option("--cap", pj_cap, "Trace cap (> 0)")->required();
  pj->add_flag("--full", pj_full, "Also print mu, theta and sigma");

  auto* val = app.add_subcommand("validate", "Run the property suite and print a pass/fail table");
  std::uint64_t seed = 20240601;
  bool only_invariants = false;
  bool only_acceptance = false;
  val->add_option("--seed", seed, "Seed for the randomized checks");
  val->add_flag("--invariants-only", only_invariants, "Skip the acceptance criteria");
  val->add_flag("--acceptance-only", only_acceptance, "Skip the supporting invariants");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_paths, jobs, verbose);
    if (*base) return cmd_baseline(base_path, base_out);
    if (*wf) {
      const auto r = waterfill_penalized(matrix_from_json(read_matrix_arg(wf_matrix)), wf_zv, wf_cap);
      json out = matrix_to_json(r.q);
      if (wf_full) out = {{"q", out}, {"mu", r.mu}, {"theta", r.theta}, {"sigma", r.sigma}};
      std::cout << out.dump() << '\n';
      return 0;
    }
    if (*pj) {
      const auto r = psd_cap_project_full(matrix_from_json(read_matrix_arg(pj_matrix)), pj_cap);
      json out = matrix_to_json(r.q);
      if (pj_full) out = {{"q", out}, {"mu", r.mu}, {"theta", r.theta}, {"sigma", r.sigma}};
      std::cout << out.dump() << '\n';
      return 0;
    }
    if (*val) return cmd_validate(seed, !only_acceptance, !only_invariants);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
