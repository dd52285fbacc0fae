#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hesim/driver.hpp"
#include "hesim/error.hpp"
#include "hesim/kernels.hpp"

namespace {

struct Flags {
  std::string mode;
  std::optional<double> t_end, rel_tol, abs_tol, sample_every;
  bool backward = false;
  std::string out;
};

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mode", f.mode, "reduced or full")->check(CLI::IsMember({"reduced", "full"}));
  cmd->add_option("--t-end", f.t_end, "integration span")->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", f.rel_tol, "relative tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--abs-tol", f.abs_tol, "absolute tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--sample-every", f.sample_every, "sample spacing")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--backward", f.backward, "integrate backward in time");
}

hesim::Scenario load(const std::string& path, const Flags& f) {
  hesim::RunOverrides o;
  if (f.mode == "full") o.mode = hesim::Mode::Full;
  if (f.mode == "reduced") o.mode = hesim::Mode::Reduced;
  o.t_end = f.t_end;
  o.rel_tol = f.rel_tol;
  o.abs_tol = f.abs_tol;
  o.sample_every = f.sample_every;
  o.backward = f.backward;
  return hesim::apply_overrides(hesim::parse_scenario(path), o);
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hesim::Error(hesim::ErrorCode::IoError, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypoequilibrium steepest-entropy-ascent simulator"};
  app.require_subcommand(1);

  std::string kernels;
  app.add_option("--kernels", kernels, "force a kernel backend")
      ->check(CLI::IsMember({"scalar", "avx2"}));

  Flags sim_flags;
  std::string sim_path;
  auto* simulate = app.add_subcommand("simulate", "integrate a scenario and write the trajectory CSV");
  simulate->add_option("scenario", sim_path, "scenario JSON")->required();
  add_run_flags(simulate, sim_flags);
  simulate->add_option("--out", sim_flags.out, "trajectory CSV (stdout when omitted)");
  std::string summary_path;
  simulate->add_option("--summary", summary_path, "final-state summary JSON (stdout by default)");

  Flags ver_flags;
  std::vector<std::string> ver_paths;
  double inject = 0.0;
  auto* verify = app.add_subcommand("verify", "run the invariant checks on one or more scenarios");
  verify->add_option("scenarios", ver_paths, "scenario JSON files")->required();
  add_run_flags(verify, ver_flags);
  verify->add_option("--out", ver_flags.out, "report JSON (stdout when omitted)");
  verify->add_option("--inject-normalization-error", inject,
                     "scale the initial sector probabilities by 1 + delta");

  std::string proj_path, proj_out;
  auto* project = app.add_subcommand("project", "RCCE projection of a populations file");
  project->add_option("populations", proj_path, "populations JSON")->required();
  project->add_option("--out", proj_out, "report JSON (stdout when omitted)");

  std::string eq_path, eq_out;
  auto* equilibrium = app.add_subcommand("equilibrium", "Gibbs state at the scenario's energy");
  equilibrium->add_option("scenario", eq_path, "scenario JSON")->required();
  equilibrium->add_option("--out", eq_out, "report JSON (stdout when omitted)");

  std::string ss_path, ss_out;
  auto* steady = app.add_subcommand("steady-state", "algebraic steady-state β of an nh_three scenario");
  steady->add_option("scenario", ss_path, "scenario JSON")->required();
  steady->add_option("--out", ss_out, "report JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (kernels == "scalar") hesim::kernels::set_backend(hesim::kernels::Backend::Scalar);
    if (kernels == "avx2") hesim::kernels::set_backend(hesim::kernels::Backend::Avx2);

    if (*simulate) {
      const hesim::RunResult r = hesim::run(load(sim_path, sim_flags));
      if (sim_flags.out.empty()) {
        hesim::write_csv(std::cout, r.table);
        if (!summary_path.empty()) emit(r.summary, summary_path);
      } else {
        hesim::write_csv(sim_flags.out, r.table);
        emit(r.summary, summary_path);
      }
      return 0;
    }
    if (*verify) {
      hesim::VerifyOptions opts;
      opts.inject_normalization_error = inject;
      std::string text;
      bool ok = true;
      for (const auto& path : ver_paths) {
        const hesim::VerifyReport report = hesim::verify(load(path, ver_flags), opts);
        ok = ok && report.passed();
        for (const auto& name : report.failures()) std::cerr << path << ": FAIL " << name << '\n';
        text += report.to_json();
      }
      emit(text, ver_flags.out);
      return ok ? 0 : 4;
    }
    if (*project) {
      emit(hesim::project_report(hesim::parse_populations(proj_path)), proj_out);
      return 0;
    }
    if (*equilibrium) {
      emit(hesim::equilibrium_report(hesim::parse_scenario(eq_path)), eq_out);
      return 0;
    }
    if (*steady) {
      emit(hesim::steady_state_report(hesim::parse_scenario(ss_path)), ss_out);
      return 0;
    }
  } catch (const hesim::Error& e) {
    std::cerr << "hesim: " << e.what() << '\n';
    return hesim::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "hesim: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
