// vcm: command-line driver for the variation-of-constants library.
//
// Exit codes: 0 success, 1 check or runtime failure, 2 usage or config error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using vcm::cli::ConfigError;
using vcm::cli::json;

// Flags shared by the scenario subcommands. Each set flag becomes an override
// of the matching config key, applied after the file.
struct ScenarioFlags {
  std::string config;
  std::vector<std::string> sets;
  std::optional<double> mu, t0, t1, samples, rel_tol, abs_tol, epsilon, omega;
  std::optional<std::string> method, perturbation, output;
  std::vector<double> elements, state;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "JSON scenario file");
    cmd->add_option("--set", sets, "Override a config key: key.path=value (repeatable)");
    cmd->add_option("--mu", mu, "Gravitational parameter");
    cmd->add_option("--t0", t0, "Start time");
    cmd->add_option("--t1", t1, "End time");
    cmd->add_option("--samples", samples, "Number of output samples");
    cmd->add_option("--rel-tol", rel_tol, "Integrator relative tolerance");
    cmd->add_option("--abs-tol", abs_tol, "Integrator absolute tolerance");
    cmd->add_option("--method", method, "dormand_prince | rk4_fixed");
    cmd->add_option("--perturbation", perturbation,
                    "none | inverse_square | rotating_dipole | third_body");
    cmd->add_option("--epsilon", epsilon, "Perturbation strength");
    cmd->add_option("--omega", omega, "Rotating-dipole angular rate");
    cmd->add_option("--elements", elements, "sma,ecc,inc,raan,argp,m0")
        ->delimiter(',')
        ->expected(6);
    cmd->add_option("--state", state, "q1,q2,q3,p1,p2,p3")->delimiter(',')->expected(6);
    cmd->add_option("-o,--output", output, "Output CSV path (default stdout)");
  }

  json document() const {
    json root = config.empty() ? json::object() : vcm::cli::load_config_file(config);
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    for (const std::string& s : sets) {
      const auto [path, value] = vcm::cli::split_assignment(s);
      vcm::cli::apply_override(root, path, value);
    }
    auto put = [&](const char* path, const auto& v) {
      if (v) vcm::cli::apply_override(root, path, json(*v).dump());
    };
    put("model.mu", mu);
    put("time.t0", t0);
    put("time.t1", t1);
    put("time.samples", samples);
    put("integrator.rel_tol", rel_tol);
    put("integrator.abs_tol", abs_tol);
    put("integrator.method", method);
    put("perturbation.kind", perturbation);
    put("perturbation.epsilon", epsilon);
    put("perturbation.omega", omega);
    put("output.path", output);
    if (!elements.empty()) {
      json& init = root["initial"];
      if (init.is_object()) init.erase("state");
      static const char* names[] = {"sma", "ecc", "inc", "raan", "argp", "m0"};
      for (std::size_t i = 0; i < 6; ++i) init["elements"][names[i]] = elements[i];
    }
    if (!state.empty()) {
      json& init = root["initial"];
      if (init.is_object()) init.erase("elements");
      init["state"] = {{"q", {state[0], state[1], state[2]}}, {"p", {state[3], state[4], state[5]}}};
    }
    return root;
  }
};

template <typename Fn>
int with_output(const vcm::cli::Scenario& sc, Fn&& body) {
  if (sc.output_path.empty()) return body(std::cout);
  std::ofstream file(sc.output_path, std::ios::binary);
  if (!file) throw ConfigError("cannot open output file '" + sc.output_path + "'");
  const int code = body(file);
  file.close();
  if (!file) throw vcm::Error("failed writing '" + sc.output_path + "'");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variation of constants for perturbed Kepler motion"};
  app.require_subcommand(1);

  ScenarioFlags propagate_flags, elements_flags, brackets_flags, varconst_flags;
  auto* propagate = app.add_subcommand("propagate", "Kepler or direct perturbed trajectory");
  propagate_flags.attach(propagate);
  auto* elements = app.add_subcommand("elements", "Element <-> state conversion at t0");
  elements_flags.attach(elements);
  bool round_trip = false;
  elements->add_flag("--round-trip", round_trip, "Append the state round-trip residual");
  auto* brackets = app.add_subcommand("brackets", "Lagrange and Poisson matrices at t0");
  brackets_flags.attach(brackets);
  auto* varconst = app.add_subcommand("varconst", "Integrate the element-rate equations");
  varconst_flags.attach(varconst);

  auto* verify = app.add_subcommand("verify", "Run the invariant suite");
  std::string filter;
  std::uint64_t seed = vcm::VerifyOptions{}.seed;
  bool flip_sign = false;
  std::optional<std::string> verify_output;
  verify->add_option("--filter", filter, "Run only checks whose group or criterion contains this");
  verify->add_option("--seed", seed, "Seed for the random fixtures");
  verify->add_option("-o,--output", verify_output, "Output CSV path (default stdout)");
  verify->add_flag("--flip-poisson-sign", flip_sign)->group("");
  brackets->add_flag("--flip-poisson-sign", flip_sign)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const vcm::PoissonSign sign =
      flip_sign ? vcm::PoissonSign::modern : vcm::PoissonSign::classical;
  try {
    if (*verify) {
      vcm::cli::Scenario sink;
      sink.output_path = verify_output.value_or("");
      return with_output(sink, [&](std::ostream& out) {
        return vcm::cli::cmd_verify({sign, seed}, filter, out);
      });
    }
    if (*propagate) {
      const auto sc = vcm::cli::resolve(propagate_flags.document());
      return with_output(sc, [&](std::ostream& out) { return vcm::cli::cmd_propagate(sc, out); });
    }
    if (*elements) {
      const auto sc = vcm::cli::resolve(elements_flags.document(), false);
      return with_output(sc, [&](std::ostream& out) {
        return vcm::cli::cmd_elements(sc, out, round_trip);
      });
    }
    if (*brackets) {
      const auto sc = vcm::cli::resolve(brackets_flags.document(), false);
      return with_output(sc, [&](std::ostream& out) {
        return vcm::cli::cmd_brackets(sc, out, sign);
      });
    }
    const auto sc = vcm::cli::resolve(varconst_flags.document());
    return with_output(sc, [&](std::ostream& out) { return vcm::cli::cmd_varconst(sc, out); });
  } catch (const ConfigError& e) {
    std::cerr << "vcm: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "vcm: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "vcm: error: " << e.what() << "\n";
    return 1;
  }
}
