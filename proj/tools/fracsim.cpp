#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "fracsim/mlf.hpp"
#include "fracsim/study.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("FRACSIM_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0' || s[0] == '-') throw fracsim::ConfigError("FRACSIM_SEED: expected a nonnegative integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and convergence studies for the stochastic fractional wave equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string out_dir;
  auto add_study = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config_path, "JSON study configuration")->required();
    cmd->add_option("--seed", seed, "Override the configured seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", out_dir, "Directory for the CSV and summary");
    return cmd;
  };
  auto* spectral = add_study("spectral-study", "Spectral Galerkin rate study");
  auto* fem = add_study("fem-study", "Finite element rate study");

  double rho = 1.0, mu = 1.0, z = 0.0, tol = fracsim::kDefaultMlfTol;
  auto* mlf = app.add_subcommand("mlf", "Evaluate the Mittag-Leffler function E_{rho,mu}(z)");
  mlf->add_option("--rho", rho, "First parameter")->required();
  mlf->add_option("--mu", mu, "Second parameter")->default_val(1.0);
  mlf->add_option("--z", z, "Real argument")->required();
  mlf->add_option("--tol", tol, "Absolute tolerance")->default_val(fracsim::kDefaultMlfTol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (mlf->parsed()) {
      std::printf("%.17g\n", fracsim::mlf({rho, mu, z, tol}));
      return 0;
    }
    const auto method = spectral->parsed() ? fracsim::Method::spectral : fracsim::Method::fem;
    (void)fem;
    fracsim::StudyConfig cfg = fracsim::load_config(config_path, method);
    if (auto s = env_seed()) cfg.seed = *s;
    if (seed) cfg.seed = *seed;
    fracsim::RunOptions opts;
    opts.threads = threads;
    opts.out_dir = out_dir;
    opts.log = &std::cerr;
    fracsim::run_study(cfg, opts);
    return 0;
  } catch (const fracsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fracsim::StudyError& e) {
    std::cerr << (e.numerical() ? "numerical failure: " : "error: ") << e.what() << "\n";
    return e.numerical() ? kExitNumerical : 1;
  } catch (const fracsim::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fracsim::AccuracyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fracsim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
