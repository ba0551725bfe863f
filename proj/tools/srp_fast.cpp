// Command-line driver for the SRP simulation study.
#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "srp/experiment.hpp"

namespace {

void configure_logging() {
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  if (const char* level = std::getenv("SRP_FAST_LOG"))
    spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Fast steered response power localization: simulation, evaluation and benchmark"};

  std::string config_path, preset_name = "paper", modes, naux, snr, out;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  bool benchmark = false, complexity_only = false;
  app.add_option("--config", config_path, "TOML or JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--preset", preset_name, "Base preset: paper or desk");
  app.add_option("--modes", modes, "Comma-separated maps to compute: conventional,approx,oracle");
  app.add_option("--naux", naux, "Comma-separated auxiliary sample counts, e.g. 0,1,2");
  app.add_option("--snr", snr, "Comma-separated SNRs in dB (inf for no noise)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Master random seed");
  app.add_option("--out", out, "Output directory");
  app.add_flag("--benchmark", benchmark, "Also time conventional against approximated SRP");
  app.add_flag("--complexity-only", complexity_only, "Only write the closed-form complexity report");
  CLI11_PARSE(app, argc, argv);

  try {
    srp::ExperimentConfig config = srp::preset(preset_name);
    if (!config_path.empty()) config = srp::load_config(config_path, config);
    if (!modes.empty()) {
      srp::ModeFlags m = config.modes;
      m.conventional = m.approx = m.oracle = false;
      config.modes = srp::parse_modes(modes, m);
    }
    if (!naux.empty()) config.n_aux = srp::parse_int_list(naux);
    if (!snr.empty()) config.snr_db = srp::parse_double_list(snr);
    if (app.count("--jobs")) config.jobs = jobs;
    if (app.count("--seed")) config.seed = seed;
    if (!out.empty()) config.out_dir = out;
    if (benchmark) config.modes.benchmark = true;
    if (complexity_only) config.modes.complexity_only = true;
    config.validate();

    const auto result = srp::run_experiment(config);
    srp::write_results(result, config, config.out_dir);

    for (const auto& r : result.complexity)
      std::cout << fmt::format("n_aux={} N={:.2f} C_conv={} C_samp={} C_int={} R={:.5f}\n", r.n_aux,
                               r.average_samples, r.c_conv, r.c_samp, r.c_int, r.r);
    for (const auto& c : result.summaries) {
      std::cout << fmt::format("snr={} n_aux={} mode={} e_local median={:.2f} deg", c.snr_db,
                               c.n_aux, srp::to_string(c.mode), c.e_local.median);
      if (c.e_appr) std::cout << fmt::format(" e_appr median={:.2f} dB", c.e_appr->median);
      std::cout << "\n";
    }
    for (const auto& b : result.benchmark)
      std::cout << fmt::format("benchmark n_aux={} speedup={:.1f} (theory {:.1f})\n", b.n_aux,
                               b.measured_speedup, b.theoretical_speedup);
    std::cout << "results written to " << config.out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "srp_fast: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
