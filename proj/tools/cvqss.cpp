#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cvqss/config.hpp"
#include "cvqss/keyrate.hpp"
#include "cvqss/model_core.hpp"
#include "cvqss/montecarlo.hpp"
#include "cvqss/optimizer.hpp"
#include "cvqss/postprocess.hpp"
#include "cvqss/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoKey = 3;
constexpr int kExitEstimation = 4;
constexpr int kExitIo = 5;

struct GlobalOpts {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out;
  int threads = 0;
};

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CVQSS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // library default: hardware concurrency
}

cvqss::Config load_config(const GlobalOpts& opts) {
  if (opts.config_path.empty())
    throw cvqss::ConfigError("this command needs --config <file>");
  return cvqss::Config::from_file(opts.config_path);
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cvqss::IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_binary(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cvqss::IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw cvqss::IoError("write failed on " + path);
}

void print_keyrate_report(std::ostream& os, const cvqss::KeyRateReport& report) {
  os << "va = " << report.va << '\n';
  for (const auto& pr : report.per_player) {
    os << "player_" << pr.honest_index << ": i_ab = " << pr.i_ab
       << ", chi_be = " << pr.chi_be << ", lambda = [" << pr.lambda[0] << ", "
       << pr.lambda[1] << ", " << pr.lambda[2] << ", " << pr.lambda[3] << ", "
       << pr.lambda[4] << "], r = " << pr.rate << '\n';
  }
  os << "r_qss = " << report.r_qss << '\n';
  os << "argmin_player = " << report.argmin << '\n';
}

int cmd_keyrate(const GlobalOpts& opts, double va_flag) {
  const cvqss::Config cfg = load_config(opts);
  const cvqss::NetworkLayout& layout = cfg.require_layout();
  double va = 0.0;
  if (va_flag > 0.0) {
    va = va_flag;
  } else if (cfg.va) {
    va = *cfg.va;
  } else {
    va = cvqss::optimize_va(layout, cfg.params, cfg.optimizer).va_opt;
  }
  const cvqss::KeyRateReport report = cvqss::qss_rate(layout, cfg.params, va);
  print_keyrate_report(std::cout, report);
  return report.r_qss > 0.0 ? kExitOk : kExitNoKey;
}

int cmd_optimize(const GlobalOpts& opts) {
  const cvqss::Config cfg = load_config(opts);
  const cvqss::OptimizationResult res =
      cvqss::optimize_va(cfg.require_layout(), cfg.params, cfg.optimizer);
  std::cout << "va_opt = " << res.va_opt << '\n'
            << "r_opt = " << res.r_opt << '\n'
            << "evaluations = " << res.evaluations << '\n'
            << "bracket = [" << res.bracket_lo << ", " << res.bracket_hi << "]\n"
            << "va_at_boundary = " << (res.at_boundary ? 1 : 0) << '\n'
            << "v_lo = " << cfg.optimizer.v_lo << '\n'
            << "v_hi = " << cfg.optimizer.v_hi << '\n'
            << "grid_points = " << cfg.optimizer.grid_points << '\n'
            << "refine_iters = " << cfg.optimizer.refine_iters << '\n';
  return kExitOk;
}

int cmd_sweep(const GlobalOpts& opts) {
  cvqss::Config cfg = load_config(opts);
  if (!cfg.sweep) throw cvqss::ConfigError("sweep needs a sweep section in the config");
  if (opts.out.empty()) throw cvqss::ConfigError("sweep needs --out <csv>");
  cfg.sweep->threads = resolve_threads(opts.threads);
  const auto rows = cvqss::run_sweep(*cfg.sweep);
  cvqss::write_sweep_csv(rows, opts.out);
  cvqss::emit_plot_script(opts.out, opts.out + ".gp");
  std::cout << "wrote " << rows.size() << " rows to " << opts.out << '\n';
  return kExitOk;
}

int cmd_simulate(const GlobalOpts& opts, std::size_t pulses_flag) {
  const cvqss::Config cfg = load_config(opts);
  if (opts.out.empty()) throw cvqss::ConfigError("simulate needs --out <csv>");
  if (!cfg.va) throw cvqss::ConfigError("simulate needs va in the config");
  cvqss::SimOptions sim;
  sim.seed = opts.seed;
  sim.pulses = pulses_flag > 0 ? pulses_flag : cfg.pulses;
  sim.va = *cfg.va;
  sim.threads = resolve_threads(opts.threads);
  const cvqss::TrialBatch batch =
      cvqss::simulate_batch(cfg.require_layout(), cfg.params, sim);
  cvqss::write_batch_csv(batch, opts.out);
  std::cout << "wrote " << batch.pulses << " pulses to " << opts.out << '\n';
  return kExitOk;
}

int cmd_estimate(const GlobalOpts& opts, const std::string& in_path,
                 const std::string& rounds_csv) {
  const cvqss::Config cfg = load_config(opts);
  if (in_path.empty()) throw cvqss::ConfigError("estimate needs --in <batch csv>");
  if (!cfg.va) throw cvqss::ConfigError("estimate needs va in the config");
  const cvqss::TrialBatch batch = cvqss::read_batch_csv(in_path);
  const cvqss::MaterializedBatch view(batch);
  cvqss::PostprocessOptions pp = cfg.postprocess;
  pp.seed = opts.seed;
  pp.threads = resolve_threads(opts.threads);
  const cvqss::QssRoundReport report =
      cvqss::qss_round(view, cfg.params, cfg.require_layout(), *cfg.va, pp);

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!opts.out.empty()) {
    file.open(opts.out);
    if (!file) throw cvqss::IoError("cannot open " + opts.out + " for writing");
    os = &file;
  }
  *os << "samples_t = " << report.transmittance.samples << '\n';
  for (std::size_t k = 0; k < report.transmittance.players.size(); ++k) {
    const auto& est = report.transmittance.players[k];
    *os << "t_hat_" << (k + 1) << " = " << est.t_hat << '\n';
    *os << "t_se_" << (k + 1) << " = " << est.se_t << '\n';
  }
  for (const auto& round : report.rounds) {
    *os << "round_" << round.honest << "_r_hat = " << round.r_hat << '\n';
    *os << "round_" << round.honest << "_eps_hat = " << round.eps_hat << '\n';
  }
  *os << "r_min = " << report.r_min << '\n';
  *os << "argmin_player = " << report.argmin << '\n';
  *os << "aborted = " << (report.aborted ? 1 : 0) << '\n';

  if (!rounds_csv.empty()) {
    std::ofstream csv(rounds_csv, std::ios::binary);
    if (!csv) throw cvqss::IoError("cannot open " + rounds_csv + " for writing");
    csv << "honest,samples,key_pulses,va_hat,t_hat,se_t,eps_hat,se_eps,r_hat,aborted\n";
    for (const auto& r : report.rounds)
      csv << r.honest << ',' << r.samples << ',' << r.key_pulses << ',' << r.va_hat << ','
          << r.t_hat << ',' << r.se_t << ',' << r.eps_hat << ',' << r.se_eps << ','
          << r.r_hat << ',' << (r.aborted ? 1 : 0) << '\n';
  }
  return report.aborted ? kExitNoKey : kExitOk;
}

int cmd_figures(const GlobalOpts& opts) {
  if (opts.out.empty()) throw cvqss::ConfigError("figures needs --out <dir>");
  std::filesystem::create_directories(opts.out);
  const int threads = resolve_threads(opts.threads);
  const std::pair<const char*, cvqss::SweepSpec> figures[] = {
      {"fig3", cvqss::figure3_spec()},
      {"fig4", cvqss::figure4_spec()},
      {"fig5", cvqss::figure5_spec()},
  };
  for (const auto& [name, spec_base] : figures) {
    cvqss::SweepSpec spec = spec_base;
    spec.threads = threads;
    const auto rows = cvqss::run_sweep(spec);
    const std::string csv = (std::filesystem::path(opts.out) / (std::string(name) + ".csv")).string();
    cvqss::write_sweep_csv(rows, csv);
    cvqss::emit_plot_script(csv, csv + ".gp");
    std::cout << name << ": " << rows.size() << " rows\n";
  }
  return kExitOk;
}

int cmd_share(const GlobalOpts& opts, const std::string& in_path,
              const std::vector<std::string>& key_paths, bool is_recover) {
  if (in_path.empty() || opts.out.empty() || key_paths.empty())
    throw cvqss::ConfigError("share/recover need --in, --out and at least one --key");
  const auto input = read_binary(in_path);
  std::vector<std::vector<std::uint8_t>> keys;
  keys.reserve(key_paths.size());
  for (const auto& path : key_paths) keys.push_back(read_binary(path));
  const auto output = is_recover ? cvqss::recover(input, keys) : cvqss::share(input, keys);
  write_binary(opts.out, output);
  std::cout << (is_recover ? "recovered " : "shared ") << output.size() << " bytes to "
            << opts.out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential CV quantum secret sharing: key rates, simulation, post-processing"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts opts;
  app.add_option("--config", opts.config_path, "JSON configuration file");
  app.add_option("--seed", opts.seed, "64-bit master seed");
  app.add_option("--out", opts.out, "output path");
  app.add_option("--threads", opts.threads, "worker threads (0 = auto; CVQSS_THREADS)");

  auto* keyrate = app.add_subcommand("keyrate", "closed-form QSS key rate at one point");
  double va_flag = 0.0;
  keyrate->add_option("--va", va_flag, "modulation variance (default: config va or optimized)");

  auto* optimize = app.add_subcommand("optimize", "optimize the modulation variance");
  auto* sweep = app.add_subcommand("sweep", "run the configured sweep to CSV");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo quantum stage to CSV");
  std::size_t pulses_flag = 0;
  simulate->add_option("--pulses", pulses_flag, "pulse count (default: config)");

  auto* estimate = app.add_subcommand("estimate", "post-process a simulated batch");
  std::string in_path, rounds_csv;
  estimate->add_option("--in", in_path, "batch CSV from simulate");
  estimate->add_option("--csv", rounds_csv, "also write per-round estimates CSV");

  auto* figures = app.add_subcommand("figures", "built-in reference sweeps + plot scripts");

  auto* share = app.add_subcommand("share", "XOR (n,n) secret sharing of a file");
  auto* recover = app.add_subcommand("recover", "recover a shared file");
  std::string share_in;
  std::vector<std::string> key_paths;
  for (CLI::App* cmd : {share, recover}) {
    cmd->add_option("--in", share_in, "input file");
    cmd->add_option("--key", key_paths, "key file (repeatable)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (keyrate->parsed()) return cmd_keyrate(opts, va_flag);
    if (optimize->parsed()) return cmd_optimize(opts);
    if (sweep->parsed()) return cmd_sweep(opts);
    if (simulate->parsed()) return cmd_simulate(opts, pulses_flag);
    if (estimate->parsed()) return cmd_estimate(opts, in_path, rounds_csv);
    if (figures->parsed()) return cmd_figures(opts);
    if (share->parsed()) return cmd_share(opts, share_in, key_paths, false);
    if (recover->parsed()) return cmd_share(opts, share_in, key_paths, true);
  } catch (const cvqss::EstimationError& err) {
    std::cerr << "estimation failure" << (err.tamper ? " (possible tampering)" : "") << ": "
              << err.what() << '\n';
    return kExitEstimation;
  } catch (const cvqss::IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return kExitIo;
  } catch (const cvqss::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const cvqss::UnphysicalError& err) {
    std::cerr << "unphysical parameters: " << err.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
