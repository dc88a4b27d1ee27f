#include "sgn/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgn/baselines.hpp"
#include "sgn/bench.hpp"
#include "sgn/ensemble.hpp"
#include "sgn/errors.hpp"
#include "sgn/identifiability.hpp"
#include "sgn/io.hpp"
#include "sgn/metrics.hpp"
#include "sgn/solver.hpp"
#include "sgn/spectral_init.hpp"

namespace sgn {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProbePositive = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 64;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string tok = text.substr(pos, comma - pos);
    if (!tok.empty()) {
      int v = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw CLI::ValidationError("list", "not an integer: " + tok);
      out.push_back(v);
    }
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string tok = text.substr(pos, comma - pos);
    if (!tok.empty()) {
      try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        out.push_back(v);
      } catch (const std::exception&) {
        throw CLI::ValidationError("list", "not a number: " + tok);
      }
    }
    pos = comma + 1;
  }
  return out;
}

NoiseSpec::Kind parse_noise_kind(const std::string& name) {
  if (name == "none") return NoiseSpec::Kind::none;
  if (name == "gaussian") return NoiseSpec::Kind::gaussian;
  return NoiseSpec::Kind::laplace;
}

StorageMode pick_storage(const std::string& mode, int n, int m) {
  if (mode == "materialized") return StorageMode::materialized;
  if (mode == "streamed") return StorageMode::streamed;
  const std::uint64_t bytes = static_cast<std::uint64_t>(m) * n * n * sizeof(double);
  return bytes <= (128ull << 20) ? StorageMode::materialized : StorageMode::streamed;
}

// Inject `--key value` tokens from a JSON config file right after the
// subcommand name; explicit flags come later and win (TakeLast policy).
void expand_config(std::vector<std::string>& args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) file = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) file = args[i].substr(9);
  }
  if (file.empty()) return;
  std::ifstream in(file);
  if (!in) throw InvalidInput("cannot open config file: " + file);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw InvalidInput(std::string("config parse error: ") + e.what());
  }
  if (!cfg.is_object()) throw InvalidInput("config must be a JSON object");

  std::size_t insert_at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      insert_at = i + 1;
      break;
    }
  }
  std::vector<std::string> tokens;
  for (const auto& [key, value] : cfg.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) tokens.push_back("--" + key);
      continue;
    }
    tokens.push_back("--" + key);
    if (value.is_string()) tokens.push_back(value.get<std::string>());
    else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ',';
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      tokens.push_back(joined);
    } else tokens.push_back(value.dump());
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(insert_at), tokens.begin(), tokens.end());
}

struct SolveOpts {
  int n = 0, m = 0, s = 0;
  std::uint64_t seed = 1;
  std::string method = "sgn";
  std::string init = "alg1";
  double tsi_alpha = 0.5;
  std::string noise = "none";
  double sigma = 0.0;
  double mu = 0.32;
  int max_iters = 0;  // 0: 200 for sgn, 2000 for proxies
  double tol_residual = 1e-12;
  double tol_stagnation = 1e-14;
  double jitter = 1e-10;
  std::string phi = "m";
  std::string storage = "auto";
  std::string out = "out";
  bool no_trace = false;
  CLI::Option* mu_opt = nullptr;
};

nlohmann::json solve_manifest(const SolveOpts& o) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = "solve";
  j["n"] = o.n;
  j["m"] = o.m;
  j["s"] = o.s;
  j["seed"] = o.seed;
  j["method"] = o.method;
  j["init"] = o.init;
  j["tsi_alpha"] = o.tsi_alpha;
  j["noise"] = o.noise;
  j["sigma"] = o.sigma;
  if (o.mu_opt && o.mu_opt->count() > 0) j["mu"] = o.mu;
  else j["mu"] = "auto";
  j["max_iters"] = o.max_iters;
  j["tol_residual"] = o.tol_residual;
  j["tol_stagnation"] = o.tol_stagnation;
  j["jitter"] = o.jitter;
  j["phi_convention"] = o.phi;
  j["storage"] = o.storage;
  j["seed_derivation"] =
      "root={seed,0}; ensemble=child(root,0), signal=child(root,1), noise=child(root,2)";
  return j;
}

int run_solve(const SolveOpts& o) {
  const RngSeed root{o.seed, 0};
  const StorageMode mode = pick_storage(o.storage, o.n, o.m);
  const MeasurementEnsemble ens = gen_ensemble(o.n, o.m, child_seed(root, 0), mode);
  const SparseSignal sig = gen_signal(o.n, o.s, child_seed(root, 1));
  NoiseSpec noise;
  noise.kind = parse_noise_kind(o.noise);
  noise.sigma = o.sigma;
  const Observations obs = measure(ens, sig, noise, child_seed(root, 2));
  const PhiConvention conv = o.phi == "m" ? PhiConvention::inv_m : PhiConvention::inv_2m;

  const InitResult init = o.init == "alg1" ? initialize(ens, obs.y, o.s, conv)
                                           : tsi_init(ens, obs.y, o.tsi_alpha, conv);

  const bool proxy = o.method != "sgn";
  const int max_iters = o.max_iters > 0 ? o.max_iters : (proxy ? 2000 : 200);
  const bool mu_given = o.mu_opt && o.mu_opt->count() > 0;

  SolveResult solved;
  if (!proxy) {
    SolverConfig cfg;
    cfg.s = o.s;
    if (mu_given) cfg.step_mu = o.mu;
    cfg.max_iters = max_iters;
    cfg.tol_residual = o.tol_residual;
    cfg.tol_stagnation = o.tol_stagnation;
    cfg.jitter = o.jitter;
    cfg.phi_conv = conv;
    cfg.truth = &sig.x;
    solved = sgn_solve(ens, obs.y, init.x0, cfg);
  } else {
    BaselineConfig cfg;
    cfg.s = o.s;
    if (mu_given) cfg.step_mu = o.mu;
    cfg.max_iters = max_iters;
    cfg.tol_residual = o.tol_residual;
    cfg.tol_stagnation = o.tol_stagnation;
    cfg.phi_conv = conv;
    cfg.truth = &sig.x;
    solved = o.method == "wf" ? wf_solve(ens, obs.y, init.x0, cfg)
                              : iht_solve(ens, obs.y, init.x0, cfg);
  }

  const std::filesystem::path dir(o.out);
  write_text_file(dir / "solution.csv", vector_to_csv(solved.x));
  if (!o.no_trace) write_text_file(dir / "trace.jsonl", trace_to_jsonl(solved.trace));

  nlohmann::json summary = trace_summary_json(solved.trace);
  summary["rel_error"] = rel_error(solved.x, sig.x);
  summary["dist"] = dist(solved.x, sig.x);
  summary["support_exact"] = support_match(solved.x, sig.x);
  summary["init_rel_error"] = rel_error(init.x0, sig.x);
  summary["init_support_size"] = init.support.size();
  summary["storage"] = mode == StorageMode::materialized ? "materialized" : "streamed";
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  write_text_file(dir / "manifest.json", solve_manifest(o).dump(2) + "\n");

  std::cout << "status=" << to_string(solved.trace.status)
            << " iterations=" << solved.trace.iterations
            << " rel_error=" << fmt_double(summary["rel_error"].get<double>()) << "\n";

  switch (solved.trace.status) {
    case TermStatus::converged: return kExitOk;
    case TermStatus::numerical_failure: return kExitNumerical;
    default: return kExitNotConverged;
  }
}

struct SweepOpts {
  std::string preset;
  std::string experiment;
  int n = 0, s = 0;
  std::string m_list, s_list, snr_list, methods, tsi_alphas;
  int trials = 0;
  std::uint64_t seed = 1;
  int jobs = 1;
  int max_iters = 0, max_iters_proxy = 0;
  double success_threshold = -1.0;
  std::string noise = "";
  double sigma = -1.0;
  std::uint64_t materialize_mb = 0;
  std::string out = "out";
  bool raw = false;
};

int run_sweep_cmd(const SweepOpts& o) {
  SweepSpec spec;
  if (!o.preset.empty()) {
    spec = preset_sweep(o.preset);
  } else {
    if (o.experiment == "init_compare") spec.experiment = Experiment::init_compare;
    else if (o.experiment == "phase_map") spec.experiment = Experiment::phase_map;
    else if (o.experiment == "convergence") spec.experiment = Experiment::convergence;
    else if (o.experiment == "iteration_count") spec.experiment = Experiment::iteration_count;
    else if (o.experiment == "noise_sweep") spec.experiment = Experiment::noise_sweep;
    else throw InvalidInput("unknown experiment: " + o.experiment);
    spec.experiment == Experiment::convergence ? void(spec.record_curves = true) : void();
  }
  if (o.n > 0) spec.n = o.n;
  if (o.s > 0) spec.s = o.s;
  if (!o.m_list.empty()) spec.m_values = parse_int_list(o.m_list);
  if (!o.s_list.empty()) spec.s_values = parse_int_list(o.s_list);
  if (!o.snr_list.empty()) spec.snr_values = parse_double_list(o.snr_list);
  if (!o.methods.empty()) {
    spec.methods.clear();
    std::size_t pos = 0;
    while (pos <= o.methods.size()) {
      const std::size_t comma = std::min(o.methods.find(',', pos), o.methods.size());
      const std::string tok = o.methods.substr(pos, comma - pos);
      if (tok == "sgn") spec.methods.push_back(SolveMethod::sgn);
      else if (tok == "wf") spec.methods.push_back(SolveMethod::wf);
      else if (tok == "iht") spec.methods.push_back(SolveMethod::iht);
      else if (!tok.empty()) throw InvalidInput("unknown method: " + tok);
      pos = comma + 1;
    }
  }
  if (!o.tsi_alphas.empty()) spec.tsi_alphas = parse_double_list(o.tsi_alphas);
  if (o.trials > 0) spec.trials = o.trials;
  spec.master_seed = o.seed;
  spec.jobs = o.jobs;
  if (o.max_iters > 0) spec.max_iters = o.max_iters;
  if (o.max_iters_proxy > 0) spec.max_iters_proxy = o.max_iters_proxy;
  if (o.success_threshold > 0) spec.success_threshold = o.success_threshold;
  if (!o.noise.empty()) spec.noise.kind = parse_noise_kind(o.noise);
  if (o.sigma >= 0) spec.noise.sigma = o.sigma;
  if (o.materialize_mb > 0) spec.materialize_bytes = o.materialize_mb << 20;

  const SweepResult result = run_sweep(spec);
  const std::filesystem::path dir(o.out);
  write_text_file(dir / "sweep.csv", sweep_csv(result));
  nlohmann::json manifest = sweep_manifest(result);
  manifest["preset"] = o.preset;
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  if (o.raw) write_text_file(dir / "raw.jsonl", sweep_raw_jsonl(result));
  std::cout << "cells=" << cell_count(spec) << " trials=" << spec.trials << " -> " << o.out
            << "/sweep.csv\n";
  return kExitOk;
}

struct ProbeOpts {
  std::string mode = "s1";
  int n = 0, m = 0, s = 2;
  std::uint64_t seed = 1;
  int budget = 200;
  double collision_tol = 1e-8;
  double sep_tol = 1e-3;
  std::string out;
};

int run_probe(const ProbeOpts& o) {
  const RngSeed root{o.seed, 0};
  const MeasurementEnsemble ens =
      gen_ensemble(o.n, o.m, child_seed(root, 0), StorageMode::materialized);
  nlohmann::json report;
  report["version"] = kVersion;
  report["command"] = "probe";
  report["mode"] = o.mode;
  report["n"] = o.n;
  report["m"] = o.m;
  report["seed"] = o.seed;

  int exit_code = kExitOk;
  if (o.mode != "collision") {
    const S1Certificate cert = s1_injectivity_check(ens);
    report["injective"] = cert.injective;
    if (cert.zero_diag_index >= 0) report["zero_diag_index"] = cert.zero_diag_index;
    if (cert.collinear_pair.first >= 0)
      report["collinear_pair"] = {cert.collinear_pair.first, cert.collinear_pair.second};
    std::cout << (cert.injective ? "injective on 1-sparse signals\n"
                                 : "not injective on 1-sparse signals\n");
    exit_code = cert.injective ? kExitOk : kExitProbePositive;
  } else {
    CollisionOpts opts;
    opts.collision_tol = o.collision_tol;
    opts.sep_tol = o.sep_tol;
    const CollisionReport rep = collision_scan(ens, o.s, o.budget, child_seed(root, 4), opts);
    report["s"] = o.s;
    report["budget"] = o.budget;
    report["found"] = rep.found;
    report["attempts"] = rep.attempts;
    report["support_x"] = rep.support_x;
    report["support_z"] = rep.support_z;
    if (rep.found) {
      report["residual"] = rep.residual;
      report["separation"] = rep.separation;
      std::vector<double> xv(rep.x.data(), rep.x.data() + rep.x.size());
      std::vector<double> zv(rep.z.data(), rep.z.data() + rep.z.size());
      report["x"] = xv;
      report["z"] = zv;
    } else if (std::isfinite(rep.residual)) {
      report["best_residual"] = rep.residual;
    }
    std::cout << (rep.found ? "collision found\n" : "no collision found\n");
    exit_code = rep.found ? kExitProbePositive : kExitOk;
  }
  if (!o.out.empty())
    write_text_file(std::filesystem::path(o.out) / "report.json", report.dump(2) + "\n");
  return exit_code;
}

struct GenOpts {
  int n = 0, m = 0, s = 0;
  std::uint64_t seed = 1;
  std::string noise = "none";
  double sigma = 0.0;
  std::string storage = "auto";
  std::string out = "out";
};

int run_gen(const GenOpts& o) {
  const RngSeed root{o.seed, 0};
  const MeasurementEnsemble ens =
      gen_ensemble(o.n, o.m, child_seed(root, 0), pick_storage(o.storage, o.n, o.m));
  const SparseSignal sig = gen_signal(o.n, o.s, child_seed(root, 1));
  NoiseSpec noise;
  noise.kind = parse_noise_kind(o.noise);
  noise.sigma = o.sigma;
  const Observations obs = measure(ens, sig, noise, child_seed(root, 2));

  const std::filesystem::path dir(o.out);
  write_text_file(dir / "signal.csv", vector_to_csv(sig.x));
  std::string ycsv = "index,y,clean_y,noise\n";
  for (int i = 0; i < ens.m(); ++i) {
    ycsv += std::to_string(i) + ',' + fmt_double(obs.y[i]) + ',' + fmt_double(obs.clean_y[i]) +
            ',' + fmt_double(obs.noise[i]) + '\n';
  }
  write_text_file(dir / "y.csv", ycsv);
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["command"] = "gen";
  manifest["n"] = o.n;
  manifest["m"] = o.m;
  manifest["s"] = o.s;
  manifest["seed"] = o.seed;
  manifest["noise"] = o.noise;
  manifest["sigma"] = o.sigma;
  manifest["seed_derivation"] =
      "root={seed,0}; ensemble=child(root,0), signal=child(root,1), noise=child(root,2)";
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote " << o.out << "/signal.csv, y.csv, manifest.json\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    expand_config(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"sparse recovery from quadratic measurements"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SolveOpts so;
  auto* solve = app.add_subcommand("solve", "generate one instance and run a solver");
  solve->add_option("--config", "JSON file with flag defaults (explicit flags win)");
  solve->add_option("--n", so.n, "dimension")->required()->check(CLI::PositiveNumber);
  solve->add_option("--m", so.m, "measurements")->required()->check(CLI::PositiveNumber);
  solve->add_option("--s", so.s, "sparsity")->required()->check(CLI::PositiveNumber);
  solve->add_option("--seed", so.seed, "master seed");
  solve->add_option("--method", so.method)->check(CLI::IsMember({"sgn", "wf", "iht"}));
  solve->add_option("--init", so.init)->check(CLI::IsMember({"alg1", "tsi"}));
  solve->add_option("--tsi-alpha", so.tsi_alpha)->check(CLI::PositiveNumber);
  solve->add_option("--noise", so.noise)->check(CLI::IsMember({"none", "gaussian", "laplace"}));
  solve->add_option("--sigma", so.sigma)->check(CLI::NonNegativeNumber);
  so.mu_opt = solve->add_option("--mu", so.mu, "step scale mu*phi^2 (default 0.32)")
                  ->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", so.max_iters)->check(CLI::NonNegativeNumber);
  solve->add_option("--tol-residual", so.tol_residual)->check(CLI::NonNegativeNumber);
  solve->add_option("--tol-stagnation", so.tol_stagnation)->check(CLI::NonNegativeNumber);
  solve->add_option("--jitter", so.jitter)->check(CLI::NonNegativeNumber);
  solve->add_option("--phi-convention", so.phi)->check(CLI::IsMember({"m", "2m"}));
  solve->add_option("--storage", so.storage)
      ->check(CLI::IsMember({"auto", "materialized", "streamed"}));
  solve->add_option("--out", so.out, "output directory");
  solve->add_flag("--no-trace", so.no_trace, "skip trace.jsonl");

  SweepOpts wo;
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo benchmark grid");
  sweep->add_option("--config", "JSON file with flag defaults (explicit flags win)");
  sweep->add_option("--preset", wo.preset,
                    "experiment1|experiment2|experiment3|experiment4|iteration_count")
      ->check(CLI::IsMember({"experiment1", "experiment2", "experiment3", "experiment4",
                             "iteration_count"}));
  sweep->add_option("--experiment", wo.experiment,
                    "init_compare|phase_map|convergence|iteration_count|noise_sweep");
  sweep->add_option("--n", wo.n)->check(CLI::PositiveNumber);
  sweep->add_option("--s", wo.s)->check(CLI::PositiveNumber);
  sweep->add_option("--m-list", wo.m_list, "comma separated");
  sweep->add_option("--s-list", wo.s_list, "comma separated");
  sweep->add_option("--snr-list", wo.snr_list, "comma separated");
  sweep->add_option("--methods", wo.methods, "comma separated: sgn,wf,iht");
  sweep->add_option("--tsi-alphas", wo.tsi_alphas, "comma separated");
  sweep->add_option("--trials", wo.trials)->check(CLI::PositiveNumber);
  sweep->add_option("--seed", wo.seed);
  sweep->add_option("--jobs", wo.jobs)->check(CLI::PositiveNumber);
  sweep->add_option("--max-iters", wo.max_iters)->check(CLI::PositiveNumber);
  sweep->add_option("--max-iters-proxy", wo.max_iters_proxy)->check(CLI::PositiveNumber);
  sweep->add_option("--success-threshold", wo.success_threshold)->check(CLI::PositiveNumber);
  sweep->add_option("--noise", wo.noise)->check(CLI::IsMember({"none", "gaussian", "laplace"}));
  sweep->add_option("--sigma", wo.sigma)->check(CLI::NonNegativeNumber);
  sweep->add_option("--materialize-mb", wo.materialize_mb, "storage switch threshold");
  sweep->add_option("--out", wo.out, "output directory");
  sweep->add_flag("--raw", wo.raw, "also write raw.jsonl");

  ProbeOpts po;
  auto* probe = app.add_subcommand("probe", "identifiability checks");
  probe->add_option("--config", "JSON file with flag defaults (explicit flags win)");
  probe->add_option("--mode", po.mode)->check(CLI::IsMember({"s1", "s1-check", "collision"}));
  probe->add_option("--n", po.n)->required()->check(CLI::PositiveNumber);
  probe->add_option("--m", po.m)->required()->check(CLI::PositiveNumber);
  probe->add_option("--s", po.s)->check(CLI::PositiveNumber);
  probe->add_option("--seed", po.seed);
  probe->add_option("--budget", po.budget)->check(CLI::PositiveNumber);
  probe->add_option("--collision-tol", po.collision_tol)->check(CLI::PositiveNumber);
  probe->add_option("--sep-tol", po.sep_tol)->check(CLI::PositiveNumber);
  probe->add_option("--out", po.out, "write report.json here");

  GenOpts go;
  auto* gen = app.add_subcommand("gen", "write one synthetic instance");
  gen->add_option("--config", "JSON file with flag defaults (explicit flags win)");
  gen->add_option("--n", go.n)->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", go.m)->required()->check(CLI::PositiveNumber);
  gen->add_option("--s", go.s)->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", go.seed);
  gen->add_option("--noise", go.noise)->check(CLI::IsMember({"none", "gaussian", "laplace"}));
  gen->add_option("--sigma", go.sigma)->check(CLI::NonNegativeNumber);
  gen->add_option("--storage", go.storage)
      ->check(CLI::IsMember({"auto", "materialized", "streamed"}));
  gen->add_option("--out", go.out, "output directory");

  std::vector<const char*> ptrs;
  ptrs.push_back(argc > 0 ? argv[0] : "sgn");
  for (const auto& a : args) ptrs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) return run_solve(so);
    if (sweep->parsed()) return run_sweep_cmd(wo);
    if (probe->parsed()) return run_probe(po);
    if (gen->parsed()) return run_gen(go);
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace sgn
