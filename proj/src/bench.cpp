#include "sgn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "sgn/errors.hpp"
#include "sgn/io.hpp"

namespace sgn {

const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::init_compare: return "init_compare";
    case Experiment::phase_map: return "phase_map";
    case Experiment::convergence: return "convergence";
    case Experiment::iteration_count: return "iteration_count";
    case Experiment::noise_sweep: return "noise_sweep";
  }
  return "unknown";
}

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::sgn: return "sgn";
    case SolveMethod::wf: return "wf";
    case SolveMethod::iht: return "iht";
  }
  return "unknown";
}

namespace {

struct CellParams {
  int m = 0;
  int s = 0;
  double snr = 0.0;
};

int iteration_count_m(int n, int s) {
  return static_cast<int>(std::floor(10.0 * s * std::log(static_cast<double>(n))));
}

CellParams resolve_cell(const SweepSpec& spec, int cell) {
  CellParams p;
  p.s = spec.s;
  switch (spec.experiment) {
    case Experiment::init_compare:
      p.m = spec.m_values.at(cell);
      break;
    case Experiment::phase_map: {
      const int s_count = static_cast<int>(spec.s_values.size());
      p.m = spec.m_values.at(cell / s_count);
      p.s = spec.s_values.at(cell % s_count);
      break;
    }
    case Experiment::convergence:
      p.m = spec.m_values.at(0);
      break;
    case Experiment::iteration_count:
      p.s = spec.s_values.at(cell);
      p.m = iteration_count_m(spec.n, p.s);
      break;
    case Experiment::noise_sweep:
      p.m = spec.m_values.at(0);
      p.snr = spec.snr_values.at(cell);
      break;
  }
  return p;
}

double clamped_rel(double rel) { return std::max(rel, 1e-16); }

// First iteration whose recorded rel_error reaches the threshold, -1 if none.
int first_hit(const SolveTrace& trace, double threshold) {
  for (const auto& it : trace.iters)
    if (std::isfinite(it.rel_error) && it.rel_error <= threshold) return it.k;
  return -1;
}

std::vector<double> curve_from_trace(const SolveTrace& trace) {
  std::vector<double> curve;
  curve.reserve(trace.iters.size());
  for (const auto& it : trace.iters) curve.push_back(it.rel_error);
  return curve;
}

std::string init_label(double alpha) { return "tsi" + fmt_double(alpha); }

TrialOutcome failed_outcome(const std::string& method, const std::string& status) {
  TrialOutcome out;
  out.method = method;
  out.rel_error = 1.0;  // estimate treated as zero
  out.dist = 0.0;
  out.success = false;
  out.status = status;
  return out;
}

}  // namespace

int cell_count(const SweepSpec& spec) {
  switch (spec.experiment) {
    case Experiment::init_compare: return static_cast<int>(spec.m_values.size());
    case Experiment::phase_map:
      return static_cast<int>(spec.m_values.size() * spec.s_values.size());
    case Experiment::convergence: return 1;
    case Experiment::iteration_count: return static_cast<int>(spec.s_values.size());
    case Experiment::noise_sweep: return static_cast<int>(spec.snr_values.size());
  }
  return 0;
}

TrialRecord run_trial(const SweepSpec& spec, int cell_index, int trial_index) {
  const CellParams cell = resolve_cell(spec, cell_index);
  TrialRecord rec;
  rec.cell = cell_index;
  rec.trial = trial_index;
  rec.m = cell.m;
  rec.s = cell.s;
  rec.snr = cell.snr;

  const RngSeed root{spec.master_seed, 0};
  const RngSeed cell_seed = child_seed(root, static_cast<std::uint64_t>(cell_index));
  const RngSeed trial_seed = child_seed(cell_seed, static_cast<std::uint64_t>(trial_index));

  const std::uint64_t bytes =
      static_cast<std::uint64_t>(cell.m) * spec.n * spec.n * sizeof(double);
  const StorageMode mode =
      bytes <= spec.materialize_bytes ? StorageMode::materialized : StorageMode::streamed;

  const MeasurementEnsemble ens = gen_ensemble(spec.n, cell.m, child_seed(trial_seed, 0), mode);
  const SparseSignal sig = gen_signal(spec.n, cell.s, child_seed(trial_seed, 1));

  NoiseSpec noise = spec.noise;
  if (spec.experiment == Experiment::noise_sweep) {
    noise.kind = NoiseSpec::Kind::gaussian;
    noise.sigma = std::sqrt(sig.x.norm() / cell.snr);
  }
  const Observations obs = measure(ens, sig, noise, child_seed(trial_seed, 2));

  InitResult init;
  bool init_ok = true;
  std::string init_status;
  try {
    init = initialize(ens, obs.y, cell.s, spec.phi_conv);
  } catch (const NumericalError& e) {
    init_ok = false;
    init_status = std::string("init_failure: ") + e.what();
  }

  if (spec.experiment == Experiment::init_compare) {
    {
      TrialOutcome out;
      out.method = "alg1";
      if (init_ok) {
        out.rel_error = rel_error(init.x0, sig.x);
        out.dist = dist(init.x0, sig.x);
        out.status = "init";
      } else {
        out = failed_outcome("alg1", init_status);
      }
      out.success = out.rel_error <= spec.success_threshold;
      rec.outcomes.push_back(std::move(out));
    }
    for (double alpha : spec.tsi_alphas) {
      TrialOutcome out;
      out.method = init_label(alpha);
      try {
        const InitResult tsi = tsi_init(ens, obs.y, alpha, spec.phi_conv);
        out.rel_error = rel_error(tsi.x0, sig.x);
        out.dist = dist(tsi.x0, sig.x);
        out.status = "init";
      } catch (const NumericalError& e) {
        out = failed_outcome(out.method, std::string("init_failure: ") + e.what());
      }
      out.success = out.rel_error <= spec.success_threshold;
      rec.outcomes.push_back(std::move(out));
    }
    return rec;
  }

  for (SolveMethod method : spec.methods) {
    const char* label = to_string(method);
    if (!init_ok) {
      rec.outcomes.push_back(failed_outcome(label, init_status));
      continue;
    }
    TrialOutcome out;
    out.method = label;
    out.sigma = noise.sigma;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      SolveResult solved;
      if (method == SolveMethod::sgn) {
        SolverConfig cfg;
        cfg.s = cell.s;
        cfg.max_iters = spec.max_iters;
        cfg.tol_residual = spec.tol_residual;
        cfg.tol_stagnation = spec.tol_stagnation;
        cfg.phi_conv = spec.phi_conv;
        cfg.record_support = false;
        cfg.truth = &sig.x;
        solved = sgn_solve(ens, obs.y, init.x0, cfg);
      } else {
        BaselineConfig cfg;
        cfg.s = cell.s;
        cfg.max_iters = spec.max_iters_proxy;
        cfg.tol_residual = spec.tol_residual;
        cfg.tol_stagnation = spec.tol_stagnation;
        cfg.phi_conv = spec.phi_conv;
        cfg.truth = &sig.x;
        solved = method == SolveMethod::wf ? wf_solve(ens, obs.y, init.x0, cfg)
                                           : iht_solve(ens, obs.y, init.x0, cfg);
      }
      out.rel_error = rel_error(solved.x, sig.x);
      out.dist = dist(solved.x, sig.x);
      out.support_exact = support_match(solved.x, sig.x);
      out.status = to_string(solved.trace.status);
      const bool failed = solved.trace.status == TermStatus::numerical_failure;
      if (spec.experiment == Experiment::iteration_count) {
        out.iterations = first_hit(solved.trace, spec.success_threshold);
        out.success = !failed && out.iterations >= 0;
      } else {
        out.iterations = solved.trace.iterations;
        out.success = !failed && out.rel_error <= spec.success_threshold;
      }
      if (spec.record_curves) out.rel_error_curve = curve_from_trace(solved.trace);
    } catch (const NumericalError& e) {
      out = failed_outcome(label, std::string("numerical_failure: ") + e.what());
    } catch (const InvalidInput& e) {
      out = failed_outcome(label, std::string("invalid: ") + e.what());
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rec.outcomes.push_back(std::move(out));
  }
  return rec;
}

SweepResult run_sweep(const SweepSpec& spec) {
  const int cells = cell_count(spec);
  if (cells == 0 || spec.trials <= 0) throw InvalidInput("run_sweep: empty grid");
  const auto t0 = std::chrono::steady_clock::now();

  SweepResult result;
  result.spec = spec;
  result.records.resize(static_cast<std::size_t>(cells) * spec.trials);

  const int total = cells * spec.trials;
  const int jobs = std::max(1, std::min(spec.jobs, total));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int item = next.fetch_add(1);
      if (item >= total) return;
      try {
        result.records[item] = run_trial(spec, item / spec.trials, item % spec.trials);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  result.total_wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

namespace {

std::vector<std::string> method_columns(const SweepSpec& spec) {
  std::vector<std::string> cols;
  if (spec.experiment == Experiment::init_compare) {
    cols.push_back("alg1");
    for (double a : spec.tsi_alphas) cols.push_back(init_label(a));
  } else {
    for (SolveMethod m : spec.methods) cols.push_back(to_string(m));
  }
  return cols;
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
  const SweepSpec& spec = result.spec;
  const std::vector<std::string> cols = method_columns(spec);
  const int cells = cell_count(spec);
  std::string csv;

  auto cell_records = [&](int cell) {
    return std::pair{result.records.begin() + static_cast<std::ptrdiff_t>(cell) * spec.trials,
                     result.records.begin() + static_cast<std::ptrdiff_t>(cell + 1) * spec.trials};
  };

  switch (spec.experiment) {
    case Experiment::init_compare: {
      csv = "experiment,n,s,m,m_over_n,method,trials,mean_rel_error\n";
      for (int cell = 0; cell < cells; ++cell) {
        auto [begin, end] = cell_records(cell);
        const int m = begin->m;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          double sum = 0.0;
          for (auto it = begin; it != end; ++it) sum += it->outcomes[c].rel_error;
          csv += "init_compare," + std::to_string(spec.n) + ',' + std::to_string(spec.s) + ',' +
                 std::to_string(m) + ',' + fmt_double(static_cast<double>(m) / spec.n) + ',' +
                 cols[c] + ',' + std::to_string(spec.trials) + ',' +
                 fmt_double(sum / spec.trials) + '\n';
        }
      }
      break;
    }
    case Experiment::phase_map: {
      csv = "experiment,n,m,s,m_over_n,s_over_n,method,trials,successes,success_rate,"
            "mean_rel_error,mean_iterations_success\n";
      for (int cell = 0; cell < cells; ++cell) {
        auto [begin, end] = cell_records(cell);
        const int m = begin->m, s = begin->s;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          int successes = 0;
          double sum_rel = 0.0, sum_iters = 0.0;
          for (auto it = begin; it != end; ++it) {
            const TrialOutcome& out = it->outcomes[c];
            sum_rel += clamped_rel(out.rel_error);
            if (out.success) {
              ++successes;
              sum_iters += out.iterations;
            }
          }
          csv += "phase_map," + std::to_string(spec.n) + ',' + std::to_string(m) + ',' +
                 std::to_string(s) + ',' + fmt_double(static_cast<double>(m) / spec.n) + ',' +
                 fmt_double(static_cast<double>(s) / spec.n) + ',' + cols[c] + ',' +
                 std::to_string(spec.trials) + ',' + std::to_string(successes) + ',' +
                 fmt_double(static_cast<double>(successes) / spec.trials) + ',' +
                 fmt_double(sum_rel / spec.trials) + ',' +
                 fmt_double(successes > 0 ? sum_iters / successes
                                          : std::numeric_limits<double>::quiet_NaN()) +
                 '\n';
        }
      }
      break;
    }
    case Experiment::convergence: {
      csv = "experiment,n,m,s,method,iter,mean_rel_error\n";
      auto [begin, end] = cell_records(0);
      const int m = begin->m, s = begin->s;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        std::size_t longest = 0;
        for (auto it = begin; it != end; ++it)
          longest = std::max(longest, it->outcomes[c].rel_error_curve.size());
        for (std::size_t k = 0; k < longest; ++k) {
          double sum = 0.0;
          for (auto it = begin; it != end; ++it) {
            const auto& curve = it->outcomes[c].rel_error_curve;
            // Trials that stopped earlier contribute their final error.
            const double rel = curve.empty() ? 1.0 : curve[std::min(k, curve.size() - 1)];
            sum += clamped_rel(rel);
          }
          csv += "convergence," + std::to_string(spec.n) + ',' + std::to_string(m) + ',' +
                 std::to_string(s) + ',' + cols[c] + ',' + std::to_string(k) + ',' +
                 fmt_double(sum / spec.trials) + '\n';
        }
      }
      break;
    }
    case Experiment::iteration_count: {
      csv = "experiment,n,s,m,method,trials,successes,mean_iterations_success\n";
      for (int cell = 0; cell < cells; ++cell) {
        auto [begin, end] = cell_records(cell);
        const int m = begin->m, s = begin->s;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          int successes = 0;
          double sum_iters = 0.0;
          for (auto it = begin; it != end; ++it) {
            const TrialOutcome& out = it->outcomes[c];
            if (out.success) {
              ++successes;
              sum_iters += out.iterations;
            }
          }
          csv += "iteration_count," + std::to_string(spec.n) + ',' + std::to_string(s) + ',' +
                 std::to_string(m) + ',' + cols[c] + ',' + std::to_string(spec.trials) + ',' +
                 std::to_string(successes) + ',' +
                 fmt_double(successes > 0 ? sum_iters / successes
                                          : std::numeric_limits<double>::quiet_NaN()) +
                 '\n';
        }
      }
      break;
    }
    case Experiment::noise_sweep: {
      csv = "experiment,n,m,s,snr,method,trials,mean_sigma,mean_rel_error,"
            "mean_log10_rel_error,mean_ln_rel_error\n";
      for (int cell = 0; cell < cells; ++cell) {
        auto [begin, end] = cell_records(cell);
        const int m = begin->m;
        const double snr = begin->snr;
        for (std::size_t c = 0; c < cols.size(); ++c) {
          double sum_rel = 0.0, sum_log10 = 0.0, sum_ln = 0.0, sum_sigma = 0.0;
          for (auto it = begin; it != end; ++it) {
            const TrialOutcome& out = it->outcomes[c];
            const double rel = clamped_rel(out.rel_error);
            sum_rel += rel;
            sum_log10 += std::log10(rel);
            sum_ln += std::log(rel);
            sum_sigma += out.sigma;
          }
          csv += "noise_sweep," + std::to_string(spec.n) + ',' + std::to_string(m) + ',' +
                 std::to_string(spec.s) + ',' + fmt_double(snr) + ',' + cols[c] + ',' +
                 std::to_string(spec.trials) + ',' + fmt_double(sum_sigma / spec.trials) + ',' +
                 fmt_double(sum_rel / spec.trials) + ',' + fmt_double(sum_log10 / spec.trials) +
                 ',' + fmt_double(sum_ln / spec.trials) + '\n';
        }
      }
      break;
    }
  }
  return csv;
}

nlohmann::json sweep_manifest(const SweepResult& result) {
  const SweepSpec& spec = result.spec;
  nlohmann::json j;
  j["version"] = kVersion;
  j["experiment"] = to_string(spec.experiment);
  j["n"] = spec.n;
  j["s"] = spec.s;
  j["m_values"] = spec.m_values;
  j["s_values"] = spec.s_values;
  j["snr_values"] = spec.snr_values;
  std::vector<std::string> methods;
  for (auto m : spec.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["tsi_alphas"] = spec.tsi_alphas;
  j["trials"] = spec.trials;
  j["master_seed"] = spec.master_seed;
  j["jobs"] = spec.jobs;
  j["max_iters"] = spec.max_iters;
  j["max_iters_proxy"] = spec.max_iters_proxy;
  j["success_threshold"] = spec.success_threshold;
  j["tol_residual"] = spec.tol_residual;
  j["tol_stagnation"] = spec.tol_stagnation;
  j["phi_convention"] = spec.phi_conv == PhiConvention::inv_m ? "inv_m" : "inv_2m";
  j["noise"] = {{"kind", spec.noise.kind == NoiseSpec::Kind::none
                             ? "none"
                             : (spec.noise.kind == NoiseSpec::Kind::gaussian ? "gaussian"
                                                                             : "laplace")},
                {"sigma", spec.noise.sigma}};
  j["materialize_bytes"] = spec.materialize_bytes;
  j["record_curves"] = spec.record_curves;
  j["cells"] = cell_count(spec);
  j["seed_derivation"] =
      "root={master_seed,0}; cell=child(root,cell_index); trial=child(cell,t); "
      "lanes: ensemble=child(trial,0), signal=child(trial,1), noise=child(trial,2)";
  if (spec.experiment == Experiment::iteration_count)
    j["m_rule"] = "m = floor(10 * s * log(n)), natural log";
  j["timing"] = {{"total_wall_ms", result.total_wall_ms},
                 {"note", "informational; excluded from determinism comparisons"}};
  return j;
}

std::string sweep_raw_jsonl(const SweepResult& result) {
  std::string out;
  for (const auto& rec : result.records) {
    nlohmann::json j;
    j["cell"] = rec.cell;
    j["trial"] = rec.trial;
    j["m"] = rec.m;
    j["s"] = rec.s;
    if (result.spec.experiment == Experiment::noise_sweep) j["snr"] = rec.snr;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : rec.outcomes) {
      nlohmann::json jo;
      jo["method"] = o.method;
      jo["rel_error"] = o.rel_error;
      jo["dist"] = o.dist;
      jo["iterations"] = o.iterations;
      jo["success"] = o.success;
      jo["support_exact"] = o.support_exact;
      jo["status"] = o.status;
      jo["wall_ms"] = o.wall_ms;
      if (o.sigma > 0.0) jo["sigma"] = o.sigma;
      outs.push_back(std::move(jo));
    }
    j["outcomes"] = std::move(outs);
    out += j.dump();
    out += '\n';
  }
  return out;
}

SweepSpec preset_sweep(const std::string& name) {
  SweepSpec spec;
  if (name == "experiment1") {
    spec.experiment = Experiment::init_compare;
    spec.n = 500;
    spec.s = 5;
    for (int k = 1; k <= 10; ++k) spec.m_values.push_back(50 * k);
    spec.tsi_alphas = {0.5, 0.2};
    spec.trials = 100;
  } else if (name == "experiment2") {
    spec.experiment = Experiment::phase_map;
    spec.n = 100;
    for (int k = 1; k <= 10; ++k) spec.m_values.push_back(20 * k);
    for (int k = 1; k <= 10; ++k) spec.s_values.push_back(10 * k);
    spec.methods = {SolveMethod::sgn, SolveMethod::wf, SolveMethod::iht};
    spec.trials = 100;
    spec.max_iters = 2000;
    spec.max_iters_proxy = 2000;
  } else if (name == "experiment3") {
    spec.experiment = Experiment::convergence;
    spec.n = 200;
    spec.s = 40;
    spec.m_values = {200};
    spec.methods = {SolveMethod::sgn, SolveMethod::iht};
    spec.trials = 100;
    spec.max_iters = 1000;
    spec.max_iters_proxy = 1000;
    spec.record_curves = true;
  } else if (name == "experiment4") {
    spec.experiment = Experiment::noise_sweep;
    spec.n = 100;
    spec.s = 5;
    spec.m_values = {200};
    for (int k = 1; k <= 10; ++k) spec.snr_values.push_back(5.0 * k);
    spec.methods = {SolveMethod::sgn};
    spec.trials = 50;
  } else if (name == "iteration_count") {
    spec.experiment = Experiment::iteration_count;
    spec.n = 100;
    for (int s = 6; s <= 22; s += 2) spec.s_values.push_back(s);
    spec.methods = {SolveMethod::sgn, SolveMethod::iht};
    spec.trials = 100;
    spec.max_iters = 400;
    spec.max_iters_proxy = 2000;
  } else {
    throw InvalidInput("unknown preset: " + name);
  }
  return spec;
}

}  // namespace sgn
