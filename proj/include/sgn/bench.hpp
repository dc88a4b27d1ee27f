#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgn/baselines.hpp"
#include "sgn/ensemble.hpp"
#include "sgn/metrics.hpp"
#include "sgn/solver.hpp"

// Monte-Carlo sweep harness. A sweep is a grid of cells; each cell runs
// `trials` independent instances, and every (cell, trial) pair derives its
// seeds deterministically from the master seed:
//
//   root  = {master_seed, 0}
//   cellk = child(root, cell_index)        cell_index row-major over the grid
//   trial = child(cellk, t)
//   lanes: ensemble child(trial, 0), signal child(trial, 1),
//          noise child(trial, 2)
//
// so any trial can be replayed in isolation and results are independent of
// scheduling. All methods within a trial share the instance and initializer.

namespace sgn {

enum class Experiment { init_compare, phase_map, convergence, iteration_count, noise_sweep };
enum class SolveMethod { sgn, wf, iht };

const char* to_string(Experiment e);
const char* to_string(SolveMethod m);

struct SweepSpec {
  Experiment experiment = Experiment::phase_map;
  int n = 100;
  int s = 5;                        // fixed sparsity where the grid has none
  std::vector<int> m_values;        // measurement counts (most experiments)
  std::vector<int> s_values;        // sparsity grid (phase_map, iteration_count)
  std::vector<double> snr_values;   // noise_sweep; sigma = sqrt(||x|| / snr)
  std::vector<SolveMethod> methods{SolveMethod::sgn};
  std::vector<double> tsi_alphas;   // init_compare columns next to the spectral init
  int trials = 100;
  std::uint64_t master_seed = 1;
  int jobs = 1;
  int max_iters = 200;              // sgn budget
  int max_iters_proxy = 2000;       // wf / iht budget
  double success_threshold = 1e-3;
  double tol_residual = 1e-12;
  double tol_stagnation = 1e-14;
  PhiConvention phi_conv = PhiConvention::inv_m;
  NoiseSpec noise{};                         // noise_sweep overrides sigma per trial
  std::uint64_t materialize_bytes = 128ull << 20;  // storage-mode switch
  bool record_curves = false;                // keep per-iteration error curves
};

struct TrialRecord {
  int cell = 0;
  int trial = 0;
  int m = 0;
  int s = 0;
  double snr = 0.0;
  std::vector<TrialOutcome> outcomes;  // one per method column, fixed order
};

struct SweepResult {
  SweepSpec spec;
  std::vector<TrialRecord> records;  // records[cell * trials + trial]
  double total_wall_ms = 0.0;        // informational only
};

int cell_count(const SweepSpec& spec);

// Run one (cell, trial) pair; deterministic given (spec modulo jobs).
TrialRecord run_trial(const SweepSpec& spec, int cell_index, int trial_index);

SweepResult run_sweep(const SweepSpec& spec);

// Deterministic CSV of the per-cell aggregates (schema depends on the
// experiment). Byte-identical for any jobs count.
std::string sweep_csv(const SweepResult& result);

// Full config echo, seeds, and version; enough to replay the sweep. The
// timing block is informational and excluded from determinism comparisons.
nlohmann::json sweep_manifest(const SweepResult& result);

// Raw per-trial records as JSON lines (wall_ms fields are not deterministic).
std::string sweep_raw_jsonl(const SweepResult& result);

// Paper-scale preset grids; `name` one of experiment1..experiment4 or
// iteration_count. Throws InvalidInput for unknown names.
SweepSpec preset_sweep(const std::string& name);

}  // namespace sgn
