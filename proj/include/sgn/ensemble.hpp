#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sgn/rng.hpp"

// Measurement model: y_i = x^T A_i x (+ noise), with A_1..A_m full n x n
// matrices whose entries are i.i.d. standard normal. Entry (r,c) of A_i is
// draw number i*n^2 + r*n + c of the ensemble's counter stream, so streamed
// and materialized storage see bit-identical matrices and any entry can be
// regenerated in O(1).

namespace sgn {

enum class StorageMode { materialized, streamed };

struct NoiseSpec {
  enum class Kind { none, gaussian, laplace };
  Kind kind = Kind::none;
  double sigma = 0.0;  // std for gaussian, scale for laplace
};

struct SparseSignal {
  Eigen::VectorXd x;          // length n, exact zeros off the support
  std::vector<int> support;   // sorted, size s
  int s = 0;
};

struct Observations {
  Eigen::VectorXd y;        // clean_y + noise
  Eigen::VectorXd clean_y;  // x^T A_i x
  Eigen::VectorXd noise;
};

class MeasurementEnsemble {
 public:
  // Default cap: 4 GiB of materialized storage.
  static constexpr std::uint64_t kDefaultCapBytes = 4ull << 30;

  static MeasurementEnsemble gaussian(int n, int m, RngSeed seed,
                                      StorageMode mode = StorageMode::materialized,
                                      std::uint64_t cap_bytes = kDefaultCapBytes);

  // Fixed matrices supplied by the caller (hand-built test instances,
  // identifiability probes). Behaves like materialized storage.
  static MeasurementEnsemble from_matrices(const std::vector<Eigen::MatrixXd>& mats);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  StorageMode mode() const noexcept { return mode_; }
  RngSeed seed() const noexcept { return seed_; }

  // Raw entry (A_i)_{r,c}; identical across storage modes.
  double entry(int i, int r, int c) const;

  Eigen::MatrixXd matrix(int i) const;

  // w[i*n + j] = ((A_i + A_i^T) z)_j for all i, j. `support` lists the
  // indices where z may be nonzero; remaining entries are treated as zero.
  void apply_sym(const Eigen::VectorXd& z, const std::vector<int>& support,
                 Eigen::VectorXd& w) const;

  // z^T A_i z for all i, z supported on `support`.
  Eigen::VectorXd quad_forms(const Eigen::VectorXd& z, const std::vector<int>& support) const;

 private:
  MeasurementEnsemble() = default;

  int n_ = 0;
  int m_ = 0;
  RngSeed seed_{};
  StorageMode mode_ = StorageMode::streamed;
  bool explicit_matrices_ = false;
  CounterRng rng_{};
  Eigen::MatrixXd sym_;  // (m*n) x n stacked A_i + A_i^T, materialized only
  Eigen::MatrixXd raw_;  // (m*n) x n stacked A_i, explicit-matrix mode only
};

MeasurementEnsemble gen_ensemble(int n, int m, RngSeed seed,
                                 StorageMode mode = StorageMode::materialized,
                                 std::uint64_t cap_bytes = MeasurementEnsemble::kDefaultCapBytes);

// Uniformly random size-s support; nonzero values i.i.d. standard normal.
SparseSignal gen_signal(int n, int s, RngSeed seed);

Observations measure(const MeasurementEnsemble& ens, const SparseSignal& x,
                     const NoiseSpec& noise, RngSeed noise_seed);

// f(z) = (1/2m) sum_i (z^T A_i z - y_i)^2
double objective(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& z, const std::vector<int>& support);
double objective(const MeasurementEnsemble& ens, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& z);

// Indices of the nonzero entries of z, ascending.
std::vector<int> nonzero_support(const Eigen::VectorXd& z);

}  // namespace sgn
