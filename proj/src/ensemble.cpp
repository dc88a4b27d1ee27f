#include "sgn/ensemble.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sgn/errors.hpp"

namespace sgn {

namespace {

std::uint64_t entry_counter(int n, int i, int r, int c) {
  return static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) +
         static_cast<std::uint64_t>(r) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(c);
}

}  // namespace

MeasurementEnsemble MeasurementEnsemble::gaussian(int n, int m, RngSeed seed, StorageMode mode,
                                                  std::uint64_t cap_bytes) {
  if (n <= 0 || m <= 0) throw InvalidInput("gen_ensemble: n and m must be positive");
  MeasurementEnsemble ens;
  ens.n_ = n;
  ens.m_ = m;
  ens.seed_ = seed;
  ens.mode_ = mode;
  ens.rng_ = CounterRng(seed);
  if (mode == StorageMode::materialized) {
    const std::uint64_t bytes = static_cast<std::uint64_t>(m) * n * n * sizeof(double);
    if (bytes > cap_bytes) {
      throw CapacityError("gen_ensemble: materialized storage needs " + std::to_string(bytes) +
                          " bytes (cap " + std::to_string(cap_bytes) +
                          "); use streamed mode for this size");
    }
    ens.sym_.resize(static_cast<Eigen::Index>(m) * n, n);
    Eigen::MatrixXd block(n, n);
    for (int i = 0; i < m; ++i) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          block(r, c) = ens.rng_.normal(entry_counter(n, i, r, c));
      ens.sym_.middleRows(static_cast<Eigen::Index>(i) * n, n) = block + block.transpose();
    }
  }
  return ens;
}

MeasurementEnsemble MeasurementEnsemble::from_matrices(const std::vector<Eigen::MatrixXd>& mats) {
  if (mats.empty()) throw InvalidInput("from_matrices: need at least one matrix");
  const int n = static_cast<int>(mats[0].rows());
  const int m = static_cast<int>(mats.size());
  for (const auto& a : mats)
    if (a.rows() != n || a.cols() != n) throw InvalidInput("from_matrices: matrices must be square, same size");
  MeasurementEnsemble ens;
  ens.n_ = n;
  ens.m_ = m;
  ens.mode_ = StorageMode::materialized;
  ens.explicit_matrices_ = true;
  ens.raw_.resize(static_cast<Eigen::Index>(m) * n, n);
  ens.sym_.resize(static_cast<Eigen::Index>(m) * n, n);
  for (int i = 0; i < m; ++i) {
    ens.raw_.middleRows(static_cast<Eigen::Index>(i) * n, n) = mats[i];
    ens.sym_.middleRows(static_cast<Eigen::Index>(i) * n, n) = mats[i] + mats[i].transpose();
  }
  return ens;
}

double MeasurementEnsemble::entry(int i, int r, int c) const {
  if (explicit_matrices_) return raw_(static_cast<Eigen::Index>(i) * n_ + r, c);
  return rng_.normal(entry_counter(n_, i, r, c));
}

Eigen::MatrixXd MeasurementEnsemble::matrix(int i) const {
  Eigen::MatrixXd a(n_, n_);
  for (int r = 0; r < n_; ++r)
    for (int c = 0; c < n_; ++c) a(r, c) = entry(i, r, c);
  return a;
}

void MeasurementEnsemble::apply_sym(const Eigen::VectorXd& z, const std::vector<int>& support,
                                    Eigen::VectorXd& w) const {
  const Eigen::Index rows = static_cast<Eigen::Index>(m_) * n_;
  w.resize(rows);
  if (mode_ == StorageMode::materialized) {
    // Dense right-hand sides go through one GEMV; sparse ones accumulate
    // contiguous columns.
    if (static_cast<int>(support.size()) * 3 >= n_) {
      w.noalias() = sym_ * z;
    } else {
      w.setZero();
      for (int k : support) w.noalias() += z[k] * sym_.col(k);
    }
    return;
  }
  w.setZero();
  for (int i = 0; i < m_; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * n_;
    for (int k : support) {
      const double zk = z[k];
      if (zk == 0.0) continue;
      for (int r = 0; r < n_; ++r) {
        const double s = rng_.normal(entry_counter(n_, i, r, k)) + rng_.normal(entry_counter(n_, i, k, r));
        w[base + r] += s * zk;
      }
    }
  }
}

Eigen::VectorXd MeasurementEnsemble::quad_forms(const Eigen::VectorXd& z,
                                                const std::vector<int>& support) const {
  Eigen::VectorXd q(m_);
  if (mode_ == StorageMode::materialized) {
    for (int i = 0; i < m_; ++i) {
      const Eigen::Index base = static_cast<Eigen::Index>(i) * n_;
      double acc = 0.0;
      for (int r : support) {
        double row = 0.0;
        for (int c : support) row += sym_(base + r, c) * z[c];
        acc += z[r] * row;
      }
      q[i] = 0.5 * acc;
    }
    return q;
  }
  for (int i = 0; i < m_; ++i) {
    double acc = 0.0;
    for (int r : support) {
      double row = 0.0;
      for (int c : support) row += rng_.normal(entry_counter(n_, i, r, c)) * z[c];
      acc += z[r] * row;
    }
    q[i] = acc;
  }
  return q;
}

MeasurementEnsemble gen_ensemble(int n, int m, RngSeed seed, StorageMode mode, std::uint64_t cap_bytes) {
  return MeasurementEnsemble::gaussian(n, m, seed, mode, cap_bytes);
}

SparseSignal gen_signal(int n, int s, RngSeed seed) {
  if (n <= 0 || s <= 0 || s > n) throw InvalidInput("gen_signal: need 0 < s <= n");
  SeqRng pick(child_seed(seed, 0));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < s; ++t) {
    const int j = t + static_cast<int>(pick.below(static_cast<std::uint64_t>(n - t)));
    std::swap(idx[t], idx[j]);
  }
  SparseSignal sig;
  sig.s = s;
  sig.support.assign(idx.begin(), idx.begin() + s);
  std::sort(sig.support.begin(), sig.support.end());
  sig.x = Eigen::VectorXd::Zero(n);
  SeqRng vals(child_seed(seed, 1));
  for (int j : sig.support) sig.x[j] = vals.normal_nonzero();
  return sig;
}

Observations measure(const MeasurementEnsemble& ens, const SparseSignal& x, const NoiseSpec& noise,
                     RngSeed noise_seed) {
  Observations obs;
  obs.clean_y = ens.quad_forms(x.x, x.support);
  obs.noise = Eigen::VectorXd::Zero(ens.m());
  if (noise.kind != NoiseSpec::Kind::none && noise.sigma > 0.0) {
    CounterRng rng(noise_seed);
    for (int i = 0; i < ens.m(); ++i) {
      obs.noise[i] = noise.kind == NoiseSpec::Kind::gaussian ? noise.sigma * rng.normal(i)
                                                             : rng.laplace(i, noise.sigma);
    }
  }
  obs.y = obs.clean_y + obs.noise;
  return obs;
}

double objective(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                 const std::vector<int>& support) {
  const Eigen::VectorXd q = ens.quad_forms(z, support);
  return (q - y).squaredNorm() / (2.0 * ens.m());
}

double objective(const MeasurementEnsemble& ens, const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  return objective(ens, y, z, nonzero_support(z));
}

std::vector<int> nonzero_support(const Eigen::VectorXd& z) {
  std::vector<int> sup;
  for (int j = 0; j < z.size(); ++j)
    if (z[j] != 0.0) sup.push_back(j);
  return sup;
}

}  // namespace sgn
