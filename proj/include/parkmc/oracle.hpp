#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "parkmc/lattice.hpp"
#include "parkmc/models.hpp"
#include "parkmc/splitting.hpp"

namespace parkmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 16;

/// Enumerated configurations of a small lattice, addressed by bit code.
class StateSpace {
 public:
  /// All 2^n configurations.
  static StateSpace full(int n_sites, std::size_t cap = kDefaultStateCap);
  /// Configurations with exactly `particles` occupied sites.
  static StateSpace sector(int n_sites, int particles, std::size_t cap = kDefaultStateCap);

  std::size_t size() const noexcept { return codes_.size(); }
  int n_sites() const noexcept { return n_sites_; }
  std::uint64_t code(std::size_t i) const { return codes_[i]; }
  /// Index of a code, or -1 when the code lies outside this space.
  long index(std::uint64_t code) const;
  SpinConfiguration configuration(std::size_t i) const {
    return SpinConfiguration::from_code(codes_[i], n_sites_);
  }

 private:
  int n_sites_ = 0;
  std::vector<std::uint64_t> codes_;
  std::unordered_map<std::uint64_t, long> index_;
};

/// Generators of the full chain and of its two split parts on an enumerated
/// state space.
struct DenseChain {
  StateSpace states;
  SparseMatrix L;
  SparseMatrix L1;
  SparseMatrix L2;

  /// `particles` < 0 keeps every occupation number; diffusion chains are
  /// usually restricted to one sector.
  static DenseChain build(const RateModel& model, const Decomposition& decomposition, int particles = -1,
                          std::size_t cap = kDefaultStateCap);

  std::size_t size() const noexcept { return states.size(); }
  const SparseMatrix& generator(int group) const { return group == 0 ? L : group == 1 ? L1 : L2; }
};

/// e^{t G} by uniformization; the Poisson tail is cut below 1e-13.
Matrix expm_uniformized(const SparseMatrix& generator, double t);

Matrix transition_exact(const DenseChain& chain, double dt);
Matrix transition_scheme(const DenseChain& chain, const SchemeSpec& scheme);

/// L_Q^k: k! times the dt^k coefficient of the scheme's one-step operator,
/// from the ordered product of truncated exponential series.
SparseMatrix scheme_expansion_matrix(const DenseChain& chain, const SchemeSpec& scheme, int k);

/// Leading coefficient of the local error: e^{dt L} - P_scheme = dt^p C + O(dt^{p+1}).
SparseMatrix commutator_matrix(const DenseChain& chain, const SchemeSpec& scheme);

SparseMatrix sparse_power(const SparseMatrix& m, int k);

/// Stationary row vector of a stochastic matrix.
Vector stationary(const Matrix& P);

struct DistanceTable {
  std::size_t n = 0;
  std::vector<int> d;  ///< row-major, -1 for unreachable
  int diameter = 0;
  int at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

DistanceTable geodesic_distances(const DenseChain& chain);

double epr_exact(const Matrix& Pb, const Vector& mu, double dt);
double rer_exact(const Matrix& Pb, const Matrix& Po, const Vector& mu, double dt);
double discrepancy_exact(const Matrix& Pb, const Matrix& Po, const Vector& mu, double dt);

/// Entropy production of the stationary length-m path measure.
double ep_paths(const Matrix& Pb, const Vector& mu, int m);

struct OrderFit {
  bool fitted = false;
  double slope = 0.0;
  std::vector<double> dt;
  std::vector<double> epr;
};

/// Least-squares slope of log EPR against log dt over a geometric grid of at
/// least four points. Skipped (fitted = false) when every EPR is below 1e-10.
OrderFit epr_order_fit(const DenseChain& chain, SchemeKind kind, const std::vector<double>& dt_grid);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExactCoefficients {
  double A = 0.0;
  double D = 0.0;
};

/// The leading RER and discrepancy coefficients as exact sums against `mu`.
ExactCoefficients exact_coefficients(const DenseChain& chain, const SchemeSpec& scheme, const Vector& mu);

/// One row per line, space separated.
void write_matrix(std::ostream& out, const Matrix& m);

}  // namespace parkmc
