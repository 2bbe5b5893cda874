#pragma once

#include <span>
#include <string>
#include <vector>

#include "parkmc/lattice.hpp"

namespace parkmc {

enum class ModelKind { AdsorptionDesorption, Diffusion };

std::string to_string(ModelKind kind);

/// Single spin-flip Arrhenius dynamics:
///   q(sigma, sigma^x) = c1 (1 - sigma(x)) + c2 sigma(x) exp(-beta U(x, sigma)),
///   U(x, sigma)       = J0 * sum_{y in neighbors(x)} sigma(y) + h.
struct AdsorptionDesorptionParams {
  double c1 = 1.0;
  double c2 = 1.0;
  double beta = 2.0;
  double J0 = 0.3;
  double h = 0.9;
};

/// Exclusion diffusion: q = p(x, y) sigma(x) (1 - sigma(y)) for y a neighbor
/// of x, with a uniform nearest-neighbor kernel p = hop_rate.
struct DiffusionParams {
  double hop_rate = 0.25;
};

enum class MoveKind { SpinFlip, Swap };

/// A flip of `site`, or a swap moving the value at `site` (the origin) to `target`.
struct Move {
  MoveKind kind = MoveKind::SpinFlip;
  int site = 0;
  int target = -1;

  friend bool operator==(const Move&, const Move&) = default;
};

/// Transition-rate family bound to a lattice. Rates are evaluated on demand
/// from the configuration; the model also exposes the move catalog and the
/// read/write site sets that drive incremental rate updates.
class RateModel {
 public:
  static RateModel adsorption_desorption(const Lattice& lattice, AdsorptionDesorptionParams params);
  static RateModel diffusion(const Lattice& lattice, DiffusionParams params);

  ModelKind kind() const noexcept { return kind_; }
  const Lattice& lattice() const noexcept { return lattice_; }
  const AdsorptionDesorptionParams& adsorption_params() const noexcept { return ads_; }
  const DiffusionParams& diffusion_params() const noexcept { return diff_; }

  /// All moves: one flip per site, or every ordered neighbor swap.
  std::span<const Move> moves() const noexcept { return moves_; }
  int move_count() const noexcept { return static_cast<int>(moves_.size()); }
  const Move& move(int index) const { return moves_.at(static_cast<std::size_t>(index)); }
  int find_move(const Move& move) const;

  double rate(const SpinConfiguration& sigma, const Move& move) const;
  double rate(const SpinConfiguration& sigma, int move_index) const;

  void apply(SpinConfiguration& sigma, const Move& move) const;
  void apply(SpinConfiguration& sigma, int move_index) const { apply(sigma, moves_[static_cast<std::size_t>(move_index)]); }

  /// Sites whose values the move's rate depends on.
  std::span<const int> read_set(int move_index) const { return reads_[static_cast<std::size_t>(move_index)]; }
  /// Sites the move changes.
  std::span<const int> write_set(int move_index) const { return writes_[static_cast<std::size_t>(move_index)]; }
  /// Moves whose rate reads `site`.
  std::span<const int> dependents(int site) const { return dependents_[static_cast<std::size_t>(site)]; }

  /// False when the two generator components commute for structural reasons
  /// (neither writes a site the other reads).
  bool interacts(int move_a, int move_b) const;

  /// Largest number of sites a single move changes.
  int max_write_size() const noexcept { return kind_ == ModelKind::Diffusion ? 2 : 1; }

 private:
  RateModel(Lattice lattice, ModelKind kind);
  void index_sets();

  Lattice lattice_;
  ModelKind kind_;
  AdsorptionDesorptionParams ads_;
  DiffusionParams diff_;
  std::vector<double> desorption_by_count_;
  std::vector<Move> moves_;
  std::vector<std::vector<int>> reads_;
  std::vector<std::vector<int>> writes_;
  std::vector<std::vector<int>> dependents_;
};

std::vector<Move> enumerate_moves(const RateModel& model);

double rate(const RateModel& model, const SpinConfiguration& sigma, const Move& move);

/// The rate of `move` when its primary site (the flip site, or a swap's
/// origin) lies in `group`, and zero otherwise. Summed over both groups this
/// reproduces the unrestricted rate.
double group_restricted_rate(const RateModel& model, const Decomposition& decomposition, int group,
                             const SpinConfiguration& sigma, const Move& move);

inline int primary_site(const Move& move) { return move.site; }

}  // namespace parkmc
