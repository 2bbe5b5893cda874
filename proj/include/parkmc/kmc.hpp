#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "parkmc/lattice.hpp"
#include "parkmc/models.hpp"

namespace parkmc {

/// Deterministic per-stage stream seed derived from a master seed.
std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);

/// Rejection-free (n-fold way) simulator over a fixed rate model.
///
/// Each run builds a catalog of the moves it may execute (all moves for the
/// exact chain, or the moves whose primary site is in one group), keeps their
/// current rates and the running total, and after every event refreshes only
/// the moves that read a changed site.
class KmcEngine {
 public:
  KmcEngine(const RateModel& model, SpinConfiguration initial, std::uint64_t seed);

  const SpinConfiguration& state() const noexcept { return state_; }
  void set_state(SpinConfiguration sigma);
  double clock() const noexcept { return clock_; }
  std::uint64_t events() const noexcept { return events_; }
  const RateModel& model() const noexcept { return *model_; }

  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  /// Full-lattice chain for `duration` time units.
  const SpinConfiguration& run_exact(double duration);

  /// Moves restricted to `group`; spins outside it are only read.
  const SpinConfiguration& run_group(const Decomposition& decomposition, int group, double duration);

  /// Incrementally maintained total rate of the last catalog and its full
  /// recomputation, for drift checks.
  double total_rate() const noexcept { return total_; }
  double recompute_total_rate() const;

  /// Called after every event when set (tests use it to audit the catalog).
  void set_event_hook(std::function<void(const KmcEngine&)> hook) { hook_ = std::move(hook); }

 private:
  void build_catalog(const Decomposition* decomposition, int group);
  void simulate(double duration);
  void refresh_after(int move_index);

  const RateModel* model_;
  SpinConfiguration state_;
  std::mt19937_64 rng_;
  double clock_ = 0.0;
  std::uint64_t events_ = 0;

  std::vector<int> active_;       // catalog slot -> move index
  std::vector<double> rates_;     // catalog slot -> current rate
  std::vector<int> slot_of_;      // move index -> slot or -1
  double total_ = 0.0;
  std::vector<int> touched_;
  std::vector<std::uint8_t> touched_mark_;
  std::function<void(const KmcEngine&)> hook_;
};

}  // namespace parkmc
