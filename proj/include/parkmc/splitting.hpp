#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "parkmc/kmc.hpp"
#include "parkmc/lattice.hpp"

namespace parkmc {

enum class SchemeKind { Lie, Strang, Exact };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

/// One factor of a splitting schedule: evolve `group` for fraction * dt.
/// Group 0 stands for the unsplit full-lattice generator.
struct Stage {
  int group;
  double fraction;
};

struct SchemeSpec {
  SchemeKind kind = SchemeKind::Lie;
  double dt = 0.01;
  /// Exchange the roles of groups 1 and 2 in the schedule.
  bool swap_groups = false;

  /// Local error order p (2 for Lie, 3 for Strang, 0 for the exact chain).
  int order() const;
  std::vector<Stage> stages() const;
};

/// Advances `engine` by one splitting step of size scheme.dt and returns the
/// new state. Each stage reseeds the engine from `stream_seed` and the stage
/// index, so a step is reproducible from its seed alone.
SpinConfiguration step(const SchemeSpec& scheme, KmcEngine& engine, const Decomposition& decomposition,
                       std::uint64_t stream_seed);

struct SkeletonSample {
  std::vector<SpinConfiguration> states;
  SchemeSpec scheme;
  std::uint64_t seed = 0;
};

struct ChainOptions {
  long n_steps = 1000;
  long burn_in = 100;
  std::uint64_t seed = 1;
};

/// Default burn-in: ten percent of the run.
inline long default_burn_in(long n_steps) { return n_steps / 10; }

/// Fully occupied starting configuration.
SpinConfiguration full_occupancy(const Lattice& lattice);

/// Runs n_steps splitting steps from `initial`, passing every state after the
/// first burn_in steps to `visit` together with its zero-based record index.
void sample_chain_visit(const SchemeSpec& scheme, const RateModel& model, const Decomposition& decomposition,
                        const SpinConfiguration& initial, const ChainOptions& options,
                        const std::function<void(long, const SpinConfiguration&)>& visit);

SkeletonSample sample_chain(const SchemeSpec& scheme, const RateModel& model, const Decomposition& decomposition,
                            const SpinConfiguration& initial, const ChainOptions& options);

}  // namespace parkmc
