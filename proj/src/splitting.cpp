#include "parkmc/splitting.hpp"

#include <stdexcept>

namespace parkmc {

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Lie: return "lie";
    case SchemeKind::Strang: return "strang";
    case SchemeKind::Exact: return "exact";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  if (name == "lie") return SchemeKind::Lie;
  if (name == "strang") return SchemeKind::Strang;
  if (name == "exact") return SchemeKind::Exact;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

int SchemeSpec::order() const {
  switch (kind) {
    case SchemeKind::Lie: return 2;
    case SchemeKind::Strang: return 3;
    case SchemeKind::Exact: return 0;
  }
  return 0;
}

std::vector<Stage> SchemeSpec::stages() const {
  const int a = swap_groups ? 2 : 1;
  const int b = swap_groups ? 1 : 2;
  switch (kind) {
    case SchemeKind::Lie: return {{a, 1.0}, {b, 1.0}};
    case SchemeKind::Strang: return {{a, 0.5}, {b, 1.0}, {a, 0.5}};
    case SchemeKind::Exact: return {{0, 1.0}};
  }
  return {};
}

SpinConfiguration step(const SchemeSpec& scheme, KmcEngine& engine, const Decomposition& decomposition,
                       std::uint64_t stream_seed) {
  if (scheme.dt < 0) throw std::invalid_argument("dt must be nonnegative");
  auto stages = scheme.stages();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    engine.reseed(derive_stream_seed(stream_seed, i, 0x5747ULL));
    const double duration = stages[i].fraction * scheme.dt;
    if (stages[i].group == 0) {
      engine.run_exact(duration);
    } else {
      engine.run_group(decomposition, stages[i].group, duration);
    }
  }
  return engine.state();
}

SpinConfiguration full_occupancy(const Lattice& lattice) {
  return SpinConfiguration(static_cast<std::size_t>(lattice.size()), 1);
}

void sample_chain_visit(const SchemeSpec& scheme, const RateModel& model, const Decomposition& decomposition,
                        const SpinConfiguration& initial, const ChainOptions& options,
                        const std::function<void(long, const SpinConfiguration&)>& visit) {
  if (options.burn_in < 0 || options.n_steps <= options.burn_in) {
    throw std::invalid_argument("need n_steps > burn_in >= 0");
  }
  KmcEngine engine(model, initial, options.seed);
  for (long k = 1; k <= options.n_steps; ++k) {
    step(scheme, engine, decomposition, derive_stream_seed(options.seed, static_cast<std::uint64_t>(k), 0));
    if (k > options.burn_in) visit(k - options.burn_in - 1, engine.state());
  }
}

SkeletonSample sample_chain(const SchemeSpec& scheme, const RateModel& model, const Decomposition& decomposition,
                            const SpinConfiguration& initial, const ChainOptions& options) {
  SkeletonSample out;
  out.scheme = scheme;
  out.seed = options.seed;
  out.states.reserve(static_cast<std::size_t>(options.n_steps - options.burn_in));
  sample_chain_visit(scheme, model, decomposition, initial, options,
                     [&](long, const SpinConfiguration& s) { out.states.push_back(s); });
  return out;
}

}  // namespace parkmc
