#include <cmath>
#include <map>

#include "doctest.h"
#include "parkmc/kmc.hpp"
#include "parkmc/oracle.hpp"

using namespace parkmc;

namespace {

double total_variation(const std::vector<double>& empirical, const Matrix& P, Eigen::Index row) {
  double tv = 0.0;
  for (Eigen::Index j = 0; j < P.cols(); ++j) tv += std::abs(empirical[static_cast<std::size_t>(j)] - P(row, j));
  return 0.5 * tv;
}

}  // namespace

TEST_CASE("single-site chain relaxes to its two-state equilibrium") {
  Lattice lat(1, 1);
  auto model = RateModel::adsorption_desorption(lat, {});
  KmcEngine engine(model, SpinConfiguration(1, 0), 7);
  // Time-average occupancy over a long run.
  double occupied = 0.0;
  const int samples = 200000;
  for (int i = 0; i < samples; ++i) {
    engine.run_exact(0.5);
    occupied += engine.state()[0];
  }
  const double e = std::exp(-1.8);
  CHECK(occupied / samples == doctest::Approx(1.0 / (1.0 + e)).epsilon(0.01));
  CHECK(engine.clock() == doctest::Approx(0.5 * samples));
}

TEST_CASE("incremental total rate does not drift") {
  Lattice lat(6, 6);
  auto model = RateModel::adsorption_desorption(lat, {});
  KmcEngine engine(model, SpinConfiguration(36, 1), 3);
  double worst = 0.0;
  engine.set_event_hook([&](const KmcEngine& e) {
    worst = std::max(worst, std::abs(e.total_rate() - e.recompute_total_rate()));
  });
  engine.run_exact(200.0);
  CHECK(engine.events() > 100);
  CHECK(worst < 1e-9);

  auto diff = RateModel::diffusion(lat, {});
  SpinConfiguration s(36, 0);
  for (int i = 0; i < 36; i += 2) s.set(i, 1);
  KmcEngine d(diff, s, 5);
  worst = 0.0;
  d.set_event_hook([&](const KmcEngine& e) {
    worst = std::max(worst, std::abs(e.total_rate() - e.recompute_total_rate()));
  });
  auto dec = Decomposition::build(lat, DecompositionKind::Stripes, 3);
  d.run_group(dec, 1, 100.0);
  CHECK(worst < 1e-9);
  CHECK(d.state().occupancy() == 18);
}

TEST_CASE("group runs leave the other group untouched") {
  Lattice lat(8, 8);
  auto model = RateModel::adsorption_desorption(lat, {});
  auto dec = Decomposition::build(lat, DecompositionKind::Blocks, 2);
  SpinConfiguration start(64, 0);
  for (int i = 0; i < 64; i += 3) start.set(i, 1);
  KmcEngine engine(model, start, 11);
  engine.run_group(dec, 2, 5.0);
  int changed = 0;
  for (int s = 0; s < 64; ++s) {
    if (dec.group_of(s) == 1) CHECK(engine.state()[static_cast<std::size_t>(s)] == start[static_cast<std::size_t>(s)]);
    else changed += engine.state()[static_cast<std::size_t>(s)] != start[static_cast<std::size_t>(s)];
  }
  CHECK(changed > 0);
}

TEST_CASE("group run law matches the restricted semigroup on 2x2") {
  Lattice lat(2, 2);
  auto model = RateModel::adsorption_desorption(lat, {});
  auto dec = Decomposition::build(lat, DecompositionKind::Blocks, 1);
  DenseChain chain = DenseChain::build(model, dec);
  const double t = 0.7;
  for (int group : {1, 2}) {
    Matrix P = expm_uniformized(chain.generator(group), t);
    const std::uint64_t start_code = 0b0110;
    const auto row = static_cast<Eigen::Index>(chain.states.index(start_code));
    std::vector<double> counts(chain.size(), 0.0);
    const int runs = 100000;
    KmcEngine engine(model, SpinConfiguration::from_code(start_code, 4), 1);
    for (int r = 0; r < runs; ++r) {
      engine.set_state(SpinConfiguration::from_code(start_code, 4));
      engine.reseed(derive_stream_seed(99, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(group)));
      engine.run_group(dec, group, t);
      counts[static_cast<std::size_t>(chain.states.index(engine.state().code()))] += 1.0 / runs;
    }
    CHECK(total_variation(counts, P, row) < 0.01);
  }
}

TEST_CASE("runs are reproducible from the seed") {
  Lattice lat(4, 4);
  auto model = RateModel::adsorption_desorption(lat, {});
  KmcEngine a(model, SpinConfiguration(16, 1), 42), b(model, SpinConfiguration(16, 1), 42);
  a.run_exact(10.0);
  b.run_exact(10.0);
  CHECK(a.state() == b.state());
  CHECK(a.events() == b.events());
  CHECK(derive_stream_seed(1, 2, 3) == derive_stream_seed(1, 2, 3));
  CHECK(derive_stream_seed(1, 2, 3) != derive_stream_seed(1, 3, 2));
}
