#include <set>

#include "doctest.h"
#include "parkmc/errors.hpp"
#include "parkmc/lattice.hpp"

using namespace parkmc;

TEST_CASE("site index round trip") {
  Lattice lat(5, 3);
  for (int x2 = 0; x2 < 3; ++x2) {
    for (int x1 = 0; x1 < 5; ++x1) {
      auto [a, b] = lat.coords(lat.index(x1, x2));
      CHECK(a == x1);
      CHECK(b == x2);
    }
  }
  CHECK_THROWS(lat.index(5, 0));
}

TEST_CASE("neighborhood sizes under wrap") {
  Lattice big(4, 4);
  for (int s = 0; s < big.size(); ++s) CHECK(big.neighbors(s).size() == 4);
  Lattice two(2, 2);
  for (int s = 0; s < two.size(); ++s) CHECK(two.neighbors(s).size() == 2);
  Lattice line(1, 2);
  CHECK(line.neighbors(0).size() == 1);
  Lattice single(1, 1);
  CHECK(single.neighbors(0).empty());
  Lattice wide(5, 5, 2);
  CHECK(wide.neighbors(0).size() == 12);
}

TEST_CASE("flip is an involution") {
  SpinConfiguration s(std::vector<std::uint8_t>{1, 0, 1, 1});
  CHECK(flipped(flipped(s, 2), 2) == s);
  CHECK(flipped(s, 1)[1] == 1);
  CHECK(SpinConfiguration::from_code(s.code(), 4) == s);
}

TEST_CASE("stripes of width 2 on 4x4 make every site a boundary site") {
  Lattice lat(4, 4);
  auto d = Decomposition::build(lat, DecompositionKind::Stripes, 2);
  CHECK(d.boundary_sites().size() == 16);
  CHECK(d.group_sites(1).size() == 8);
  CHECK(d.group_sites(2).size() == 8);
  CHECK(d.group_of(lat.index(0, 0)) == 1);
  CHECK(d.group_of(lat.index(2, 3)) == 2);
  CHECK(boundary_pairs(d, 1).size() == 16);
}

TEST_CASE("whole lattice has an empty boundary and an empty second group") {
  Lattice lat(4, 4);
  auto d = Decomposition::build(lat, DecompositionKind::WholeLattice, 1);
  CHECK(d.boundary_sites().empty());
  CHECK(d.group_sites(2).empty());
  CHECK(boundary_pairs(d, 2).empty());
}

TEST_CASE("decomposition errors") {
  Lattice lat(4, 4);
  CHECK_THROWS_AS(Decomposition::build(lat, DecompositionKind::Blocks, 3), NonDividingWidth);
  Lattice wide(4, 4, 2);
  CHECK_THROWS_AS(Decomposition::build(wide, DecompositionKind::Stripes, 1), WidthTooSmall);
  // Odd band counts are accepted; the 3x3 checkerboard needs them.
  CHECK_NOTHROW(Decomposition::build(Lattice(3, 3), DecompositionKind::Blocks, 1));
}

TEST_CASE("boundary pairs straddle the two columns of a 2x2 stripe split") {
  Lattice lat(2, 2);
  auto d = Decomposition::build(lat, DecompositionKind::Stripes, 1);
  auto pairs = boundary_pairs(d, 2);
  // Each site has exactly one neighbor in the other column.
  CHECK(pairs.size() == 4);
  for (const auto& p : pairs) {
    CHECK(d.group_of(p[0]) != d.group_of(p[1]));
    CHECK(lat.within_range(p[0], p[1]));
  }
}

TEST_CASE("partition and boundary monotonicity") {
  Lattice lat(8, 8);
  for (int w : {1, 2, 4}) {
    auto blocks = Decomposition::build(lat, DecompositionKind::Blocks, w);
    auto stripes = Decomposition::build(lat, DecompositionKind::Stripes, w);
    CHECK(blocks.group_sites(1).size() + blocks.group_sites(2).size() == 64);
    CHECK(stripes.boundary_sites().size() <= blocks.boundary_sites().size());
    std::set<int> seen(blocks.group_sites(1).begin(), blocks.group_sites(1).end());
    for (int s : blocks.group_sites(2)) CHECK(seen.insert(s).second);
  }
}
