#include "parkmc/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include "parkmc/errors.hpp"

namespace parkmc {

namespace {

int wrap(int value, int period) {
  int r = value % period;
  return r < 0 ? r + period : r;
}

// Shortest periodic separation along one axis.
int periodic_gap(int a, int b, int period) {
  int d = std::abs(a - b) % period;
  return std::min(d, period - d);
}

}  // namespace

Lattice::Lattice(int width, int height, int interaction_range)
    : width_(width), height_(height), range_(interaction_range) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("lattice dimensions must be positive");
  }
  if (interaction_range < 1) {
    throw std::invalid_argument("interaction range must be positive");
  }
  neighbors_.resize(static_cast<std::size_t>(size()));
  for (int site = 0; site < size(); ++site) {
    auto [x1, x2] = coords(site);
    std::vector<int>& nb = neighbors_[static_cast<std::size_t>(site)];
    for (int dx = -range_; dx <= range_; ++dx) {
      int rest = range_ - std::abs(dx);
      for (int dy = -rest; dy <= rest; ++dy) {
        if (dx == 0 && dy == 0) continue;
        int other = index(wrap(x1 + dx, width_), wrap(x2 + dy, height_));
        if (other != site) nb.push_back(other);
      }
    }
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

int Lattice::index(int x1, int x2) const {
  if (x1 < 0 || x1 >= width_ || x2 < 0 || x2 >= height_) {
    throw std::out_of_range("lattice coordinates out of range");
  }
  return x1 + width_ * x2;
}

std::pair<int, int> Lattice::coords(int site) const {
  if (site < 0 || site >= size()) throw std::out_of_range("site index out of range");
  return {site % width_, site / width_};
}

std::span<const int> Lattice::neighbors(int site) const {
  return neighbors_.at(static_cast<std::size_t>(site));
}

bool Lattice::within_range(int a, int b) const {
  if (a == b) return false;
  auto [ax, ay] = coords(a);
  auto [bx, by] = coords(b);
  return periodic_gap(ax, bx, width_) + periodic_gap(ay, by, height_) <= range_;
}

SpinConfiguration::SpinConfiguration(std::vector<std::uint8_t> spins) : spins_(std::move(spins)) {
  for (auto s : spins_) {
    if (s > 1) throw std::invalid_argument("spin values must be 0 or 1");
  }
}

SpinConfiguration SpinConfiguration::from_code(std::uint64_t code, int n_sites) {
  if (n_sites > 64) throw std::invalid_argument("state codes support at most 64 sites");
  SpinConfiguration sigma(static_cast<std::size_t>(n_sites));
  for (int i = 0; i < n_sites; ++i) sigma.set(i, static_cast<std::uint8_t>((code >> i) & 1u));
  return sigma;
}

std::uint64_t SpinConfiguration::code() const {
  if (spins_.size() > 64) throw std::invalid_argument("state codes support at most 64 sites");
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < spins_.size(); ++i) c |= static_cast<std::uint64_t>(spins_[i]) << i;
  return c;
}

int SpinConfiguration::occupancy() const {
  int n = 0;
  for (auto s : spins_) n += s;
  return n;
}

std::string SpinConfiguration::to_string() const {
  std::string out;
  out.reserve(spins_.size());
  for (auto s : spins_) out.push_back(s ? '1' : '0');
  return out;
}

SpinConfiguration flipped(SpinConfiguration sigma, int site) {
  sigma.flip(site);
  return sigma;
}

std::string to_string(DecompositionKind kind) {
  switch (kind) {
    case DecompositionKind::Blocks: return "blocks";
    case DecompositionKind::Stripes: return "stripes";
    case DecompositionKind::WholeLattice: return "whole";
  }
  return "unknown";
}

DecompositionKind decomposition_kind_from_string(const std::string& name) {
  if (name == "blocks") return DecompositionKind::Blocks;
  if (name == "stripes") return DecompositionKind::Stripes;
  if (name == "whole") return DecompositionKind::WholeLattice;
  throw std::invalid_argument("unknown decomposition '" + name + "'");
}

Decomposition::Decomposition(Lattice lattice, DecompositionKind kind, int width)
    : lattice_(std::move(lattice)), kind_(kind), width_(width) {}

Decomposition Decomposition::build(const Lattice& lattice, DecompositionKind kind, int width) {
  if (kind != DecompositionKind::WholeLattice) {
    if (width < 1) throw std::invalid_argument("decomposition width must be positive");
    if (width < lattice.interaction_range()) {
      throw WidthTooSmall("width " + std::to_string(width) + " is below the interaction range " +
                          std::to_string(lattice.interaction_range()));
    }
    bool divides = lattice.width() % width == 0;
    if (kind == DecompositionKind::Blocks) divides = divides && lattice.height() % width == 0;
    if (!divides) {
      throw NonDividingWidth("width " + std::to_string(width) + " does not tile a " +
                             std::to_string(lattice.width()) + "x" +
                             std::to_string(lattice.height()) + " lattice");
    }
  }

  Decomposition d(lattice, kind, kind == DecompositionKind::WholeLattice ? lattice.width() : width);
  const int n = lattice.size();
  d.group_.resize(static_cast<std::size_t>(n));
  d.members_.assign(2, {});
  for (int site = 0; site < n; ++site) {
    auto [x1, x2] = lattice.coords(site);
    int parity = 0;
    switch (kind) {
      case DecompositionKind::Blocks: parity = (x1 / width + x2 / width) % 2; break;
      case DecompositionKind::Stripes: parity = (x1 / width) % 2; break;
      case DecompositionKind::WholeLattice: parity = 0; break;
    }
    d.group_[static_cast<std::size_t>(site)] = parity + 1;
    d.members_[static_cast<std::size_t>(parity)].push_back(site);
  }

  d.is_boundary_.assign(static_cast<std::size_t>(n), 0);
  for (int site = 0; site < n; ++site) {
    for (int nb : lattice.neighbors(site)) {
      if (d.group_of(nb) != d.group_of(site)) {
        d.is_boundary_[static_cast<std::size_t>(site)] = 1;
        d.boundary_.push_back(site);
        break;
      }
    }
  }
  return d;
}

std::span<const int> Decomposition::group_sites(int group) const {
  if (group != 1 && group != 2) throw std::invalid_argument("group id must be 1 or 2");
  return members_[static_cast<std::size_t>(group - 1)];
}

bool Decomposition::straddles(int a, int b) const {
  return group_of(a) != group_of(b) && lattice_.within_range(a, b);
}

void for_each_boundary_tuple(const Decomposition& decomposition, int k,
                             const std::function<void(std::span<const int>)>& visit) {
  if (k < 1 || k > 4) throw std::invalid_argument("tuple order must be in [1, 4]");
  auto boundary = decomposition.boundary_sites();
  std::vector<int> tuple;
  tuple.reserve(static_cast<std::size_t>(k));

  auto has_straddle = [&] {
    for (std::size_t i = 0; i < tuple.size(); ++i)
      for (std::size_t j = i + 1; j < tuple.size(); ++j)
        if (decomposition.straddles(tuple[i], tuple[j])) return true;
    return false;
  };

  std::function<void()> recurse = [&] {
    if (static_cast<int>(tuple.size()) == k) {
      if (k == 1 || has_straddle()) visit(tuple);
      return;
    }
    for (int site : boundary) {
      if (std::find(tuple.begin(), tuple.end(), site) != tuple.end()) continue;
      tuple.push_back(site);
      recurse();
      tuple.pop_back();
    }
  };
  recurse();
}

std::vector<std::vector<int>> boundary_pairs(const Decomposition& decomposition, int k) {
  std::vector<std::vector<int>> out;
  for_each_boundary_tuple(decomposition, k, [&](std::span<const int> t) {
    out.emplace_back(t.begin(), t.end());
  });
  return out;
}

}  // namespace parkmc
