#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parkmc {

/// Periodic rectangular lattice of width x height sites.
///
/// Sites are addressed by a flat index `x1 + width * x2`. The neighborhood of
/// a site holds every other site within Manhattan distance `interaction_range`
/// under periodic wrap; coincident images on narrow lattices are counted once.
class Lattice {
 public:
  Lattice(int width, int height, int interaction_range = 1);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int interaction_range() const noexcept { return range_; }
  int size() const noexcept { return width_ * height_; }

  int index(int x1, int x2) const;
  std::pair<int, int> coords(int site) const;

  std::span<const int> neighbors(int site) const;
  bool within_range(int a, int b) const;

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.range_ == b.range_;
  }

 private:
  int width_;
  int height_;
  int range_;
  std::vector<std::vector<int>> neighbors_;
};

/// Occupancy values over the sites of a lattice, each 0 or 1.
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(std::size_t n_sites, std::uint8_t value = 0)
      : spins_(n_sites, value) {}
  explicit SpinConfiguration(std::vector<std::uint8_t> spins);

  /// Bit i of `code` is the spin at site i. Requires n_sites <= 64.
  static SpinConfiguration from_code(std::uint64_t code, int n_sites);
  std::uint64_t code() const;

  std::size_t size() const noexcept { return spins_.size(); }
  std::uint8_t operator[](int site) const { return spins_[static_cast<std::size_t>(site)]; }
  void set(int site, std::uint8_t value) { spins_[static_cast<std::size_t>(site)] = value; }
  void flip(int site) { spins_[static_cast<std::size_t>(site)] ^= 1u; }
  void swap_sites(int a, int b) { std::swap(spins_[a], spins_[b]); }

  int occupancy() const;
  std::span<const std::uint8_t> spins() const noexcept { return spins_; }
  std::string to_string() const;

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::vector<std::uint8_t> spins_;
};

SpinConfiguration flipped(SpinConfiguration sigma, int site);

enum class DecompositionKind { Blocks, Stripes, WholeLattice };

std::string to_string(DecompositionKind kind);
DecompositionKind decomposition_kind_from_string(const std::string& name);

/// Partition of the lattice into two scheduled groups (ids 1 and 2) and the
/// derived boundary region: sites with a neighbor in the other group.
class Decomposition {
 public:
  static Decomposition build(const Lattice& lattice, DecompositionKind kind, int width);

  const Lattice& lattice() const noexcept { return lattice_; }
  DecompositionKind kind() const noexcept { return kind_; }
  int width() const noexcept { return width_; }

  int group_of(int site) const { return group_[static_cast<std::size_t>(site)]; }
  std::span<const int> group_sites(int group) const;
  std::span<const int> boundary_sites() const noexcept { return boundary_; }
  bool is_boundary(int site) const { return is_boundary_[static_cast<std::size_t>(site)] != 0; }

  /// Whether sites a and b sit in different groups and within interaction range.
  bool straddles(int a, int b) const;

 private:
  Decomposition(Lattice lattice, DecompositionKind kind, int width);

  Lattice lattice_;
  DecompositionKind kind_;
  int width_;
  std::vector<int> group_;
  std::vector<std::vector<int>> members_;
  std::vector<int> boundary_;
  std::vector<std::uint8_t> is_boundary_;
};

/// Calls `visit` with every ordered k-tuple of distinct boundary sites that
/// contains at least one straddling pair. For k = 1 every boundary site is
/// visited. k must be in [1, 4].
void for_each_boundary_tuple(const Decomposition& decomposition, int k,
                             const std::function<void(std::span<const int>)>& visit);

std::vector<std::vector<int>> boundary_pairs(const Decomposition& decomposition, int k);

}  // namespace parkmc
