#include "parkmc/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parkmc/errors.hpp"

namespace parkmc {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::AdsorptionDesorption ? "adsorption" : "diffusion";
}

RateModel::RateModel(Lattice lattice, ModelKind kind) : lattice_(std::move(lattice)), kind_(kind) {}

RateModel RateModel::adsorption_desorption(const Lattice& lattice, AdsorptionDesorptionParams params) {
  if (params.c1 < 0 || params.c2 < 0 || params.beta < 0) {
    throw std::invalid_argument("c1, c2 and beta must be nonnegative");
  }
  RateModel m(lattice, ModelKind::AdsorptionDesorption);
  m.ads_ = params;
  std::size_t max_nb = 0;
  for (int s = 0; s < lattice.size(); ++s) max_nb = std::max(max_nb, lattice.neighbors(s).size());
  for (std::size_t k = 0; k <= max_nb; ++k) {
    double u = params.J0 * static_cast<double>(k) + params.h;
    m.desorption_by_count_.push_back(params.c2 * std::exp(-params.beta * u));
  }
  for (int s = 0; s < lattice.size(); ++s) m.moves_.push_back({MoveKind::SpinFlip, s, -1});
  m.index_sets();
  return m;
}

RateModel RateModel::diffusion(const Lattice& lattice, DiffusionParams params) {
  if (params.hop_rate < 0) throw std::invalid_argument("hop rate must be nonnegative");
  RateModel m(lattice, ModelKind::Diffusion);
  m.diff_ = params;
  for (int x = 0; x < lattice.size(); ++x) {
    for (int y : lattice.neighbors(x)) m.moves_.push_back({MoveKind::Swap, x, y});
  }
  m.index_sets();
  return m;
}

void RateModel::index_sets() {
  const auto n = static_cast<std::size_t>(lattice_.size());
  reads_.assign(moves_.size(), {});
  writes_.assign(moves_.size(), {});
  dependents_.assign(n, {});
  // With J0 = 0 (or beta = 0) a flip rate only looks at its own site.
  const bool coupled = ads_.J0 != 0.0 && ads_.beta != 0.0 && ads_.c2 != 0.0;
  for (std::size_t i = 0; i < moves_.size(); ++i) {
    const Move& mv = moves_[i];
    if (mv.kind == MoveKind::SpinFlip) {
      writes_[i] = {mv.site};
      reads_[i] = {mv.site};
      if (coupled) {
        for (int y : lattice_.neighbors(mv.site)) reads_[i].push_back(y);
      }
    } else {
      writes_[i] = {std::min(mv.site, mv.target), std::max(mv.site, mv.target)};
      reads_[i] = writes_[i];
    }
    std::sort(reads_[i].begin(), reads_[i].end());
    for (int s : reads_[i]) dependents_[static_cast<std::size_t>(s)].push_back(static_cast<int>(i));
  }
}

int RateModel::find_move(const Move& move) const {
  auto it = std::find(moves_.begin(), moves_.end(), move);
  if (it == moves_.end()) throw std::invalid_argument("move is not part of the model catalog");
  return static_cast<int>(it - moves_.begin());
}

double RateModel::rate(const SpinConfiguration& sigma, const Move& move) const {
  if (kind_ == ModelKind::AdsorptionDesorption) {
    if (move.kind != MoveKind::SpinFlip) throw WrongMoveKind("adsorption/desorption expects spin flips");
    const int x = move.site;
    if (sigma[x] == 0) return ads_.c1;
    int occupied = 0;
    for (int y : lattice_.neighbors(x)) occupied += sigma[y];
    return desorption_by_count_[static_cast<std::size_t>(occupied)];
  }
  if (move.kind != MoveKind::Swap) throw WrongMoveKind("diffusion expects swaps");
  if (!lattice_.within_range(move.site, move.target)) return 0.0;
  return diff_.hop_rate * sigma[move.site] * (1 - sigma[move.target]);
}

double RateModel::rate(const SpinConfiguration& sigma, int move_index) const {
  return rate(sigma, moves_[static_cast<std::size_t>(move_index)]);
}

void RateModel::apply(SpinConfiguration& sigma, const Move& move) const {
  if (move.kind == MoveKind::SpinFlip) {
    sigma.flip(move.site);
  } else {
    sigma.swap_sites(move.site, move.target);
  }
}

bool RateModel::interacts(int move_a, int move_b) const {
  auto overlap = [](std::span<const int> a, std::span<const int> b) {
    for (int s : a) {
      if (std::binary_search(b.begin(), b.end(), s)) return true;
    }
    return false;
  };
  return overlap(write_set(move_a), read_set(move_b)) || overlap(write_set(move_b), read_set(move_a));
}

std::vector<Move> enumerate_moves(const RateModel& model) {
  return {model.moves().begin(), model.moves().end()};
}

double rate(const RateModel& model, const SpinConfiguration& sigma, const Move& move) {
  return model.rate(sigma, move);
}

double group_restricted_rate(const RateModel& model, const Decomposition& decomposition, int group,
                             const SpinConfiguration& sigma, const Move& move) {
  if (group != 1 && group != 2) throw std::invalid_argument("group id must be 1 or 2");
  double q = model.rate(sigma, move);
  return decomposition.group_of(primary_site(move)) == group ? q : 0.0;
}

}  // namespace parkmc
