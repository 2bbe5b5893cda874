#include "parkmc/kmc.hpp"

#include <cmath>
#include <stdexcept>

namespace parkmc {

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(master ^ mix(a ^ mix(b)));
}

KmcEngine::KmcEngine(const RateModel& model, SpinConfiguration initial, std::uint64_t seed)
    : model_(&model), rng_(seed) {
  set_state(std::move(initial));
  slot_of_.assign(static_cast<std::size_t>(model.move_count()), -1);
  touched_mark_.assign(static_cast<std::size_t>(model.move_count()), 0);
}

void KmcEngine::set_state(SpinConfiguration sigma) {
  if (static_cast<int>(sigma.size()) != model_->lattice().size()) {
    throw std::invalid_argument("configuration size does not match the lattice");
  }
  state_ = std::move(sigma);
}

void KmcEngine::build_catalog(const Decomposition* decomposition, int group) {
  for (int m : active_) slot_of_[static_cast<std::size_t>(m)] = -1;
  active_.clear();
  rates_.clear();
  total_ = 0.0;
  for (int m = 0; m < model_->move_count(); ++m) {
    if (decomposition && decomposition->group_of(primary_site(model_->move(m))) != group) continue;
    slot_of_[static_cast<std::size_t>(m)] = static_cast<int>(active_.size());
    active_.push_back(m);
    double r = model_->rate(state_, m);
    rates_.push_back(r);
    total_ += r;
  }
}

double KmcEngine::recompute_total_rate() const {
  double sum = 0.0;
  for (int m : active_) sum += model_->rate(state_, m);
  return sum;
}

void KmcEngine::refresh_after(int move_index) {
  touched_.clear();
  for (int s : model_->write_set(move_index)) {
    for (int dep : model_->dependents(s)) {
      if (slot_of_[static_cast<std::size_t>(dep)] < 0 || touched_mark_[static_cast<std::size_t>(dep)]) continue;
      touched_mark_[static_cast<std::size_t>(dep)] = 1;
      touched_.push_back(dep);
    }
  }
  for (int dep : touched_) {
    touched_mark_[static_cast<std::size_t>(dep)] = 0;
    auto slot = static_cast<std::size_t>(slot_of_[static_cast<std::size_t>(dep)]);
    double r = model_->rate(state_, dep);
    total_ += r - rates_[slot];
    rates_[slot] = r;
  }
}

void KmcEngine::simulate(double duration) {
  if (duration < 0) throw std::invalid_argument("duration must be nonnegative");
  const double end = clock_ + duration;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uint64_t since_resum = 0;
  while (true) {
    if (total_ <= 0.0) break;
    double u = unit(rng_);
    double wait = -std::log1p(-u) / total_;
    if (clock_ + wait > end) break;
    clock_ += wait;

    double target = unit(rng_) * total_;
    std::size_t slot = 0;
    double acc = 0.0;
    std::size_t last_positive = rates_.size();
    for (; slot < rates_.size(); ++slot) {
      if (rates_[slot] <= 0.0) continue;
      last_positive = slot;
      acc += rates_[slot];
      if (acc > target) break;
    }
    if (slot == rates_.size()) slot = last_positive;  // rounding at the top end
    if (slot == rates_.size()) break;

    int m = active_[slot];
    model_->apply(state_, m);
    ++events_;
    refresh_after(m);
    // Bound floating drift of the running total.
    if (++since_resum >= 4096) {
      since_resum = 0;
      total_ = 0.0;
      for (double r : rates_) total_ += r;
    }
    if (hook_) hook_(*this);
  }
  clock_ = end;
}

const SpinConfiguration& KmcEngine::run_exact(double duration) {
  build_catalog(nullptr, 0);
  simulate(duration);
  return state_;
}

const SpinConfiguration& KmcEngine::run_group(const Decomposition& decomposition, int group, double duration) {
  if (group != 1 && group != 2) throw std::invalid_argument("group id must be 1 or 2");
  if (!(decomposition.lattice() == model_->lattice())) {
    throw std::invalid_argument("decomposition lattice does not match the model lattice");
  }
  build_catalog(&decomposition, group);
  simulate(duration);
  return state_;
}

}  // namespace parkmc
