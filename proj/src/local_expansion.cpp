#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "parkmc/errors.hpp"
#include "parkmc/estimators.hpp"

namespace parkmc {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

struct Accum {
  double row = 0.0;
  double col = 0.0;
};

// Signed words of the expanded commutators [X, Y] and [X, [Y, Z]].
struct Word {
  std::array<int, 3> ops;
  int sign;
};
constexpr std::array<Word, 2> kWords2{{{{0, 1, 0}, 1}, {{1, 0, 0}, -1}}};
constexpr std::array<Word, 4> kWords3{{{{0, 1, 2}, 1}, {{0, 2, 1}, -1}, {{1, 2, 0}, -1}, {{2, 1, 0}, 1}}};

}  // namespace

SiteSet make_site_set(std::span<const int> sites) {
  std::vector<int> sorted(sites.begin(), sites.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() > 6) throw std::invalid_argument("site sets hold at most six sites");
  SiteSet s;
  s.count = static_cast<int>(sorted.size());
  std::copy(sorted.begin(), sorted.end(), s.sites.begin());
  return s;
}

const LocalEntry* LocalExpansion::find(const SiteSet& diff) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), diff,
                             [](const LocalEntry& e, const SiteSet& d) { return e.diff < d; });
  return it != entries.end() && it->diff == diff ? &*it : nullptr;
}

CoefficientEvaluator::CoefficientEvaluator(const RateModel& model, const Decomposition& decomposition,
                                           const SchemeSpec& scheme)
    : model_(&model), decomposition_(&decomposition), scheme_(scheme), order_(scheme.order()),
      stages_(scheme.stages()) {
  if (!(model.lattice() == decomposition.lattice())) {
    throw std::invalid_argument("model and decomposition use different lattices");
  }
  if (order_ == 0) return;

  const int n_moves = model.move_count();
  const int n_sites = model.lattice().size();
  std::vector<std::vector<int>> writers(static_cast<std::size_t>(n_sites));
  for (int m = 0; m < n_moves; ++m) {
    for (int s : model.write_set(m)) writers[static_cast<std::size_t>(s)].push_back(m);
  }
  // Moves whose generators fail to commute with move m for structural reasons.
  std::vector<std::vector<int>> partners(static_cast<std::size_t>(n_moves));
  for (int m = 0; m < n_moves; ++m) {
    auto& out = partners[static_cast<std::size_t>(m)];
    for (int s : model.write_set(m)) {
      for (int d : model.dependents(s)) out.push_back(d);
    }
    for (int s : model.read_set(m)) {
      for (int w : writers[static_cast<std::size_t>(s)]) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  auto group_of_move = [&](int m) { return decomposition.group_of(primary_site(model.move(m))); };
  const int first = stages_.front().group;
  const int other = first == 1 ? 2 : 1;

  if (scheme.kind == SchemeKind::Lie) {
    // C = -1/2 [L_first, L_other]
    for (int b = 0; b < n_moves; ++b) {
      if (group_of_move(b) != first) continue;
      for (int c : partners[static_cast<std::size_t>(b)]) {
        if (group_of_move(c) == other) add_term({b, c, 0}, 2, -0.5);
      }
    }
  } else if (scheme.kind == SchemeKind::Strang) {
    // C = 1/24 [L_h, [L_h, L_f]] - 1/12 [L_f, [L_f, L_h]], h the half-step group.
    auto nested = [&](int outer_group, int inner_group, double coeff) {
      std::vector<int> candidates;
      for (int b = 0; b < n_moves; ++b) {
        if (group_of_move(b) != outer_group) continue;
        for (int c : partners[static_cast<std::size_t>(b)]) {
          if (group_of_move(c) != inner_group) continue;
          candidates.clear();
          for (int a : partners[static_cast<std::size_t>(b)]) candidates.push_back(a);
          for (int a : partners[static_cast<std::size_t>(c)]) candidates.push_back(a);
          std::sort(candidates.begin(), candidates.end());
          candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
          for (int a : candidates) {
            if (group_of_move(a) == outer_group) add_term({a, b, c}, 3, coeff);
          }
        }
      }
    };
    nested(first, other, 1.0 / 24.0);
    nested(other, first, -1.0 / 12.0);
  }
}

void CoefficientEvaluator::add_term(std::array<int, 3> moves, int arity, double coeff) {
  Term t;
  t.moves = moves;
  t.arity = arity;
  t.coeff = coeff;
  std::vector<int> region;
  for (int i = 0; i < arity; ++i) {
    for (int s : model_->write_set(moves[static_cast<std::size_t>(i)])) region.push_back(s);
  }
  std::sort(region.begin(), region.end());
  region.erase(std::unique(region.begin(), region.end()), region.end());
  if (region.size() > 6) throw std::logic_error("commutator term writes more than six sites");
  t.region_size = static_cast<int>(region.size());
  std::copy(region.begin(), region.end(), t.region.begin());
  terms_.push_back(t);
}

double CoefficientEvaluator::word_coefficient(const std::vector<int>& groups) const {
  // Sum over order-preserving assignments of the letters to stages.
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t stage, std::size_t letter) -> double {
    if (stage == stages_.size()) return letter == groups.size() ? 1.0 : 0.0;
    const Stage& st = stages_[stage];
    double total = 0.0;
    double weight = 1.0;
    for (std::size_t n = 0;; ++n) {
      total += weight * go(stage + 1, letter + n);
      if (letter + n >= groups.size()) break;
      if (st.group != 0 && groups[letter + n] != st.group) break;
      weight *= st.fraction / static_cast<double>(n + 1);
    }
    return total;
  };
  return go(0, 0);
}

CoefficientEvaluator::PathSums CoefficientEvaluator::path_sums(const SpinConfiguration& from,
                                                               const SiteSet& diff) const {
  const Lattice& lattice = model_->lattice();
  SpinConfiguration target = from;
  for (int s : diff.view()) target.flip(s);

  // Moves that a shortest path may use.
  std::vector<int> candidates;
  std::vector<int> region(diff.view().begin(), diff.view().end());
  if (model_->kind() == ModelKind::AdsorptionDesorption) {
    for (int s : region) candidates.push_back(s);  // flip moves are indexed by site
  } else {
    std::vector<int> frontier = region;
    for (int step = 1; step < order_; ++step) {
      std::vector<int> next;
      for (int s : frontier) {
        for (int y : lattice.neighbors(s)) {
          if (std::find(region.begin(), region.end(), y) == region.end()) {
            region.push_back(y);
            next.push_back(y);
          }
        }
      }
      frontier = std::move(next);
    }
    std::sort(region.begin(), region.end());
    for (int s : region) {
      for (int m : model_->dependents(s)) {
        const Move& mv = model_->move(m);
        if (mv.site == s && std::binary_search(region.begin(), region.end(), mv.target)) candidates.push_back(m);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }

  auto mismatch = [&](const SpinConfiguration& c) {
    int n = 0;
    for (int s : region) n += c[s] != target[s];
    return n;
  };

  PathSums out;
  const int max_write = model_->max_write_size();
  SpinConfiguration cur = from;
  std::vector<int> groups;
  for (int length = 1; length <= order_; ++length) {
    std::function<void(int, double, int)> dfs = [&](int depth, double product, int miss) {
      if (depth == length) {
        if (miss == 0) {
          out.plain += product;
          out.weighted += product * word_coefficient(groups);
        }
        return;
      }
      for (int m : candidates) {
        double q = model_->rate(cur, m);
        if (q <= 0.0) continue;
        model_->apply(cur, m);
        int next_miss = mismatch(cur);
        if (next_miss <= max_write * (length - depth - 1)) {
          groups.push_back(decomposition_->group_of(primary_site(model_->move(m))));
          dfs(depth + 1, product * q, next_miss);
          groups.pop_back();
        }
        model_->apply(cur, m);
      }
    };
    dfs(0, 1.0, mismatch(cur));
    if (out.plain > 0.0) {
      out.length = length;
      return out;
    }
  }
  return out;
}

LocalExpansion CoefficientEvaluator::expand(const SpinConfiguration& sigma) const {
  LocalExpansion result;
  result.order = order_;
  if (order_ == 0 || terms_.empty()) return result;

  std::map<SiteSet, Accum> acc;
  SpinConfiguration work = sigma;
  std::array<std::array<double, 64>, 3> rate{};
  std::array<std::array<std::uint8_t, 64>, 3> next{};
  std::array<double, 64> vec{}, tmp{}, row{}, col{};

  for (const Term& t : terms_) {
    const int r = t.region_size;
    const int n_local = 1 << r;
    int base = 0;
    for (int j = 0; j < r; ++j) base |= sigma[t.region[static_cast<std::size_t>(j)]] << j;

    for (int k = 0; k < t.arity; ++k) {
      const Move& mv = model_->move(t.moves[static_cast<std::size_t>(k)]);
      int bit_a = -1, bit_b = -1;
      for (int j = 0; j < r; ++j) {
        if (t.region[static_cast<std::size_t>(j)] == mv.site) bit_a = j;
        if (t.region[static_cast<std::size_t>(j)] == mv.target) bit_b = j;
      }
      for (int tau = 0; tau < n_local; ++tau) {
        for (int j = 0; j < r; ++j) work.set(t.region[static_cast<std::size_t>(j)], static_cast<std::uint8_t>((tau >> j) & 1));
        rate[static_cast<std::size_t>(k)][static_cast<std::size_t>(tau)] = model_->rate(work, mv);
        int out = tau;
        if (mv.kind == MoveKind::SpinFlip) {
          out ^= 1 << bit_a;
        } else {
          int va = (tau >> bit_a) & 1, vb = (tau >> bit_b) & 1;
          out = (out & ~((1 << bit_a) | (1 << bit_b))) | (vb << bit_a) | (va << bit_b);
        }
        next[static_cast<std::size_t>(k)][static_cast<std::size_t>(tau)] = static_cast<std::uint8_t>(out);
      }
    }
    for (int j = 0; j < r; ++j) work.set(t.region[static_cast<std::size_t>(j)], sigma[t.region[static_cast<std::size_t>(j)]]);

    std::fill_n(row.begin(), n_local, 0.0);
    std::fill_n(col.begin(), n_local, 0.0);
    auto apply_words = [&](const auto& words) {
      for (const Word& w : words) {
        // Row sigma of the product: e_base^T X Y (Z).
        std::fill_n(vec.begin(), n_local, 0.0);
        vec[static_cast<std::size_t>(base)] = 1.0;
        for (int i = 0; i < t.arity; ++i) {
          const auto k = static_cast<std::size_t>(w.ops[static_cast<std::size_t>(i)]);
          std::fill_n(tmp.begin(), n_local, 0.0);
          for (int tau = 0; tau < n_local; ++tau) {
            double v = vec[static_cast<std::size_t>(tau)];
            if (v == 0.0) continue;
            double q = rate[k][static_cast<std::size_t>(tau)] * v;
            tmp[next[k][static_cast<std::size_t>(tau)]] += q;
            tmp[static_cast<std::size_t>(tau)] -= q;
          }
          vec = tmp;
        }
        for (int tau = 0; tau < n_local; ++tau) row[static_cast<std::size_t>(tau)] += w.sign * t.coeff * vec[static_cast<std::size_t>(tau)];

        // Column sigma of the product: X Y (Z) e_base.
        std::fill_n(vec.begin(), n_local, 0.0);
        vec[static_cast<std::size_t>(base)] = 1.0;
        for (int i = t.arity - 1; i >= 0; --i) {
          const auto k = static_cast<std::size_t>(w.ops[static_cast<std::size_t>(i)]);
          for (int tau = 0; tau < n_local; ++tau) {
            tmp[static_cast<std::size_t>(tau)] =
                rate[k][static_cast<std::size_t>(tau)] * (vec[next[k][static_cast<std::size_t>(tau)]] - vec[static_cast<std::size_t>(tau)]);
          }
          std::copy_n(tmp.begin(), n_local, vec.begin());
        }
        for (int tau = 0; tau < n_local; ++tau) col[static_cast<std::size_t>(tau)] += w.sign * t.coeff * vec[static_cast<std::size_t>(tau)];
      }
    };
    if (t.arity == 2) {
      apply_words(kWords2);
    } else {
      apply_words(kWords3);
    }

    for (int tau = 0; tau < n_local; ++tau) {
      double rv = row[static_cast<std::size_t>(tau)], cv = col[static_cast<std::size_t>(tau)];
      if (rv == 0.0 && cv == 0.0) continue;
      SiteSet d;
      int changed = tau ^ base;
      for (int j = 0; j < r; ++j) {
        if ((changed >> j) & 1) d.sites[static_cast<std::size_t>(d.count++)] = t.region[static_cast<std::size_t>(j)];
      }
      Accum& a = acc[d];
      a.row += rv;
      a.col += cv;
    }
  }

  const double pf = factorial(order_);
  result.entries.reserve(acc.size());
  for (const auto& [diff, values] : acc) {
    LocalEntry e;
    e.diff = diff;
    if (diff.count == 0) {
      e.distance = 0;
      e.C_forward = e.C_backward = values.row;
      e.L_forward = e.L_backward = 1.0;
      result.entries.push_back(e);
      continue;
    }
    PathSums fwd = path_sums(sigma, diff);
    if (fwd.length < 0) continue;
    SpinConfiguration target = sigma;
    for (int s : diff.view()) target.flip(s);
    PathSums bwd = path_sums(target, diff);
    e.distance = fwd.length;
    e.L_forward = fwd.plain;
    e.L_backward = bwd.plain;
    if (fwd.length < order_) {
      e.C_forward = values.row;
      e.C_backward = values.col;
    } else {
      // At the full order C is the difference of exact and split path sums.
      e.C_forward = fwd.plain / pf - fwd.weighted;
      e.C_backward = bwd.plain / pf - bwd.weighted;
      e.LQ_forward = pf * fwd.weighted;
      e.LQ_backward = pf * bwd.weighted;
    }
    result.entries.push_back(e);
  }
  return result;
}

CoefficientEvaluator::Observation CoefficientEvaluator::compute(const SpinConfiguration& sigma) const {
  Observation obs;
  if (order_ == 0) return obs;
  const LocalExpansion ex = expand(sigma);
  const double pf = factorial(order_);

  auto checked_atanh = [&](double m) {
    if (!(std::abs(m) < 1.0)) {
      throw AtanhDomain("|M| >= 1 at configuration " + sigma.to_string());
    }
    return std::atanh(m);
  };

  for (const LocalEntry& e : ex.entries) {
    if (e.distance < order_) {
      if (e.C_backward == 0.0) continue;
      if (e.L_backward == 0.0) throw ZeroReverseRate("reverse path weight vanishes at " + sigma.to_string());
      obs.D += e.L_forward / e.L_backward * e.C_backward;
      continue;
    }
    const double b_fwd = e.LQ_forward / pf;
    const double b_bwd = e.LQ_backward / pf;
    if (e.C_forward != 0.0) {
      double m = e.C_forward / (e.C_forward + 2.0 * b_fwd);
      obs.A += e.C_forward - 2.0 * b_fwd * checked_atanh(m);
    }
    if (e.C_backward != 0.0) {
      double m = e.C_backward / (e.C_backward + 2.0 * b_bwd);
      obs.D += 2.0 * b_fwd * checked_atanh(m);
    }
  }
  return obs;
}

CoefficientEvaluator::Observation CoefficientEvaluator::observe(const SpinConfiguration& sigma) {
  if (sigma.size() > 64) return compute(sigma);
  const std::uint64_t key = sigma.code();
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  Observation obs = compute(sigma);
  if (memo_.size() < memo_limit_) memo_.emplace(key, obs);
  return obs;
}

LocalEntry local_expansion(const RateModel& model, const Decomposition& decomposition, const SchemeSpec& scheme,
                           const SpinConfiguration& sigma, std::span<const int> site_tuple) {
  if (static_cast<int>(site_tuple.size()) > std::max(scheme.order(), 1) * model.max_write_size()) {
    throw std::invalid_argument("site tuple is longer than the scheme order allows");
  }
  CoefficientEvaluator evaluator(model, decomposition, scheme);
  const SiteSet diff = make_site_set(site_tuple);
  const LocalExpansion ex = evaluator.expand(sigma);
  if (const LocalEntry* e = ex.find(diff)) return *e;
  LocalEntry zero;
  zero.diff = diff;
  return zero;
}

}  // namespace parkmc
