#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "parkmc/lattice.hpp"
#include "parkmc/models.hpp"
#include "parkmc/splitting.hpp"

namespace parkmc {

/// Up to six sites in ascending order: the sites where a target
/// configuration differs from the base one.
struct SiteSet {
  std::array<int, 6> sites{};
  int count = 0;

  std::span<const int> view() const { return {sites.data(), static_cast<std::size_t>(count)}; }
  friend bool operator<(const SiteSet& a, const SiteSet& b) {
    if (a.count != b.count) return a.count < b.count;
    for (int i = 0; i < a.count; ++i) {
      if (a.sites[static_cast<std::size_t>(i)] != b.sites[static_cast<std::size_t>(i)])
        return a.sites[static_cast<std::size_t>(i)] < b.sites[static_cast<std::size_t>(i)];
    }
    return false;
  }
  friend bool operator==(const SiteSet& a, const SiteSet& b) { return !(a < b) && !(b < a); }
};

SiteSet make_site_set(std::span<const int> sites);

/// Local coefficients linking sigma with the target sigma' obtained by
/// flipping `diff`.
struct LocalEntry {
  SiteSet diff;
  int distance = -1;        ///< geodesic distance, -1 if beyond the scheme order
  double C_forward = 0.0;   ///< C(sigma, sigma')
  double C_backward = 0.0;  ///< C(sigma', sigma)
  double L_forward = 0.0;   ///< L^d(sigma, sigma') at d = distance
  double L_backward = 0.0;  ///< L^d(sigma', sigma)
  double LQ_forward = 0.0;  ///< L_Q^p(sigma, sigma'), at distance p only
  double LQ_backward = 0.0;
};

struct LocalExpansion {
  int order = 0;
  std::vector<LocalEntry> entries;  ///< sorted by diff; the empty diff is the diagonal

  const LocalEntry* find(const SiteSet& diff) const;
};

/// Evaluates the leading local-error coefficient C and the path sums that
/// enter the A and D observables at one configuration.
///
/// C is assembled from nested commutators of single-move generators. Only
/// pairs of moves that interact (one writes a site the other reads) give
/// non-zero commutators, so the term list is fixed per lattice and each
/// term acts on the few sites its moves write.
class CoefficientEvaluator {
 public:
  CoefficientEvaluator(const RateModel& model, const Decomposition& decomposition, const SchemeSpec& scheme);

  struct Observation {
    double A = 0.0;
    double D = 0.0;
  };

  LocalExpansion expand(const SpinConfiguration& sigma) const;
  Observation observe(const SpinConfiguration& sigma);

  int order() const noexcept { return order_; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  /// Memoized observations are kept for lattices of at most 64 sites, up to
  /// this many distinct configurations.
  void set_memo_limit(std::size_t limit) { memo_limit_ = limit; }

 private:
  struct Term {
    std::array<int, 3> moves{};  ///< [m0, m1] or [m0, [m1, m2]]
    int arity = 2;
    double coeff = 0.0;
    std::array<int, 6> region{};  ///< union of write sets
    int region_size = 0;
  };
  struct PathSums {
    int length = -1;
    double plain = 0.0;     ///< sum of rate products
    double weighted = 0.0;  ///< with scheme word coefficients
  };

  void add_term(std::array<int, 3> moves, int arity, double coeff);
  PathSums path_sums(const SpinConfiguration& from, const SiteSet& diff) const;
  double word_coefficient(const std::vector<int>& groups) const;
  Observation compute(const SpinConfiguration& sigma) const;

  const RateModel* model_;
  const Decomposition* decomposition_;
  SchemeSpec scheme_;
  int order_;
  std::vector<Stage> stages_;
  std::vector<Term> terms_;
  std::unordered_map<std::uint64_t, Observation> memo_;
  std::size_t memo_limit_ = 1u << 20;
};

/// The coefficients for one site tuple; the target is sigma with the
/// tuple's sites changed. Returns an entry with zero values if the tuple is
/// outside the support of C.
LocalEntry local_expansion(const RateModel& model, const Decomposition& decomposition, const SchemeSpec& scheme,
                           const SpinConfiguration& sigma, std::span<const int> site_tuple);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Mean of a correlated series with a batch-means standard error.
Estimate batch_means(const std::vector<double>& series, int batches = 32);

struct EprReport {
  SchemeSpec scheme;
  int p = 0;
  ModelKind model = ModelKind::AdsorptionDesorption;
  int N1 = 0;
  int N2 = 0;
  Estimate A;
  Estimate D;
  Estimate epr_leading;  ///< (A + D) dt^{p-1}
  long n_samples = 0;
  long burn_in = 0;
  double normalization = 1.0;  ///< divisor applied by normalize_per_site
};

/// Collects per-sample A and D values and turns them into a report.
class EprAccumulator {
 public:
  EprAccumulator(const RateModel& model, const Decomposition& decomposition, const SchemeSpec& scheme);
  void add(const SpinConfiguration& sigma);
  EprReport report(long burn_in = 0, int batches = 32) const;
  const std::vector<double>& A_series() const noexcept { return a_; }
  const std::vector<double>& D_series() const noexcept { return d_; }

 private:
  const RateModel* model_;
  SchemeSpec scheme_;
  CoefficientEvaluator evaluator_;
  std::vector<double> a_;
  std::vector<double> d_;
};

Estimate estimate_A(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                    const SchemeSpec& scheme, int batches = 32);
Estimate estimate_D(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                    const SchemeSpec& scheme, int batches = 32);
EprReport estimate_epr(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                       int batches = 32);

using TransitionProbabilityFn = std::function<double(const SpinConfiguration&, const SpinConfiguration&)>;

/// Ergodic average of log P(s_i, s_{i+1}) / P(s_{i+1}, s_i) along the sample.
Estimate gc_functional(const SkeletonSample& sample, const TransitionProbabilityFn& transition_probability,
                       int batches = 32);

/// Per-site divisor: sqrt(N1 N2) for adsorption/desorption, N1 N2 for diffusion.
double per_site_divisor(ModelKind model, int N1, int N2);
EprReport normalize_per_site(const EprReport& report);

struct Comparison {
  double difference = 0.0;
  double se = 0.0;
  bool significant = false;  ///< |difference| > 3 se
};

/// Normalized EPR of `first` minus that of `second`.
Comparison compare(const EprReport& first, const EprReport& second);

}  // namespace parkmc
