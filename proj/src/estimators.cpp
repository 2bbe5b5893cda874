#include "parkmc/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "parkmc/errors.hpp"

namespace parkmc {

Estimate batch_means(const std::vector<double>& series, int batches) {
  Estimate e;
  if (series.empty()) return e;
  double sum = 0.0;
  for (double v : series) sum += v;
  e.value = sum / static_cast<double>(series.size());
  const std::size_t per = series.size() / static_cast<std::size_t>(std::max(batches, 1));
  if (batches < 2 || per == 0) return e;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < per; ++i) s += series[static_cast<std::size_t>(b) * per + i];
    means.push_back(s / static_cast<double>(per));
  }
  double mean = 0.0;
  for (double m : means) mean += m;
  mean /= static_cast<double>(means.size());
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= static_cast<double>(means.size() - 1);
  e.se = std::sqrt(var / static_cast<double>(means.size()));
  return e;
}

EprAccumulator::EprAccumulator(const RateModel& model, const Decomposition& decomposition, const SchemeSpec& scheme)
    : model_(&model), scheme_(scheme), evaluator_(model, decomposition, scheme) {}

void EprAccumulator::add(const SpinConfiguration& sigma) {
  auto obs = evaluator_.observe(sigma);
  a_.push_back(obs.A);
  d_.push_back(obs.D);
}

EprReport EprAccumulator::report(long burn_in, int batches) const {
  EprReport r;
  r.scheme = scheme_;
  r.p = scheme_.order();
  r.model = model_->kind();
  r.N1 = model_->lattice().width();
  r.N2 = model_->lattice().height();
  r.A = batch_means(a_, batches);
  r.D = batch_means(d_, batches);
  const double scale = r.p > 0 ? std::pow(scheme_.dt, r.p - 1) : 0.0;
  std::vector<double> total(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) total[i] = (a_[i] + d_[i]) * scale;
  r.epr_leading = batch_means(total, batches);
  r.n_samples = static_cast<long>(a_.size());
  r.burn_in = burn_in;
  return r;
}

EprReport estimate_epr(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                       int batches) {
  EprAccumulator acc(model, decomposition, sample.scheme);
  for (const auto& s : sample.states) acc.add(s);
  return acc.report(0, batches);
}

Estimate estimate_A(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                    const SchemeSpec& scheme, int batches) {
  SkeletonSample s = sample;
  s.scheme = scheme;
  return estimate_epr(s, model, decomposition, batches).A;
}

Estimate estimate_D(const SkeletonSample& sample, const RateModel& model, const Decomposition& decomposition,
                    const SchemeSpec& scheme, int batches) {
  SkeletonSample s = sample;
  s.scheme = scheme;
  return estimate_epr(s, model, decomposition, batches).D;
}

Estimate gc_functional(const SkeletonSample& sample, const TransitionProbabilityFn& transition_probability,
                       int batches) {
  if (!transition_probability) {
    throw UnavailableTransitionProbability("no transition probabilities are available for this chain");
  }
  std::vector<double> terms;
  terms.reserve(sample.states.size());
  for (std::size_t i = 0; i + 1 < sample.states.size(); ++i) {
    const auto& a = sample.states[i];
    const auto& b = sample.states[i + 1];
    if (a == b) {
      terms.push_back(0.0);
      continue;
    }
    double fwd = transition_probability(a, b);
    double bwd = transition_probability(b, a);
    if (fwd <= 0.0) throw SupportViolation("sampled transition has zero probability");
    if (bwd <= 0.0) throw InfiniteEPR("sampled transition has no reverse");
    terms.push_back(std::log(fwd / bwd));
  }
  return batch_means(terms, batches);
}

double per_site_divisor(ModelKind model, int N1, int N2) {
  const double area = static_cast<double>(N1) * static_cast<double>(N2);
  return model == ModelKind::Diffusion ? area : std::sqrt(area);
}

EprReport normalize_per_site(const EprReport& report) {
  EprReport r = report;
  const double div = per_site_divisor(report.model, report.N1, report.N2) / report.normalization;
  r.normalization = per_site_divisor(report.model, report.N1, report.N2);
  for (Estimate* e : {&r.A, &r.D, &r.epr_leading}) {
    e->value /= div;
    e->se /= div;
  }
  return r;
}

Comparison compare(const EprReport& first, const EprReport& second) {
  if (first.scheme.dt != second.scheme.dt || first.model != second.model || first.N1 != second.N1 ||
      first.N2 != second.N2) {
    throw IncompatibleReports("reports differ in model, lattice or time step");
  }
  auto normalized = [](const EprReport& r) {
    return r.normalization == 1.0 && per_site_divisor(r.model, r.N1, r.N2) != 1.0 ? normalize_per_site(r) : r;
  };
  const EprReport a = normalized(first), b = normalized(second);
  Comparison c;
  c.difference = a.epr_leading.value - b.epr_leading.value;
  c.se = std::hypot(a.epr_leading.se, b.epr_leading.se);
  c.significant = std::abs(c.difference) > 3.0 * c.se;
  return c;
}

}  // namespace parkmc
