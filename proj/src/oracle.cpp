#include "parkmc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "parkmc/errors.hpp"

namespace parkmc {

namespace {

constexpr std::size_t kDenseCap = 4096;

void require_dense(std::size_t n) {
  if (n > kDenseCap) {
    throw StateSpaceTooLarge("dense matrices are limited to " + std::to_string(kDenseCap) + " states, got " +
                             std::to_string(n));
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

StateSpace StateSpace::full(int n_sites, std::size_t cap) {
  if (n_sites < 0 || n_sites >= 63 || (std::uint64_t{1} << n_sites) > cap) {
    throw StateSpaceTooLarge(std::to_string(n_sites) + " sites exceed the state-space cap of " +
                             std::to_string(cap));
  }
  StateSpace s;
  s.n_sites_ = n_sites;
  const std::uint64_t count = std::uint64_t{1} << n_sites;
  s.codes_.reserve(count);
  for (std::uint64_t c = 0; c < count; ++c) s.codes_.push_back(c);
  for (std::size_t i = 0; i < s.codes_.size(); ++i) s.index_[s.codes_[i]] = static_cast<long>(i);
  return s;
}

StateSpace StateSpace::sector(int n_sites, int particles, std::size_t cap) {
  if (particles < 0 || particles > n_sites) throw std::invalid_argument("particle count out of range");
  // Binomial size check before enumerating.
  double size = 1.0;
  for (int i = 0; i < particles; ++i) size = size * (n_sites - i) / (i + 1);
  if (n_sites >= 63 || size > static_cast<double>(cap)) {
    throw StateSpaceTooLarge("sector with " + std::to_string(particles) + " of " + std::to_string(n_sites) +
                             " sites exceeds the state-space cap");
  }
  StateSpace s;
  s.n_sites_ = n_sites;
  const std::uint64_t count = std::uint64_t{1} << n_sites;
  for (std::uint64_t c = 0; c < count; ++c) {
    if (std::popcount(c) == particles) s.codes_.push_back(c);
  }
  for (std::size_t i = 0; i < s.codes_.size(); ++i) s.index_[s.codes_[i]] = static_cast<long>(i);
  return s;
}

long StateSpace::index(std::uint64_t code) const {
  auto it = index_.find(code);
  return it == index_.end() ? -1 : it->second;
}

DenseChain DenseChain::build(const RateModel& model, const Decomposition& decomposition, int particles,
                             std::size_t cap) {
  if (!(model.lattice() == decomposition.lattice())) {
    throw std::invalid_argument("model and decomposition use different lattices");
  }
  const int n_sites = model.lattice().size();
  DenseChain chain{particles < 0 ? StateSpace::full(n_sites, cap) : StateSpace::sector(n_sites, particles, cap),
                   {}, {}, {}};
  const auto n = static_cast<Eigen::Index>(chain.states.size());
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> t, t1, t2;
  for (Eigen::Index i = 0; i < n; ++i) {
    SpinConfiguration sigma = chain.states.configuration(static_cast<std::size_t>(i));
    double out = 0.0, out1 = 0.0, out2 = 0.0;
    for (int m = 0; m < model.move_count(); ++m) {
      double r = model.rate(sigma, m);
      if (r <= 0.0) continue;
      SpinConfiguration next = sigma;
      model.apply(next, m);
      long j = chain.states.index(next.code());
      if (j < 0) throw std::logic_error("a move left the enumerated state space");
      t.emplace_back(i, j, r);
      out += r;
      if (decomposition.group_of(primary_site(model.move(m))) == 1) {
        t1.emplace_back(i, j, r);
        out1 += r;
      } else {
        t2.emplace_back(i, j, r);
        out2 += r;
      }
    }
    t.emplace_back(i, i, -out);
    t1.emplace_back(i, i, -out1);
    t2.emplace_back(i, i, -out2);
  }
  chain.L.resize(n, n);
  chain.L1.resize(n, n);
  chain.L2.resize(n, n);
  chain.L.setFromTriplets(t.begin(), t.end());
  chain.L1.setFromTriplets(t1.begin(), t1.end());
  chain.L2.setFromTriplets(t2.begin(), t2.end());
  return chain;
}

Matrix expm_uniformized(const SparseMatrix& generator, double t) {
  if (t < 0) throw std::invalid_argument("time must be nonnegative");
  const Eigen::Index n = generator.rows();
  require_dense(static_cast<std::size_t>(n));
  double lambda = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) lambda = std::max(lambda, std::abs(generator.coeff(i, i)));
  if (lambda == 0.0 || t == 0.0) return Matrix::Identity(n, n);

  // A slightly inflated rate keeps every diagonal entry of T positive, so the
  // support of T^k only grows with k.
  lambda *= 1.0 + 1e-3;
  const int substeps = std::max(1, static_cast<int>(std::ceil(lambda * t / 50.0)));
  const double lt = lambda * t / substeps;
  SparseMatrix T = sparse_identity(n) + generator / lambda;

  Matrix power = Matrix::Identity(n, n);
  double weight = std::exp(-lt);
  double cumulative = weight;
  Matrix result = weight * power;
  const int max_terms = static_cast<int>(lt + 40.0 * std::sqrt(lt + 1.0) + 100.0) + static_cast<int>(n);
  Eigen::Index support = n;
  bool growing = true;
  // Keep going past the tail cut while new entries appear: tiny but positive
  // transition probabilities matter to the support checks downstream.
  for (int k = 1; k <= max_terms && (growing || 1.0 - cumulative >= 1e-13); ++k) {
    power = power * T;
    weight *= lt / k;
    cumulative += weight;
    result += weight * power;
    const Eigen::Index now = (power.array() > 0.0).count();
    growing = now > support;
    support = now;
  }
  Matrix out = result;
  for (int s = 1; s < substeps; ++s) out = out * result;
  return out;
}

Matrix transition_exact(const DenseChain& chain, double dt) { return expm_uniformized(chain.L, dt); }

Matrix transition_scheme(const DenseChain& chain, const SchemeSpec& scheme) {
  const auto n = static_cast<Eigen::Index>(chain.size());
  require_dense(chain.size());
  Matrix P = Matrix::Identity(n, n);
  for (const Stage& st : scheme.stages()) {
    P = P * expm_uniformized(chain.generator(st.group), st.fraction * scheme.dt);
  }
  return P;
}

SparseMatrix sparse_power(const SparseMatrix& m, int k) {
  if (k < 0) throw std::invalid_argument("negative matrix power");
  SparseMatrix out = sparse_identity(m.rows());
  for (int i = 0; i < k; ++i) out = (out * m).pruned();
  return out;
}

SparseMatrix scheme_expansion_matrix(const DenseChain& chain, const SchemeSpec& scheme, int k) {
  const auto stages = scheme.stages();
  const auto n = static_cast<Eigen::Index>(chain.size());
  SparseMatrix total(n, n);
  std::vector<int> counts(stages.size(), 0);
  // Enumerate compositions k = n_1 + ... + n_S in stage order.
  std::function<void(std::size_t, int)> visit = [&](std::size_t s, int remaining) {
    if (s + 1 == stages.size()) {
      counts[s] = remaining;
      SparseMatrix term = sparse_identity(n);
      double coeff = 1.0;
      for (std::size_t i = 0; i < stages.size(); ++i) {
        coeff *= std::pow(stages[i].fraction, counts[i]) / factorial(counts[i]);
        if (counts[i] > 0) term = (term * sparse_power(chain.generator(stages[i].group), counts[i])).pruned();
      }
      total += coeff * term;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[s] = c;
      visit(s + 1, remaining - c);
    }
  };
  visit(0, k);
  total *= factorial(k);
  return total.pruned();
}

SparseMatrix commutator_matrix(const DenseChain& chain, const SchemeSpec& scheme) {
  const int p = scheme.order();
  if (p == 0) throw std::invalid_argument("the exact chain has no local error");
  SparseMatrix c = (sparse_power(chain.L, p) - scheme_expansion_matrix(chain, scheme, p)) / factorial(p);
  return c.pruned(1.0, 1e-13);
}

Vector stationary(const Matrix& P) {
  const Eigen::Index n = P.rows();
  if (n == 0) return Vector();
  Matrix A = P.transpose() - Matrix::Identity(n, n);
  A.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Vector mu = A.partialPivLu().solve(rhs);

  auto residual = [&](const Vector& v) { return (v.transpose() * P - v.transpose()).cwiseAbs().maxCoeff(); };
  bool ok = mu.allFinite() && mu.minCoeff() > -1e-12 && residual(mu) <= 1e-10;
  if (ok) {
    mu = mu.cwiseMax(0.0);
    mu /= mu.sum();
    return mu;
  }
  // Power iteration fallback.
  Vector v = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 200000; ++it) {
    Vector next = (v.transpose() * P).transpose();
    next /= next.sum();
    double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-15 && residual(v) <= 1e-12) return v;
  }
  throw NotConverged("stationary distribution did not converge");
}

DistanceTable geodesic_distances(const DenseChain& chain) {
  const std::size_t n = chain.size();
  require_dense(n);
  DistanceTable table;
  table.n = n;
  table.d.assign(n * n, -1);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    int* row = &table.d[s * n];
    row[s] = 0;
    queue.assign(1, s);
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (SparseMatrix::InnerIterator it(chain.L, static_cast<Eigen::Index>(u)); it; ++it) {
        auto v = static_cast<std::size_t>(it.col());
        if (v == u || it.value() <= 0.0 || row[v] >= 0) continue;
        row[v] = row[u] + 1;
        table.diameter = std::max(table.diameter, row[v]);
        queue.push_back(v);
      }
    }
  }
  return table;
}

double epr_exact(const Matrix& Pb, const Vector& mu, double dt) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  const Eigen::Index n = Pb.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) <= 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || Pb(i, j) <= 0.0) continue;
      if (Pb(j, i) <= 0.0) {
        throw InfiniteEPR("forward transition " + std::to_string(i) + "->" + std::to_string(j) +
                          " has no reverse");
      }
      sum += mu(i) * Pb(i, j) * std::log(Pb(i, j) / Pb(j, i));
    }
  }
  return sum / dt;
}

double rer_exact(const Matrix& Pb, const Matrix& Po, const Vector& mu, double dt) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  const Eigen::Index n = Pb.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) <= 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (Pb(i, j) <= 0.0) continue;
      if (Po(i, j) <= 0.0) {
        throw SupportViolation("scheme transition " + std::to_string(i) + "->" + std::to_string(j) +
                               " is outside the exact support");
      }
      sum += mu(i) * Pb(i, j) * std::log(Pb(i, j) / Po(i, j));
    }
  }
  return sum / dt;
}

double discrepancy_exact(const Matrix& Pb, const Matrix& Po, const Vector& mu, double dt) {
  if (dt <= 0) throw std::invalid_argument("dt must be positive");
  const Eigen::Index n = Pb.rows();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mu(i) <= 0.0) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (Pb(i, j) <= 0.0) continue;
      if (Po(j, i) <= 0.0 || Pb(j, i) <= 0.0) {
        throw SupportViolation("reverse transition " + std::to_string(j) + "->" + std::to_string(i) +
                               " vanishes");
      }
      sum += mu(i) * Pb(i, j) * std::log(Po(j, i) / Pb(j, i));
    }
  }
  return sum / dt;
}

double ep_paths(const Matrix& Pb, const Vector& mu, int m) {
  if (m < 0) throw std::invalid_argument("path length must be nonnegative");
  if (m == 0) return 0.0;
  const Eigen::Index n = Pb.rows();
  if (std::pow(static_cast<double>(n), m + 1) > 1e7) {
    throw TooManyPaths(std::to_string(n) + " states with path length " + std::to_string(m));
  }
  std::vector<Eigen::Index> path(static_cast<std::size_t>(m) + 1);
  double total = 0.0;
  std::function<void(int, double, double)> walk = [&](int depth, double fwd, double bwd) {
    if (depth == m) {
      double p = mu(path[0]) * fwd;
      double q = mu(path[static_cast<std::size_t>(m)]) * bwd;
      if (q <= 0.0) throw InfiniteEPR("path without a reverse");
      total += p * std::log(p / q);
      return;
    }
    Eigen::Index from = path[static_cast<std::size_t>(depth)];
    for (Eigen::Index to = 0; to < n; ++to) {
      double f = Pb(from, to);
      if (f <= 0.0) continue;
      path[static_cast<std::size_t>(depth) + 1] = to;
      walk(depth + 1, fwd * f, bwd * Pb(to, from));
    }
  };
  for (Eigen::Index s = 0; s < n; ++s) {
    if (mu(s) <= 0.0) continue;
    path[0] = s;
    walk(0, 1.0, 1.0);
  }
  return total;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0 || y[i] <= 0) throw std::invalid_argument("log-log fit needs positive values");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OrderFit epr_order_fit(const DenseChain& chain, SchemeKind kind, const std::vector<double>& dt_grid) {
  if (dt_grid.size() < 4) throw std::invalid_argument("order fit needs at least four step sizes");
  for (double dt : dt_grid) {
    if (dt <= 0) throw std::invalid_argument("step sizes must be positive");
  }
  const double ratio = dt_grid[1] / dt_grid[0];
  for (std::size_t i = 1; i < dt_grid.size(); ++i) {
    if (std::abs(dt_grid[i] / dt_grid[i - 1] - ratio) > 1e-9 * ratio) {
      throw std::invalid_argument("step sizes must form a geometric grid");
    }
  }
  OrderFit fit;
  fit.dt = dt_grid;
  bool any_large = false, all_positive = true;
  for (double dt : dt_grid) {
    SchemeSpec scheme{kind, dt, false};
    Matrix P = transition_scheme(chain, scheme);
    double e = epr_exact(P, stationary(P), dt);
    fit.epr.push_back(e);
    any_large = any_large || e >= 1e-10;
    all_positive = all_positive && e > 0.0;
  }
  if (any_large && all_positive) {
    fit.slope = loglog_slope(fit.dt, fit.epr);
    fit.fitted = true;
  }
  return fit;
}

ExactCoefficients exact_coefficients(const DenseChain& chain, const SchemeSpec& scheme, const Vector& mu) {
  const int p = scheme.order();
  if (p == 0) return {};
  const auto n = static_cast<Eigen::Index>(chain.size());
  require_dense(chain.size());
  std::vector<Matrix> Lpow;
  Lpow.reserve(static_cast<std::size_t>(p) + 1);
  Matrix L = Matrix(chain.L);
  Lpow.push_back(Matrix::Identity(n, n));
  for (int i = 1; i <= p; ++i) Lpow.push_back(Lpow.back() * L);
  const double pf = factorial(p);
  Matrix b = Matrix(scheme_expansion_matrix(chain, scheme, p)) / pf;
  Matrix C = Lpow[static_cast<std::size_t>(p)] / pf - b;
  DistanceTable dist = geodesic_distances(chain);

  auto checked_atanh = [](double m, Eigen::Index i, Eigen::Index j) {
    if (!(std::abs(m) < 1.0)) {
      throw AtanhDomain("|M| >= 1 between states " + std::to_string(i) + " and " + std::to_string(j));
    }
    return std::atanh(m);
  };

  ExactCoefficients out;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (mu(s) <= 0.0) continue;
    double a_sum = 0.0, d_sum = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const int k = dist.at(static_cast<std::size_t>(s), static_cast<std::size_t>(t));
      if (k < 0 || k > p) continue;
      if (k < p) {
        if (C(t, s) == 0.0) continue;
        const Matrix& Lk = Lpow[static_cast<std::size_t>(k)];
        if (Lk(t, s) == 0.0) throw ZeroReverseRate("reverse power entry vanishes");
        d_sum += Lk(s, t) / Lk(t, s) * C(t, s);
        continue;
      }
      if (C(s, t) != 0.0) {
        double m = C(s, t) / (C(s, t) + 2.0 * b(s, t));
        a_sum += C(s, t) - 2.0 * b(s, t) * checked_atanh(m, s, t);
      }
      if (C(t, s) != 0.0) {
        double m = C(t, s) / (C(t, s) + 2.0 * b(t, s));
        d_sum += 2.0 * b(s, t) * checked_atanh(m, t, s);
      }
    }
    out.A += mu(s) * a_sum;
    out.D += mu(s) * d_sum;
  }
  return out;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace parkmc
