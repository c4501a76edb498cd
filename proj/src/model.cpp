#include "nspgds/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nspgds/distributions.hpp"

namespace nspgds {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("model: " + what);
}

double floor_pos(double x) { return std::max(x, dist::kPositiveFloor); }

}  // namespace

const char* chain_name(ChainKind k) {
  switch (k) {
    case ChainKind::DirDir: return "dir-dir";
    case ChainKind::DirGamDir: return "dir-gam-dir";
    case ChainKind::PRGamDir: return "pr-gam-dir";
    case ChainKind::Static: return "static";
  }
  return "?";
}

ChainKind chain_from_name(const std::string& name) {
  if (name == "dir-dir") return ChainKind::DirDir;
  if (name == "dir-gam-dir") return ChainKind::DirGamDir;
  if (name == "pr-gam-dir") return ChainKind::PRGamDir;
  if (name == "static") return ChainKind::Static;
  throw std::invalid_argument("unknown chain kind: " + name +
                              " (expected dir-dir, dir-gam-dir, pr-gam-dir or static)");
}

void Hyperparameters::validate() const {
  require(std::isfinite(tau0) && tau0 > 0, "tau0 must be > 0");
  require(std::isfinite(gamma0) && gamma0 > 0, "gamma0 must be > 0");
  require(std::isfinite(epsilon0) && epsilon0 > 0, "epsilon0 must be > 0");
  require(std::isfinite(e0) && e0 > 0, "e0 must be > 0");
  require(std::isfinite(f0) && f0 > 0, "f0 must be > 0");
  require(std::isfinite(eps_alpha) && eps_alpha >= 0, "eps_alpha must be >= 0");
  require(K >= 1, "K must be >= 1");
  require(M >= 1, "M must be >= 1");
}

Dims Dims::make(int V, int T, int K, int M) {
  require(V >= 1, "V must be >= 1");
  require(T >= 1, "T must be >= 1");
  require(K >= 1, "K must be >= 1");
  require(M >= 1, "M must be >= 1");
  Dims d;
  d.V = V;
  d.T = T;
  d.K = K;
  d.M = M;
  d.I = (T + M - 1) / M;
  return d;
}

int interval_of(int t, int M) {
  require(M >= 1, "interval length must be >= 1");
  if (t < 1) throw std::out_of_range("interval_of: t must be >= 1");
  return (t + M - 1) / M;
}

int64_t CountData::observed_total() const {
  int64_t s = 0;
  for (int v = 0; v < V(); ++v)
    for (int t = 0; t < T(); ++t)
      if (mask(v, t)) s += counts(v, t);
  return s;
}

CountData CountData::fully_observed(Grid<int64_t> counts) {
  CountData d;
  d.mask = Grid<uint8_t>(counts.rows(), counts.cols(), 1);
  d.counts = std::move(counts);
  return d;
}

Grid<double> first_interval_concentration(const std::vector<double>& nu, double xi) {
  const int K = static_cast<int>(nu.size());
  Grid<double> a0(K, K);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k = 0; k < K; ++k)
      a0(k1, k) = floor_pos((k1 == k) ? xi * nu[k] : nu[k1] * nu[k]);
  return a0;
}

namespace {

void draw_pi_column(Grid<double>& pi, int col, const Grid<double>& conc,
                    RngStream& rng) {
  const int K = pi.rows();
  std::vector<double> c(K), out(K);
  for (int k1 = 0; k1 < K; ++k1) c[k1] = floor_pos(conc(k1, col));
  dist::dirichlet(c, out, rng);
  for (int k1 = 0; k1 < K; ++k1) pi(k1, col) = out[k1];
}

}  // namespace

LatentState sample_state_from_prior(const Hyperparameters& hyper, const Dims& dims,
                                    uint64_t seed, uint64_t sweep) {
  hyper.validate();
  const int V = dims.V, T = dims.T, K = dims.K, I = dims.I, M = dims.M;
  const double eps0 = hyper.epsilon0;

  LatentState s;
  s.chain = hyper.chain;
  s.theta = Grid<double>(K, T);
  s.phi = Grid<double>(V, K);
  s.pi.assign(I, Grid<double>(K, K));
  s.delta.assign(T, 1.0);
  s.nu.assign(K, 1.0);

  {
    RngStream rng(seed, Var::Beta, 0, sweep);
    s.beta = dist::gamma(eps0, eps0, rng);
  }
  for (int k = 0; k < K; ++k) {
    RngStream rng(seed, Var::Nu, k, sweep);
    s.nu[k] = dist::gamma(hyper.gamma0 / K, s.beta, rng);
  }
  {
    // The xi conditional in the sampler has prior shape gamma0/K and rate
    // beta, so the generative side must match for the joint to cohere.
    RngStream rng(seed, Var::Xi, 0, sweep);
    s.xi = dist::gamma(hyper.gamma0 / K, s.beta, rng);
  }

  const Grid<double> a0 = first_interval_concentration(s.nu, s.xi);
  for (int k = 0; k < K; ++k) {
    RngStream rng(seed, Var::Pi, k, sweep);  // interval slot 0
    draw_pi_column(s.pi[0], k, a0, rng);
  }

  const bool dirdir = (s.chain == ChainKind::DirDir || s.chain == ChainKind::Static);
  if (dirdir) {
    RngStream rng(seed, Var::Eta, 0, sweep);
    s.eta = dist::gamma(hyper.e0, hyper.f0, rng);
    for (int i = 1; i < I; ++i) {
      for (int k = 0; k < K; ++k) {
        RngStream rng2(seed, Var::Pi, static_cast<uint64_t>(i) * K + k, sweep);
        Grid<double> conc(K, K);
        for (int k1 = 0; k1 < K; ++k1)
          conc(k1, k) = s.eta * K * s.pi[i - 1](k1, k);
        draw_pi_column(s.pi[i], k, conc, rng2);
      }
    }
  } else {
    s.alpha.assign(I, Grid<double>(K, K));
    s.psi.assign(I, Tensor3<double>(K, K, K));
    s.gamma_ik = Grid<double>(I, K, 1.0);
    s.c_ik = Grid<double>(I, K, 1.0);
    s.alpha[0] = a0;
    if (s.chain == ChainKind::PRGamDir) s.g_pair.assign(I, Grid<int64_t>(K, K));
    for (int i = 1; i < I; ++i) {
      // psi[i-1] slices over the middle index, one Dirichlet per (k, k2)
      for (int k = 0; k < K; ++k) {
        for (int k2 = 0; k2 < K; ++k2) {
          RngStream rng(seed, Var::Psi,
                        (static_cast<uint64_t>(i - 1) * K + k) * K + k2, sweep);
          std::vector<double> conc(K, eps0), out(K);
          dist::dirichlet(conc, out, rng);
          for (int k1 = 0; k1 < K; ++k1) s.psi[i - 1](k, k1, k2) = out[k1];
        }
      }
      for (int k = 0; k < K; ++k) {
        RngStream rg(seed, Var::GammaIK, static_cast<uint64_t>(i - 1) * K + k, sweep);
        s.gamma_ik(i - 1, k) = dist::gamma(eps0, eps0, rg);
        RngStream rc(seed, Var::CRate, static_cast<uint64_t>(i) * K + k, sweep);
        s.c_ik(i, k) = dist::gamma(eps0, eps0, rc);
      }
      for (int k = 0; k < K; ++k) {
        for (int k1 = 0; k1 < K; ++k1) {
          double lam = 0.0;
          for (int k2 = 0; k2 < K; ++k2)
            lam += s.psi[i - 1](k, k1, k2) * s.pi[i - 1](k2, k);
          lam *= s.gamma_ik(i - 1, k);
          RngStream ra(seed, Var::Alpha,
                       (static_cast<uint64_t>(i) * K + k1) * K + k, sweep);
          double shape;
          if (s.chain == ChainKind::PRGamDir) {
            const int64_t g = dist::poisson(lam, ra);
            s.g_pair[i](k1, k) = g;
            shape = static_cast<double>(g) + hyper.eps_alpha;
          } else {
            shape = lam;
          }
          // Gam(0, .) is the point mass at zero (PR-Gam-Dir sparsity)
          s.alpha[i](k1, k) = shape > 0.0
                                  ? dist::gamma(shape, s.c_ik(i, k), ra)
                                  : 0.0;
        }
      }
      for (int k = 0; k < K; ++k) {
        RngStream rng(seed, Var::Pi, static_cast<uint64_t>(i) * K + k, sweep);
        draw_pi_column(s.pi[i], k, s.alpha[i], rng);
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    RngStream rng(seed, Var::Phi, k, sweep);
    std::vector<double> conc(V, eps0), out(V);
    dist::dirichlet(conc, out, rng);
    for (int v = 0; v < V; ++v) s.phi(v, k) = out[v];
  }

  for (int t = 0; t < T; ++t) {
    RngStream rng(seed, Var::Delta, t, sweep);
    s.delta[t] = dist::gamma(eps0, eps0, rng);
  }

  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      RngStream rng(seed, Var::Theta, static_cast<uint64_t>(t) * K + k, sweep);
      double shape;
      if (t == 0) {
        shape = hyper.tau0 * s.nu[k];
      } else {
        const Grid<double>& p = s.pi[interval_index0(t - 1, M)];
        double m = 0.0;
        for (int k2 = 0; k2 < K; ++k2) m += p(k, k2) * s.theta(k2, t - 1);
        shape = hyper.tau0 * m;
      }
      s.theta(k, t) = floor_pos(dist::gamma(floor_pos(shape), hyper.tau0, rng));
    }
  }

  return s;
}

void sample_counts(const LatentState& state, Grid<int64_t>& out, uint64_t seed,
                   uint64_t sweep) {
  const int V = state.phi.rows(), T = state.theta.cols(), K = state.theta.rows();
  if (out.rows() != V || out.cols() != T) out = Grid<int64_t>(V, T);
  for (int v = 0; v < V; ++v) {
    for (int t = 0; t < T; ++t) {
      double rate = 0.0;
      for (int k = 0; k < K; ++k) rate += state.phi(v, k) * state.theta(k, t);
      rate *= state.delta[t];
      RngStream rng(seed, Var::DataGen, static_cast<uint64_t>(v) * T + t, sweep);
      out(v, t) = dist::poisson(rate, rng);
    }
  }
}

std::pair<LatentState, CountData> generate_synthetic(const Hyperparameters& hyper,
                                                     const Dims& dims, uint64_t seed) {
  LatentState state = sample_state_from_prior(hyper, dims, seed, 0);
  Grid<int64_t> counts(dims.V, dims.T);
  sample_counts(state, counts, seed, 0);
  return {std::move(state), CountData::fully_observed(std::move(counts))};
}

std::vector<double> predictive_rate(const LatentState& state, int t) {
  const int V = state.phi.rows(), K = state.theta.rows();
  if (t < 0 || t >= state.theta.cols())
    throw std::out_of_range("predictive_rate: t out of range");
  std::vector<double> rate(V, 0.0);
  for (int v = 0; v < V; ++v) {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += state.phi(v, k) * state.theta(k, t);
    rate[v] = state.delta[t] * s;
  }
  return rate;
}

Grid<double> predictive_rate_all(const LatentState& state) {
  const int V = state.phi.rows(), T = state.theta.cols(), K = state.theta.rows();
  Grid<double> rate(V, T);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < V; ++v) {
    for (int t = 0; t < T; ++t) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) s += state.phi(v, k) * state.theta(k, t);
      rate(v, t) = state.delta[t] * s;
    }
  }
  return rate;
}

double log_likelihood(const LatentState& state, const CountData& data) {
  const int V = data.V(), T = data.T(), K = state.theta.rows();
  // Per-row partial sums keep the reduction order fixed for any thread count.
  std::vector<double> partial(V, 0.0);
#pragma omp parallel for schedule(static)
  for (int v = 0; v < V; ++v) {
    double acc = 0.0;
    for (int t = 0; t < T; ++t) {
      if (!data.mask(v, t)) continue;
      double lam = 0.0;
      for (int k = 0; k < K; ++k) lam += state.phi(v, k) * state.theta(k, t);
      lam *= state.delta[t];
      lam = std::max(lam, dist::kPositiveFloor);
      const double y = static_cast<double>(data.counts(v, t));
      acc += y * std::log(lam) - lam - std::lgamma(y + 1.0);
    }
    partial[v] = acc;
  }
  double total = 0.0;
  for (int v = 0; v < V; ++v) total += partial[v];
  return total;
}

namespace {

void check_simplex(const double* w, int n, double tol, const std::string& name) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
      throw std::logic_error("invariant violation: " + name + " has a bad component");
    s += w[i];
  }
  if (std::abs(s - 1.0) > tol)
    throw std::logic_error("invariant violation: " + name + " does not sum to 1");
}

}  // namespace

void check_state_invariants(const LatentState& state, double tol) {
  const int K = state.theta.rows(), T = state.theta.cols(), V = state.phi.rows();
  const int I = static_cast<int>(state.pi.size());
  std::vector<double> col(std::max(V, K));
  for (int k = 0; k < K; ++k) {
    for (int v = 0; v < V; ++v) col[v] = state.phi(v, k);
    check_simplex(col.data(), V, tol, "phi column " + std::to_string(k));
  }
  for (int i = 0; i < I; ++i) {
    for (int k = 0; k < K; ++k) {
      for (int k1 = 0; k1 < K; ++k1) col[k1] = state.pi[i](k1, k);
      check_simplex(col.data(), K, tol,
                    "pi[" + std::to_string(i) + "] column " + std::to_string(k));
    }
  }
  if (state.has_mutation_chain()) {
    for (int i = 0; i + 1 < I; ++i) {
      for (int k = 0; k < K; ++k) {
        for (int k2 = 0; k2 < K; ++k2) {
          for (int k1 = 0; k1 < K; ++k1) col[k1] = state.psi[i](k, k1, k2);
          check_simplex(col.data(), K, tol,
                        "psi[" + std::to_string(i) + "] slice (" +
                            std::to_string(k) + "," + std::to_string(k2) + ")");
        }
      }
    }
  }
  auto pos = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::logic_error(std::string("invariant violation: ") + name +
                             " must be positive and finite");
  };
  for (int k = 0; k < K; ++k)
    for (int t = 0; t < T; ++t) pos(state.theta(k, t), "theta");
  for (int t = 0; t < T; ++t) pos(state.delta[t], "delta");
  for (int k = 0; k < K; ++k) pos(state.nu[k], "nu");
  pos(state.xi, "xi");
  pos(state.beta, "beta");
}

}  // namespace nspgds
