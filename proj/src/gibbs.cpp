#include "nspgds/gibbs.hpp"

#include <algorithm>
#include <cinttypes>
#include <limits>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nspgds/distributions.hpp"

namespace nspgds {

namespace {

// Reserved sweep counter for prior initialization so init streams never
// collide with conditional streams of real sweeps.
constexpr uint64_t kInitSweep = 0x8000000000000000ull;

double gamma_floored(double shape, double rate, RngStream& rng) {
  if (!(shape > 0.0)) return dist::kPositiveFloor;
  return dist::gamma(shape, rate, rng);
}

double pos(double x) { return std::max(x, dist::kPositiveFloor); }

// Products of floored positives can still underflow to exact zero when both
// factors sit near the 1e-300 floor. Multinomial probabilities are scale
// free, so rebuild an all-underflowed weight vector in log space.
void fix_underflowed_weights(std::vector<double>& w,
                             const std::vector<double>& loga,
                             const std::vector<double>& logb) {
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, x);
  if (mx > 0.0) return;
  double lmax = -std::numeric_limits<double>::infinity();
  std::vector<double> lw(w.size());
  for (size_t i = 0; i < w.size(); ++i) {
    lw[i] = loga[i] + logb[i];
    lmax = std::max(lmax, lw[i]);
  }
  for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(lw[i] - lmax);
}

bool is_dirdir(ChainKind c) {
  return c == ChainKind::DirDir || c == ChainKind::Static;
}

template <typename Fn>
void par_for(int n, bool serial, Fn&& fn) {
  if (serial) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) fn(i);
}

void fail(const std::string& conditional, const std::string& what) {
  throw std::logic_error("invariant violation in " + conditional + ": " + what);
}

}  // namespace

void SamplerConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("sampler: iterations must be >= 1");
  if (burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("sampler: burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw std::invalid_argument("sampler: thin must be >= 1");
}

AuxiliaryState AuxiliaryState::make(const Dims& d) {
  AuxiliaryState a;
  a.y_work = Grid<int64_t>(d.V, d.T);
  a.ydot_kt = Grid<int64_t>(d.K, d.T);
  a.yvk_sum = Grid<int64_t>(d.V, d.K);
  a.y_total_t.assign(d.T, 0);
  a.y_total_v.assign(d.V, 0);
  a.l.assign(d.T, Grid<int64_t>(d.K, d.K));
  a.lrow_tk = Grid<int64_t>(d.T, d.K);
  a.ldot_tk = Grid<int64_t>(d.T + 1, d.K);
  a.l_t1.assign(d.K, 0);
  a.zeta.assign(d.T + 1, 0.0);
  a.lbucket.assign(d.I, Grid<int64_t>(d.K, d.K));
  a.Lq = Grid<double>(d.I, d.K);
  a.h.assign(d.I, Grid<int64_t>(d.K, d.K));
  a.gpair.assign(d.I, Grid<int64_t>(d.K, d.K));
  a.g3.assign(d.I, Tensor3<int64_t>(d.K, d.K, d.K));
  a.gcol.assign(d.I, Grid<int64_t>(d.K, d.K));
  a.n_k.assign(d.K, 0);
  a.rho_k.assign(d.K, 0.0);
  return a;
}

void impute_missing(const SweepCtx& ctx, const LatentState& state,
                    const CountData& data, Grid<int64_t>& y_work) {
  const int V = data.V(), T = data.T(), K = ctx.dims.K;
  par_for(V, ctx.serial, [&](int v) {
    for (int t = 0; t < T; ++t) {
      if (data.mask(v, t)) {
        y_work(v, t) = data.counts(v, t);
        continue;
      }
      double rate = 0.0;
      for (int k = 0; k < K; ++k) rate += state.phi(v, k) * state.theta(k, t);
      rate *= state.delta[t];
      RngStream rng(ctx.seed, Var::Impute, static_cast<uint64_t>(v) * T + t, ctx.sweep);
      y_work(v, t) = dist::poisson(rate, rng);
    }
  });
}

void allocate_token_counts(const SweepCtx& ctx, const LatentState& state,
                           AuxiliaryState& aux) {
  const int V = ctx.dims.V, T = ctx.dims.T, K = ctx.dims.K;
  aux.ydot_kt.fill(0);
  aux.yvk_sum.fill(0);
  for (int t = 0; t < T; ++t) aux.y_total_t[t] = aux.y_work.col_sum(t);
  for (int v = 0; v < V; ++v) aux.y_total_v[v] = aux.y_work.row_sum(v);

  auto alloc_row = [&](int v, Grid<int64_t>& kt_acc, std::vector<double>& w,
                       std::vector<int64_t>& out) {
    std::vector<double> la(K), lb(K);
    for (int t = 0; t < T; ++t) {
      const int64_t y = aux.y_work(v, t);
      if (y == 0) continue;
      double mx = 0.0;
      for (int k = 0; k < K; ++k) {
        w[k] = state.phi(v, k) * state.theta(k, t);
        mx = std::max(mx, w[k]);
      }
      if (mx == 0.0) {
        for (int k = 0; k < K; ++k) {
          la[k] = std::log(state.phi(v, k));
          lb[k] = std::log(state.theta(k, t));
        }
        fix_underflowed_weights(w, la, lb);
      }
      RngStream rng(ctx.seed, Var::Alloc, static_cast<uint64_t>(v) * T + t, ctx.sweep);
      dist::multinomial(y, w, out, rng);
      for (int k = 0; k < K; ++k) {
        aux.yvk_sum(v, k) += out[k];
        kt_acc(k, t) += out[k];
      }
    }
  };

  if (ctx.serial) {
    std::vector<double> w(K);
    std::vector<int64_t> out(K);
    for (int v = 0; v < V; ++v) alloc_row(v, aux.ydot_kt, w, out);
    return;
  }
#pragma omp parallel
  {
    Grid<int64_t> scratch(K, T, 0);
    std::vector<double> w(K);
    std::vector<int64_t> out(K);
#pragma omp for schedule(static)
    for (int v = 0; v < V; ++v) alloc_row(v, scratch, w, out);
    // Integer merge commutes, so the critical section order does not matter.
#pragma omp critical
    {
      for (int k = 0; k < K; ++k)
        for (int t = 0; t < T; ++t) aux.ydot_kt(k, t) += scratch(k, t);
    }
  }
}

void sample_phi(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux) {
  const int V = ctx.dims.V, K = ctx.dims.K;
  const double eps0 = ctx.hyper.epsilon0;
  par_for(K, ctx.serial, [&](int k) {
    std::vector<double> conc(V), out(V);
    for (int v = 0; v < V; ++v)
      conc[v] = eps0 + static_cast<double>(aux.yvk_sum(v, k));
    RngStream rng(ctx.seed, Var::Phi, k, ctx.sweep);
    dist::dirichlet(conc, out, rng);
    for (int v = 0; v < V; ++v) state.phi(v, k) = out[v];
  });
}

void sample_delta(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux) {
  const int T = ctx.dims.T, K = ctx.dims.K;
  const double eps0 = ctx.hyper.epsilon0;
  par_for(T, true, [&](int t) {
    int64_t ycount = 0;
    double theta_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      ycount += aux.ydot_kt(k, t);
      theta_sum += state.theta(k, t);
    }
    RngStream rng(ctx.seed, Var::Delta, t, ctx.sweep);
    state.delta[t] = dist::gamma(eps0 + static_cast<double>(ycount),
                                 eps0 + theta_sum, rng);
  });
}

void compute_zeta(std::vector<double>& zeta, const std::vector<double>& delta,
                  double tau0) {
  const int T = static_cast<int>(delta.size());
  zeta.assign(T + 1, 0.0);
  for (int j = T - 1; j >= 0; --j)
    zeta[j] = std::log(1.0 + delta[j] / tau0 + zeta[j + 1]);
}

void backward_sample_auxiliary(const SweepCtx& ctx, const LatentState& state,
                               AuxiliaryState& aux) {
  const int T = ctx.dims.T, K = ctx.dims.K, M = ctx.dims.M;
  const double tau0 = ctx.hyper.tau0;
  for (int k = 0; k < K; ++k) aux.ldot_tk(T, k) = 0;

  // K-wide inner loops run serially: the per-step work is far below the
  // cost of a parallel region, and determinism never depended on it.
  for (int t = T - 1; t >= 1; --t) {
    const Grid<double>& p = state.pi[interval_index0(t - 1, M)];
    par_for(K, true, [&](int k) {
      std::vector<double> w(K), la(K), lb(K);
      std::vector<int64_t> out(K);
      double conc = 0.0, mx = 0.0;
      for (int k2 = 0; k2 < K; ++k2) {
        w[k2] = p(k, k2) * state.theta(k2, t - 1);
        conc += w[k2];
        mx = std::max(mx, w[k2]);
      }
      if (mx == 0.0) {
        for (int k2 = 0; k2 < K; ++k2) {
          la[k2] = std::log(p(k, k2));
          lb[k2] = std::log(state.theta(k2, t - 1));
        }
        fix_underflowed_weights(w, la, lb);
      }
      conc = pos(conc * tau0);
      const int64_t target = aux.ydot_kt(k, t) + aux.ldot_tk(t + 1, k);
      RngStream rng(ctx.seed, Var::LRow, static_cast<uint64_t>(t) * K + k, ctx.sweep);
      const int64_t lk = dist::crt(target, conc, rng);
      aux.lrow_tk(t, k) = lk;
      dist::multinomial(lk, w, out, rng);
      for (int k2 = 0; k2 < K; ++k2) aux.l[t](k, k2) = out[k2];
    });
    for (int k = 0; k < K; ++k) aux.ldot_tk(t, k) = aux.l[t].col_sum(k);
  }

  // First time step: the CRT against the theta initial-state prior shape
  // carries the data evidence for nu.
  par_for(K, true, [&](int k) {
    RngStream rng(ctx.seed, Var::LT1, k, ctx.sweep);
    aux.l_t1[k] = dist::crt(aux.ydot_kt(k, 0) + aux.ldot_tk(1, k),
                            pos(tau0 * state.nu[k]), rng);
  });
}

void accumulate_interval_sums(const SweepCtx& ctx, AuxiliaryState& aux) {
  const int T = ctx.dims.T, K = ctx.dims.K, M = ctx.dims.M;
  for (auto& b : aux.lbucket) b.fill(0);
  // l^{(t)} is the augmentation of the transition t-1 -> t, so it belongs to
  // the interval of t-1; grouping by the interval of t would misattribute one
  // matrix per boundary and does not leave the posterior invariant.
  for (int t = 1; t < T; ++t) {
    Grid<int64_t>& b = aux.lbucket[interval_index0(t - 1, M)];
    for (int k1 = 0; k1 < K; ++k1)
      for (int k = 0; k < K; ++k) b(k1, k) += aux.l[t](k1, k);
  }
}

namespace {

// Future evidence on pi[i]: the column-multinomial counts propagated back
// from interval i+1 (h for Dir-Dir, the g column sums otherwise).
const Grid<int64_t>* future_counts(const LatentState& state,
                                   const AuxiliaryState& aux, int slot, int I) {
  if (slot + 1 >= I) return nullptr;
  return is_dirdir(state.chain) ? &aux.h[slot + 1] : &aux.gcol[slot + 1];
}

int64_t cell_plus_future(const AuxiliaryState& aux, const Grid<int64_t>* fut,
                         int slot, int k1, int k) {
  int64_t c = aux.lbucket[slot](k1, k);
  if (fut) c += (*fut)(k1, k);
  return c;
}

double psi_pi_mix(const LatentState& state, int slot, int k1, int k) {
  // gamma_k^{(i-1)} sum_k2 psi^{(i-1)}_{k k1 k2} pi^{(i-1)}_{k2 k}
  const int K = static_cast<int>(state.nu.size());
  double m = 0.0;
  for (int k2 = 0; k2 < K; ++k2)
    m += state.psi[slot - 1](k, k1, k2) * state.pi[slot - 1](k2, k);
  return pos(state.gamma_ik(slot - 1, k) * m);
}

void sample_q_h_level(const SweepCtx& ctx, const LatentState& state,
                      AuxiliaryState& aux, int slot,
                      const Grid<int64_t>* fut) {
  // q_k ~ Beta(column count, column concentration); h ~ CRT cell-wise.
  const int K = ctx.dims.K;
  const bool dirdir = is_dirdir(state.chain);
  par_for(K, true, [&](int k) {
    int64_t cnt = 0;
    for (int k1 = 0; k1 < K; ++k1) cnt += cell_plus_future(aux, fut, slot, k1, k);
    double conc;
    if (dirdir) {
      conc = state.eta * K;
    } else {
      conc = 0.0;
      for (int k1 = 0; k1 < K; ++k1) conc += state.alpha[slot](k1, k);
      conc = pos(conc);
    }
    RngStream rng(ctx.seed, Var::Q, static_cast<uint64_t>(slot) * K + k, ctx.sweep);
    aux.Lq(slot, k) =
        cnt > 0 ? dist::beta_neglog1m(static_cast<double>(cnt), conc, rng) : 0.0;
  });
  par_for(K * K, true, [&](int cell) {
    const int k1 = cell / K, k = cell % K;
    const double conc = pos(dirdir ? state.eta * K * state.pi[slot - 1](k1, k)
                                   : state.alpha[slot](k1, k));
    RngStream rng(ctx.seed, Var::H,
                  (static_cast<uint64_t>(slot) * K + k1) * K + k, ctx.sweep);
    aux.h[slot](k1, k) =
        dist::crt(cell_plus_future(aux, fut, slot, k1, k), conc, rng);
  });
}

void split_g(const SweepCtx& ctx, const LatentState& state, AuxiliaryState& aux,
             int slot, const Grid<int64_t>& pair) {
  const int K = ctx.dims.K;
  par_for(K * K, true, [&](int cell) {
    const int k1 = cell / K, k = cell % K;
    std::vector<double> w(K), la(K), lb(K);
    std::vector<int64_t> out(K);
    double mx = 0.0;
    for (int k2 = 0; k2 < K; ++k2) {
      w[k2] = state.psi[slot - 1](k, k1, k2) * state.pi[slot - 1](k2, k);
      mx = std::max(mx, w[k2]);
    }
    if (mx == 0.0) {
      for (int k2 = 0; k2 < K; ++k2) {
        la[k2] = std::log(state.psi[slot - 1](k, k1, k2));
        lb[k2] = std::log(state.pi[slot - 1](k2, k));
      }
      fix_underflowed_weights(w, la, lb);
    }
    RngStream rng(ctx.seed, Var::GSplit,
                  (static_cast<uint64_t>(slot) * K + k1) * K + k, ctx.sweep);
    dist::multinomial(pair(k1, k), w, out, rng);
    for (int k2 = 0; k2 < K; ++k2) aux.g3[slot](k1, k2, k) = out[k2];
  });
  for (int k2 = 0; k2 < K; ++k2)
    for (int k = 0; k < K; ++k) {
      int64_t s = 0;
      for (int k1 = 0; k1 < K; ++k1) s += aux.g3[slot](k1, k2, k);
      aux.gcol[slot](k2, k) = s;
    }
}

}  // namespace

void collapse_chain(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux) {
  const int K = ctx.dims.K, I = ctx.dims.I;
  const ChainKind chain = state.chain;

  for (int slot = I - 1; slot >= 1; --slot) {
    const Grid<int64_t>* fut = future_counts(state, aux, slot, I);
    sample_q_h_level(ctx, state, aux, slot, fut);

    if (chain == ChainKind::DirGamDir) {
      par_for(K * K, true, [&](int cell) {
        const int k1 = cell / K, k = cell % K;
        const double lam = psi_pi_mix(state, slot, k1, k);
        RngStream rng(ctx.seed, Var::G,
                      (static_cast<uint64_t>(slot) * K + k1) * K + k, ctx.sweep);
        aux.gpair[slot](k1, k) = dist::crt(aux.h[slot](k1, k), lam, rng);
      });
      split_g(ctx, state, aux, slot, aux.gpair[slot]);
    } else if (chain == ChainKind::PRGamDir) {
      par_for(K * K, true, [&](int cell) {
        const int k1 = cell / K, k = cell % K;
        const double lam = psi_pi_mix(state, slot, k1, k);
        const double c = state.c_ik(slot, k);
        const double L = aux.Lq(slot, k);
        const int64_t hcell = aux.h[slot](k1, k);
        RngStream rng(ctx.seed, Var::G,
                      (static_cast<uint64_t>(slot) * K + k1) * K + k, ctx.sweep);
        RngStream rng_alpha(ctx.seed, Var::Alpha,
                            (static_cast<uint64_t>(slot) * K + k1) * K + k,
                            ctx.sweep);
        if (ctx.hyper.eps_alpha > 0.0) {
          const double g_old = static_cast<double>(state.g_pair[slot](k1, k));
          state.alpha[slot](k1, k) = gamma_floored(
              g_old + ctx.hyper.eps_alpha + static_cast<double>(hcell), c + L,
              rng_alpha);
          state.g_pair[slot](k1, k) = dist::bessel(
              ctx.hyper.eps_alpha - 1.0,
              2.0 * std::sqrt(state.alpha[slot](k1, k) * c * lam), rng);
        } else {
          const double mu = pos(c * lam / (c + L));
          const int64_t g = hcell == 0 ? dist::poisson(mu, rng)
                                       : dist::sch(hcell, mu, rng);
          state.g_pair[slot](k1, k) = g;
          // Gam(0, .) is a point mass at zero; the exact zero is the whole
          // point of the sparse branch and must not be floored, or the next
          // sweep's CRT picks up phantom tables.
          state.alpha[slot](k1, k) =
              g + hcell > 0
                  ? dist::gamma(static_cast<double>(g + hcell), c + L, rng_alpha)
                  : 0.0;
        }
        aux.gpair[slot](k1, k) = state.g_pair[slot](k1, k);
      });
      split_g(ctx, state, aux, slot, aux.gpair[slot]);
    }
  }

  if (is_dirdir(chain)) {
    // eta sees all h/q levels at once; the pi column sums cancel to K.
    int64_t hsum = 0;
    double lsum = 0.0;
    for (int slot = 1; slot < I; ++slot) {
      hsum += aux.h[slot].total();
      for (int k = 0; k < K; ++k) lsum += aux.Lq(slot, k);
    }
    RngStream rng(ctx.seed, Var::Eta, 0, ctx.sweep);
    state.eta = dist::gamma(ctx.hyper.e0 + static_cast<double>(hsum),
                            ctx.hyper.f0 + static_cast<double>(K) * lsum, rng);
  }
}

void sample_nu_xi_beta(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux) {
  const int K = ctx.dims.K, I = ctx.dims.I;
  const double gamma0 = ctx.hyper.gamma0, eps0 = ctx.hyper.epsilon0;
  const double tau0 = ctx.hyper.tau0;
  const Grid<int64_t>* fut =
      I >= 2 ? (is_dirdir(state.chain) ? &aux.h[1] : &aux.gcol[1]) : nullptr;

  double nu_total = 0.0;
  for (int k = 0; k < K; ++k) nu_total += state.nu[k];

  par_for(K, true, [&](int k) {
    int64_t cnt = 0;
    for (int k1 = 0; k1 < K; ++k1) cnt += cell_plus_future(aux, fut, 0, k1, k);
    const double conc = pos(state.nu[k] * (nu_total - state.nu[k] + state.xi));
    RngStream rng(ctx.seed, Var::Q, k, ctx.sweep);
    aux.Lq(0, k) =
        cnt > 0 ? dist::beta_neglog1m(static_cast<double>(cnt), conc, rng) : 0.0;
  });
  par_for(K * K, true, [&](int cell) {
    const int k1 = cell / K, k = cell % K;
    const double conc =
        pos(k1 == k ? state.xi * state.nu[k] : state.nu[k1] * state.nu[k]);
    RngStream rng(ctx.seed, Var::H, static_cast<uint64_t>(k1) * K + k, ctx.sweep);
    aux.h[0](k1, k) = dist::crt(cell_plus_future(aux, fut, 0, k1, k), conc, rng);
  });

  std::vector<double> L0(K);
  for (int k = 0; k < K; ++k) L0[k] = aux.Lq(0, k);

  {
    int64_t hdiag = 0;
    double rate = state.beta;
    for (int k = 0; k < K; ++k) {
      hdiag += aux.h[0](k, k);
      rate += state.nu[k] * L0[k];
    }
    RngStream rng(ctx.seed, Var::Xi, 0, ctx.sweep);
    state.xi = dist::gamma(gamma0 / K + static_cast<double>(hdiag), rate, rng);
  }

  for (int k = 0; k < K; ++k)
    aux.n_k[k] = aux.h[0].col_sum(k) + aux.h[0].row_sum(k) - aux.h[0](k, k) +
                 aux.l_t1[k];

  // Sequential scan: each nu_k conditional uses the current values of the
  // other nu's.
  for (int k = 0; k < K; ++k) {
    double rho = tau0 * aux.zeta[0];
    double others = 0.0;
    for (int k1 = 0; k1 < K; ++k1)
      if (k1 != k) others += state.nu[k1];
    rho += L0[k] * (state.xi + others);
    for (int k2 = 0; k2 < K; ++k2)
      if (k2 != k) rho += L0[k2] * state.nu[k2];
    aux.rho_k[k] = rho;
    RngStream rng(ctx.seed, Var::Nu, k, ctx.sweep);
    state.nu[k] = dist::gamma(gamma0 / K + static_cast<double>(aux.n_k[k]),
                              state.beta + rho, rng);
  }

  {
    // xi carries prior Gam(gamma0/K, beta), so beta's conditional picks up
    // gamma0/K in the shape and xi in the rate alongside the K nu terms.
    double nsum = 0.0;
    for (int k = 0; k < K; ++k) nsum += state.nu[k];
    RngStream rng(ctx.seed, Var::Beta, 0, ctx.sweep);
    state.beta = dist::gamma(eps0 + gamma0 + gamma0 / K,
                             eps0 + nsum + state.xi, rng);
  }
}

namespace {

void draw_pi_column_from(const SweepCtx& ctx, LatentState& state, int slot, int k,
                         std::vector<double>& conc) {
  const int K = ctx.dims.K;
  std::vector<double> out(K);
  for (double& c : conc) c = pos(c);
  RngStream rng(ctx.seed, Var::Pi, static_cast<uint64_t>(slot) * K + k, ctx.sweep);
  dist::dirichlet(conc, out, rng);
  for (int k1 = 0; k1 < K; ++k1) state.pi[slot](k1, k) = out[k1];
}

}  // namespace

void sample_pi_last_interval(const SweepCtx& ctx, LatentState& state,
                             const AuxiliaryState& aux) {
  const int K = ctx.dims.K, I = ctx.dims.I;
  const int slot = I - 1;
  const bool dirdir = is_dirdir(state.chain);
  Grid<double> a0;
  if (slot == 0) a0 = first_interval_concentration(state.nu, state.xi);
  par_for(K, true, [&](int k) {
    std::vector<double> conc(K);
    for (int k1 = 0; k1 < K; ++k1) {
      double base;
      if (slot == 0)
        base = a0(k1, k);
      else if (dirdir)
        base = state.eta * K * state.pi[slot - 1](k1, k);
      else
        base = state.alpha[slot](k1, k);
      conc[k1] = base + static_cast<double>(aux.lbucket[slot](k1, k));
    }
    draw_pi_column_from(ctx, state, slot, k, conc);
  });
}

void reinstate_chain(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux) {
  const int K = ctx.dims.K, I = ctx.dims.I;
  const double eps0 = ctx.hyper.epsilon0;
  const bool dirdir = is_dirdir(state.chain);

  if (dirdir) {
    for (int b = 1; b < I; ++b) {
      const int slot = b - 1;
      Grid<double> a0;
      if (slot == 0) a0 = first_interval_concentration(state.nu, state.xi);
      par_for(K, true, [&](int k) {
        std::vector<double> conc(K);
        for (int k1 = 0; k1 < K; ++k1) {
          const double base = slot == 0 ? a0(k1, k)
                                        : state.eta * K * state.pi[slot - 1](k1, k);
          conc[k1] = base + static_cast<double>(aux.lbucket[slot](k1, k)) +
                     static_cast<double>(aux.h[b](k1, k));
        }
        draw_pi_column_from(ctx, state, slot, k, conc);
      });
    }
    sample_pi_last_interval(ctx, state, aux);
    return;
  }

  if (I == 1) {
    state.alpha[0] = first_interval_concentration(state.nu, state.xi);
    sample_pi_last_interval(ctx, state, aux);
    return;
  }

  for (int b = 1; b < I; ++b) {
    // psi^{(b)} slices from the level-(b+1) split counts
    par_for(K * K, true, [&](int cell) {
      const int k = cell / K, k2 = cell % K;
      std::vector<double> conc(K), out(K);
      for (int k1 = 0; k1 < K; ++k1)
        conc[k1] = eps0 + static_cast<double>(aux.g3[b](k1, k2, k));
      RngStream rng(ctx.seed, Var::Psi,
                    (static_cast<uint64_t>(b - 1) * K + k) * K + k2, ctx.sweep);
      dist::dirichlet(conc, out, rng);
      for (int k1 = 0; k1 < K; ++k1) state.psi[b - 1](k, k1, k2) = out[k1];
    });

    par_for(K, true, [&](int k) {
      int64_t gsum = 0;
      for (int k1 = 0; k1 < K; ++k1) gsum += aux.gpair[b](k1, k);
      double rate;
      if (state.chain == ChainKind::DirGamDir) {
        // rate carries the same /c as the Poisson exposure of g
        rate = eps0 + std::log1p(aux.Lq(b, k) / state.c_ik(b, k));
      } else {
        rate = eps0 + 1.0;
      }
      RngStream rng(ctx.seed, Var::GammaIK,
                    static_cast<uint64_t>(b - 1) * K + k, ctx.sweep);
      state.gamma_ik(b - 1, k) =
          dist::gamma(eps0 + static_cast<double>(gsum), rate, rng);
    });

    {
      const int slot = b - 1;
      Grid<double> a0;
      if (slot == 0) {
        a0 = first_interval_concentration(state.nu, state.xi);
        state.alpha[0] = a0;
      }
      par_for(K, true, [&](int k) {
        std::vector<double> conc(K);
        for (int k1 = 0; k1 < K; ++k1) {
          const double base = slot == 0 ? a0(k1, k) : state.alpha[slot](k1, k);
          conc[k1] = base + static_cast<double>(aux.lbucket[slot](k1, k)) +
                     static_cast<double>(aux.gcol[b](k1, k));
        }
        draw_pi_column_from(ctx, state, slot, k, conc);
      });
    }

    if (state.chain == ChainKind::DirGamDir) {
      par_for(K * K, true, [&](int cell) {
        const int k1 = cell / K, k = cell % K;
        const double shape = psi_pi_mix(state, b, k1, k) +
                             static_cast<double>(aux.h[b](k1, k));
        const double rate = state.c_ik(b, k) + aux.Lq(b, k);
        RngStream rng(ctx.seed, Var::Alpha,
                      (static_cast<uint64_t>(b) * K + k1) * K + k, ctx.sweep);
        state.alpha[b](k1, k) = gamma_floored(shape, rate, rng);
      });
    }

    par_for(K, true, [&](int k) {
      double asum = 0.0;
      for (int k1 = 0; k1 < K; ++k1) asum += state.alpha[b](k1, k);
      // gamma-gamma conjugacy: the shape collects the alpha prior shapes of
      // the column, which is gamma for Dir-Gam-Dir but g + eps_alpha per cell
      // for PR-Gam-Dir.
      double shape = eps0;
      if (state.chain == ChainKind::DirGamDir) {
        shape += state.gamma_ik(b - 1, k);
      } else {
        for (int k1 = 0; k1 < K; ++k1)
          shape += static_cast<double>(state.g_pair[b](k1, k)) + ctx.hyper.eps_alpha;
      }
      RngStream rng(ctx.seed, Var::CRate, static_cast<uint64_t>(b) * K + k,
                    ctx.sweep);
      state.c_ik(b, k) = dist::gamma(shape, eps0 + asum, rng);
    });
  }

  sample_pi_last_interval(ctx, state, aux);
}

void sample_theta(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux) {
  const int T = ctx.dims.T, K = ctx.dims.K, M = ctx.dims.M;
  const double tau0 = ctx.hyper.tau0;
  for (int t = 0; t < T; ++t) {
    const Grid<double>* p = t > 0 ? &state.pi[interval_index0(t - 1, M)] : nullptr;
    par_for(K, true, [&](int k) {
      double prior_shape;
      if (t == 0) {
        prior_shape = tau0 * state.nu[k];
      } else {
        double m = 0.0;
        for (int k2 = 0; k2 < K; ++k2) m += (*p)(k, k2) * state.theta(k2, t - 1);
        prior_shape = tau0 * m;
      }
      const double shape = prior_shape +
                           static_cast<double>(aux.ydot_kt(k, t)) +
                           static_cast<double>(aux.ldot_tk(t + 1, k));
      const double rate = tau0 + state.delta[t] + aux.zeta[t + 1] * tau0;
      RngStream rng(ctx.seed, Var::Theta, static_cast<uint64_t>(t) * K + k,
                    ctx.sweep);
      state.theta(k, t) = std::max(gamma_floored(shape, rate, rng),
                                   dist::kPositiveFloor);
    });
  }
}

void gibbs_sweep(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux,
                 const CountData& data) {
  allocate_token_counts(ctx, state, aux);
  sample_phi(ctx, state, aux);
  sample_delta(ctx, state, aux);
  compute_zeta(aux.zeta, state.delta, ctx.hyper.tau0);
  backward_sample_auxiliary(ctx, state, aux);
  accumulate_interval_sums(ctx, aux);
  collapse_chain(ctx, state, aux);
  sample_nu_xi_beta(ctx, state, aux);
  reinstate_chain(ctx, state, aux);
  if (!ctx.mutation.skip_theta) sample_theta(ctx, state, aux);
  impute_missing(ctx, state, data, aux.y_work);
}

void check_sweep_invariants(const SweepCtx& ctx, const LatentState& state,
                            const AuxiliaryState& aux) {
  const int V = ctx.dims.V, T = ctx.dims.T, K = ctx.dims.K, M = ctx.dims.M;

  for (int t = 0; t < T; ++t) {
    int64_t margin = 0;
    for (int k = 0; k < K; ++k) margin += aux.ydot_kt(k, t);
    if (aux.y_total_t[t] != margin)
      fail("allocate_token_counts", "y_{.k} margin mismatch");
  }
  for (int v = 0; v < V; ++v) {
    int64_t margin = 0;
    for (int k = 0; k < K; ++k) margin += aux.yvk_sum(v, k);
    if (aux.y_total_v[v] != margin)
      fail("allocate_token_counts", "y_{vk} margin mismatch");
  }

  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      if (aux.l[t].col_sum(k) != aux.ldot_tk(t, k))
        fail("backward_sample_auxiliary", "l_{.k} margin mismatch");
      if (aux.l[t].row_sum(k) != aux.lrow_tk(t, k))
        fail("backward_sample_auxiliary", "l_{k.} margin mismatch");
    }
  }

  for (int j = 0; j < T; ++j) {
    const double want =
        std::log(1.0 + state.delta[j] / ctx.hyper.tau0 + aux.zeta[j + 1]);
    if (aux.zeta[j] != want) fail("compute_zeta", "recursion mismatch");
    if (aux.zeta[j] < std::log(1.0 + state.delta[j] / ctx.hyper.tau0) - 1e-15)
      fail("compute_zeta", "zeta below its single-step floor");
  }

  std::vector<Grid<int64_t>> buckets(ctx.dims.I, Grid<int64_t>(K, K));
  for (int t = 1; t < T; ++t) {
    Grid<int64_t>& b = buckets[interval_index0(t - 1, M)];
    for (int k1 = 0; k1 < K; ++k1)
      for (int k = 0; k < K; ++k) b(k1, k) += aux.l[t](k1, k);
  }
  for (int i = 0; i < ctx.dims.I; ++i)
    if (!(buckets[i] == aux.lbucket[i]))
      fail("accumulate_interval_sums", "bucket sum mismatch");

  if (!is_dirdir(state.chain)) {
    for (int slot = 1; slot < ctx.dims.I; ++slot) {
      for (int k1 = 0; k1 < K; ++k1)
        for (int k = 0; k < K; ++k) {
          int64_t s = 0;
          for (int k2 = 0; k2 < K; ++k2) s += aux.g3[slot](k1, k2, k);
          if (s != aux.gpair[slot](k1, k))
            fail("split_g", "g split does not conserve its total");
        }
    }
  }

  check_state_invariants(state);
}

PosteriorSummary finalize_posterior(const PosteriorAccum& acc) {
  PosteriorSummary s;
  s.n_retained = acc.n;
  s.retained = acc.retained;
  const double inv = acc.n > 0 ? 1.0 / static_cast<double>(acc.n) : 0.0;
  auto scale_grid = [&](const Grid<double>& g) {
    Grid<double> out = g;
    for (double& x : out.flat()) x *= inv;
    return out;
  };
  s.theta_mean = scale_grid(acc.theta);
  s.phi_mean = scale_grid(acc.phi);
  s.rate_mean = scale_grid(acc.rate);
  s.pi_mean.reserve(acc.pi.size());
  for (const auto& p : acc.pi) s.pi_mean.push_back(scale_grid(p));
  s.delta_mean = acc.delta;
  for (double& x : s.delta_mean) x *= inv;
  s.nu_mean = acc.nu;
  for (double& x : s.nu_mean) x *= inv;
  s.xi_mean = acc.xi * inv;
  s.beta_mean = acc.beta * inv;
  return s;
}

GibbsSampler::GibbsSampler(const Hyperparameters& hyper, CountData data,
                           SamplerConfig cfg)
    : hyper_(hyper), data_(std::move(data)), cfg_(cfg) {
  hyper_.validate();
  cfg_.validate();
  // A static chain is the I = 1 configuration: one transition matrix spans
  // the whole sequence.
  if (hyper_.chain == ChainKind::Static) hyper_.M = data_.T();
  dims_ = Dims::make(data_.V(), data_.T(), hyper_.K, hyper_.M);
  aux_ = AuxiliaryState::make(dims_);
  for (int v = 0; v < dims_.V; ++v)
    for (int t = 0; t < dims_.T; ++t)
      aux_.y_work(v, t) = data_.mask(v, t) ? data_.counts(v, t) : 0;
  accum_.theta = Grid<double>(dims_.K, dims_.T);
  accum_.phi = Grid<double>(dims_.V, dims_.K);
  accum_.rate = Grid<double>(dims_.V, dims_.T);
  accum_.pi.assign(dims_.I, Grid<double>(dims_.K, dims_.K));
  accum_.delta.assign(dims_.T, 0.0);
  accum_.nu.assign(dims_.K, 0.0);
}

SweepCtx GibbsSampler::make_ctx() const {
  return SweepCtx{hyper_, dims_, cfg_.seed, static_cast<uint64_t>(sweep_),
                  cfg_.force_serial, mutation_};
}

void GibbsSampler::init_from_prior() {
  state_ = sample_state_from_prior(hyper_, dims_, cfg_.seed, kInitSweep);
  initialized_ = true;
}

void GibbsSampler::run_sweep() {
  if (!initialized_) init_from_prior();
  const SweepCtx ctx = make_ctx();
  gibbs_sweep(ctx, state_, aux_, data_);
  if (cfg_.debug_invariants) check_sweep_invariants(ctx, state_, aux_);
  ++sweep_;
}

void GibbsSampler::maybe_retain() {
  const int64_t done = sweep_;
  if (done <= cfg_.burn_in) return;
  if ((done - cfg_.burn_in) % cfg_.thin != 0) return;
  ++accum_.n;
  for (int k = 0; k < dims_.K; ++k) {
    for (int t = 0; t < dims_.T; ++t) accum_.theta(k, t) += state_.theta(k, t);
    accum_.nu[k] += state_.nu[k];
  }
  for (int v = 0; v < dims_.V; ++v)
    for (int k = 0; k < dims_.K; ++k) accum_.phi(v, k) += state_.phi(v, k);
  for (int i = 0; i < dims_.I; ++i)
    for (int k1 = 0; k1 < dims_.K; ++k1)
      for (int k = 0; k < dims_.K; ++k) accum_.pi[i](k1, k) += state_.pi[i](k1, k);
  for (int t = 0; t < dims_.T; ++t) accum_.delta[t] += state_.delta[t];
  accum_.xi += state_.xi;
  accum_.beta += state_.beta;
  const Grid<double> rate = predictive_rate_all(state_);
  for (int v = 0; v < dims_.V; ++v)
    for (int t = 0; t < dims_.T; ++t) accum_.rate(v, t) += rate(v, t);
  accum_.retained.push_back(state_);
}

PosteriorSummary GibbsSampler::run() {
  if (!initialized_) init_from_prior();
  while (sweep_ < cfg_.iterations) {
    run_sweep();
    maybe_retain();
  }
  return finalize_posterior(accum_);
}

void GibbsSampler::regenerate_data_from_state() {
  sample_counts(state_, data_.counts, cfg_.seed, static_cast<uint64_t>(sweep_));
  data_.mask.fill(1);
  for (int v = 0; v < dims_.V; ++v)
    for (int t = 0; t < dims_.T; ++t) aux_.y_work(v, t) = data_.counts(v, t);
}

PosteriorSummary run_inference(const SamplerConfig& config,
                               const Hyperparameters& hyper, const CountData& data) {
  GibbsSampler sampler(hyper, data, config);
  return sampler.run();
}

// ---------------------------------------------------------------------------
// Checkpoint serialization: whitespace-separated tokens, doubles at full
// round-trip precision. The RNG needs no separate counters; streams derive
// from (seed, sweep).
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCkptVersion = "nspgds-ckpt-v1";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

uint64_t fnv1a(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void put_d(std::ostream& os, double x) { os << fmt17(x) << '\n'; }
void put_i(std::ostream& os, int64_t x) { os << x << '\n'; }

void put_grid_d(std::ostream& os, const Grid<double>& g) {
  os << g.rows() << ' ' << g.cols() << '\n';
  for (const double& x : g.flat()) os << fmt17(x) << ' ';
  os << '\n';
}
void put_grid_i(std::ostream& os, const Grid<int64_t>& g) {
  os << g.rows() << ' ' << g.cols() << '\n';
  for (const int64_t& x : g.flat()) os << x << ' ';
  os << '\n';
}
void put_t3_d(std::ostream& os, const Tensor3<double>& t) {
  os << t.na() << ' ' << t.nb() << ' ' << t.nc() << '\n';
  for (const double& x : t.flat()) os << fmt17(x) << ' ';
  os << '\n';
}
void put_t3_i(std::ostream& os, const Tensor3<int64_t>& t) {
  os << t.na() << ' ' << t.nb() << ' ' << t.nc() << '\n';
  for (const int64_t& x : t.flat()) os << x << ' ';
  os << '\n';
}
void put_vec_d(std::ostream& os, const std::vector<double>& v) {
  os << v.size() << '\n';
  for (double x : v) os << fmt17(x) << ' ';
  os << '\n';
}
void put_vec_i(std::ostream& os, const std::vector<int64_t>& v) {
  os << v.size() << '\n';
  for (int64_t x : v) os << x << ' ';
  os << '\n';
}

void ckpt_fail(const std::string& what) {
  throw std::runtime_error("checkpoint: " + what);
}

double get_d(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) ckpt_fail("unexpected end of file");
  return std::strtod(tok.c_str(), nullptr);
}
int64_t get_i(std::istream& is) {
  int64_t x;
  if (!(is >> x)) ckpt_fail("unexpected end of file");
  return x;
}

Grid<double> get_grid_d(std::istream& is) {
  const int r = static_cast<int>(get_i(is)), c = static_cast<int>(get_i(is));
  Grid<double> g(r, c);
  for (double& x : g.flat()) x = get_d(is);
  return g;
}
Grid<int64_t> get_grid_i(std::istream& is) {
  const int r = static_cast<int>(get_i(is)), c = static_cast<int>(get_i(is));
  Grid<int64_t> g(r, c);
  for (int64_t& x : g.flat()) x = get_i(is);
  return g;
}
Tensor3<double> get_t3_d(std::istream& is) {
  const int a = static_cast<int>(get_i(is)), b = static_cast<int>(get_i(is)),
            c = static_cast<int>(get_i(is));
  Tensor3<double> t(a, b, c);
  for (double& x : t.flat()) x = get_d(is);
  return t;
}
Tensor3<int64_t> get_t3_i(std::istream& is) {
  const int a = static_cast<int>(get_i(is)), b = static_cast<int>(get_i(is)),
            c = static_cast<int>(get_i(is));
  Tensor3<int64_t> t(a, b, c);
  for (int64_t& x : t.flat()) x = get_i(is);
  return t;
}
std::vector<double> get_vec_d(std::istream& is) {
  const int64_t n = get_i(is);
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = get_d(is);
  return v;
}
std::vector<int64_t> get_vec_i(std::istream& is) {
  const int64_t n = get_i(is);
  std::vector<int64_t> v(static_cast<size_t>(n));
  for (int64_t& x : v) x = get_i(is);
  return v;
}

void put_state(std::ostream& os, const LatentState& s) {
  os << chain_name(s.chain) << '\n';
  put_grid_d(os, s.theta);
  put_grid_d(os, s.phi);
  put_i(os, static_cast<int64_t>(s.pi.size()));
  for (const auto& p : s.pi) put_grid_d(os, p);
  put_vec_d(os, s.delta);
  put_vec_d(os, s.nu);
  put_d(os, s.xi);
  put_d(os, s.beta);
  put_d(os, s.eta);
  put_i(os, static_cast<int64_t>(s.alpha.size()));
  for (const auto& a : s.alpha) put_grid_d(os, a);
  put_i(os, static_cast<int64_t>(s.psi.size()));
  for (const auto& p : s.psi) put_t3_d(os, p);
  put_grid_d(os, s.gamma_ik.empty() ? Grid<double>(0, 0) : s.gamma_ik);
  put_grid_d(os, s.c_ik.empty() ? Grid<double>(0, 0) : s.c_ik);
  put_i(os, static_cast<int64_t>(s.g_pair.size()));
  for (const auto& g : s.g_pair) put_grid_i(os, g);
}

LatentState get_state(std::istream& is) {
  LatentState s;
  std::string chain;
  if (!(is >> chain)) ckpt_fail("missing chain name");
  s.chain = chain_from_name(chain);
  s.theta = get_grid_d(is);
  s.phi = get_grid_d(is);
  const int64_t npi = get_i(is);
  s.pi.clear();
  for (int64_t i = 0; i < npi; ++i) s.pi.push_back(get_grid_d(is));
  s.delta = get_vec_d(is);
  s.nu = get_vec_d(is);
  s.xi = get_d(is);
  s.beta = get_d(is);
  s.eta = get_d(is);
  const int64_t na = get_i(is);
  for (int64_t i = 0; i < na; ++i) s.alpha.push_back(get_grid_d(is));
  const int64_t np = get_i(is);
  for (int64_t i = 0; i < np; ++i) s.psi.push_back(get_t3_d(is));
  s.gamma_ik = get_grid_d(is);
  s.c_ik = get_grid_d(is);
  const int64_t ng = get_i(is);
  for (int64_t i = 0; i < ng; ++i) s.g_pair.push_back(get_grid_i(is));
  return s;
}

}  // namespace

uint64_t GibbsSampler::config_hash() const {
  std::ostringstream os;
  os << "tau0=" << fmt17(hyper_.tau0) << "|gamma0=" << fmt17(hyper_.gamma0)
     << "|eps0=" << fmt17(hyper_.epsilon0) << "|e0=" << fmt17(hyper_.e0)
     << "|f0=" << fmt17(hyper_.f0) << "|eps_alpha=" << fmt17(hyper_.eps_alpha)
     << "|K=" << hyper_.K << "|M=" << hyper_.M << "|chain=" << chain_name(hyper_.chain)
     << "|burnin=" << cfg_.burn_in << "|thin=" << cfg_.thin << "|seed=" << cfg_.seed
     << "|V=" << dims_.V << "|T=" << dims_.T;
  uint64_t h = fnv1a(os.str());
  std::string blob;
  blob.reserve(data_.counts.size() * 3);
  for (int v = 0; v < dims_.V; ++v)
    for (int t = 0; t < dims_.T; ++t) {
      blob += std::to_string(data_.counts(v, t));
      blob += data_.mask(v, t) ? ",1;" : ",0;";
    }
  return fnv1a(blob, h);
}

void GibbsSampler::save_checkpoint(std::ostream& os) const {
  os << kCkptVersion << '\n';
  os << "confighash " << config_hash() << '\n';
  os << "sweep " << sweep_ << '\n';
  os << "seed " << cfg_.seed << '\n';
  os << "initialized " << (initialized_ ? 1 : 0) << '\n';
  put_state(os, state_);
  // auxiliary block
  put_grid_i(os, aux_.y_work);
  put_grid_i(os, aux_.ydot_kt);
  put_grid_i(os, aux_.yvk_sum);
  put_vec_i(os, aux_.y_total_t);
  put_vec_i(os, aux_.y_total_v);
  put_i(os, static_cast<int64_t>(aux_.l.size()));
  for (const auto& g : aux_.l) put_grid_i(os, g);
  put_grid_i(os, aux_.lrow_tk);
  put_grid_i(os, aux_.ldot_tk);
  put_vec_i(os, aux_.l_t1);
  put_vec_d(os, aux_.zeta);
  put_i(os, static_cast<int64_t>(aux_.lbucket.size()));
  for (const auto& g : aux_.lbucket) put_grid_i(os, g);
  put_grid_d(os, aux_.Lq);
  put_i(os, static_cast<int64_t>(aux_.h.size()));
  for (const auto& g : aux_.h) put_grid_i(os, g);
  put_i(os, static_cast<int64_t>(aux_.gpair.size()));
  for (const auto& g : aux_.gpair) put_grid_i(os, g);
  put_i(os, static_cast<int64_t>(aux_.g3.size()));
  for (const auto& t : aux_.g3) put_t3_i(os, t);
  put_i(os, static_cast<int64_t>(aux_.gcol.size()));
  for (const auto& g : aux_.gcol) put_grid_i(os, g);
  put_vec_i(os, aux_.n_k);
  put_vec_d(os, aux_.rho_k);
  // posterior accumulators
  put_i(os, accum_.n);
  put_grid_d(os, accum_.theta);
  put_grid_d(os, accum_.phi);
  put_i(os, static_cast<int64_t>(accum_.pi.size()));
  for (const auto& p : accum_.pi) put_grid_d(os, p);
  put_vec_d(os, accum_.delta);
  put_vec_d(os, accum_.nu);
  put_d(os, accum_.xi);
  put_d(os, accum_.beta);
  put_grid_d(os, accum_.rate);
  put_i(os, static_cast<int64_t>(accum_.retained.size()));
  for (const auto& s : accum_.retained) put_state(os, s);
  os << "end\n";
}

std::unique_ptr<GibbsSampler> GibbsSampler::resume_checkpoint(
    std::istream& is, const Hyperparameters& hyper, CountData data,
    SamplerConfig cfg) {
  std::string version;
  if (!(is >> version)) ckpt_fail("empty file");
  if (version != kCkptVersion)
    ckpt_fail("version mismatch: found '" + version + "', expected '" +
              kCkptVersion + "'");
  auto sampler = std::make_unique<GibbsSampler>(hyper, std::move(data), cfg);
  std::string key;
  is >> key;
  if (key != "confighash") ckpt_fail("missing confighash");
  uint64_t stored_hash;
  is >> stored_hash;
  if (stored_hash != sampler->config_hash())
    ckpt_fail("config hash mismatch: refusing to resume with a different "
              "model, data or seed");
  is >> key;
  if (key != "sweep") ckpt_fail("missing sweep counter");
  is >> sampler->sweep_;
  is >> key;
  if (key != "seed") ckpt_fail("missing seed");
  uint64_t seed;
  is >> seed;
  is >> key;
  if (key != "initialized") ckpt_fail("missing initialized flag");
  sampler->initialized_ = get_i(is) != 0;
  sampler->state_ = get_state(is);
  AuxiliaryState& a = sampler->aux_;
  a.y_work = get_grid_i(is);
  a.ydot_kt = get_grid_i(is);
  a.yvk_sum = get_grid_i(is);
  a.y_total_t = get_vec_i(is);
  a.y_total_v = get_vec_i(is);
  a.l.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.l.push_back(get_grid_i(is));
  a.lrow_tk = get_grid_i(is);
  a.ldot_tk = get_grid_i(is);
  a.l_t1 = get_vec_i(is);
  a.zeta = get_vec_d(is);
  a.lbucket.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.lbucket.push_back(get_grid_i(is));
  a.Lq = get_grid_d(is);
  a.h.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.h.push_back(get_grid_i(is));
  a.gpair.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.gpair.push_back(get_grid_i(is));
  a.g3.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.g3.push_back(get_t3_i(is));
  a.gcol.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) a.gcol.push_back(get_grid_i(is));
  a.n_k = get_vec_i(is);
  a.rho_k = get_vec_d(is);
  PosteriorAccum& acc = sampler->accum_;
  acc.n = get_i(is);
  acc.theta = get_grid_d(is);
  acc.phi = get_grid_d(is);
  acc.pi.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) acc.pi.push_back(get_grid_d(is));
  acc.delta = get_vec_d(is);
  acc.nu = get_vec_d(is);
  acc.xi = get_d(is);
  acc.beta = get_d(is);
  acc.rate = get_grid_d(is);
  acc.retained.clear();
  for (int64_t i = 0, n = get_i(is); i < n; ++i) acc.retained.push_back(get_state(is));
  is >> key;
  if (key != "end") ckpt_fail("truncated file");
  return sampler;
}

}  // namespace nspgds
