#include "nspgds/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "nspgds/distributions.hpp"
#include "nspgds/rng.hpp"

namespace nspgds {

void TaskSpec::validate() const {
  if (kind == Kind::Smoothing) {
    if (!(mask_fraction > 0.0 && mask_fraction < 1.0))
      throw std::invalid_argument("task: mask_fraction must be in (0,1)");
  } else {
    if (horizon < 1)
      throw std::invalid_argument("task: forecast horizon must be >= 1");
  }
}

CountData mask_for_smoothing(const Grid<int64_t>& counts, double fraction,
                             uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("mask_for_smoothing: fraction must be in (0,1)");
  const int V = counts.rows(), T = counts.cols();
  const int64_t target = static_cast<int64_t>(
      std::floor(fraction * static_cast<double>(V) * static_cast<double>(T)));

  CountData out;
  out.counts = counts;
  out.mask = Grid<uint8_t>(V, T, 1);
  if (target == 0) return out;

  // Uniform draws from the currently admissible cells; masking a cell
  // retires it and its temporal neighbours in the same dimension.
  std::vector<int> valid;
  valid.reserve(static_cast<size_t>(V) * T);
  Grid<int> pos(V, T);
  for (int v = 0; v < V; ++v)
    for (int t = 0; t < T; ++t) {
      pos(v, t) = static_cast<int>(valid.size());
      valid.push_back(v * T + t);
    }
  auto retire = [&](int v, int t) {
    const int p = pos(v, t);
    if (p < 0) return;
    const int last = valid.back();
    valid[p] = last;
    pos(last / T, last % T) = p;
    valid.pop_back();
    pos(v, t) = -1;
  };

  RngStream rng(seed, Var::Mask, 0, 0);
  for (int64_t n = 0; n < target; ++n) {
    if (valid.empty())
      throw std::invalid_argument(
          "mask_for_smoothing: fraction too large to satisfy the "
          "non-adjacency rule");
    const size_t pick = static_cast<size_t>(rng.next_double() * valid.size());
    const int cell = valid[std::min(pick, valid.size() - 1)];
    const int v = cell / T, t = cell % T;
    out.mask(v, t) = 0;
    retire(v, t);
    if (t > 0 && pos(v, t - 1) >= 0) retire(v, t - 1);
    if (t + 1 < T && pos(v, t + 1) >= 0) retire(v, t + 1);
  }
  return out;
}

std::vector<MaskedCell> masked_cells(const CountData& data) {
  std::vector<MaskedCell> cells;
  for (int v = 0; v < data.V(); ++v)
    for (int t = 0; t < data.T(); ++t)
      if (!data.mask(v, t)) cells.push_back({v, t});
  return cells;
}

std::vector<double> smooth_predict(const PosteriorSummary& summary,
                                   const CountData& masked_data) {
  const auto cells = masked_cells(masked_data);
  std::vector<double> pred(cells.size());
  for (size_t i = 0; i < cells.size(); ++i)
    pred[i] = summary.rate_mean(cells[i].v, cells[i].t);
  return pred;
}

Grid<double> forecast(const PosteriorSummary& summary, const Dims& dims, int steps) {
  if (steps < 1) throw std::invalid_argument("forecast: steps must be >= 1");
  if (summary.retained.empty())
    throw std::invalid_argument("forecast: no retained samples");
  const int V = dims.V, K = dims.K, T = dims.T, I = dims.I;
  Grid<double> out(V, steps, 0.0);
  const int last_lo = (I - 1) * dims.M;

  for (const LatentState& s : summary.retained) {
    double dhat = 0.0;
    for (int t = last_lo; t < T; ++t) dhat += s.delta[t];
    dhat /= static_cast<double>(T - last_lo);

    std::vector<double> th(K), next(K);
    for (int k = 0; k < K; ++k) th[k] = s.theta(k, T - 1);
    const Grid<double>& P = s.pi[I - 1];
    for (int step = 0; step < steps; ++step) {
      for (int k = 0; k < K; ++k) {
        double m = 0.0;
        for (int k2 = 0; k2 < K; ++k2) m += P(k, k2) * th[k2];
        next[k] = m;
      }
      th = next;
      for (int v = 0; v < V; ++v) {
        double r = 0.0;
        for (int k = 0; k < K; ++k) r += s.phi(v, k) * th[k];
        out(v, step) += dhat * r;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(summary.retained.size());
  for (double& x : out.flat()) x *= inv;
  return out;
}

Metrics compute_metrics(std::span<const double> truth,
                        std::span<const double> predictions) {
  if (truth.size() != predictions.size())
    throw std::invalid_argument("compute_metrics: size mismatch");
  if (truth.empty())
    throw std::invalid_argument("compute_metrics: empty evaluation set");
  Metrics m;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double err = std::abs(truth[i] - predictions[i]);
    m.mae += err;
    m.mre += err / (1.0 + truth[i]);
  }
  m.mae /= static_cast<double>(truth.size());
  m.mre /= static_cast<double>(truth.size());
  return m;
}

// ---------------------------------------------------------------------------
// Geweke harness
// ---------------------------------------------------------------------------

namespace {

struct Stat {
  std::string name;
  std::function<double(const LatentState&, const Grid<int64_t>&)> fn;
};

double grid_mean(const Grid<double>& g) {
  double s = 0.0;
  for (const double& x : g.flat()) s += x;
  return s / static_cast<double>(g.size());
}

double grid_sq_mean(const Grid<double>& g) {
  double s = 0.0;
  for (const double& x : g.flat()) s += x * x;
  return s / static_cast<double>(g.size());
}

std::vector<Stat> build_battery(const Hyperparameters& hyper, const Dims& dims) {
  std::vector<Stat> b;
  const int K = dims.K, T = dims.T, I = dims.I;
  auto add = [&](std::string name, auto fn) { b.push_back({std::move(name), fn}); };

  add("theta_mean", [](const LatentState& s, const Grid<int64_t>&) {
    return grid_mean(s.theta);
  });
  add("theta_sq", [](const LatentState& s, const Grid<int64_t>&) {
    return grid_sq_mean(s.theta);
  });
  add("theta_00", [](const LatentState& s, const Grid<int64_t>&) {
    return s.theta(0, 0);
  });
  add("theta_last", [K, T](const LatentState& s, const Grid<int64_t>&) {
    return s.theta(K - 1, T - 1);
  });
  add("delta_mean", [](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (double d : s.delta) m += d;
    return m / static_cast<double>(s.delta.size());
  });
  add("delta_sq", [](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (double d : s.delta) m += d * d;
    return m / static_cast<double>(s.delta.size());
  });
  add("delta_0", [](const LatentState& s, const Grid<int64_t>&) { return s.delta[0]; });
  add("nu_mean", [](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (double x : s.nu) m += x;
    return m / static_cast<double>(s.nu.size());
  });
  add("nu_sq", [](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (double x : s.nu) m += x * x;
    return m / static_cast<double>(s.nu.size());
  });
  add("xi", [](const LatentState& s, const Grid<int64_t>&) { return s.xi; });
  add("xi_sq", [](const LatentState& s, const Grid<int64_t>&) { return s.xi * s.xi; });
  add("beta", [](const LatentState& s, const Grid<int64_t>&) { return s.beta; });
  add("beta_sq", [](const LatentState& s, const Grid<int64_t>&) {
    return s.beta * s.beta;
  });
  add("phi_00", [](const LatentState& s, const Grid<int64_t>&) { return s.phi(0, 0); });
  add("phi_sq", [](const LatentState& s, const Grid<int64_t>&) {
    return grid_sq_mean(s.phi);
  });
  add("pi0_00", [](const LatentState& s, const Grid<int64_t>&) {
    return s.pi[0](0, 0);
  });
  add("pi0_00_sq", [](const LatentState& s, const Grid<int64_t>&) {
    return s.pi[0](0, 0) * s.pi[0](0, 0);
  });
  add("pi0_diag", [K](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (int k = 0; k < K; ++k) m += s.pi[0](k, k);
    return m / K;
  });
  if (I >= 2) {
    add("piI_00", [I](const LatentState& s, const Grid<int64_t>&) {
      return s.pi[I - 1](0, 0);
    });
    add("piI_00_sq", [I](const LatentState& s, const Grid<int64_t>&) {
      return s.pi[I - 1](0, 0) * s.pi[I - 1](0, 0);
    });
    add("piI_diag", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int k = 0; k < K; ++k) m += s.pi[I - 1](k, k);
      return m / K;
    });
  }
  add("y_mean", [](const LatentState&, const Grid<int64_t>& y) {
    double m = 0;
    for (const int64_t& x : y.flat()) m += static_cast<double>(x);
    return m / static_cast<double>(y.size());
  });
  add("y_sq", [](const LatentState&, const Grid<int64_t>& y) {
    double m = 0;
    for (const int64_t& x : y.flat())
      m += static_cast<double>(x) * static_cast<double>(x);
    return m / static_cast<double>(y.size());
  });
  add("theta_delta_cross", [K, T](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (int t = 0; t < T; ++t) {
      double th = 0;
      for (int k = 0; k < K; ++k) th += s.theta(k, t);
      m += s.delta[t] * th / K;
    }
    return m / T;
  });
  add("theta_nu_cross", [K, T](const LatentState& s, const Grid<int64_t>&) {
    double m = 0;
    for (int k = 0; k < K; ++k) {
      double th = 0;
      for (int t = 0; t < T; ++t) th += s.theta(k, t);
      m += s.nu[k] * th / T;
    }
    return m / K;
  });
  add("y_theta_cross", [K, T](const LatentState& s, const Grid<int64_t>& y) {
    const int V = y.rows();
    double m = 0;
    for (int t = 0; t < T; ++t) {
      double yv = 0, th = 0;
      for (int v = 0; v < V; ++v) yv += static_cast<double>(y(v, t));
      for (int k = 0; k < K; ++k) th += s.theta(k, t);
      m += (yv / V) * (th / K);
    }
    return m / T;
  });

  const bool dirdir =
      hyper.chain == ChainKind::DirDir || hyper.chain == ChainKind::Static;
  if (dirdir) {
    add("eta", [](const LatentState& s, const Grid<int64_t>&) { return s.eta; });
    add("eta_sq", [](const LatentState& s, const Grid<int64_t>&) {
      return s.eta * s.eta;
    });
  } else if (I >= 2) {
    add("gamma_mean", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 0; i + 1 < I; ++i)
        for (int k = 0; k < K; ++k) m += s.gamma_ik(i, k);
      return m / (K * (I - 1));
    });
    add("c_mean", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 1; i < I; ++i)
        for (int k = 0; k < K; ++k) m += s.c_ik(i, k);
      return m / (K * (I - 1));
    });
    add("psi_diag", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 0; i + 1 < I; ++i)
        for (int k = 0; k < K; ++k)
          for (int k2 = 0; k2 < K; ++k2) m += s.psi[i](k, k2, k2);
      return m / (K * K * (I - 1));
    });
    add("alpha_mean", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 1; i < I; ++i) m += grid_mean(s.alpha[i]);
      return m / (I - 1);
    });
    add("alpha_sq", [I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 1; i < I; ++i) m += grid_sq_mean(s.alpha[i]);
      return m / (I - 1);
    });
  }
  if (hyper.chain == ChainKind::PRGamDir && I >= 2) {
    add("g_mean", [K, I](const LatentState& s, const Grid<int64_t>&) {
      double m = 0;
      for (int i = 1; i < I; ++i)
        for (int k1 = 0; k1 < K; ++k1)
          for (int k = 0; k < K; ++k)
            m += static_cast<double>(s.g_pair[i](k1, k));
      return m / (K * K * (I - 1));
    });
  }
  return b;
}

struct MeanSe {
  double mean = 0, se = 0;
};

MeanSe iid_mean_se(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double var = 0;
  for (double v : x) var += (v - m) * (v - m);
  var /= (n - 1.0);
  return {m, std::sqrt(var / n)};
}

MeanSe batch_mean_se(const std::vector<double>& x, int batches) {
  const int n = static_cast<int>(x.size());
  const int bs = n / batches;
  std::vector<double> bm(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (int i = b * bs; i < (b + 1) * bs; ++i) s += x[i];
    bm[b] = s / bs;
  }
  double m = 0;
  for (double v : bm) m += v;
  m /= batches;
  double var = 0;
  for (double v : bm) var += (v - m) * (v - m);
  var /= (batches - 1.0);
  // the grand mean over full batches; trailing remainder is dropped
  return {m, std::sqrt(var / batches)};
}

}  // namespace

int GewekeReport::n_flagged() const {
  int n = 0;
  for (const auto& s : stats) n += s.flagged ? 1 : 0;
  return n;
}

double GewekeReport::pass_fraction() const {
  if (stats.empty()) return 1.0;
  return 1.0 - static_cast<double>(n_flagged()) / static_cast<double>(stats.size());
}

GewekeReport geweke_harness(const Hyperparameters& hyper_in, const Dims& dims_in,
                            const GewekeOptions& options) {
  if (options.n_samples < 1)
    throw std::invalid_argument("geweke_harness: n_samples must be >= 1");
  if (options.batch_count < 2 || options.n_samples < 2 * options.batch_count)
    throw std::invalid_argument("geweke_harness: need at least two samples per batch");
  hyper_in.validate();

  // A static chain is the single-interval configuration; both simulators
  // must agree on that.
  Hyperparameters hyper = hyper_in;
  Dims dims = dims_in;
  if (hyper.chain == ChainKind::Static) {
    hyper.M = dims.T;
    dims = Dims::make(dims.V, dims.T, dims.K, hyper.M);
  }

  const std::vector<Stat> battery = build_battery(hyper, dims);
  const int n = options.n_samples;
  const int ns = static_cast<int>(battery.size());

  // Marginal-conditional: independent (state, data) pairs from the prior.
  std::vector<std::vector<double>> mc(ns, std::vector<double>(n));
  {
    const uint64_t seed_mc = mix64(options.seed ^ 0x6d635f7369646521ull);
    Grid<int64_t> counts(dims.V, dims.T);
    for (int i = 0; i < n; ++i) {
      LatentState s = sample_state_from_prior(hyper, dims, seed_mc,
                                              static_cast<uint64_t>(i));
      sample_counts(s, counts, seed_mc, static_cast<uint64_t>(i));
      for (int j = 0; j < ns; ++j) mc[j][i] = battery[j].fn(s, counts);
    }
  }

  // Successive-conditional: sweep against data regenerated from the state.
  std::vector<std::vector<double>> sc(ns, std::vector<double>(n));
  {
    SamplerConfig cfg;
    cfg.iterations = n + 1;
    cfg.burn_in = 0;
    cfg.thin = n + 1;  // retention unused here
    cfg.seed = mix64(options.seed ^ 0x73635f7369646521ull);
    CountData data = CountData::fully_observed(Grid<int64_t>(dims.V, dims.T, 0));
    Hyperparameters h = hyper;
    h.K = dims.K;
    h.M = dims.M;
    GibbsSampler sampler(h, std::move(data), cfg);
    sampler.set_mutation(options.mutation);
    sampler.init_from_prior();
    sampler.regenerate_data_from_state();
    for (int i = 0; i < n; ++i) {
      sampler.run_sweep();
      sampler.regenerate_data_from_state();
      for (int j = 0; j < ns; ++j)
        sc[j][i] = battery[j].fn(sampler.state(), sampler.data().counts);
    }
  }

  GewekeReport report;
  report.stats.reserve(ns);
  for (int j = 0; j < ns; ++j) {
    const MeanSe a = iid_mean_se(mc[j]);
    const MeanSe b = batch_mean_se(sc[j], options.batch_count);
    GewekeStat st;
    st.name = battery[j].name;
    st.mean_mc = a.mean;
    st.se_mc = a.se;
    st.mean_sc = b.mean;
    st.se_sc = b.se;
    const double denom = std::sqrt(a.se * a.se + b.se * b.se);
    const double diff = a.mean - b.mean;
    if (denom > 0.0)
      st.z = diff / denom;
    else
      st.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    st.flagged = !(std::abs(st.z) < options.z_threshold);
    report.stats.push_back(std::move(st));
  }
  return report;
}

}  // namespace nspgds
