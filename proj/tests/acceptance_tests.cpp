// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Returns nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nspgds/distributions.hpp"
#include "nspgds/gibbs.hpp"
#include "nspgds/io.hpp"
#include "nspgds/model.hpp"
#include "nspgds/pipeline.hpp"
#include "nspgds/tasks.hpp"
#include "support/stats_util.hpp"

using namespace nspgds;
namespace d = nspgds::dist;
namespace fs = std::filesystem;

namespace {

struct Runner {
  bool all_passed = true;
  void criterion(int id, const std::string& label, const std::function<bool()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string err;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      err = e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %d: %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", id,
                label.c_str(), secs, err.empty() ? "" : " error: ", err.c_str());
    std::fflush(stdout);
    all_passed &= ok;
  }
};

std::map<std::pair<int64_t, int64_t>, int64_t> joint_hist() { return {}; }

bool nbcrt_identity_cell(double a, double zeta, uint64_t seed) {
  const double p = 1.0 - std::exp(-zeta);
  const int n = 100000;
  RngStream rng(seed, Var::Test, 0, 0);
  auto h1 = joint_hist(), h2 = joint_hist();
  for (int i = 0; i < n; ++i) {
    const int64_t y = d::negative_binomial(a, p, rng);
    const int64_t l = d::crt(y, a, rng);
    ++h1[{y, l}];
  }
  for (int i = 0; i < n; ++i) {
    const int64_t l = d::poisson(a * zeta, rng);
    const int64_t y = d::sum_log(l, p, rng);
    ++h2[{y, l}];
  }
  const double pv = testutil::two_sample_chisq_pvalue(h1, h2);
  std::printf("    nb-crt identity (a=%g, zeta=%g): p = %.4f\n", a, zeta, pv);
  return pv > 0.001;
}

bool criterion1() {
  bool ok = true;
  ok &= nbcrt_identity_cell(0.5, 0.3, 11);
  ok &= nbcrt_identity_cell(2.0, 1.0, 12);
  ok &= nbcrt_identity_cell(5.0, 0.1, 13);
  return ok;
}

bool criterion2() {
  // DirMult(n, r) against the Beta/NB augmentation: an independent NB vector
  // (q fixed at the Beta mean) conditioned on its total is DirMult.
  const std::vector<double> r{0.7, 1.3, 2.0};
  const int64_t n = 8;
  const double rdot = r[0] + r[1] + r[2];
  const double q = static_cast<double>(n) / (static_cast<double>(n) + rdot);
  const int want = 100000;
  RngStream rng(29, Var::Test, 0, 0);

  std::vector<std::map<int64_t, int64_t>> ha(3), hb(3);
  std::map<std::pair<int64_t, int64_t>, int64_t> ja, jb;
  std::vector<double> probs(3), conc(r);
  std::vector<int64_t> counts(3);
  for (int i = 0; i < want; ++i) {
    d::dirichlet(conc, probs, rng);
    d::multinomial(n, probs, counts, rng);
    for (int k = 0; k < 3; ++k) ++ha[k][counts[k]];
    ++ja[{counts[0], counts[1]}];
  }
  int kept = 0;
  int64_t attempts = 0;
  while (kept < want && attempts < 100000000) {
    ++attempts;
    int64_t total = 0;
    for (int k = 0; k < 3; ++k) {
      counts[k] = d::negative_binomial(r[k], q, rng);
      total += counts[k];
    }
    if (total != n) continue;
    ++kept;
    for (int k = 0; k < 3; ++k) ++hb[k][counts[k]];
    ++jb[{counts[0], counts[1]}];
  }
  if (kept < want) {
    std::printf("    dirmult identity: conditioning too slow (%d kept)\n", kept);
    return false;
  }
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    const double pv = testutil::two_sample_chisq_pvalue(ha[k], hb[k]);
    std::printf("    dirmult identity marginal k=%d: p = %.4f\n", k, pv);
    ok &= pv > 0.001;
  }
  const double pj = testutil::two_sample_chisq_pvalue(ja, jb);
  std::printf("    dirmult identity joint (n1,n2): p = %.4f\n", pj);
  ok &= pj > 0.001;
  return ok;
}

bool criterion3() {
  const int n = 100000;
  RngStream rng(31, Var::Test, 0, 0);
  bool ok = true;

  const std::vector<std::pair<double, double>> bessel_settings{
      {0.0, 2.0}, {1.5, 0.1}, {2.5, 4.0}};
  for (const auto& [nu, a] : bessel_settings) {
    const auto pmf = d::bessel_pmf(nu, a);
    std::vector<int64_t> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = d::bessel(nu, a, rng);
    const double pv = testutil::gof_chisq_pvalue(draws, pmf.support_offset, pmf.weights);
    std::printf("    bessel(nu=%g, a=%g): p = %.4f\n", nu, a, pv);
    ok &= pv > 0.001;
  }

  const std::vector<std::pair<int64_t, double>> sch_settings{
      {4, 0.7}, {3, 1.2}, {2, 3.0}};
  for (const auto& [h, mu] : sch_settings) {
    const auto pmf = d::sch_pmf(h, mu);
    std::vector<int64_t> draws(n);
    for (int i = 0; i < n; ++i) {
      draws[i] = d::sch(h, mu, rng);
      if (draws[i] < 1) return false;
    }
    const double pv = testutil::gof_chisq_pvalue(draws, pmf.support_offset, pmf.weights);
    std::printf("    sch(h=%lld, mu=%g): p = %.4f\n", static_cast<long long>(h),
                mu, pv);
    ok &= pv > 0.001;
  }

  // SCH(1, mu) is exactly 1 + Poisson(mu)
  std::map<int64_t, int64_t> h1, h2;
  for (int i = 0; i < n; ++i) ++h1[d::sch(1, 2.5, rng)];
  for (int i = 0; i < n; ++i) ++h2[1 + d::poisson(2.5, rng)];
  const double pv = testutil::two_sample_chisq_pvalue(h1, h2);
  std::printf("    sch(1, 2.5) vs 1+Pois(2.5): p = %.4f\n", pv);
  ok &= pv > 0.001;
  return ok;
}

Hyperparameters geweke_hyper(ChainKind chain) {
  // The z-test needs finite prior moments up to fourth order for every
  // battery statistic; epsilon0 > 4 keeps the inverse-beta moments finite.
  Hyperparameters h;
  h.tau0 = 1.0;
  h.gamma0 = 2.0;
  h.epsilon0 = 6.0;
  h.e0 = 2.0;
  h.f0 = 2.0;
  h.eps_alpha = 1.0;
  h.K = 2;
  h.M = 4;
  h.chain = chain;
  return h;
}

bool criterion4() {
  const Dims dims = Dims::make(3, 8, 2, 4);
  bool ok = true;
  for (ChainKind chain : {ChainKind::DirDir, ChainKind::DirGamDir,
                          ChainKind::PRGamDir, ChainKind::Static}) {
    GewekeOptions opt;
    opt.n_samples = 50000;
    opt.seed = 101 + static_cast<uint64_t>(chain);
    const Hyperparameters h = geweke_hyper(chain);
    const GewekeReport rep = geweke_harness(h, dims, opt);
    std::printf("    geweke %-12s: %d/%zu flagged (pass fraction %.3f)\n",
                chain_name(chain), rep.n_flagged(), rep.stats.size(),
                rep.pass_fraction());
    for (const auto& s : rep.stats)
      if (s.flagged)
        std::printf("      flagged: %s z=%.2f (mc %.4f+-%.4f, sc %.4f+-%.4f)\n",
                    s.name.c_str(), s.z, s.mean_mc, s.se_mc, s.mean_sc, s.se_sc);
    ok &= rep.pass_fraction() >= 0.95;
  }

  // The mutation check: skipping the theta conditional must be detected.
  {
    GewekeOptions opt;
    opt.n_samples = 20000;
    opt.batch_count = 50;
    opt.seed = 999;
    opt.mutation.skip_theta = true;
    const GewekeReport rep = geweke_harness(geweke_hyper(ChainKind::DirDir), dims, opt);
    int theta_flagged = 0;
    for (const auto& s : rep.stats)
      if (s.flagged && s.name.rfind("theta", 0) == 0) ++theta_flagged;
    std::printf("    geweke mutation (theta skipped): %d theta statistics flagged\n",
                theta_flagged);
    ok &= theta_flagged >= 1;
  }
  return ok;
}

struct RecoveryInstance {
  CountData truth;
  LatentState truth_state;
};

RecoveryInstance make_recovery_instance(uint64_t seed) {
  // Dir-Dir generator with a moderate eta (around 3) so the transition
  // stack genuinely drifts across the four sub-intervals.
  Hyperparameters gen;
  gen.tau0 = 1.0;
  gen.gamma0 = 30.0;
  gen.epsilon0 = 2.0;
  gen.e0 = 30.0;
  gen.f0 = 10.0;
  gen.K = 3;
  gen.M = 20;
  gen.chain = ChainKind::DirDir;
  const Dims dims = Dims::make(20, 80, 3, 20);
  auto [state, data] = generate_synthetic(gen, dims, seed);
  return {std::move(data), std::move(state)};
}

Hyperparameters fit_hyper(ChainKind chain) {
  Hyperparameters h;  // standard fitting values
  h.tau0 = 1.0;
  h.gamma0 = 50.0;
  h.epsilon0 = 0.1;
  h.e0 = 0.1;
  h.f0 = 0.1;
  h.K = 3;
  h.M = 20;
  h.chain = chain;
  return h;
}

bool criterion5() {
  const std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
  double mre_dd = 0.0, mre_st = 0.0;
  double worst_fit_secs = 0.0;
  double min_corr = 1.0;
  for (uint64_t seed : seeds) {
    const RecoveryInstance inst = make_recovery_instance(seed);
    const CountData masked = mask_for_smoothing(inst.truth.counts, 0.10, seed);
    const auto cells = masked_cells(masked);
    std::vector<double> truth(cells.size());
    for (size_t i = 0; i < cells.size(); ++i)
      truth[i] = static_cast<double>(inst.truth.counts(cells[i].v, cells[i].t));

    for (ChainKind chain : {ChainKind::DirDir, ChainKind::Static}) {
      SamplerConfig cfg;
      cfg.iterations = 4000;
      cfg.burn_in = 2000;
      cfg.thin = 100;
      cfg.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      const PosteriorSummary post = run_inference(cfg, fit_hyper(chain), masked);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      worst_fit_secs = std::max(worst_fit_secs, secs);
      const auto pred = smooth_predict(post, masked);
      const Metrics m = compute_metrics(truth, pred);
      if (chain == ChainKind::DirDir) {
        mre_dd += m.mre;
        // posterior-mean rates must track the true rates
        const Grid<double> true_rate = predictive_rate_all(inst.truth_state);
        std::vector<double> a, b;
        for (int v = 0; v < true_rate.rows(); ++v)
          for (int t = 0; t < true_rate.cols(); ++t) {
            a.push_back(true_rate(v, t));
            b.push_back(post.rate_mean(v, t));
          }
        min_corr = std::min(min_corr, testutil::pearson_r(a, b));
      } else {
        mre_st += m.mre;
      }
      std::printf("    seed %llu %-8s: smoothing MRE %.4f (%.1f s)\n",
                  static_cast<unsigned long long>(seed), chain_name(chain), m.mre,
                  secs);
      std::fflush(stdout);
    }
  }
  mre_dd /= seeds.size();
  mre_st /= seeds.size();
  std::printf("    mean MRE dir-dir %.4f vs static %.4f; min rate corr %.3f; "
              "max fit %.1f s\n",
              mre_dd, mre_st, min_corr, worst_fit_secs);
  return mre_dd <= mre_st && min_corr > 0.9 && worst_fit_secs < 600.0;
}

bool criterion6() {
  const int K = 3;
  const double eta = 4.0;
  const std::vector<double> prev{0.5, 0.3, 0.2};
  const int n = 100000;
  RngStream rng(77, Var::Test, 0, 0);
  std::vector<double> conc(K), out(K);
  for (int k = 0; k < K; ++k) conc[k] = eta * K * prev[k];
  std::vector<std::vector<double>> draws(K);
  for (int i = 0; i < n; ++i) {
    d::dirichlet(conc, out, rng);
    for (int k = 0; k < K; ++k) draws[k].push_back(out[k]);
  }
  bool ok = true;
  for (int k = 0; k < K; ++k) {
    const double mean = testutil::mean_of(draws[k]);
    const double var = testutil::var_of(draws[k]);
    const double want_var = prev[k] * (1.0 - prev[k]) / (eta * K + 1.0);
    const double se = std::sqrt(want_var / n);
    const bool mean_ok = std::abs(mean - prev[k]) < 3 * se;
    const bool var_ok = std::abs(var - want_var) < 0.05 * want_var;
    std::printf("    pi[%d]: mean %.5f (target %.5f), var %.6f (target %.6f)\n",
                k, mean, prev[k], var, want_var);
    ok &= mean_ok && var_ok;
  }
  return ok;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("nspgds_acc_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

bool criterion7() {
  TempDir tmp("determinism");
  // small but non-trivial smoothing pipeline
  pipeline::RunConfig gen;
  gen.hyper = fit_hyper(ChainKind::DirDir);
  gen.hyper.gamma0 = 10.0;
  gen.hyper.epsilon0 = 1.0;
  gen.hyper.e0 = 8.0;
  gen.hyper.f0 = 4.0;
  gen.hyper.K = 2;
  gen.hyper.M = 10;
  gen.V = 10;
  gen.T = 40;
  gen.sampler.seed = 5;
  gen.out_dir = tmp.str() + "/gen";
  pipeline::cmd_generate(gen);

  auto smooth_run = [&](const std::string& out, bool serial, int threads) {
#ifdef _OPENMP
    const int save = omp_get_max_threads();
    if (threads > 0) omp_set_num_threads(threads);
#endif
    pipeline::RunConfig cfg;
    cfg.hyper = fit_hyper(ChainKind::DirDir);
    cfg.hyper.K = 2;
    cfg.hyper.M = 10;
    cfg.sampler.iterations = 80;
    cfg.sampler.burn_in = 40;
    cfg.sampler.thin = 10;
    cfg.sampler.seed = 9;
    cfg.sampler.force_serial = serial;
    cfg.data_path = gen.out_dir + "/counts.csv";
    cfg.out_dir = out;
    cfg.mask_fraction = 0.10;
    const std::string csv = pipeline::cmd_smooth(cfg);
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(save);
#endif
    return csv;
  };

  const std::string a = smooth_run(tmp.str() + "/a", false, -1);
  const std::string b = smooth_run(tmp.str() + "/b", false, -1);
  const std::string c = smooth_run(tmp.str() + "/c", true, -1);
  const std::string d2 = smooth_run(tmp.str() + "/d", false, 2);
  const std::string e4 = smooth_run(tmp.str() + "/e", false, 4);
  bool ok = (a == b) && (a == c) && (a == d2) && (a == e4);
  std::printf("    metrics.csv byte-identical across runs/thread counts: %s\n",
              ok ? "yes" : "NO");

  // checkpoint-resume equals the uninterrupted run
  pipeline::RunConfig fit;
  fit.hyper = fit_hyper(ChainKind::DirDir);
  fit.hyper.K = 2;
  fit.hyper.M = 10;
  fit.sampler.iterations = 60;
  fit.sampler.burn_in = 20;
  fit.sampler.thin = 5;
  fit.sampler.seed = 13;
  fit.data_path = gen.out_dir + "/counts.csv";
  fit.out_dir = tmp.str() + "/full";
  const std::string full_csv = pipeline::cmd_fit(fit);
  const std::string full_ck = io::read_text_file(fit.out_dir + "/checkpoint.txt");

  pipeline::RunConfig part = fit;
  part.out_dir = tmp.str() + "/part";
  part.sampler.iterations = 25;
  pipeline::cmd_fit(part);
  pipeline::RunConfig cont = fit;
  cont.out_dir = part.out_dir;
  cont.resume = true;
  const std::string resumed_csv = pipeline::cmd_fit(cont);
  const std::string resumed_ck = io::read_text_file(part.out_dir + "/checkpoint.txt");
  const bool resume_ok = resumed_csv == full_csv && resumed_ck == full_ck;
  std::printf("    checkpoint-resume equals uninterrupted run: %s\n",
              resume_ok ? "yes" : "NO");
  return ok && resume_ok;
}

bool criterion8() {
  const RecoveryInstance inst = make_recovery_instance(3);
  const CountData masked = mask_for_smoothing(inst.truth.counts, 0.10, 3);
  SamplerConfig cfg;
  cfg.iterations = 201;
  cfg.burn_in = 0;
  cfg.thin = 201;
  cfg.seed = 7;
  cfg.debug_invariants = true;
  GibbsSampler sampler(fit_hyper(ChainKind::DirDir), masked, cfg);
  for (int i = 0; i < 200; ++i) sampler.run_sweep();
  std::printf("    200 debug-mode sweeps completed with zero violations\n");
  return true;  // any violation throws
}

}  // namespace

int main() {
  Runner r;
  r.criterion(1, "NB+CRT vs Pois+SumLog augmentation identity", criterion1);
  r.criterion(2, "DirMult vs Beta/NB augmentation identity", criterion2);
  r.criterion(3, "Bessel and SCH samplers match pmf oracles", criterion3);
  r.criterion(4, "Geweke joint-distribution test, all chains + mutation", criterion4);
  r.criterion(5, "posterior recovery: Dir-Dir smoothing beats static", criterion5);
  r.criterion(6, "Dir-Dir chain mean/variance closed forms", criterion6);
  r.criterion(7, "determinism across runs, thread counts and resume", criterion7);
  r.criterion(8, "200 debug-mode sweeps uphold every invariant", criterion8);
  if (!r.all_passed) {
    std::printf("acceptance: FAILURES present\n");
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
