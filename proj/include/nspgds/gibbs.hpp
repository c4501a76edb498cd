#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "nspgds/grid.hpp"
#include "nspgds/model.hpp"

namespace nspgds {

struct SamplerConfig {
  int64_t iterations = 4000;
  int64_t burn_in = 2000;
  int64_t thin = 100;
  uint64_t seed = 0;
  bool debug_invariants = false;
  bool force_serial = false;

  void validate() const;  // burn_in < iterations, thin >= 1
};

// Test hook for the Geweke mutation check: a deliberately broken sweep.
struct SweepMutation {
  bool skip_theta = false;
};

// Auxiliary variables of one sweep. All integer tensors are exact counts;
// margins are recomputed rather than maintained incrementally.
struct AuxiliaryState {
  Grid<int64_t> y_work;    // V x T working counts (observed + imputed)
  Grid<int64_t> ydot_kt;   // K x T token margins y_{.k}^{(t)}
  Grid<int64_t> yvk_sum;   // V x K token margins summed over t
  std::vector<int64_t> y_total_t;  // per-step totals at allocation time
  std::vector<int64_t> y_total_v;  // per-dimension totals at allocation time
  std::vector<Grid<int64_t>> l;  // T of K x K; slot t used for t >= 1
  Grid<int64_t> lrow_tk;   // T x K row margins l_{k.}^{(t)}
  Grid<int64_t> ldot_tk;   // (T+1) x K column margins l_{.k}^{(t)}; row T = 0
  std::vector<int64_t> l_t1;  // K, the t=1 CRT against tau0 nu_k
  std::vector<double> zeta;   // T+1; zeta[j] holds the value at time j+1, zeta[T] = 0
  std::vector<Grid<int64_t>> lbucket;  // I of K x K per-interval sums
  // -log(1 - q) of the Beta augmentation draws, kept in log space so the
  // near-1 tail of q survives; slot 0 is the nu-level draw
  Grid<double> Lq;
  std::vector<Grid<int64_t>> h;        // I of K x K; slot 0 is the nu-level draw
  std::vector<Grid<int64_t>> gpair;    // I of K x K (mutation chains)
  std::vector<Tensor3<int64_t>> g3;    // I of (k1, k2, k) splits of gpair
  std::vector<Grid<int64_t>> gcol;     // I of K x K: gcol[i](k2,k) = sum_k1 g3[i]
  std::vector<int64_t> n_k;   // K, shape counts of the nu update
  std::vector<double> rho_k;  // K, rate terms of the nu update

  static AuxiliaryState make(const Dims& dims);
};

// Everything a conditional needs besides state/aux: hyperparameters, sizes,
// the RNG key material and the execution policy.
struct SweepCtx {
  const Hyperparameters& hyper;
  const Dims& dims;
  uint64_t seed = 0;
  uint64_t sweep = 0;
  bool serial = false;
  SweepMutation mutation;
};

// --- individual conditionals (exposed for unit tests) ---

// Masked cells are replaced by a Poisson draw at the current predictive rate.
void impute_missing(const SweepCtx& ctx, const LatentState& state,
                    const CountData& data, Grid<int64_t>& y_work);

// Multinomial token allocation; fills ydot_kt and yvk_sum.
void allocate_token_counts(const SweepCtx& ctx, const LatentState& state,
                           AuxiliaryState& aux);

void sample_phi(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux);
void sample_delta(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux);

// zeta[j] = log(1 + delta[j]/tau0 + zeta[j+1]), computed backward; zeta[T] = 0.
void compute_zeta(std::vector<double>& zeta, const std::vector<double>& delta,
                  double tau0);

// Backward CRT/multinomial pass over t = T..2 plus the t = 1 CRT that carries
// the evidence for nu. Collapses every theta.
void backward_sample_auxiliary(const SweepCtx& ctx, const LatentState& state,
                               AuxiliaryState& aux);

// lbucket[i] = sum of l^{(t)} over transitions governed by interval i, i.e.
// steps t with i(t-1) = i.
void accumulate_interval_sums(const SweepCtx& ctx, AuxiliaryState& aux);

// Backward collapse of the transition stack: q/h (and for the mutation chains
// alpha, c, g and its splits) from interval I down to 2; Dir-Dir also updates
// eta here since its conditional only needs q and h.
void collapse_chain(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux);

// nu-level augmentation (q/h at slot 0) followed by the xi, nu and beta draws.
void sample_nu_xi_beta(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux);

// Forward reinstatement of pi (and psi/gamma/alpha/c for the mutation chains)
// from interval 1 up to I, ending with the last-interval draw.
void reinstate_chain(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux);

// pi^{(I)} ~ Dir(alpha^{(I)} + l^{(I)}) where alpha^{(I)} is eta K pi^{(I-1)}
// for Dir-Dir and the chain's alpha otherwise.
void sample_pi_last_interval(const SweepCtx& ctx, LatentState& state,
                             const AuxiliaryState& aux);

// Forward redraw of theta given the refreshed transition stack and nu.
void sample_theta(const SweepCtx& ctx, LatentState& state, const AuxiliaryState& aux);

// One full sweep in collapse-up / reinstate-down order. Imputation of the
// masked cells runs at the end of the sweep (a rotation of the same Gibbs
// scan), so the first sweep allocates against the zero-initialized working
// counts instead of a raw prior draw.
void gibbs_sweep(const SweepCtx& ctx, LatentState& state, AuxiliaryState& aux,
                 const CountData& data);

// Conservation, margin and simplex checks; throws std::logic_error naming the
// first violated conditional.
void check_sweep_invariants(const SweepCtx& ctx, const LatentState& state,
                            const AuxiliaryState& aux);

// --- chain orchestration ---

struct PosteriorAccum {
  int64_t n = 0;
  Grid<double> theta;
  Grid<double> phi;
  std::vector<Grid<double>> pi;
  std::vector<double> delta;
  std::vector<double> nu;
  double xi = 0.0, beta = 0.0;
  Grid<double> rate;
  std::vector<LatentState> retained;
};

struct PosteriorSummary {
  int64_t n_retained = 0;
  Grid<double> theta_mean;
  Grid<double> phi_mean;
  std::vector<Grid<double>> pi_mean;
  std::vector<double> delta_mean;
  std::vector<double> nu_mean;
  double xi_mean = 0.0, beta_mean = 0.0;
  Grid<double> rate_mean;
  std::vector<LatentState> retained;
};

PosteriorSummary finalize_posterior(const PosteriorAccum& acc);

class GibbsSampler {
 public:
  GibbsSampler(const Hyperparameters& hyper, CountData data, SamplerConfig cfg);

  void init_from_prior();
  void run_sweep();
  // Runs remaining sweeps (init first if fresh), retaining post-burn-in
  // samples every `thin` sweeps.
  PosteriorSummary run();

  int64_t sweep_count() const { return sweep_; }
  const Dims& dims() const { return dims_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const SamplerConfig& config() const { return cfg_; }
  const LatentState& state() const { return state_; }
  LatentState& mutable_state() { return state_; }
  const AuxiliaryState& aux() const { return aux_; }
  const CountData& data() const { return data_; }

  void set_mutation(SweepMutation m) { mutation_ = m; }
  // Replaces the observed counts (fully observed); used by the Geweke
  // successive-conditional simulator.
  void regenerate_data_from_state();

  uint64_t config_hash() const;

  void save_checkpoint(std::ostream& os) const;
  // Verifies version and config hash, then restores sweep counter, state,
  // aux and posterior accumulators so the continuation is bit-identical.
  static std::unique_ptr<GibbsSampler> resume_checkpoint(std::istream& is,
                                                         const Hyperparameters& hyper,
                                                         CountData data,
                                                         SamplerConfig cfg);

 private:
  SweepCtx make_ctx() const;
  void maybe_retain();

  Hyperparameters hyper_;
  Dims dims_;
  CountData data_;
  SamplerConfig cfg_;
  LatentState state_;
  AuxiliaryState aux_;
  PosteriorAccum accum_;
  SweepMutation mutation_;
  int64_t sweep_ = 0;
  bool initialized_ = false;
};

PosteriorSummary run_inference(const SamplerConfig& config,
                               const Hyperparameters& hyper, const CountData& data);

}  // namespace nspgds
