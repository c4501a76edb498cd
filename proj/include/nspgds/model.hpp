#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nspgds/grid.hpp"
#include "nspgds/rng.hpp"

namespace nspgds {

enum class ChainKind { DirDir, DirGamDir, PRGamDir, Static };

const char* chain_name(ChainKind k);
ChainKind chain_from_name(const std::string& name);  // throws on unknown name

struct Hyperparameters {
  double tau0 = 1.0;
  double gamma0 = 50.0;
  double epsilon0 = 0.1;
  double e0 = 0.1;
  double f0 = 0.1;
  double eps_alpha = 1.0;  // >= 0; 0 selects the sparse Poisson/SCH branch
  int K = 10;
  int M = 10;
  ChainKind chain = ChainKind::DirDir;

  void validate() const;  // throws std::invalid_argument
};

// V observed dimensions, T time steps, K latent factors, M steps per
// sub-interval, I = ceil(T/M) sub-intervals (the last one may be shorter).
struct Dims {
  int V = 0, T = 0, K = 0, M = 0, I = 0;
  static Dims make(int V, int T, int K, int M);  // validates, computes I
};

// 1-based: time steps (i-1)M+1 .. min(iM, T) map to interval i = ceil(t/M).
int interval_of(int t, int M);

// 0-based variant used internally.
inline int interval_index0(int t0, int M) { return t0 / M; }

struct CountData {
  Grid<int64_t> counts;  // V x T
  Grid<uint8_t> mask;    // V x T, 1 = observed

  int V() const { return counts.rows(); }
  int T() const { return counts.cols(); }
  int64_t observed_total() const;
  static CountData fully_observed(Grid<int64_t> counts);
};

// All latent quantities of one model configuration. Interval slot i (0-based)
// holds the (i+1)-th sub-interval.
//
// Chain-specific blocks:
//   DirDir/Static  : eta
//   DirGamDir      : alpha (slots 1..I-1), psi + gamma_ik (slots 0..I-2),
//                    c_ik (slots 1..I-1)
//   PRGamDir       : DirGamDir block plus g_pair (slots 1..I-1), the latent
//                    Poisson counts of the randomized-gamma construction
struct LatentState {
  ChainKind chain = ChainKind::DirDir;
  Grid<double> theta;               // K x T
  Grid<double> phi;                 // V x K, columns on the simplex
  std::vector<Grid<double>> pi;     // I of K x K, columns on the simplex
  std::vector<double> delta;        // T
  std::vector<double> nu;           // K
  double xi = 1.0;
  double beta = 1.0;

  double eta = 1.0;

  std::vector<Grid<double>> alpha;    // I of K x K (slot 0 = nu/xi prior form)
  std::vector<Tensor3<double>> psi;   // I of K x K x K (k, k1, k2)
  Grid<double> gamma_ik;              // I x K
  Grid<double> c_ik;                  // I x K
  std::vector<Grid<int64_t>> g_pair;  // I of K x K (PRGamDir only)

  bool has_mutation_chain() const {
    return chain == ChainKind::DirGamDir || chain == ChainKind::PRGamDir;
  }
};

// Concentration matrix of the first-interval transition prior:
// A0[k1][k] = nu_k1 * nu_k off the diagonal, xi * nu_k on it.
Grid<double> first_interval_concentration(const std::vector<double>& nu, double xi);

// Draws every latent top-down from the priors. Used for synthetic data,
// sampler initialization and the Geweke simulators; `sweep` keys the RNG
// streams so repeated prior draws stay independent.
LatentState sample_state_from_prior(const Hyperparameters& hyper, const Dims& dims,
                                    uint64_t seed, uint64_t sweep);

// y[v][t] ~ Pois(delta_t sum_k phi_vk theta_kt), overwriting `out`.
void sample_counts(const LatentState& state, Grid<int64_t>& out, uint64_t seed,
                   uint64_t sweep);

std::pair<LatentState, CountData> generate_synthetic(const Hyperparameters& hyper,
                                                     const Dims& dims, uint64_t seed);

// Poisson rate delta_t * Phi * theta_t for every v; t is 0-based.
std::vector<double> predictive_rate(const LatentState& state, int t);
Grid<double> predictive_rate_all(const LatentState& state);  // V x T

// Poisson log-pmf summed over observed (masked-in) cells.
double log_likelihood(const LatentState& state, const CountData& data);

// Simplex and positivity invariants; throws std::logic_error naming the
// offending block.
void check_state_invariants(const LatentState& state, double tol = 1e-9);

}  // namespace nspgds
