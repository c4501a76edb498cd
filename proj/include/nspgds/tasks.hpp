#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nspgds/gibbs.hpp"
#include "nspgds/model.hpp"

namespace nspgds {

struct TaskSpec {
  enum class Kind { Smoothing, Forecasting };
  Kind kind = Kind::Smoothing;
  double mask_fraction = 0.10;   // smoothing
  int horizon = 2;               // forecasting steps S
  std::vector<uint64_t> seeds;

  // Only the selected kind's field is checked; throws std::invalid_argument.
  void validate() const;
};

// Marks floor(fraction * V * T) cells unobserved, drawn uniformly from the
// cells still admissible under the non-adjacency rule: no two masked cells
// share a dimension v at consecutive time steps. Deterministic per seed.
CountData mask_for_smoothing(const Grid<int64_t>& counts, double fraction,
                             uint64_t seed);

struct MaskedCell {
  int v = 0, t = 0;
};
std::vector<MaskedCell> masked_cells(const CountData& data);  // row-major order

// Posterior-mean Poisson rate at each masked cell, in masked_cells order.
std::vector<double> smooth_predict(const PosteriorSummary& summary,
                                   const CountData& masked_data);

// Mean rollout per retained sample: theta advances by the transition
// expectation through Pi^{(I)}, delta is the sample's mean over the last
// sub-interval, predictions averaged across samples. Returns V x S.
Grid<double> forecast(const PosteriorSummary& summary, const Dims& dims, int steps);

struct Metrics {
  double mae = 0.0;
  double mre = 0.0;
};

// MAE = mean |y - yhat|; MRE = mean |y - yhat| / (1 + y). Evaluated over the
// given cells only; throws on an empty evaluation set.
Metrics compute_metrics(std::span<const double> truth,
                        std::span<const double> predictions);

// --- Geweke joint-distribution test ---

struct GewekeOptions {
  int n_samples = 50000;
  uint64_t seed = 1;
  SweepMutation mutation;
  int batch_count = 100;   // batch-means SE for the successive-conditional chain
  double z_threshold = 4.0;
};

struct GewekeStat {
  std::string name;
  double mean_mc = 0, se_mc = 0;
  double mean_sc = 0, se_sc = 0;
  double z = 0;
  bool flagged = false;
};

struct GewekeReport {
  std::vector<GewekeStat> stats;
  int n_flagged() const;
  double pass_fraction() const;
};

// Compares moments of the marginal-conditional simulator (prior + data) with
// the successive-conditional simulator (sweep + data regeneration) on a tiny
// model. The primary correctness certificate for every Gibbs conditional.
GewekeReport geweke_harness(const Hyperparameters& hyper, const Dims& dims,
                            const GewekeOptions& options);

}  // namespace nspgds
