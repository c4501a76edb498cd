#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nspgds/rng.hpp"

namespace nspgds::dist {

// Floor applied to positive latent draws so tiny-shape gamma variates never
// collapse to exact zero in floating point.
inline constexpr double kPositiveFloor = 1e-300;

double uniform(RngStream& rng);  // open (0,1)
double normal(RngStream& rng);

// Shape/rate parametrization, mean shape/rate. Throws std::invalid_argument
// on non-finite or non-positive parameters.
double gamma(double shape, double rate, RngStream& rng);
double beta(double a, double b, RngStream& rng);

// log of a Gamma(shape, 1) draw, stable for arbitrarily small shapes (the
// draw itself would underflow to zero).
double log_gamma_draw(double shape, RngStream& rng);

// -log(1 - q) for q ~ Beta(a, b), computed in log space. Near q = 1 the
// naive route loses the entire tail: 1 - q underflows long before the
// Beta(a, b) left tail stops mattering.
double beta_neglog1m(double a, double b, RngStream& rng);

int64_t poisson(double lambda, RngStream& rng);
int64_t binomial(int64_t n, double p, RngStream& rng);

// out must have probs.size() slots; counts sum to n exactly.
void multinomial(int64_t n, std::span<const double> probs,
                 std::span<int64_t> out, RngStream& rng);

// out components are floored at kPositiveFloor and renormalized to sum 1.
void dirichlet(std::span<const double> conc, std::span<double> out,
               RngStream& rng);

// Chinese restaurant table count: sum over n = 1..y of Bernoulli(a/(a+n-1)).
int64_t crt(int64_t y, double a, RngStream& rng);

// Logarithmic series distribution on {1,2,...}, P(k) proportional to p^k / k.
int64_t logarithmic(double p, RngStream& rng);

// Sum of l iid logarithmic(p) draws; 0 when l == 0.
int64_t sum_log(int64_t l, double p, RngStream& rng);

// P(k) = Gamma(k+r)/(k! Gamma(r)) p^k (1-p)^r, mean r p/(1-p).
int64_t negative_binomial(double r, double p, RngStream& rng);

// Bessel distribution: P(n) proportional to (a/2)^(2n+nu) / (n! Gamma(n+nu+1)),
// n >= 0. Sampled by inversion over a mode-centered truncation. a == 0 yields 0.
int64_t bessel(double nu, double a, RngStream& rng);

// Shifted confluent hypergeometric distribution:
// P(n) proportional to mu^n Gamma(n+h) / (Gamma(n) n!), n >= 1, h >= 1.
// This is the conditional of a Poisson(lambda) count g given h | g ~ NB(g, p)
// with mu = lambda (1-p); the caller handles the h == 0 branch as a plain
// Poisson draw.
int64_t sch(int64_t h, double mu, RngStream& rng);

// Normalized finite pmf with integer support starting at support_offset.
// Used as an exact oracle for the inversion samplers.
struct DiscretePmf {
  int64_t support_offset = 0;
  std::vector<double> weights;

  double mean() const;
  double mass_at(int64_t n) const;
};

DiscretePmf bessel_pmf(double nu, double a, double tail = 1e-12);
DiscretePmf sch_pmf(int64_t h, double mu, double tail = 1e-12);
DiscretePmf logarithmic_pmf(double p, double tail = 1e-12);

}  // namespace nspgds::dist
