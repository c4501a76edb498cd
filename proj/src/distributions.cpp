#include "nspgds/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nspgds::dist {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("distributions: ") + what);
}

bool pos_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double uniform(RngStream& rng) { return rng.next_double(); }

double normal(RngStream& rng) {
  // Box-Muller; one value per call keeps the draw count per stream simple.
  double u1 = rng.next_double();
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

double gamma(double shape, double rate, RngStream& rng) {
  require(pos_finite(shape), "gamma shape must be finite and > 0");
  require(pos_finite(rate), "gamma rate must be finite and > 0");

  // Marsaglia-Tsang for shape >= 1; the shape < 1 case boosts through
  // shape + 1 and multiplies by U^(1/shape).
  double boost = 1.0;
  double a = shape;
  if (a < 1.0) {
    boost = std::pow(rng.next_double(), 1.0 / a);
    a += 1.0;
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  double x, v;
  for (;;) {
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_double();
    if (u < 1.0 - 0.0331 * x * x * x * x) break;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) break;
  }
  double g = d * v * boost / rate;
  return std::max(g, kPositiveFloor);
}

double beta(double a, double b, RngStream& rng) {
  require(pos_finite(a), "beta a must be finite and > 0");
  require(pos_finite(b), "beta b must be finite and > 0");
  const double ga = gamma(a, 1.0, rng);
  const double gb = gamma(b, 1.0, rng);
  return ga / (ga + gb);
}

double log_gamma_draw(double shape, RngStream& rng) {
  require(pos_finite(shape), "log_gamma_draw shape must be finite and > 0");
  if (shape >= 1.0) return std::log(gamma(shape, 1.0, rng));
  const double lboost = std::log(rng.next_double()) / shape;
  return std::log(gamma(shape + 1.0, 1.0, rng)) + lboost;
}

double beta_neglog1m(double a, double b, RngStream& rng) {
  require(pos_finite(a), "beta a must be finite and > 0");
  require(pos_finite(b), "beta b must be finite and > 0");
  // q = ga/(ga+gb); -log(1-q) = log1p(ga/gb)
  const double r = log_gamma_draw(a, rng) - log_gamma_draw(b, rng);
  if (r > 36.0) return r;  // log1p(e^r) - r < 1e-16 there
  return std::log1p(std::exp(r));
}

namespace {

int64_t poisson_small(double lambda, RngStream& rng) {
  // Inversion by sequential search; fine for lambda below ~30.
  const double p0 = std::exp(-lambda);
  double p = p0;
  double cdf = p;
  const double u = rng.next_double();
  int64_t k = 0;
  while (u > cdf) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
    if (p < 1e-18 && k > lambda) break;  // numeric tail guard
  }
  return k;
}

}  // namespace

int64_t poisson(double lambda, RngStream& rng) {
  require(std::isfinite(lambda) && lambda >= 0.0,
          "poisson rate must be finite and >= 0");
  if (lambda == 0.0) return 0;
  // Knuth's gamma/binomial reduction keeps every draw exact for large rates:
  // with m ~ floor(7/8 lambda), X ~ Gamma(m,1) splits the problem.
  int64_t n = 0;
  while (lambda > 30.0) {
    const int64_t m = static_cast<int64_t>(std::floor(0.875 * lambda));
    const double x = gamma(static_cast<double>(m), 1.0, rng);
    if (x < lambda) {
      n += m;
      lambda -= x;
    } else {
      return n + binomial(m - 1, lambda / x, rng);
    }
  }
  return n + poisson_small(lambda, rng);
}

int64_t binomial(int64_t n, double p, RngStream& rng) {
  require(n >= 0, "binomial n must be >= 0");
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "binomial p must be in [0,1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (n <= 64) {
    int64_t k = 0;
    for (int64_t i = 0; i < n; ++i)
      if (rng.next_double() < p) ++k;
    return k;
  }
  // Order-statistic split: the a-th of n uniforms is Beta(a, n+1-a), and
  // conditioning on it reduces n geometrically. Exact, O(log n) beta draws.
  const int64_t a = 1 + n / 2;
  const double v = beta(static_cast<double>(a), static_cast<double>(n - a + 1), rng);
  if (v <= p) {
    const double q = std::clamp((p - v) / (1.0 - v), 0.0, 1.0);
    return a + binomial(n - a, q, rng);
  }
  return binomial(a - 1, std::clamp(p / v, 0.0, 1.0), rng);
}

void multinomial(int64_t n, std::span<const double> probs,
                 std::span<int64_t> out, RngStream& rng) {
  require(n >= 0, "multinomial n must be >= 0");
  require(probs.size() == out.size(), "multinomial output size mismatch");
  double tail = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, "multinomial probs must be >= 0");
    tail += p;
  }
  require(tail > 0.0, "multinomial probs must not all be zero");
  int64_t left = n;
  const size_t k = probs.size();
  for (size_t i = 0; i + 1 < k; ++i) {
    if (left == 0) {
      out[i] = 0;
      continue;
    }
    const double p = std::clamp(probs[i] / tail, 0.0, 1.0);
    const int64_t c = binomial(left, p, rng);
    out[i] = c;
    left -= c;
    tail -= probs[i];
    if (tail <= 0.0) tail = 0.0;
  }
  out[k - 1] = left;
}

void dirichlet(std::span<const double> conc, std::span<double> out,
               RngStream& rng) {
  require(conc.size() == out.size(), "dirichlet output size mismatch");
  double sum = 0.0;
  bool degenerate = true;
  for (size_t i = 0; i < conc.size(); ++i) {
    // a zero concentration is the Gam(0, 1) point mass at zero
    out[i] = conc[i] > 0.0 ? gamma(conc[i], 1.0, rng) : 0.0;
    if (out[i] > kPositiveFloor) degenerate = false;
    sum += out[i];
  }
  if (degenerate) {
    // Every gamma underflowed: the Dir(c), c -> 0 limit is a vertex chosen
    // with probability conc_i / sum(conc).
    double csum = 0.0;
    for (double c : conc) csum += c;
    size_t pick = conc.size() - 1;
    if (csum > 0.0) {
      const double u = rng.next_double() * csum;
      double acc = 0.0;
      for (size_t i = 0; i < conc.size(); ++i) {
        acc += conc[i];
        if (u <= acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::min(conc.size() - 1,
                      static_cast<size_t>(rng.next_double() * conc.size()));
    }
    for (size_t i = 0; i < out.size(); ++i) out[i] = kPositiveFloor;
    out[pick] = 1.0;
    sum = 1.0 + static_cast<double>(out.size() - 1) * kPositiveFloor;
    for (size_t i = 0; i < out.size(); ++i) out[i] /= sum;
    return;
  }
  for (size_t i = 0; i < conc.size(); ++i)
    out[i] = std::max(out[i] / sum, kPositiveFloor);
  sum = 0.0;
  for (double x : out) sum += x;
  for (size_t i = 0; i < out.size(); ++i) out[i] /= sum;
}

int64_t crt(int64_t y, double a, RngStream& rng) {
  require(y >= 0, "crt y must be >= 0");
  require(pos_finite(a), "crt concentration must be finite and > 0");
  int64_t l = 0;
  for (int64_t i = 0; i < y; ++i) {
    const double p = a / (a + static_cast<double>(i));
    if (rng.next_double() < p) ++l;
  }
  return l;
}

int64_t logarithmic(double p, RngStream& rng) {
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "logarithmic p must be in (0,1)");
  // cdf inversion with the recurrence P(k+1) = P(k) * p * k / (k+1)
  const double u = rng.next_double();
  double pk = -p / std::log1p(-p);  // P(1)
  double cdf = pk;
  int64_t k = 1;
  while (u > cdf) {
    pk *= p * static_cast<double>(k) / static_cast<double>(k + 1);
    ++k;
    cdf += pk;
    if (pk < 1e-18 * (1.0 - p)) break;  // numeric tail guard
  }
  return k;
}

int64_t sum_log(int64_t l, double p, RngStream& rng) {
  require(l >= 0, "sum_log l must be >= 0");
  if (l == 0) return 0;
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "sum_log p must be in (0,1)");
  int64_t y = 0;
  for (int64_t i = 0; i < l; ++i) y += logarithmic(p, rng);
  return y;
}

int64_t negative_binomial(double r, double p, RngStream& rng) {
  require(pos_finite(r), "negative_binomial r must be finite and > 0");
  require(std::isfinite(p) && p >= 0.0 && p < 1.0,
          "negative_binomial p must be in [0,1)");
  if (p == 0.0) return 0;
  const double lam = gamma(r, (1.0 - p) / p, rng);
  return poisson(lam, rng);
}

namespace {

// Mode-centered log-weight window: expands from the mode until both tails
// fall below `tail` relative to the accumulated mass.
struct Window {
  int64_t lo = 0;
  std::vector<double> w;  // normalized
};

template <typename LogW>
Window build_window(int64_t mode, int64_t support_lo, LogW logw, double tail) {
  const double lw_mode = logw(mode);
  std::vector<double> right, left;
  double total = 1.0;  // weight at the mode, relative scale
  // right tail
  for (int64_t n = mode + 1;; ++n) {
    const double w = std::exp(logw(n) - lw_mode);
    if (!(w > tail * total) && n > mode + 4) break;
    right.push_back(w);
    total += w;
    if (right.size() > 100000) break;  // pathological-parameter guard
  }
  // left tail
  for (int64_t n = mode - 1; n >= support_lo; --n) {
    const double w = std::exp(logw(n) - lw_mode);
    if (!(w > tail * total) && n < mode - 4) break;
    left.push_back(w);
    total += w;
  }
  Window win;
  win.lo = mode - static_cast<int64_t>(left.size());
  win.w.reserve(left.size() + 1 + right.size());
  for (auto it = left.rbegin(); it != left.rend(); ++it) win.w.push_back(*it);
  win.w.push_back(1.0);
  for (double w : right) win.w.push_back(w);
  double s = 0.0;
  for (double w : win.w) s += w;
  for (double& w : win.w) w /= s;
  return win;
}

int64_t invert_window(const Window& win, RngStream& rng) {
  const double u = rng.next_double();
  double cdf = 0.0;
  for (size_t i = 0; i < win.w.size(); ++i) {
    cdf += win.w[i];
    if (u <= cdf) return win.lo + static_cast<int64_t>(i);
  }
  return win.lo + static_cast<int64_t>(win.w.size()) - 1;
}

double bessel_logw(double nu, double loghalf_a, int64_t n) {
  return (2.0 * static_cast<double>(n) + nu) * loghalf_a -
         std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(n) + nu + 1.0);
}

int64_t bessel_mode(double nu, double a) {
  // ratio w(n+1)/w(n) = (a/2)^2 / ((n+1)(n+nu+1)) crosses 1 near the root of
  // (n+1)(n+nu+1) = (a/2)^2
  const double q = 0.25 * a * a;
  const double disc = nu * nu + 4.0 * q;
  const double root = 0.5 * (-(nu + 2.0) + std::sqrt(disc));
  return std::max<int64_t>(0, static_cast<int64_t>(std::floor(root)) );
}

double sch_logw(int64_t h, double logmu, int64_t n) {
  const double nd = static_cast<double>(n);
  return nd * logmu + std::lgamma(nd + static_cast<double>(h)) -
         std::lgamma(nd) - std::lgamma(nd + 1.0);
}

int64_t sch_mode(int64_t h, double mu) {
  // ratio w(n+1)/w(n) = mu (n+h) / (n (n+1)) crosses 1 near the positive root
  // of n^2 + (1-mu) n - mu h = 0
  const double b = 1.0 - mu;
  const double disc = b * b + 4.0 * mu * static_cast<double>(h);
  const double root = 0.5 * (-b + std::sqrt(disc));
  return std::max<int64_t>(1, static_cast<int64_t>(std::floor(root)));
}

}  // namespace

int64_t bessel(double nu, double a, RngStream& rng) {
  require(std::isfinite(nu) && nu > -1.0, "bessel nu must be > -1");
  require(std::isfinite(a) && a >= 0.0, "bessel a must be >= 0");
  if (a == 0.0) return 0;
  const double loghalf_a = std::log(0.5 * a);
  const Window win = build_window(
      bessel_mode(nu, a), 0,
      [&](int64_t n) { return bessel_logw(nu, loghalf_a, n); }, 1e-12);
  return invert_window(win, rng);
}

int64_t sch(int64_t h, double mu, RngStream& rng) {
  require(h >= 1, "sch h must be >= 1");
  require(pos_finite(mu), "sch mu must be finite and > 0");
  const double logmu = std::log(mu);
  const Window win = build_window(
      sch_mode(h, mu), 1,
      [&](int64_t n) { return sch_logw(h, logmu, n); }, 1e-12);
  return invert_window(win, rng);
}

double DiscretePmf::mean() const {
  double m = 0.0;
  for (size_t i = 0; i < weights.size(); ++i)
    m += weights[i] * static_cast<double>(support_offset + static_cast<int64_t>(i));
  return m;
}

double DiscretePmf::mass_at(int64_t n) const {
  const int64_t i = n - support_offset;
  if (i < 0 || i >= static_cast<int64_t>(weights.size())) return 0.0;
  return weights[static_cast<size_t>(i)];
}

namespace {

DiscretePmf window_to_pmf(const Window& win) {
  DiscretePmf pmf;
  pmf.support_offset = win.lo;
  pmf.weights = win.w;
  return pmf;
}

}  // namespace

DiscretePmf bessel_pmf(double nu, double a, double tail) {
  require(std::isfinite(nu) && nu > -1.0, "bessel nu must be > -1");
  require(std::isfinite(a) && a >= 0.0, "bessel a must be >= 0");
  if (a == 0.0) return DiscretePmf{0, {1.0}};
  const double loghalf_a = std::log(0.5 * a);
  return window_to_pmf(build_window(
      bessel_mode(nu, a), 0,
      [&](int64_t n) { return bessel_logw(nu, loghalf_a, n); }, tail));
}

DiscretePmf sch_pmf(int64_t h, double mu, double tail) {
  require(h >= 1, "sch h must be >= 1");
  require(pos_finite(mu), "sch mu must be finite and > 0");
  const double logmu = std::log(mu);
  return window_to_pmf(build_window(
      sch_mode(h, mu), 1,
      [&](int64_t n) { return sch_logw(h, logmu, n); }, tail));
}

DiscretePmf logarithmic_pmf(double p, double tail) {
  require(std::isfinite(p) && p > 0.0 && p < 1.0, "logarithmic p must be in (0,1)");
  DiscretePmf pmf;
  pmf.support_offset = 1;
  double pk = -p / std::log1p(-p);
  double total = 0.0;
  int64_t k = 1;
  for (;;) {
    pmf.weights.push_back(pk);
    total += pk;
    pk *= p * static_cast<double>(k) / static_cast<double>(k + 1);
    ++k;
    if (pk < tail * total && k > 8) break;
  }
  for (double& w : pmf.weights) w /= total;
  return pmf;
}

}  // namespace nspgds::dist
