#include "nspgds/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "nspgds/io.hpp"

namespace fs = std::filesystem;

namespace nspgds::pipeline {

namespace {

constexpr const char* kVersion = "nspgds 0.1.0";

int to_int(const std::string& v, const std::string& key) {
  try {
    return std::stoi(v);
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

double to_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
}

uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": " + v);
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": " + v);
}

std::string two_digits(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory: " + dir);
}

}  // namespace

void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "tau0") cfg.hyper.tau0 = to_double(value, key);
  else if (key == "gamma0") cfg.hyper.gamma0 = to_double(value, key);
  else if (key == "epsilon0") cfg.hyper.epsilon0 = to_double(value, key);
  else if (key == "e0") cfg.hyper.e0 = to_double(value, key);
  else if (key == "f0") cfg.hyper.f0 = to_double(value, key);
  else if (key == "eps_alpha") cfg.hyper.eps_alpha = to_double(value, key);
  else if (key == "K") cfg.hyper.K = to_int(value, key);
  else if (key == "M") cfg.hyper.M = to_int(value, key);
  else if (key == "chain") cfg.hyper.chain = chain_from_name(value);
  else if (key == "iters") cfg.sampler.iterations = to_int(value, key);
  else if (key == "burnin") cfg.sampler.burn_in = to_int(value, key);
  else if (key == "thin") cfg.sampler.thin = to_int(value, key);
  else if (key == "seed") cfg.sampler.seed = to_u64(value, key);
  else if (key == "debug_invariants") cfg.sampler.debug_invariants = to_bool(value, key);
  else if (key == "serial") cfg.sampler.force_serial = to_bool(value, key);
  else if (key == "data") cfg.data_path = value;
  else if (key == "mask") cfg.mask_path = value;
  else if (key == "out") cfg.out_dir = value;
  else if (key == "V") cfg.V = to_int(value, key);
  else if (key == "T") cfg.T = to_int(value, key);
  else if (key == "mask_fraction") cfg.mask_fraction = to_double(value, key);
  else if (key == "forecast_steps") cfg.forecast_steps = to_int(value, key);
  else if (key == "emit_svg") cfg.emit_svg = to_bool(value, key);
  else throw std::invalid_argument("config: unknown key: " + key);
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  for (const auto& [k, v] : io::parse_config_file(path)) apply_key_value(cfg, k, v);
}

CountData load_data(const RunConfig& cfg) {
  if (cfg.data_path.empty())
    throw std::invalid_argument("missing data path (--data)");
  Grid<int64_t> counts = io::load_counts(cfg.data_path);
  CountData data = CountData::fully_observed(std::move(counts));
  if (!cfg.mask_path.empty())
    data.mask = io::load_mask(cfg.mask_path, data.V(), data.T());
  return data;
}

void write_manifest(const RunConfig& cfg, const std::string& command) {
  ensure_dir(cfg.out_dir);
  std::ostringstream os;
  os << "version=" << kVersion << '\n';
  os << "command=" << command << '\n';
  os << "chain=" << chain_name(cfg.hyper.chain) << '\n';
  os << "tau0=" << io::fmt17(cfg.hyper.tau0) << '\n';
  os << "gamma0=" << io::fmt17(cfg.hyper.gamma0) << '\n';
  os << "epsilon0=" << io::fmt17(cfg.hyper.epsilon0) << '\n';
  os << "e0=" << io::fmt17(cfg.hyper.e0) << '\n';
  os << "f0=" << io::fmt17(cfg.hyper.f0) << '\n';
  os << "eps_alpha=" << io::fmt17(cfg.hyper.eps_alpha) << '\n';
  os << "K=" << cfg.hyper.K << '\n';
  os << "M=" << cfg.hyper.M << '\n';
  os << "iters=" << cfg.sampler.iterations << '\n';
  os << "burnin=" << cfg.sampler.burn_in << '\n';
  os << "thin=" << cfg.sampler.thin << '\n';
  os << "seed=" << cfg.sampler.seed << '\n';
  if (!cfg.data_path.empty()) os << "data=" << cfg.data_path << '\n';
  if (!cfg.mask_path.empty()) os << "mask=" << cfg.mask_path << '\n';
  io::write_text_file(cfg.out_dir + "/manifest.txt", os.str());
}

namespace {

void write_state_csvs(const std::string& dir, const LatentState& s) {
  ensure_dir(dir);
  io::save_matrix_csv(dir + "/theta.csv", s.theta);
  io::save_matrix_csv(dir + "/phi.csv", s.phi);
  for (size_t i = 0; i < s.pi.size(); ++i)
    io::save_matrix_csv(dir + "/pi_" + two_digits(static_cast<int>(i)) + ".csv",
                        s.pi[i]);
  Grid<double> dl(1, static_cast<int>(s.delta.size()));
  for (int t = 0; t < dl.cols(); ++t) dl(0, t) = s.delta[t];
  io::save_matrix_csv(dir + "/delta.csv", dl);
  Grid<double> nu(1, static_cast<int>(s.nu.size()));
  for (int k = 0; k < nu.cols(); ++k) nu(0, k) = s.nu[k];
  io::save_matrix_csv(dir + "/nu.csv", nu);
  std::ostringstream sc;
  sc << "xi=" << io::fmt17(s.xi) << "\nbeta=" << io::fmt17(s.beta) << '\n';
  if (s.chain == ChainKind::DirDir || s.chain == ChainKind::Static)
    sc << "eta=" << io::fmt17(s.eta) << '\n';
  io::write_text_file(dir + "/scalars.txt", sc.str());
}

void write_posterior_csvs(const std::string& dir, const PosteriorSummary& post) {
  ensure_dir(dir);
  io::save_matrix_csv(dir + "/theta_mean.csv", post.theta_mean);
  io::save_matrix_csv(dir + "/phi_mean.csv", post.phi_mean);
  for (size_t i = 0; i < post.pi_mean.size(); ++i)
    io::save_matrix_csv(dir + "/pi_mean_" + two_digits(static_cast<int>(i)) + ".csv",
                        post.pi_mean[i]);
  io::save_matrix_csv(dir + "/rate_mean.csv", post.rate_mean);
  Grid<double> dl(1, static_cast<int>(post.delta_mean.size()));
  for (int t = 0; t < dl.cols(); ++t) dl(0, t) = post.delta_mean[t];
  io::save_matrix_csv(dir + "/delta_mean.csv", dl);
  Grid<double> nu(1, static_cast<int>(post.nu_mean.size()));
  for (int k = 0; k < nu.cols(); ++k) nu(0, k) = post.nu_mean[k];
  io::save_matrix_csv(dir + "/nu_mean.csv", nu);
  std::ostringstream sc;
  sc << "n_retained=" << post.n_retained << "\nxi_mean=" << io::fmt17(post.xi_mean)
     << "\nbeta_mean=" << io::fmt17(post.beta_mean) << '\n';
  io::write_text_file(dir + "/scalars.txt", sc.str());
}

// Fit on `data`, honoring --resume, and write checkpoint + posterior CSVs.
PosteriorSummary fit_and_save(const RunConfig& cfg, const CountData& data,
                              const std::string& out_dir) {
  const std::string ckpt_path = out_dir + "/checkpoint.txt";
  std::unique_ptr<GibbsSampler> sampler;
  if (cfg.resume) {
    std::ifstream in(ckpt_path);
    if (!in) throw std::runtime_error("resume requested but no checkpoint at " + ckpt_path);
    sampler = GibbsSampler::resume_checkpoint(in, cfg.hyper, data, cfg.sampler);
  } else {
    sampler = std::make_unique<GibbsSampler>(cfg.hyper, data, cfg.sampler);
  }
  PosteriorSummary post = sampler->run();
  ensure_dir(out_dir);
  std::ofstream ck(ckpt_path);
  sampler->save_checkpoint(ck);
  write_posterior_csvs(out_dir + "/posterior", post);
  return post;
}

std::vector<double> observed_cells_truth(const CountData& data) {
  std::vector<double> t;
  for (int v = 0; v < data.V(); ++v)
    for (int tt = 0; tt < data.T(); ++tt)
      if (data.mask(v, tt)) t.push_back(static_cast<double>(data.counts(v, tt)));
  return t;
}

std::vector<double> observed_cells_pred(const CountData& data, const Grid<double>& rate) {
  std::vector<double> p;
  for (int v = 0; v < data.V(); ++v)
    for (int tt = 0; tt < data.T(); ++tt)
      if (data.mask(v, tt)) p.push_back(rate(v, tt));
  return p;
}

}  // namespace

void cmd_generate(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("missing output dir (--out)");
  ensure_dir(cfg.out_dir);
  const Dims dims = Dims::make(cfg.V, cfg.T, cfg.hyper.K,
                               cfg.hyper.chain == ChainKind::Static ? cfg.T
                                                                    : cfg.hyper.M);
  auto [state, data] = generate_synthetic(cfg.hyper, dims, cfg.sampler.seed);
  io::save_counts_csv(cfg.out_dir + "/counts.csv", data.counts);
  write_state_csvs(cfg.out_dir + "/truth", state);
  write_manifest(cfg, "generate");
}

std::string cmd_fit(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("missing output dir (--out)");
  ensure_dir(cfg.out_dir);
  const CountData data = load_data(cfg);
  const PosteriorSummary post = fit_and_save(cfg, data, cfg.out_dir);

  std::vector<io::MetricsRow> rows;
  const std::string chain = chain_name(cfg.hyper.chain);
  const auto truth = observed_cells_truth(data);
  const auto pred = observed_cells_pred(data, post.rate_mean);
  const Metrics m = compute_metrics(truth, pred);
  rows.push_back({"fit", chain, cfg.sampler.seed, "train_mae", m.mae});
  rows.push_back({"fit", chain, cfg.sampler.seed, "train_mre", m.mre});
  if (post.n_retained > 0) {
    double ll_mean = 0.0;
    for (const auto& s : post.retained) ll_mean += log_likelihood(s, data);
    ll_mean /= static_cast<double>(post.retained.size());
    rows.push_back({"fit", chain, cfg.sampler.seed, "train_loglik", ll_mean});
  }
  const std::string csv = io::metrics_csv(rows);
  io::write_text_file(cfg.out_dir + "/metrics.csv", csv);
  write_manifest(cfg, "fit");
  return csv;
}

std::string cmd_smooth(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("missing output dir (--out)");
  TaskSpec task;
  task.kind = TaskSpec::Kind::Smoothing;
  task.mask_fraction = cfg.mask_fraction;
  task.seeds = {cfg.sampler.seed};
  task.validate();
  ensure_dir(cfg.out_dir);
  CountData truth_data = load_data(cfg);
  CountData masked =
      mask_for_smoothing(truth_data.counts, cfg.mask_fraction, cfg.sampler.seed);
  io::save_mask_csv(cfg.out_dir + "/mask.csv", masked.mask);

  const PosteriorSummary post = fit_and_save(cfg, masked, cfg.out_dir);
  const auto cells = masked_cells(masked);
  const auto pred = smooth_predict(post, masked);
  std::vector<double> truth(cells.size());
  for (size_t i = 0; i < cells.size(); ++i)
    truth[i] = static_cast<double>(truth_data.counts(cells[i].v, cells[i].t));
  const Metrics m = compute_metrics(truth, pred);

  std::vector<io::MetricsRow> rows;
  const std::string chain = chain_name(cfg.hyper.chain);
  rows.push_back({"smooth", chain, cfg.sampler.seed, "mae", m.mae});
  rows.push_back({"smooth", chain, cfg.sampler.seed, "mre", m.mre});
  rows.push_back({"smooth", chain, cfg.sampler.seed, "n_masked",
                  static_cast<double>(cells.size())});
  const std::string csv = io::metrics_csv(rows);
  io::write_text_file(cfg.out_dir + "/metrics.csv", csv);
  write_manifest(cfg, "smooth");
  return csv;
}

std::string cmd_forecast(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("missing output dir (--out)");
  TaskSpec task;
  task.kind = TaskSpec::Kind::Forecasting;
  task.horizon = cfg.forecast_steps;
  task.seeds = {cfg.sampler.seed};
  task.validate();
  ensure_dir(cfg.out_dir);
  const CountData full = load_data(cfg);
  const int S = task.horizon;
  if (full.T() <= S)
    throw std::invalid_argument("forecast: need more time steps than the horizon");
  const int T_train = full.T() - S;

  Grid<int64_t> train(full.V(), T_train);
  for (int v = 0; v < full.V(); ++v)
    for (int t = 0; t < T_train; ++t) train(v, t) = full.counts(v, t);
  const CountData train_data = CountData::fully_observed(std::move(train));

  const PosteriorSummary post = fit_and_save(cfg, train_data, cfg.out_dir);
  Hyperparameters h = cfg.hyper;
  if (h.chain == ChainKind::Static) h.M = T_train;
  const Dims dims = Dims::make(full.V(), T_train, h.K, h.M);
  const Grid<double> pred = forecast(post, dims, S);
  io::save_matrix_csv(cfg.out_dir + "/forecast.csv", pred);

  std::vector<double> truth, phat;
  for (int v = 0; v < full.V(); ++v)
    for (int s = 0; s < S; ++s) {
      truth.push_back(static_cast<double>(full.counts(v, T_train + s)));
      phat.push_back(pred(v, s));
    }
  const Metrics m = compute_metrics(truth, phat);

  std::vector<io::MetricsRow> rows;
  const std::string chain = chain_name(cfg.hyper.chain);
  rows.push_back({"forecast", chain, cfg.sampler.seed, "mae", m.mae});
  rows.push_back({"forecast", chain, cfg.sampler.seed, "mre", m.mre});
  rows.push_back({"forecast", chain, cfg.sampler.seed, "horizon",
                  static_cast<double>(S)});
  const std::string csv = io::metrics_csv(rows);
  io::write_text_file(cfg.out_dir + "/metrics.csv", csv);
  write_manifest(cfg, "forecast");
  return csv;
}

void cmd_report(const RunConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("missing output dir (--out)");
  if (!cfg.emit_svg) return;  // plots are opt-in
  const std::string post_dir = cfg.out_dir + "/posterior";
  const std::string rep_dir = cfg.out_dir + "/report";
  ensure_dir(rep_dir);
  for (int i = 0;; ++i) {
    const std::string path = post_dir + "/pi_mean_" + two_digits(i) + ".csv";
    if (!fs::exists(path)) break;
    const Grid<double> pi = io::load_matrix_csv(path);
    io::write_heatmap_svg(rep_dir + "/pi_interval_" + two_digits(i) + ".svg", pi,
                          "transition matrix, interval " + std::to_string(i + 1));
  }
}

}  // namespace nspgds::pipeline
