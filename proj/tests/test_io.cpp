#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "nspgds/io.hpp"
#include "nspgds/model.hpp"
#include "nspgds/pipeline.hpp"

using namespace nspgds;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nspgds_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("load_counts parses plain matrices") {
  TempDir tmp;
  write(tmp.file("a.csv"), "0,1\n2,3\n");
  const Grid<int64_t> g = io::load_counts(tmp.file("a.csv"));
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 2);
  CHECK(g(0, 0) == 0);
  CHECK(g(0, 1) == 1);
  CHECK(g(1, 0) == 2);
  CHECK(g(1, 1) == 3);
}

TEST_CASE("load_counts skips a non-numeric header row") {
  TempDir tmp;
  write(tmp.file("h.csv"), "name,t1,t2\n4,5,6\n7,8,9\n");
  const Grid<int64_t> g = io::load_counts(tmp.file("h.csv"));
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 3);
  CHECK(g(0, 0) == 4);
  CHECK(g(1, 2) == 9);
}

TEST_CASE("load_counts rejects bad cells with their position") {
  TempDir tmp;
  write(tmp.file("neg.csv"), "0,1\n2,-1\n");
  CHECK_THROWS_WITH_AS(io::load_counts(tmp.file("neg.csv")),
                       doctest::Contains("line 2"), std::runtime_error);

  write(tmp.file("frac.csv"), "0,1\n2,3.5\n");
  CHECK_THROWS_WITH_AS(io::load_counts(tmp.file("frac.csv")),
                       doctest::Contains("column 2"), std::runtime_error);

  write(tmp.file("ragged.csv"), "0,1\n2\n");
  CHECK_THROWS_WITH_AS(io::load_counts(tmp.file("ragged.csv")),
                       doctest::Contains("ragged"), std::runtime_error);

  CHECK_THROWS_AS(io::load_counts(tmp.file("missing.csv")), std::runtime_error);
}

TEST_CASE("counts round-trip through generate, save and load") {
  Hyperparameters h;
  h.K = 2;
  h.M = 3;
  h.epsilon0 = 1.0;
  const Dims dims = Dims::make(5, 9, 2, 3);
  auto [state, data] = generate_synthetic(h, dims, 19);
  TempDir tmp;
  io::save_counts_csv(tmp.file("c.csv"), data.counts);
  const Grid<int64_t> loaded = io::load_counts(tmp.file("c.csv"));
  CHECK(loaded == data.counts);
}

TEST_CASE("mask files round-trip and validate ranges") {
  TempDir tmp;
  write(tmp.file("m.csv"), "# unobserved cells\n0,1\n2,0\n");
  const Grid<uint8_t> mask = io::load_mask(tmp.file("m.csv"), 3, 2);
  CHECK(mask(0, 1) == 0);
  CHECK(mask(2, 0) == 0);
  CHECK(mask(0, 0) == 1);

  Grid<uint8_t> m2(3, 2, 1);
  m2(1, 1) = 0;
  io::save_mask_csv(tmp.file("m2.csv"), m2);
  const Grid<uint8_t> back = io::load_mask(tmp.file("m2.csv"), 3, 2);
  CHECK(back == m2);

  write(tmp.file("bad.csv"), "5,0\n");
  CHECK_THROWS_AS(io::load_mask(tmp.file("bad.csv"), 3, 2), std::runtime_error);
}

TEST_CASE("matrix csv round-trips doubles exactly") {
  TempDir tmp;
  Grid<double> m(2, 3);
  m(0, 0) = 1.0 / 3.0;
  m(0, 1) = 1e-15;
  m(0, 2) = 12345.6789012345678;
  m(1, 0) = 0.1;
  m(1, 1) = 2.0;
  m(1, 2) = 1e300;
  io::save_matrix_csv(tmp.file("m.csv"), m);
  const Grid<double> back = io::load_matrix_csv(tmp.file("m.csv"));
  CHECK(back == m);
}

TEST_CASE("config files parse key=value with comments") {
  TempDir tmp;
  write(tmp.file("c.cfg"),
        "# run configuration\nchain = dir-dir\nK=4\nseed=9 # trailing\n\n");
  const auto kv = io::parse_config_file(tmp.file("c.cfg"));
  CHECK(kv.at("chain") == "dir-dir");
  CHECK(kv.at("K") == "4");
  CHECK(kv.at("seed") == "9");

  write(tmp.file("bad.cfg"), "justakey\n");
  CHECK_THROWS_AS(io::parse_config_file(tmp.file("bad.cfg")), std::runtime_error);
}

TEST_CASE("run config applies file values and rejects unknown keys") {
  pipeline::RunConfig cfg;
  pipeline::apply_key_value(cfg, "chain", "pr-gam-dir");
  pipeline::apply_key_value(cfg, "K", "7");
  pipeline::apply_key_value(cfg, "eps_alpha", "0");
  pipeline::apply_key_value(cfg, "iters", "123");
  CHECK(cfg.hyper.chain == ChainKind::PRGamDir);
  CHECK(cfg.hyper.K == 7);
  CHECK(cfg.hyper.eps_alpha == 0.0);
  CHECK(cfg.sampler.iterations == 123);
  CHECK_THROWS_AS(pipeline::apply_key_value(cfg, "nonsense", "1"),
                  std::invalid_argument);
  CHECK_THROWS_AS(pipeline::apply_key_value(cfg, "K", "four"),
                  std::invalid_argument);
}

TEST_CASE("metrics csv has the stable schema") {
  std::vector<io::MetricsRow> rows;
  rows.push_back({"smooth", "dir-dir", 3, "mae", 1.5});
  rows.push_back({"smooth", "dir-dir", 3, "mre", 0.25});
  const std::string csv = io::metrics_csv(rows);
  CHECK(csv ==
        "task,chain,seed,metric,value\n"
        "smooth,dir-dir,3,mae,1.5\n"
        "smooth,dir-dir,3,mre,0.25\n");
}

TEST_CASE("cli pipeline: generate, fit, smooth, forecast, report") {
  TempDir tmp;
  pipeline::RunConfig gen;
  gen.hyper = Hyperparameters{};
  gen.hyper.K = 2;
  gen.hyper.M = 4;
  gen.hyper.gamma0 = 6.0;
  gen.hyper.epsilon0 = 1.0;
  gen.hyper.e0 = 8.0;
  gen.hyper.f0 = 4.0;
  gen.hyper.chain = ChainKind::DirDir;
  gen.V = 5;
  gen.T = 12;
  gen.sampler.seed = 21;
  gen.out_dir = tmp.file("gen");
  pipeline::cmd_generate(gen);
  CHECK(fs::exists(tmp.file("gen") + "/counts.csv"));
  CHECK(fs::exists(tmp.file("gen") + "/truth/theta.csv"));
  CHECK(fs::exists(tmp.file("gen") + "/manifest.txt"));

  pipeline::RunConfig fit = gen;
  fit.data_path = tmp.file("gen") + "/counts.csv";
  fit.out_dir = tmp.file("fit");
  fit.sampler.iterations = 12;
  fit.sampler.burn_in = 4;
  fit.sampler.thin = 2;
  fit.hyper.chain = ChainKind::Static;
  const std::string fit_csv = pipeline::cmd_fit(fit);
  CHECK(fit_csv.find("train_mae") != std::string::npos);
  CHECK(fs::exists(tmp.file("fit") + "/checkpoint.txt"));
  CHECK(fs::exists(tmp.file("fit") + "/posterior/theta_mean.csv"));
  CHECK(fs::exists(tmp.file("fit") + "/metrics.csv"));

  // resuming with the same target is a no-op that rewrites identical outputs
  pipeline::RunConfig refit = fit;
  refit.resume = true;
  const std::string fit_csv2 = pipeline::cmd_fit(refit);
  CHECK(fit_csv2 == fit_csv);

  pipeline::RunConfig smooth = fit;
  smooth.resume = false;
  smooth.out_dir = tmp.file("smooth");
  smooth.mask_fraction = 0.1;
  const std::string s_csv = pipeline::cmd_smooth(smooth);
  CHECK(s_csv.find("smooth,static") != std::string::npos);
  CHECK(s_csv.find("mre") != std::string::npos);

  pipeline::RunConfig fc = fit;
  fc.resume = false;
  fc.out_dir = tmp.file("fc");
  fc.forecast_steps = 2;
  const std::string f_csv = pipeline::cmd_forecast(fc);
  CHECK(f_csv.find("forecast,static") != std::string::npos);
  CHECK(fs::exists(tmp.file("fc") + "/forecast.csv"));

  pipeline::RunConfig rep = fit;
  rep.emit_svg = true;
  pipeline::cmd_report(rep);
  CHECK(fs::exists(tmp.file("fit") + "/report/pi_interval_00.svg"));
}
