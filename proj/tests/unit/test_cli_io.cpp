#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "qvp/commands.hpp"
#include "qvp/dgp.hpp"
#include "qvp/io.hpp"
#include "qvp/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using qvp::RngStream;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("qvp_cli_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string ingestion_message(const std::string& csv) {
  std::istringstream in(csv);
  try {
    qvp::io::parse_csv(in, "data.csv");
  } catch (const qvp::IngestionError& e) {
    return e.what();
  }
  return "";
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

/// All cells of a CSV file as text, header first.
std::vector<std::vector<std::string>> read_cells(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(qvp::io::split_csv_line(line));
  return out;
}

TEST(Numbers, FormatParseRoundTrip) {
  RngStream rng(71);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, 40.0 * rng.uniform() - 20.0);
    double back = 0.0;
    ASSERT_TRUE(qvp::io::parse_double(qvp::io::format_double(v), back));
    ASSERT_EQ(back, v);
  }
  EXPECT_EQ(qvp::io::format_double(0.1), "0.1");
  EXPECT_EQ(qvp::io::format_double(std::nan("")), "nan");
  double v = 0.0;
  EXPECT_TRUE(qvp::io::parse_double(" +2.5 ", v));
  EXPECT_EQ(v, 2.5);
  EXPECT_FALSE(qvp::io::parse_double("2.5x", v));
  EXPECT_FALSE(qvp::io::parse_double("", v));
}

TEST(Ingestion, ParsesQuotedCellsAndBom) {
  std::istringstream in("\xEF\xBB\xBFy,\"x,1\",x2\n1,2,3\n\n4,5,6\n");
  const auto t = qvp::io::parse_csv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"y", "x,1", "x2"}));
  ASSERT_EQ(t.values.rows(), 2);
  EXPECT_EQ(t.values(1, 2), 6.0);
  EXPECT_EQ(t.column("x2"), 2);
  EXPECT_EQ(t.column("1"), 0);
  EXPECT_THROW(t.column("4"), qvp::IngestionError);
  EXPECT_THROW(t.column("z"), qvp::IngestionError);
}

TEST(Ingestion, ErrorsNameRowAndColumn) {
  // The header is row 1, so the first data row is row 2.
  EXPECT_NE(ingestion_message("y,x\n1,2\n3,NA\n").find("missing value at row 3, column 2 ('x')"), std::string::npos);
  EXPECT_NE(ingestion_message("y,x\n1,abc\n").find("non-numeric value 'abc' at row 2, column 2 ('x')"),
            std::string::npos);
  EXPECT_NE(ingestion_message("y,x\n1,2\n1,2,3\n").find("row 3 has 3 cells, header has 2"), std::string::npos);
  EXPECT_NE(ingestion_message("y,x\n1,inf\n").find("row 2, column 2"), std::string::npos);
  EXPECT_NE(ingestion_message("").find("empty file"), std::string::npos);
  EXPECT_NE(ingestion_message("y,x\n").find("no data rows"), std::string::npos);
  EXPECT_NE(ingestion_message("y,,x\n1,2,3\n").find("empty header name in column 2"), std::string::npos);
  EXPECT_THROW(qvp::io::read_csv("/nonexistent/file.csv"), qvp::IngestionError);
}

TEST(Ingestion, ConstantColumnWarnsAndRescales) {
  std::istringstream in("a,y,c\n0,1,7\n5,2,7\n10,3,7\n");
  const auto ing = qvp::io::ingest_table(qvp::io::parse_csv(in), "y");
  EXPECT_EQ(ing.dataset.response_name, "y");
  EXPECT_EQ(ing.dataset.covariate_names, (std::vector<std::string>{"a", "c"}));
  ASSERT_EQ(ing.warnings.size(), 1u);
  EXPECT_NE(ing.warnings[0].find("'c' is constant"), std::string::npos);
  EXPECT_EQ(ing.dataset.x(0, 0), -1.0);
  EXPECT_EQ(ing.dataset.x(1, 0), 0.0);
  EXPECT_EQ(ing.dataset.x(2, 0), 1.0);
  EXPECT_TRUE(ing.dataset.x.col(1).isZero(0.0));
  EXPECT_EQ(ing.dataset.y, (VectorXd(3) << 1, 2, 3).finished());
}

TEST(Scenario, FreeCellsAreNaNAndLevelsValidated) {
  TempDir tmp;
  qvp::io::write_text(tmp.path() / "s.csv", "a,b\n0.9,\n,NA\n0.1,0.5\n");
  const auto s = qvp::io::read_scenario(tmp.path() / "s.csv");
  ASSERT_EQ(s.levels.rows(), 3);
  EXPECT_EQ(s.levels(0, 0), 0.9);
  EXPECT_TRUE(std::isnan(s.levels(0, 1)));
  EXPECT_TRUE(std::isnan(s.levels(1, 0)));
  EXPECT_EQ(s.levels(2, 1), 0.5);
  qvp::io::write_text(tmp.path() / "bad.csv", "a,b\n0.9,1.5\n");
  EXPECT_THROW(qvp::io::read_scenario(tmp.path() / "bad.csv"), qvp::IngestionError);
  qvp::io::write_text(tmp.path() / "empty.csv", "a,b\n");
  EXPECT_THROW(qvp::io::read_scenario(tmp.path() / "empty.csv"), qvp::IngestionError);
}

qvp::PosteriorDraws small_fit(qvp::SamplerKind kind, int chains, std::uint64_t seed) {
  RngStream rng(72);
  qvp::Dataset d = qvp::generate(qvp::dgp_spec(1), 60, 0.0, rng);
  d.rescale();
  qvp::SamplerConfig cfg;
  cfg.chains = chains;
  cfg.burnin = 20;
  cfg.draws = 15;
  cfg.seed = seed;
  return qvp::fit(d, qvp::make_uniform_grid(3), kind, cfg);
}

TEST(Draws, BinaryRoundTripIsExact) {
  TempDir tmp;
  const std::vector<std::string> covs{"x1", "x2", "x3", "x4"};
  for (auto kind : {qvp::SamplerKind::centred, qvp::SamplerKind::noncentred}) {
    const auto d = small_fit(kind, 2, 3);
    qvp::io::write_draws(tmp.path() / "draws", d, covs);
    const auto back = qvp::io::read_draws(tmp.path() / "draws");
    EXPECT_EQ(back.covariate_names, covs);
    EXPECT_EQ(back.draws.kind, d.kind);
    EXPECT_EQ(back.draws.taus, d.taus);
    ASSERT_EQ(back.draws.chains.size(), 2u);
    for (std::size_t h = 0; h < 2; ++h) {
      const auto a = d.chains[h].blocks(), b = back.draws.chains[h].blocks();
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].name, b[i].name);
        EXPECT_TRUE(*a[i].values == *b[i].values) << a[i].name;
      }
    }
    const auto manifest = qvp::io::read_json(tmp.path() / "draws" / "draws.json");
    EXPECT_EQ(manifest["format"], qvp::io::kDrawsFormat);
    const auto& last = manifest["blocks"].back();
    EXPECT_EQ(fs::file_size(tmp.path() / "draws" / "draws.bin"),
              last["offset"].get<std::uint64_t>() + last["columns"].get<std::uint64_t>() * 2 * 15 * 8);
  }
  EXPECT_THROW(qvp::io::write_draws(tmp.path() / "bad", small_fit(qvp::SamplerKind::centred, 1, 3), {"x1"}),
               qvp::ParameterError);
}

TEST(Draws, TruncatedBinaryIsRejected) {
  TempDir tmp;
  qvp::io::write_draws(tmp.path(), small_fit(qvp::SamplerKind::centred, 1, 4), {"a", "b", "c", "d"});
  const std::string bytes = slurp(tmp.path() / "draws.bin");
  qvp::io::write_text(tmp.path() / "draws.bin", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(qvp::io::read_draws(tmp.path()), qvp::IngestionError);
}

TEST(Summary, CsvRoundTripAndLabels) {
  const auto d = small_fit(qvp::SamplerKind::centred, 2, 5);
  const std::vector<std::string> covs{"x1", "x2", "x3", "x4"};
  const auto rows = qvp::io::summarise(d, covs);
  EXPECT_EQ(rows.front().label, "beta[0.25,x1]");
  std::istringstream in(qvp::io::summary_csv(rows));
  const auto back = qvp::io::parse_summary_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].label, rows[i].label);
    EXPECT_EQ(back[i].mean, rows[i].mean);
    EXPECT_EQ(back[i].q975, rows[i].q975);
    EXPECT_TRUE(back[i].conv.rhat == rows[i].conv.rhat ||
                (std::isnan(back[i].conv.rhat) && std::isnan(rows[i].conv.rhat)));
    EXPECT_LE(rows[i].q025, rows[i].q500);
    EXPECT_LE(rows[i].q500, rows[i].q975);
  }
  EXPECT_EQ(qvp::io::sorted_quantile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  std::istringstream bad("parameter,mean\n");
  EXPECT_THROW(qvp::io::parse_summary_csv(bad), qvp::IngestionError);
}

TEST(RunConfig, JsonRoundTripAndUnknownKeys) {
  qvp::RunConfig c;
  c.command = "forecast";
  c.input = "sys.csv";
  c.taus = {0.1, 0.5, 0.9};
  c.seed = 123456789012345ULL;
  c.horizons = {1, 2};
  c.models = {"qvp", "bqr"};
  c.shock_size = 0.25;
  const auto back = qvp::run_config_from_json(qvp::to_json(c));
  EXPECT_EQ(qvp::to_json(back).dump(), qvp::to_json(c).dump());
  c.shock_size = std::numeric_limits<double>::quiet_NaN();
  EXPECT_TRUE(std::isnan(qvp::run_config_from_json(qvp::to_json(c)).shock_size));

  EXPECT_THROW(qvp::run_config_from_json({{"chainz", 3}}), qvp::ParameterError);
  EXPECT_THROW(qvp::run_config_from_json({{"chains", "four"}}), qvp::ParameterError);
  EXPECT_EQ(qvp::run_config_from_json({{"chains", 2}}).burnin, qvp::RunConfig{}.burnin);
}

TEST(RunConfig, ValidationRejectsBadSettings) {
  qvp::RunConfig c;
  c.command = "fit";
  EXPECT_THROW(c.validate(), qvp::ParameterError);  // no input
  c.input = "x.csv";
  EXPECT_NO_THROW(c.validate());
  c.savs = "draws";
  EXPECT_THROW(c.validate(), qvp::ParameterError);  // SAVS needs a non-centred sampler
  c.sampler = "ncqvp";
  EXPECT_NO_THROW(c.validate());
  c.command = "nope";
  EXPECT_THROW(c.validate(), qvp::ParameterError);
  c = {};
  c.command = "simulate";
  c.correlation = 1.0;
  EXPECT_THROW(c.validate(), qvp::ParameterError);
  c = {};
  c.command = "stress";
  c.input = "x.csv";
  EXPECT_THROW(c.validate(), qvp::ParameterError);  // no scenario
  c = {};
  c.command = "fit";
  c.input = "x.csv";
  c.taus = {0.5, 0.2};
  EXPECT_THROW(c.validate(), qvp::ParameterError);
}

TEST(RunConfig, OutputRootFromEnvironment) {
  TempDir tmp;
  ::setenv(qvp::io::kOutputRootVariable, tmp.path().c_str(), 1);
  qvp::RunConfig c;
  c.command = "simulate";
  EXPECT_EQ(qvp::detail::output_dir(c), tmp.path() / "simulate");
  c.output = "elsewhere";
  EXPECT_EQ(qvp::detail::output_dir(c), fs::path("elsewhere"));
  ::unsetenv(qvp::io::kOutputRootVariable);
  EXPECT_EQ(qvp::io::default_output_root(), fs::path("qvp_output"));
}

TEST(ExitCodes, MapErrorKinds) {
  EXPECT_EQ(qvp::exit_code(qvp::IngestionError("x")), 3);
  EXPECT_EQ(qvp::exit_code(qvp::ParameterError("x")), 2);
  EXPECT_EQ(qvp::exit_code(qvp::LevelMismatchError("x")), 2);
  EXPECT_EQ(qvp::exit_code(qvp::UnsupportedInputError("x")), 2);
  EXPECT_EQ(qvp::exit_code(qvp::SamplerError(0, "x")), 4);
  EXPECT_EQ(qvp::exit_code(std::runtime_error("x")), 1);
  EXPECT_EQ(qvp::error_kind(qvp::IngestionError("x")), "ingestion");
  EXPECT_EQ(qvp::error_kind(std::runtime_error("x")), "internal");
}

void write_regression_csv(const fs::path& path) {
  RngStream rng(73);
  const qvp::Dataset d = qvp::generate(qvp::dgp_spec(1), 80, 0.0, rng);
  qvp::io::CsvWriter w({"x1", "x2", "sales", "x3", "x4"});
  for (int t = 0; t < d.rows(); ++t)
    w.row({qvp::io::format_double(10.0 * d.x(t, 0)), qvp::io::format_double(d.x(t, 1)),
           qvp::io::format_double(d.y[t]), qvp::io::format_double(d.x(t, 2) - 5.0),
           qvp::io::format_double(d.x(t, 3))});
  qvp::io::write_text(path, w.str());
}

qvp::RunConfig quick_config(const std::string& command) {
  qvp::RunConfig c;
  c.command = command;
  c.chains = 2;
  c.burnin = 30;
  c.draws = 20;
  c.quantiles = 5;
  c.seed = 9;
  return c;
}

TEST(Commands, FitWritesArtifacts) {
  TempDir tmp;
  write_regression_csv(tmp.path() / "data.csv");
  qvp::RunConfig c = quick_config("fit");
  c.input = (tmp.path() / "data.csv").string();
  c.target = "sales";
  c.output = (tmp.path() / "fit").string();
  std::ostringstream log;
  const fs::path dir = qvp::run(c, log);
  for (const char* f : {"config.json", "summary.csv", "beta_profile.csv", "profile_long.csv", "convergence.json",
                        "qs_by_tau.csv", "metrics.json", "draws/draws.bin", "draws/draws.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  // Q rows plus header; tau and three statistics per covariate.
  const auto profile = qvp::io::read_csv(dir / "beta_profile.csv");
  EXPECT_EQ(profile.values.rows(), 5);
  EXPECT_EQ(profile.values.cols(), 1 + 3 * 4);
  EXPECT_EQ(profile.header[1], "x1_mean");
  for (int q = 0; q < 5; ++q)
    for (int j = 0; j < 4; ++j) {
      EXPECT_LE(profile.values(q, 2 + 3 * j), profile.values(q, 1 + 3 * j));
      EXPECT_LE(profile.values(q, 1 + 3 * j), profile.values(q, 3 + 3 * j));
    }
  const auto metrics = qvp::io::read_json(dir / "metrics.json");
  EXPECT_EQ(metrics["observations"], 80);
  EXPECT_TRUE(metrics.contains("qwqs_right"));
  const auto conv = qvp::io::read_json(dir / "convergence.json");
  EXPECT_EQ(conv["beta_parameters"], 20);
  EXPECT_EQ(qvp::io::read_json(dir / "config.json")["output"], dir.string());

  // The saved draws are on the file's covariate scale: the fitted median at
  // the first observation matches the profile evaluated on raw covariates.
  const auto loaded = qvp::io::read_draws(dir / "draws");
  EXPECT_EQ(loaded.covariate_names, (std::vector<std::string>{"x1", "x2", "x3", "x4"}));
  const auto table = qvp::io::read_csv(tmp.path() / "data.csv");
  MatrixXd raw(table.values.rows(), 4);
  raw << table.values.col(0), table.values.col(1), table.values.col(3), table.values.col(4);
  const MatrixXd qhat = loaded.draws.fitted_quantiles(raw);
  EXPECT_GT((qhat.col(4) - qhat.col(0)).mean(), 0.0);

  // diagnose on the saved draws reproduces the summary.
  qvp::RunConfig dg;
  dg.command = "diagnose";
  dg.input = (dir / "draws").string();
  dg.output = (tmp.path() / "diag").string();
  const fs::path ddir = qvp::run(dg, log);
  EXPECT_EQ(slurp(ddir / "summary.csv"), slurp(dir / "summary.csv"));
}

TEST(Commands, FitRejectsBadInputWithMappedErrors) {
  TempDir tmp;
  qvp::io::write_text(tmp.path() / "bad.csv", "y,x\n1,2\n3,oops\n");
  qvp::RunConfig c = quick_config("fit");
  c.input = (tmp.path() / "bad.csv").string();
  c.output = (tmp.path() / "out").string();
  std::ostringstream log;
  try {
    qvp::run(c, log);
    FAIL() << "expected an ingestion error";
  } catch (const std::exception& e) {
    EXPECT_EQ(qvp::exit_code(e), 3);
    EXPECT_NE(std::string(e.what()).find("row 3, column 2"), std::string::npos);
  }
  c.input = (tmp.path() / "missing.csv").string();
  EXPECT_THROW(qvp::run(c, log), qvp::IngestionError);
  c.target = "nope";
  qvp::io::write_text(tmp.path() / "ok.csv", "y,x\n1,2\n3,4\n");
  c.input = (tmp.path() / "ok.csv").string();
  EXPECT_THROW(qvp::run(c, log), qvp::IngestionError);
}

TEST(Commands, RerunsAreByteIdentical) {
  TempDir tmp;
  write_regression_csv(tmp.path() / "data.csv");
  qvp::RunConfig c = quick_config("fit");
  c.sampler = "ncqvp";
  c.savs = "draws";
  c.input = (tmp.path() / "data.csv").string();
  c.target = "3";
  std::ostringstream log;
  c.output = (tmp.path() / "a").string();
  qvp::run(c, log);
  c.output = (tmp.path() / "b").string();
  qvp::run(c, log);
  for (const char* f : {"summary.csv", "beta_profile.csv", "savs_inclusion.csv", "metrics.json", "draws/draws.bin"})
    EXPECT_EQ(slurp(tmp.path() / "a" / f), slurp(tmp.path() / "b" / f)) << f;
}

TEST(Commands, SimulateWritesTables) {
  TempDir tmp;
  qvp::RunConfig c = quick_config("simulate");
  c.chains = 1;
  c.nsim = 2;
  c.observations = 60;
  c.test_size = 30;
  c.output = tmp.path().string();
  std::ostringstream log;
  const fs::path dir = qvp::run(c, log);
  const auto t1 = read_cells(dir / "table1_crossing.csv");
  EXPECT_EQ(t1[0].back(), "crossing_pct");
  EXPECT_EQ(t1[1][0], "qvp");
  EXPECT_EQ(count_lines(slurp(dir / "table1_crossing.csv")), 1 + 4);
  EXPECT_EQ(count_lines(slurp(dir / "replicates.csv")), 1 + 4 * 2);
  EXPECT_EQ(count_lines(slurp(dir / "qs_by_tau.csv")), 1 + 4 * 5);
  const auto truth = qvp::io::read_csv(dir / "truth.csv");
  EXPECT_EQ(truth.values.rows(), 5);
  EXPECT_EQ(truth.values.cols(), 2 + 4);
  EXPECT_EQ(qvp::io::read_csv(dir / "sample_data.csv").values.rows(), 60);
  const std::string metrics = slurp(dir / "metrics.csv");
  EXPECT_NE(metrics.find("relative_uniform"), std::string::npos);
  c.taus = {0.5};
  EXPECT_THROW(qvp::run(c, log), qvp::ParameterError);
}

void write_system_csv(const fs::path& path, int rows) {
  RngStream rng(74);
  VectorXd c(2);
  c << 0.2, -0.1;
  MatrixXd a(2, 2), l(2, 2);
  a << 0.5, 0.1, 0.2, 0.4;
  l << 1.0, 0.0, 0.3, 0.8;
  const MatrixXd y = qvp::simulate_var1(c, a, l, rows, rng);
  qvp::io::CsvWriter w({"gdp", "spread"});
  for (int t = 0; t < rows; ++t) w.row({qvp::io::format_double(y(t, 0)), qvp::io::format_double(y(t, 1))});
  qvp::io::write_text(path, w.str());
}

TEST(Commands, ForecastWritesAllSchemes) {
  TempDir tmp;
  write_system_csv(tmp.path() / "sys.csv", 50);
  qvp::RunConfig c = quick_config("forecast");
  c.chains = 1;
  c.input = (tmp.path() / "sys.csv").string();
  c.initial = 44;
  c.step = 2;
  c.horizons = {1, 2};
  c.paths = 200;
  c.models = {"qvp", "bqr"};
  c.output = tmp.path().string() + "/fc";
  std::ostringstream log;
  const fs::path dir = qvp::run(c, log);
  const auto t2 = read_cells(dir / "table2.csv");
  EXPECT_EQ(t2[0], (std::vector<std::string>{"model", "variable", "horizon", "origins", "qwqs_uniform", "qwqs_centre",
                                             "qwqs_left", "qwqs_right", "coverage"}));
  // Two models, two horizons, two variables.
  ASSERT_EQ(t2.size(), 1u + 2 * 2 * 2);
  for (std::size_t r = 1; r < t2.size(); ++r)
    for (std::size_t k = 4; k < 9; ++k) {
      double v = 0.0;
      ASSERT_TRUE(qvp::io::parse_double(t2[r][k], v)) << t2[r][k];
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  EXPECT_EQ(t2[1][3], "3");  // origins 44, 46, 48 for horizon 1
  const auto rel = read_cells(dir / "table2_relative.csv");
  ASSERT_EQ(rel.size(), 1u + 8);
  for (std::size_t r = 1; r < rel.size(); ++r) {
    if (rel[r][0] != "bqr") continue;
    for (std::size_t k = 3; k < 7; ++k) EXPECT_EQ(rel[r][k], "1");
  }
  const auto fan = read_cells(dir / "fan.csv");
  EXPECT_EQ(fan.size(), 1u + 2 * 2);
  EXPECT_TRUE(fs::exists(dir / "qs_by_tau.csv"));
}

TEST(Commands, QirfAndStress) {
  TempDir tmp;
  write_system_csv(tmp.path() / "sys.csv", 60);
  std::ostringstream log;
  qvp::RunConfig c = quick_config("qirf");
  c.chains = 1;
  c.input = (tmp.path() / "sys.csv").string();
  c.shock = 2;
  c.responder = 1;
  c.irf_horizon = 4;
  c.output = (tmp.path() / "irf").string();
  const fs::path idir = qvp::run(c, log);
  const auto irf = read_cells(idir / "qirf.csv");
  EXPECT_EQ(irf.size(), 1u + 5 * 5);
  EXPECT_TRUE(fs::exists(idir / "summary_gdp.csv"));
  EXPECT_TRUE(fs::exists(idir / "summary_spread.csv"));
  EXPECT_EQ(qvp::io::read_json(idir / "qirf.json")["shock"], "spread");
  c.shock = 3;
  EXPECT_THROW(qvp::run(c, log), qvp::ParameterError);

  const std::string hi = qvp::io::format_double(5.0 / 6.0);  // top level of the Q = 5 grid
  qvp::io::write_text(tmp.path() / "sc.csv", "gdp,spread\n," + hi + "\n," + hi + "\n,\n");
  qvp::RunConfig s = quick_config("stress");
  s.chains = 1;
  s.input = c.input;
  s.scenario = (tmp.path() / "sc.csv").string();
  s.paths = 300;
  s.output = (tmp.path() / "stress").string();
  const fs::path sdir = qvp::run(s, log);
  EXPECT_EQ(read_cells(sdir / "stress.csv").size(), 1u + 2 * 3 * 2);
  // Off-grid level.
  qvp::io::write_text(tmp.path() / "sc.csv", "gdp,spread\n,0.8\n");
  EXPECT_THROW(qvp::run(s, log), qvp::LevelMismatchError);
  qvp::io::write_text(tmp.path() / "sc.csv", "spread,gdp\n" + hi + ",\n");
  EXPECT_THROW(qvp::run(s, log), qvp::IngestionError);
}

}  // namespace
