#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "quantnet/cli.hpp"
#include "quantnet/io.hpp"

namespace {

using namespace quantnet;
using fixtures::vec;
using nlohmann::json;
namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "quantnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("quantnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

// One generated instance shared by the CLI tests.
const TempDir& instance_dir() {
  static const TempDir dir;
  static const bool made = [] {
    const auto r = cli_run({"generate", "--seed", "1", "--M", "6", "--states", "3", "--inputs", "2", "--horizon", "5",
                            "-o", dir.path().string()});
    return r.code == 0;
  }();
  EXPECT_TRUE(made);
  return dir;
}

TEST(Json, QpRoundTrip) {
  const auto& s = fixtures::seeded();
  const json j = qp_to_json(s.condensed.qp, s.condensed.constant_offset, s.ref.x_star);
  EXPECT_EQ(j.at("schema"), kSchemaVersion);
  const QpDocument doc = qp_from_json(json::parse(j.dump()));
  EXPECT_EQ(doc.constant_offset, s.condensed.constant_offset);
  ASSERT_TRUE(doc.x_star);
  EXPECT_EQ(*doc.x_star, s.ref.x_star);
  EXPECT_EQ(doc.qp.global_hessian(), s.condensed.qp.global_hessian());
  EXPECT_EQ(doc.qp.global_box().lower, s.condensed.qp.global_box().lower);
  EXPECT_EQ(qp_to_json(doc.qp, doc.constant_offset, *doc.x_star).dump(), j.dump());
}

TEST(Json, MpcRoundTrip) {
  const auto& mpc = fixtures::seeded().mpc;
  const json j = mpc_to_json(mpc);
  EXPECT_EQ(mpc_to_json(mpc_from_json(json::parse(j.dump()))).dump(), j.dump());
}

TEST(Json, RejectsUnknownAndMissingFields) {
  const auto& s = fixtures::seeded();
  json j = qp_to_json(s.condensed.qp);
  json extra = j;
  extra["surprise"] = 1;
  EXPECT_QN_ERROR(qp_from_json(extra), ErrorCode::kParseError);
  json wrong = j;
  wrong["schema"] = "2";
  EXPECT_QN_ERROR(qp_from_json(wrong), ErrorCode::kParseError);
  json missing = j;
  missing.erase("schema");
  EXPECT_QN_ERROR(qp_from_json(missing), ErrorCode::kParseError);
  json m = mpc_to_json(s.mpc);
  m["subsystems"][0]["extra"] = 0;
  EXPECT_QN_ERROR(mpc_from_json(m), ErrorCode::kParseError);
  EXPECT_QN_ERROR(read_json_file("/nonexistent/dir/file.json"), ErrorCode::kIo);
}

TEST(TraceCsv, RoundTrip) {
  const auto& s = fixtures::seeded();
  const auto t = run_exact(s.condensed.qp, s.constants, Variant::kApgm, initial_point(s.condensed.qp), 30, s.ref);
  const TraceTable back = parse_trace_csv(trace_csv(t));
  EXPECT_EQ(back.variant, "exact-apgm");
  ASSERT_EQ(back.records.size(), t.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(back.records[i].err, t.records[i].err);
    EXPECT_EQ(back.records[i].theorem_bound, t.records[i].theorem_bound);
    EXPECT_EQ(back.records[i].k, static_cast<int>(i));
  }
}

TEST(TraceCsv, MalformedInputs) {
  const std::string header = "# schema: 1\n# variant: pgm\nk,err,theorem_bound,e_norm,e_bound_lemma,eps_sqrt,"
                             "eps_bound_lemma,bits_cum,saturated\n";
  const std::string row = "0,1,1,0,0,0,0,0,0\n";
  EXPECT_NO_THROW(parse_trace_csv(header + row));
  EXPECT_QN_ERROR(parse_trace_csv(""), ErrorCode::kMalformedTrace);
  EXPECT_QN_ERROR(parse_trace_csv(header), ErrorCode::kMalformedTrace);
  EXPECT_QN_ERROR(parse_trace_csv(header + "0,1,1\n"), ErrorCode::kMalformedTrace);
  EXPECT_QN_ERROR(parse_trace_csv(header + "0,abc,1,0,0,0,0,0,0\n"), ErrorCode::kMalformedTrace);
  EXPECT_QN_ERROR(parse_trace_csv("# schema: 9\n" + header.substr(header.find('\n') + 1) + row),
                  ErrorCode::kMalformedTrace);
}

TEST(FitRate, RecoversGeometricRate) {
  std::vector<double> e;
  for (int k = 0; k < 100; ++k) e.push_back(3.0 * std::pow(0.9, k));
  EXPECT_NEAR(fit_rate(e), 0.9, 1e-12);
  // transient in the first half is ignored
  for (int k = 0; k < 50; ++k) e[k] *= 1.0 + 0.5 * std::sin(k);
  EXPECT_NEAR(fit_rate(e), 0.9, 1e-12);
  std::vector<double> floored{1.0, 0.5, 0.25, 1e-13, 1e-14, 1e-15};
  EXPECT_QN_ERROR(fit_rate(floored), ErrorCode::kSeriesTooShort);
  EXPECT_QN_ERROR(fit_rate(std::vector<double>{1.0, 0.5}), ErrorCode::kSeriesTooShort);
}

TEST(Cli, GenerateIsDeterministic) {
  const TempDir a, b;
  for (const auto* d : {&a, &b}) {
    const auto r = cli_run({"generate", "--seed", "7", "--M", "6", "--states", "2", "--inputs", "2", "--horizon", "5",
                            "-o", d->path().string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
  }
  for (const char* f : {"mpc.json", "qp.json"}) {
    ASSERT_TRUE(fs::exists(a.path() / f));
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f));
  }
  const json qp = read_json_file(a.path() / "qp.json");
  EXPECT_TRUE(qp.contains("x_star"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli_run({"generate", "--M", "1"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"design"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"run", "--variant", "pgm"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"run", "--instance", instance_dir() / "qp.json", "--variant", "sgd"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"run", "--instance", instance_dir() / "qp.json", "--variant", "pgm"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"compare", "only-one.csv"}).code, cli::kUsage);
  EXPECT_EQ(cli_run({"run", "--instance", "/nonexistent.json", "--variant", "exact-pgm"}).code, cli::kFailure);
}

TEST(Cli, DesignReportsBothVariants) {
  const auto r = cli_run({"design", "--instance", instance_dir() / "qp.json"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("schema"), "1");
  EXPECT_NEAR(j.at("1-gamma").get<double>(), 1 - j.at("gamma").get<double>(), 1e-15);
  for (const char* v : {"pgm", "apgm"}) {
    const auto& sec = j.at(v);
    ASSERT_TRUE(sec.at("n_min").is_number_integer()) << v;
    const auto& rows = sec.at("per_n");
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0].at("n"), sec.at("n_min"));
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_LE(rows[i].at("C_alpha").get<double>(), rows[i - 1].at("C_alpha").get<double>());
      EXPECT_LE(rows[i].at("C_beta").get<double>(), rows[i - 1].at("C_beta").get<double>());
    }
  }
  EXPECT_EQ(cli_run({"design", "--instance", instance_dir() / "qp.json", "--kappa-pgm", "0.1"}).code, cli::kFailure);
}

TEST(Cli, DesignOnUnitConditionInstance) {
  const TempDir d;
  const DistributedQP qp = fixtures::single_block(Eigen::MatrixXd::Identity(2, 2), vec({0.5, -0.5}), -1, 1);
  write_json_file(d / "qp.json", qp_to_json(qp));
  const auto r = cli_run({"design", "--instance", d / "qp.json"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json j = json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("gamma").get<double>(), 1.0);
  EXPECT_EQ(j.at("pgm").at("rate_constant").get<double>(), 0.0);
  EXPECT_TRUE(j.at("pgm").at("n_min").is_null());
  EXPECT_TRUE(j.at("pgm").contains("error"));
}

TEST(Cli, ExactRunOnTrivialInstanceDecreases) {
  const TempDir d;
  const DistributedQP qp = fixtures::single_block(Eigen::MatrixXd::Identity(2, 2), vec({0.5, -0.5}), -1, 1);
  write_json_file(d / "qp.json", qp_to_json(qp));
  const auto r = cli_run({"run", "--instance", d / "qp.json", "--variant", "exact-pgm", "--iters", "3"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto t = parse_trace_csv(r.out);
  // gamma = 1: the first step lands on the optimum
  EXPECT_GT(t.records[0].err, 0.0);
  EXPECT_EQ(t.records[1].err, 0.0);
}

TEST(Cli, DesignedRunsKeepTheirGuarantee) {
  const TempDir d;
  for (const char* v : {"pgm", "apgm"}) {
    const auto r = cli_run({"run", "--instance", instance_dir() / "qp.json", "--variant", v, "--auto-design", "--iters",
                            "150", "--out", d / (std::string(v) + ".csv"), "--ledger", d / (std::string(v) + "_bits.csv")});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    const auto t = read_trace_csv(d / (std::string(v) + ".csv"));
    for (const auto& rec : t.records) EXPECT_FALSE(rec.saturated);
    EXPECT_TRUE(fs::exists(d / (std::string(v) + "_bits.csv")));
  }
  const auto bad = cli_run({"run", "--instance", instance_dir() / "qp.json", "--variant", "pgm", "--auto-design",
                            "--c-alpha", "1"});
  EXPECT_EQ(bad.code, cli::kUsage);
}

TEST(Cli, ConfigFileAndOverrides) {
  const TempDir d;
  write_json_file(d / "cfg.json", json{{"schema", "1"},
                                       {"instance", instance_dir() / "qp.json"},
                                       {"variant", "exact-apgm"},
                                       {"iters", 7}});
  const auto r = cli_run({"run", "--config", d / "cfg.json"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(parse_trace_csv(r.out).records.size(), 8u);
  EXPECT_EQ(parse_trace_csv(r.out).variant, "exact-apgm");
  const auto over = cli_run({"run", "--config", d / "cfg.json", "--iters", "3", "--variant", "exact-pgm"});
  ASSERT_EQ(over.code, cli::kOk) << over.err;
  EXPECT_EQ(parse_trace_csv(over.out).records.size(), 4u);
  EXPECT_EQ(parse_trace_csv(over.out).variant, "exact-pgm");
  write_json_file(d / "bad.json", json{{"instance", instance_dir() / "qp.json"}, {"colour", "red"}});
  EXPECT_EQ(cli_run({"run", "--config", d / "bad.json", "--variant", "exact-pgm"}).code, cli::kFailure);
}

TEST(Cli, ExplicitParamsOutsideDesignStillRun) {
  // undersized intervals saturate but are not designer-produced, so exit 0
  const auto r = cli_run({"run", "--instance", instance_dir() / "qp.json", "--variant", "pgm", "--bits", "3",
                          "--c-alpha", "1e-4", "--c-beta", "1e-4", "--iters", "20"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  int saturated = 0;
  for (const auto& rec : parse_trace_csv(r.out).records) saturated += rec.saturated;
  EXPECT_GT(saturated, 0);
}

TEST(Cli, CompareRatesAndOrdering) {
  const TempDir d;
  for (const char* v : {"exact-pgm", "exact-apgm", "pgm"}) {
    std::vector<std::string> args{"run", "--instance", instance_dir() / "qp.json", "--variant", v, "--iters", "300",
                                  "--out", d / (std::string(v) + ".csv")};
    if (std::string(v) == "pgm") args.push_back("--auto-design");
    ASSERT_EQ(cli_run(args).code, cli::kOk);
  }
  fs::copy_file(d / "exact-pgm.csv", d / "copy.csv");
  auto r = cli_run({"compare", d / "exact-pgm.csv", d / "copy.csv"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  json j = json::parse(r.out);
  EXPECT_EQ(j.at("traces")[0].at("fitted_rate"), j.at("traces")[1].at("fitted_rate"));
  EXPECT_TRUE(j.at("ordering").is_null());

  r = cli_run({"compare", d / "exact-pgm.csv", d / "exact-apgm.csv", "--out", d / "cmp.json"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  j = read_json_file(d / "cmp.json");
  EXPECT_TRUE(j.at("ordering").at("apgm_faster").get<bool>());
  EXPECT_LE(j.at("ordering").at("apgm_rate").get<double>(), j.at("ordering").at("pgm_rate").get<double>());
  for (const auto& t : j.at("traces")) EXPECT_EQ(t.at("envelope_violations"), 0);

  r = cli_run({"compare", d / "pgm.csv", d / "exact-pgm.csv"});
  j = json::parse(r.out);
  const json design = json::parse(cli_run({"design", "--instance", instance_dir() / "qp.json"}).out);
  EXPECT_LE(j.at("traces")[0].at("fitted_rate").get<double>(), design.at("pgm").at("kappa").get<double>() + 0.02);
  EXPECT_GT(j.at("traces")[0].at("total_bits").get<std::int64_t>(), 0);

  std::ofstream(d / "junk.csv") << "not a trace\n";
  EXPECT_EQ(cli_run({"compare", d / "junk.csv", d / "copy.csv"}).code, cli::kFailure);
}

}  // namespace
