#include "quantnet/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "quantnet/algorithms.hpp"
#include "quantnet/constants.hpp"
#include "quantnet/design.hpp"
#include "quantnet/error.hpp"
#include "quantnet/io.hpp"
#include "quantnet/mpc.hpp"

namespace quantnet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kViolationTolerance = 1e-9;

void setup_logging() {
  auto logger = spdlog::get("quantnet");
  if (!logger) logger = spdlog::stderr_logger_mt("quantnet");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("QUANTNET_LOG");
  const std::string level = env ? env : "error";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    spdlog::set_level(spdlog::level::err);
  }
}

struct GenerateArgs {
  GeneratorOptions gen;
  std::string out_dir = ".";
};

struct DesignArgs {
  std::string instance;
  std::optional<double> kappa_pgm;
  std::optional<double> kappa_apgm;
  int extra_bits = 10;
  std::string out;
};

struct RunArgs {
  std::string instance;
  std::string config;
  std::string variant = "pgm";
  std::optional<double> kappa;
  std::optional<int> bits;
  std::optional<double> c_alpha;
  std::optional<double> c_beta;
  bool auto_design = false;
  int iters = 300;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  std::string ledger;
};

struct CompareArgs {
  std::vector<std::string> traces;
  std::string out;
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
  f << text;
}

struct LoadedInstance {
  QpDocument doc;
  ProblemConstants constants;
  Reference ref;
};

LoadedInstance load_instance(const std::string& path) {
  QpDocument doc = qp_from_json(read_json_file(path));
  ProblemConstants constants = compute_constants(doc.qp);
  Reference ref;
  if (doc.x_star) {
    ref.x_star = *doc.x_star;
    ref.kkt_residual = kkt_residual(doc.qp, ref.x_star);
    ref.objective = doc.qp.objective(ref.x_star);
  } else {
    ref = solve_reference(doc.qp, constants);
  }
  return {std::move(doc), constants, std::move(ref)};
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const MpcInstance mpc = random_instance(a.gen);
  const CondensedQP c = condense(mpc);
  const ProblemConstants constants = compute_constants(c.qp);
  const Reference ref = solve_reference(c.qp, constants);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  write_json_file(dir / "mpc.json", mpc_to_json(mpc));
  write_json_file(dir / "qp.json", qp_to_json(c.qp, c.constant_offset, ref.x_star));
  out << (dir / "mpc.json").string() << '\n' << (dir / "qp.json").string() << '\n';
  return kOk;
}

json design_section(Variant v, const DesignInputs& base, std::optional<double> kappa, int extra_bits) {
  DesignInputs in = base;
  in.kappa = kappa.value_or(default_kappa(v, in.constants.gamma));
  json section = {{"kappa", in.kappa}, {"rate_constant", rate_constant(v, in.constants.gamma)}};
  try {
    const DesignResult r = design(v, in, extra_bits);
    json body = design_to_json(r);
    section["n_min"] = body["n_min"];
    section["per_n"] = body["per_n"];
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInadmissibleKappa) throw;
    section["n_min"] = nullptr;
    section["per_n"] = json::array();
    section["error"] = e.what();
  }
  return section;
}

int cmd_design(const DesignArgs& a, std::ostream& out) {
  const LoadedInstance inst = load_instance(a.instance);
  const auto& qp = inst.doc.qp;
  const DesignInputs base = make_design_inputs(qp, inst.constants, 0.5, initial_point(qp), inst.ref.x_star);
  const double g = inst.constants.gamma;
  json j = {{"schema", kSchemaVersion},
            {"gamma", g},
            {"1-gamma", rate_constant(Variant::kPgm, g)},
            {"sqrt(1-sqrt(gamma))", rate_constant(Variant::kApgm, g)},
            {"sigma_f", inst.constants.sigma_f},
            {"L", inst.constants.L},
            {"L_max", inst.constants.L_max},
            {"R", base.R},
            {"phi_gap", base.phi_gap},
            {"M", base.num_subsystems},
            {"d", base.degree},
            {"m_bar", base.max_local_dim}};
  j["pgm"] = design_section(Variant::kPgm, base, a.kappa_pgm, a.extra_bits);
  j["apgm"] = design_section(Variant::kApgm, base, a.kappa_apgm, a.extra_bits);
  emit(out, a.out, j.dump(2) + "\n");
  return kOk;
}

// Fields of the --config file; command-line flags take precedence.
void apply_config(RunArgs& a, const json& j, const CLI::App& app) {
  static const std::vector<std::string> known{"schema", "instance", "variant", "kappa",   "bits",  "C_alpha",
                                              "C_beta", "auto_design", "iters", "seed", "threads", "out"};
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::kParseError, "config: unknown field '" + key + "'");
    }
  }
  if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
    throw Error(ErrorCode::kParseError, "config: unsupported schema");
  }
  auto given = [&app](const char* flag) { return app.count(flag) > 0; };
  try {
    if (j.contains("instance") && !given("--instance")) a.instance = j.at("instance").get<std::string>();
    if (j.contains("variant") && !given("--variant")) a.variant = j.at("variant").get<std::string>();
    if (j.contains("kappa") && !given("--kappa")) a.kappa = j.at("kappa").get<double>();
    if (j.contains("bits") && !given("--bits")) a.bits = j.at("bits").get<int>();
    if (j.contains("C_alpha") && !given("--c-alpha")) a.c_alpha = j.at("C_alpha").get<double>();
    if (j.contains("C_beta") && !given("--c-beta")) a.c_beta = j.at("C_beta").get<double>();
    if (j.contains("auto_design") && !given("--auto-design")) a.auto_design = j.at("auto_design").get<bool>();
    if (j.contains("iters") && !given("--iters")) a.iters = j.at("iters").get<int>();
    if (j.contains("seed") && !given("--seed")) a.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("threads") && !given("--threads")) a.threads = j.at("threads").get<int>();
    if (j.contains("out") && !given("--out")) a.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
}

int cmd_run(RunArgs a, const CLI::App& app, std::ostream& out, std::ostream& err) {
  if (!a.config.empty()) apply_config(a, read_json_file(a.config), app);
  if (a.instance.empty()) {
    err << "run: --instance is required\n";
    return kUsage;
  }
  static const std::vector<std::string> variants{"pgm", "apgm", "exact-pgm", "exact-apgm"};
  if (std::find(variants.begin(), variants.end(), a.variant) == variants.end()) {
    err << "run: --variant must be one of pgm, apgm, exact-pgm, exact-apgm\n";
    return kUsage;
  }
  if (a.auto_design && (a.c_alpha || a.c_beta)) {
    err << "run: --auto-design computes the intervals; drop --c-alpha/--c-beta\n";
    return kUsage;
  }

  const LoadedInstance inst = load_instance(a.instance);
  const auto& qp = inst.doc.qp;
  RunConfig cfg;
  cfg.algorithm = parse_algorithm(a.variant);
  cfg.max_iterations = a.iters;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  const Variant variant = variant_of(cfg.algorithm);
  bool designed = false;

  if (is_quantized(cfg.algorithm)) {
    cfg.kappa = a.kappa.value_or(default_kappa(variant, inst.constants.gamma));
    if (a.auto_design) {
      const DesignInputs in = make_design_inputs(qp, inst.constants, cfg.kappa, initial_point(qp), inst.ref.x_star);
      const Coefficients coeffs = coefficients(variant, in);
      cfg.bits = a.bits.value_or(min_bits(coeffs));
      const auto iv = min_intervals(coeffs, cfg.bits);
      if (!iv) throw Error(ErrorCode::kNoFeasibleBits, std::to_string(cfg.bits) + " bits admit no feasible intervals");
      cfg.C_alpha = iv->C_alpha;
      cfg.C_beta = iv->C_beta;
      designed = true;
      spdlog::info("designed n = {}, C_alpha = {:.6g}, C_beta = {:.6g}", cfg.bits, cfg.C_alpha, cfg.C_beta);
    } else {
      if (!a.bits || !a.c_alpha || !a.c_beta) {
        err << "run: quantized variants need --bits, --c-alpha and --c-beta, or --auto-design\n";
        return kUsage;
      }
      cfg.bits = *a.bits;
      cfg.C_alpha = *a.c_alpha;
      cfg.C_beta = *a.c_beta;
    }
  }

  const RunTrace trace = run(qp, inst.constants, cfg, inst.ref);
  for (const auto& note : trace.notes) spdlog::info("{}", note);
  emit(out, a.out, trace_csv(trace));
  if (!a.ledger.empty()) {
    std::ofstream f(a.ledger);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + a.ledger);
    trace.ledger.write_csv(f);
  }

  if (designed) {
    const int sat = trace.saturation_count();
    const int viol = trace.envelope_violations(kViolationTolerance);
    if (sat > 0 || viol > 0 || !trace.mids_consistent) {
      err << "run: designed configuration broke its guarantee (" << sat << " saturated rows, " << viol
          << " envelope violations)\n";
      return kGuaranteeViolated;
    }
  }
  return kOk;
}

bool pgm_family(const std::string& v) { return v == "pgm" || v == "exact-pgm" || v == "inexact-pgm"; }
bool apgm_family(const std::string& v) { return v == "apgm" || v == "exact-apgm" || v == "inexact-apgm"; }

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  json rows = json::array();
  std::optional<std::pair<std::string, double>> pgm;
  std::optional<std::pair<std::string, double>> apgm;
  for (const auto& path : a.traces) {
    const TraceTable t = read_trace_csv(path);
    std::vector<double> errs;
    int violations = 0;
    int saturated = 0;
    for (const auto& r : t.records) {
      errs.push_back(r.err);
      if (r.err > r.theorem_bound * (1.0 + kViolationTolerance)) ++violations;
      if (r.saturated) ++saturated;
    }
    json row = {{"path", path},
                {"variant", t.variant},
                {"iterations", t.records.back().k},
                {"final_err", t.records.back().err},
                {"envelope_violations", violations},
                {"saturated_rows", saturated},
                {"total_bits", t.records.back().bits_cum}};
    try {
      const double rate = fit_rate(errs);
      row["fitted_rate"] = rate;
      if (pgm_family(t.variant) && !pgm) pgm.emplace(path, rate);
      if (apgm_family(t.variant) && !apgm) apgm.emplace(path, rate);
    } catch (const Error& e) {
      row["fitted_rate"] = nullptr;
      row["fit_error"] = e.what();
    }
    rows.push_back(std::move(row));
  }
  json j = {{"schema", kSchemaVersion}, {"traces", std::move(rows)}};
  if (pgm && apgm) {
    j["ordering"] = {{"pgm", pgm->first},
                     {"apgm", apgm->first},
                     {"pgm_rate", pgm->second},
                     {"apgm_rate", apgm->second},
                     {"apgm_faster", apgm->second < pgm->second}};
  } else {
    j["ordering"] = nullptr;
  }
  emit(out, a.out, j.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  setup_logging();
  CLI::App app{"Distributed QP solver with progressively refined quantized communication", "quantnet"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "generate a seeded MPC instance and its condensed QP");
  g->add_option("--seed", gen.gen.seed, "random seed");
  g->add_option("--M", gen.gen.num_subsystems, "number of subsystems")->check(CLI::Range(2, 100000));
  g->add_option("--states", gen.gen.states, "states per subsystem")->check(CLI::PositiveNumber);
  g->add_option("--inputs", gen.gen.inputs, "inputs per subsystem")->check(CLI::PositiveNumber);
  g->add_option("--horizon", gen.gen.horizon, "prediction horizon")->check(CLI::PositiveNumber);
  g->add_option("--density", gen.gen.edge_density, "probability of each extra edge")->check(CLI::Range(0.0, 1.0));
  g->add_option("--active", gen.gen.target_active_fraction,
                "scale initial states until this share of optimal inputs is on a bound (0 disables)")
      ->check(CLI::Range(0.0, 1.0));
  g->add_option("-o,--out", gen.out_dir, "output directory");

  DesignArgs des;
  auto* d = app.add_subcommand("design", "minimal bits and quantization intervals for both variants");
  d->add_option("--instance", des.instance, "QP JSON")->required();
  d->add_option("--kappa-pgm", des.kappa_pgm, "PGM interval contraction (default: admissible midpoint)");
  d->add_option("--kappa-apgm", des.kappa_apgm, "APGM interval contraction (default: admissible midpoint)");
  d->add_option("--extra-bits", des.extra_bits, "rows beyond n_min")->check(CLI::NonNegativeNumber);
  d->add_option("--out", des.out, "output file (default stdout)");

  RunArgs ra;
  auto* r = app.add_subcommand("run", "run one algorithm variant and write its trace CSV");
  r->add_option("--instance", ra.instance, "QP JSON");
  r->add_option("--config", ra.config, "JSON file with run settings");
  r->add_option("--variant", ra.variant, "pgm, apgm, exact-pgm or exact-apgm");
  r->add_option("--kappa", ra.kappa, "interval contraction");
  r->add_option("--bits", ra.bits, "bits per scalar")->check(CLI::Range(1, 62));
  r->add_option("--c-alpha", ra.c_alpha, "initial variable interval");
  r->add_option("--c-beta", ra.c_beta, "initial gradient interval");
  r->add_flag("--auto-design", ra.auto_design, "take bits and intervals from the designer");
  r->add_option("--iters", ra.iters, "iterations")->check(CLI::NonNegativeNumber);
  r->add_option("--seed", ra.seed, "random seed");
  r->add_option("--threads", ra.threads, "worker threads per round")->check(CLI::PositiveNumber);
  r->add_option("--out", ra.out, "trace CSV (default stdout)");
  r->add_option("--ledger", ra.ledger, "per-edge bit ledger CSV");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "fit rates and summarize two or more traces");
  c->add_option("traces", cmp.traces, "trace CSV files")->required()->expected(2, -1);
  c->add_option("--out", cmp.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (d->parsed()) return cmd_design(des, out);
    if (r->parsed()) return cmd_run(ra, *r, out, err);
    return cmd_compare(cmp, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace quantnet::cli
