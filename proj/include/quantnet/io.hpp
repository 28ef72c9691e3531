#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "quantnet/algorithms.hpp"
#include "quantnet/design.hpp"
#include "quantnet/distributed_qp.hpp"
#include "quantnet/mpc.hpp"

namespace quantnet {

inline constexpr const char* kSchemaVersion = "1";

struct QpDocument {
  DistributedQP qp;
  double constant_offset = 0.0;
  std::optional<Eigen::VectorXd> x_star;
};

// Matrices are nested arrays of rows. Every object rejects unknown keys and a
// schema other than "1" (kParseError).
nlohmann::json qp_to_json(const DistributedQP& qp, double constant_offset = 0.0,
                          const std::optional<Eigen::VectorXd>& x_star = std::nullopt);
QpDocument qp_from_json(const nlohmann::json& j);

nlohmann::json mpc_to_json(const MpcInstance& mpc);
MpcInstance mpc_from_json(const nlohmann::json& j);

nlohmann::json design_to_json(const DesignResult& result);

// Throws kIo / kParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// Trace CSV: two comment lines (# schema, # variant) and the columns
// k,err,theorem_bound,e_norm,e_bound_lemma,eps_sqrt,eps_bound_lemma,bits_cum,saturated
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);

struct TraceTable {
  std::string variant;
  std::vector<IterationRecord> records;
};
// Throws kMalformedTrace on a bad header, column count or number.
TraceTable parse_trace_csv(const std::string& text);
TraceTable read_trace_csv(const std::filesystem::path& path);

// exp(slope) of a least-squares line through log(err) over the last
// `tail_fraction` of the usable prefix. Points below floor_rel * err[0] end the
// usable prefix (they sit on the floating-point floor). Throws kSeriesTooShort
// when fewer than 3 points remain.
double fit_rate(std::span<const double> errors, double tail_fraction = 0.5, double floor_rel = 1e-12);

}  // namespace quantnet
