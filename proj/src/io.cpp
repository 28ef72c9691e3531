#include "quantnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "quantnet/box.hpp"
#include "quantnet/error.hpp"

namespace quantnet {
namespace {

using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) parse_fail(where + ": expected an object");
  std::set<std::string> allowed;
  for (const char* k : required) {
    if (!j.contains(k)) parse_fail(where + ": missing field '" + k + "'");
    allowed.insert(k);
  }
  for (const char* k : optional) allowed.insert(k);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) parse_fail(where + ": unknown field '" + key + "'");
  }
}

void check_schema(const json& j) {
  if (!j.at("schema").is_string() || j.at("schema").get<std::string>() != kSchemaVersion) {
    parse_fail("unsupported schema (expected \"1\")");
  }
}

template <class T>
T get_as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    parse_fail(where + ": " + e.what());
  }
}

json vec_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

VectorXd vec_from(const json& j, const std::string& where) {
  const auto v = get_as<std::vector<double>>(j, where);
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MatrixXd mat_from(const json& j, const std::string& where) {
  const auto rows = get_as<std::vector<std::vector<double>>>(j, where);
  if (rows.empty()) return MatrixXd(0, 0);
  MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) parse_fail(where + ": ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

json edges_json(const Topology& t) {
  json out = json::array();
  for (const auto& [a, b] : t.edges()) out.push_back({a, b});
  return out;
}

Topology topology_from(const json& j, int M) {
  const auto pairs = get_as<std::vector<std::array<int, 2>>>(j, "edges");
  std::vector<Edge> edges;
  for (const auto& p : pairs) edges.emplace_back(p[0], p[1]);
  return Topology::build(M, edges);
}

void check_neighbors(const Topology& t, int i, const json& j) {
  if (get_as<std::vector<int>>(j.at("neighbors"), "neighbors") != t.neighbors(i)) {
    parse_fail("block " + std::to_string(i) + ": neighbors do not match the edge list");
  }
}

const char* const kTraceColumns =
    "k,err,theorem_bound,e_norm,e_bound_lemma,eps_sqrt,eps_bound_lemma,bits_cum,saturated";

}  // namespace

json qp_to_json(const DistributedQP& qp, double constant_offset, const std::optional<VectorXd>& x_star) {
  json j;
  j["schema"] = kSchemaVersion;
  j["M"] = qp.num_subsystems();
  j["edges"] = edges_json(qp.topology());
  json blocks = json::array();
  for (int i = 0; i < qp.num_subsystems(); ++i) {
    blocks.push_back({{"i", i},
                      {"neighbors", qp.topology().neighbors(i)},
                      {"H", mat_json(qp.cost(i).H)},
                      {"h", vec_json(qp.cost(i).h)},
                      {"lower", vec_json(qp.box(i).lower)},
                      {"upper", vec_json(qp.box(i).upper)}});
  }
  j["blocks"] = std::move(blocks);
  j["constant_offset"] = constant_offset;
  if (x_star) j["x_star"] = vec_json(*x_star);
  return j;
}

QpDocument qp_from_json(const json& j) {
  check_keys(j, "qp", {"schema", "M", "edges", "blocks"}, {"constant_offset", "x_star"});
  check_schema(j);
  const int M = get_as<int>(j.at("M"), "M");
  if (M < 1) parse_fail("M must be positive");
  Topology topo = topology_from(j.at("edges"), M);
  const json& blocks = j.at("blocks");
  if (!blocks.is_array() || static_cast<int>(blocks.size()) != M) parse_fail("need one block per subsystem");
  std::vector<SubsystemCost> costs(M);
  std::vector<BoxSet> boxes;
  for (int i = 0; i < M; ++i) {
    const json& b = blocks[i];
    const std::string where = "block " + std::to_string(i);
    check_keys(b, where, {"i", "neighbors", "H", "h", "lower", "upper"});
    if (get_as<int>(b.at("i"), where) != i) parse_fail(where + ": blocks must be listed in order");
    check_neighbors(topo, i, b);
    costs[i] = {mat_from(b.at("H"), where + ".H"), vec_from(b.at("h"), where + ".h")};
    boxes.emplace_back(vec_from(b.at("lower"), where + ".lower"), vec_from(b.at("upper"), where + ".upper"));
  }
  QpDocument doc{DistributedQP::create(std::move(topo), std::move(costs), std::move(boxes)), 0.0, std::nullopt};
  if (j.contains("constant_offset")) doc.constant_offset = get_as<double>(j.at("constant_offset"), "constant_offset");
  if (j.contains("x_star")) {
    doc.x_star = vec_from(j.at("x_star"), "x_star");
    if (doc.x_star->size() != doc.qp.dimension()) parse_fail("x_star has the wrong dimension");
  }
  return doc;
}

json mpc_to_json(const MpcInstance& mpc) {
  json j;
  j["schema"] = kSchemaVersion;
  j["M"] = mpc.num_subsystems();
  j["edges"] = edges_json(mpc.topology);
  j["horizon"] = mpc.horizon;
  json subs = json::array();
  for (int i = 0; i < mpc.num_subsystems(); ++i) {
    const auto& s = mpc.subsystems[i];
    json B = json::array();
    for (const auto& [nb, m] : s.B) B.push_back({{"j", nb}, {"matrix", mat_json(m)}});
    subs.push_back({{"i", i},
                    {"A", mat_json(s.A)},
                    {"B", std::move(B)},
                    {"Q", mat_json(s.Q)},
                    {"R", mat_json(s.R)},
                    {"P", mat_json(s.P)},
                    {"z0", vec_json(s.z0)},
                    {"u_lower", vec_json(s.u_lower)},
                    {"u_upper", vec_json(s.u_upper)}});
  }
  j["subsystems"] = std::move(subs);
  return j;
}

MpcInstance mpc_from_json(const json& j) {
  check_keys(j, "mpc", {"schema", "M", "edges", "horizon", "subsystems"});
  check_schema(j);
  MpcInstance mpc;
  const int M = get_as<int>(j.at("M"), "M");
  if (M < 1) parse_fail("M must be positive");
  mpc.topology = topology_from(j.at("edges"), M);
  mpc.horizon = get_as<int>(j.at("horizon"), "horizon");
  const json& subs = j.at("subsystems");
  if (!subs.is_array() || static_cast<int>(subs.size()) != M) parse_fail("need one entry per subsystem");
  for (int i = 0; i < M; ++i) {
    const json& sj = subs[i];
    const std::string where = "subsystem " + std::to_string(i);
    check_keys(sj, where, {"i", "A", "B", "Q", "R", "P", "z0", "u_lower", "u_upper"});
    if (get_as<int>(sj.at("i"), where) != i) parse_fail(where + ": subsystems must be listed in order");
    MpcSubsystem s;
    s.A = mat_from(sj.at("A"), where + ".A");
    if (!sj.at("B").is_array()) parse_fail(where + ".B: expected an array");
    for (const json& b : sj.at("B")) {
      check_keys(b, where + ".B", {"j", "matrix"});
      s.B.emplace_back(get_as<int>(b.at("j"), where + ".B.j"), mat_from(b.at("matrix"), where + ".B.matrix"));
    }
    s.Q = mat_from(sj.at("Q"), where + ".Q");
    s.R = mat_from(sj.at("R"), where + ".R");
    s.P = mat_from(sj.at("P"), where + ".P");
    s.z0 = vec_from(sj.at("z0"), where + ".z0");
    s.u_lower = vec_from(sj.at("u_lower"), where + ".u_lower");
    s.u_upper = vec_from(sj.at("u_upper"), where + ".u_upper");
    mpc.subsystems.push_back(std::move(s));
  }
  mpc.validate();
  return mpc;
}

json design_to_json(const DesignResult& result) {
  json rows = json::array();
  for (const auto& r : result.per_n) {
    rows.push_back({{"n", r.bits},
                    {"C_alpha", r.intervals.C_alpha},
                    {"C_beta", r.intervals.C_beta},
                    {"C1", r.bounds.C1},
                    {"C2", r.bounds.C2},
                    {"C3", r.bounds.C3},
                    {"C4", r.bounds.C4}});
  }
  return {{"kappa", result.kappa}, {"n_min", result.n_min}, {"per_n", std::move(rows)}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string trace_csv(const RunTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "# schema: " << kSchemaVersion << '\n';
  out << "# variant: " << to_string(trace.algorithm) << '\n';
  out << kTraceColumns << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << r.err << ',' << r.theorem_bound << ',' << r.e_norm << ',' << r.e_bound_lemma << ','
        << r.eps_sqrt << ',' << r.eps_bound_lemma << ',' << r.bits_cum << ',' << (r.saturated ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << trace_csv(trace);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

TraceTable parse_trace_csv(const std::string& text) {
  auto bad = [](const std::string& what) -> Error { return Error(ErrorCode::kMalformedTrace, what); };
  std::istringstream in(text);
  std::string line;
  TraceTable table;
  bool schema_seen = false;
  bool header_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# schema: ", 0) == 0) {
        if (line.substr(10) != kSchemaVersion) throw bad("unsupported trace schema '" + line.substr(10) + "'");
        schema_seen = true;
      } else if (line.rfind("# variant: ", 0) == 0) {
        table.variant = line.substr(11);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceColumns) throw bad("unexpected header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw bad("line " + std::to_string(lineno) + ": expected 9 columns");
    IterationRecord r;
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      r.k = static_cast<int>(num(cells[0]));
      r.err = num(cells[1]);
      r.theorem_bound = num(cells[2]);
      r.e_norm = num(cells[3]);
      r.e_bound_lemma = num(cells[4]);
      r.eps_sqrt = num(cells[5]);
      r.eps_bound_lemma = num(cells[6]);
      r.bits_cum = static_cast<std::int64_t>(std::stoll(cells[7]));
      const double sat = num(cells[8]);
      if (sat != 0.0 && sat != 1.0) throw std::invalid_argument(cells[8]);
      r.saturated = sat == 1.0;
    } catch (const std::exception&) {
      throw bad("line " + std::to_string(lineno) + ": not a number");
    }
    table.records.push_back(r);
  }
  if (!schema_seen) throw bad("missing '# schema' line");
  if (!header_seen) throw bad("missing column header");
  if (table.records.empty()) throw bad("trace has no rows");
  return table;
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

double fit_rate(std::span<const double> errors, double tail_fraction, double floor_rel) {
  if (errors.empty()) throw Error(ErrorCode::kSeriesTooShort, "empty error series");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "tail fraction must be in (0, 1]");
  }
  const double floor = errors[0] * floor_rel;
  std::size_t usable = 0;
  while (usable < errors.size() && errors[usable] > floor && errors[usable] > 0.0 && std::isfinite(errors[usable])) {
    ++usable;
  }
  const auto count = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(usable)));
  if (count < 3) throw Error(ErrorCode::kSeriesTooShort, "fewer than 3 usable points for a rate fit");
  const std::size_t first = usable - count;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = first; k < usable; ++k) {
    const double x = static_cast<double>(k);
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(count);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

}  // namespace quantnet
