#include "quantnet/bit_ledger.hpp"

#include "quantnet/error.hpp"

namespace quantnet {

void BitLedger::record(const Edge& directed, int k, std::int64_t scalar_count, int bits_per_scalar) {
  if (scalar_count < 0 || bits_per_scalar < 0 || k < 0) {
    throw Error(ErrorCode::kInvalidArgument, "bit ledger counts must be non-negative");
  }
  const std::int64_t bits = scalar_count * bits_per_scalar;
  entries_[{k, directed.first, directed.second}].nominal += bits;
  per_iteration_[k] += bits;
  total_ += bits;
}

void BitLedger::record_wire(const Edge& directed, int k, std::int64_t wire_bytes) {
  if (wire_bytes < 0 || k < 0) throw Error(ErrorCode::kInvalidArgument, "wire byte count must be non-negative");
  entries_[{k, directed.first, directed.second}].wire += 8 * wire_bytes;
  wire_total_ += 8 * wire_bytes;
}

std::int64_t BitLedger::bits(const Edge& directed, int k) const {
  const auto it = entries_.find({k, directed.first, directed.second});
  return it == entries_.end() ? 0 : it->second.nominal;
}

std::int64_t BitLedger::edge_total(const Edge& directed) const {
  std::int64_t sum = 0;
  for (const auto& [key, e] : entries_) {
    if (std::get<1>(key) == directed.first && std::get<2>(key) == directed.second) sum += e.nominal;
  }
  return sum;
}

std::int64_t BitLedger::iteration_total(int k) const {
  const auto it = per_iteration_.find(k);
  return it == per_iteration_.end() ? 0 : it->second;
}

std::int64_t BitLedger::cumulative_through(int k) const {
  std::int64_t sum = 0;
  for (const auto& [it, bits] : per_iteration_) {
    if (it > k) break;
    sum += bits;
  }
  return sum;
}

void BitLedger::write_csv(std::ostream& out) const {
  out << "k,src,dst,bits,cumulative_bits\n";
  std::map<std::pair<int, int>, std::int64_t> running;
  for (const auto& [key, e] : entries_) {
    const auto& [k, src, dst] = key;
    auto& cum = running[{src, dst}];
    cum += e.nominal;
    out << k << ',' << src << ',' << dst << ',' << e.nominal << ',' << cum << '\n';
  }
}

BitLedger record_bits(BitLedger ledger, const Edge& directed, int k, std::int64_t scalar_count, int bits) {
  ledger.record(directed, k, scalar_count, bits);
  return ledger;
}

}  // namespace quantnet
