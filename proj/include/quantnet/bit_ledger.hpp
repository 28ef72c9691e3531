#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <tuple>

#include "quantnet/topology.hpp"

namespace quantnet {

// Bits sent per iteration and directed edge. The nominal count charges n bits
// per scalar; the wire count is what the codec actually emitted (n+1 bits per
// scalar plus header and padding).
class BitLedger {
 public:
  void record(const Edge& directed, int k, std::int64_t scalar_count, int bits_per_scalar);
  void record_wire(const Edge& directed, int k, std::int64_t wire_bytes);

  std::int64_t bits(const Edge& directed, int k) const;
  std::int64_t edge_total(const Edge& directed) const;
  std::int64_t iteration_total(int k) const;
  // Nominal bits over iterations 0..k inclusive.
  std::int64_t cumulative_through(int k) const;
  std::int64_t total() const { return total_; }
  std::int64_t wire_total() const { return wire_total_; }

  // Columns k,src,dst,bits,cumulative_bits; cumulative is per directed edge.
  void write_csv(std::ostream& out) const;

 private:
  struct Entry {
    std::int64_t nominal = 0;
    std::int64_t wire = 0;
  };
  std::map<std::tuple<int, int, int>, Entry> entries_;  // (k, src, dst)
  std::map<int, std::int64_t> per_iteration_;
  std::int64_t total_ = 0;
  std::int64_t wire_total_ = 0;
};

BitLedger record_bits(BitLedger ledger, const Edge& directed, int k, std::int64_t scalar_count, int bits);

}  // namespace quantnet
