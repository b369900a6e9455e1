#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "z2perc/gauge.hpp"

namespace z2perc {

struct PercolationReport {
  std::array<bool, 3> wraps{false, false, false};  // dims >= D stay false
  bool percolates = false;
  std::int64_t largest_cluster_links = 0;
  std::int64_t total_strings = 0;
  double strength = 0.0;  // largest/link_count if percolating, else exactly 0
};

// True iff some string cluster winds the torus in `dim`: DFS over string
// links assigns every visited site a winding number (incremented at the
// periodic cut); a revisit with a different winding number is a wrap.
// Throws std::invalid_argument for ZBasis snapshots or dim out of range.
bool detect_wrapping(const GaugeConfig& cfg, int dim, bool early_exit = true);

PercolationReport analyze(const GaugeConfig& cfg, bool early_exit = true);

// connected-component sizes (in links) of the string subgraph, descending
std::vector<std::int64_t> cluster_census(const GaugeConfig& cfg);

// Batch analysis of packed snapshots sharing one topology.  The OpenMP
// version distributes snapshots across threads (workers <= 0: runtime
// default); the serial version is the reference the tests and the benchmark
// compare against.
std::vector<PercolationReport> analyze_batch(const LatticeTopology& topo,
                                             std::span<const BitArray> snaps,
                                             int workers);
std::vector<PercolationReport> analyze_batch_serial(const LatticeTopology& topo,
                                                    std::span<const BitArray> snaps);

namespace detail {
PercolationReport analyze_spins(const LatticeTopology& topo, const BitArray& spins,
                                bool early_exit);
}

}  // namespace z2perc
