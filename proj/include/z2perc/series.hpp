#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace z2perc {

// One measured sample.  Classical runs fill the percolation/matter/energy
// block; quantum runs additionally fill the estimator block (has_qmc) and,
// in the dual basis, the loop-ratio factors (has_fm).
struct SampleRecord {
  std::int64_t index = 0;
  bool has_percolation = false;  // X-basis configs only; Z-basis slices carry none
  bool percolates = false;
  double strength = 0.0;
  std::int64_t largest_cluster = 0;
  std::int64_t total_strings = 0;
  double matter_density = 0.0;
  double energy = 0.0;
  double pair_distance = 0.0;
  bool has_pair_distance = false;

  bool has_qmc = false;
  double tau_x = 0.0;     // time-averaged field expectation per link
  double star_avg = 0.0;  // diagonal 4-body group average
  double plaq_avg = 0.0;  // off-diagonal 4-body group average (from event counts)
  std::int64_t n_events = 0;
  bool has_fm = false;
  double fm_half = 0.0;  // product over the half loop, one slice
  double fm_full = 0.0;  // product over the full loop, same slice
};

struct AcceptanceStat {
  std::int64_t proposed = 0;
  std::int64_t accepted = 0;
  double rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

struct ObservableSeries {
  std::string module;  // "classical" or "qmc"
  std::vector<std::pair<std::string, std::string>> params;  // ordered metadata
  std::vector<std::pair<std::string, AcceptanceStat>> acceptance;
  std::vector<SampleRecord> samples;
  // wall time is informational only; it is never serialized so that output
  // files stay byte-identical across reruns
  double wall_seconds = 0.0;
};

}  // namespace z2perc
