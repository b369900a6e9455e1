#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "z2perc/io.hpp"

namespace z2perc {

struct RunnerOptions {
  std::string out_dir;           // created if missing
  int workers = 0;               // <= 0: OpenMP default thread count
  std::int64_t snapshots = 0;    // max snapshots kept per run point (0 = none)
  std::int64_t slice_every = 1;  // keep every K-th sampled configuration
  bool serial = false;           // reference path: no OpenMP over points
};

struct RunOutput {
  std::int64_t index = 0;
  std::string label;
  std::string module;
  std::string params_joined;   // "k=v;k=v" in series order
  std::string csv_name;        // file names relative to out_dir
  std::string snapshot_name;   // empty if no snapshots were written
  std::int64_t snapshot_count = 0;
};

// Expand the manifest and run every point, one independent RNG stream each.
// Parallelism is over grid points (snapshot batches inside the percolation
// analyzer stay serial here so that per-point output is scheduling-free).
// Writes, under out_dir:
//   manifest.json   canonical manifest copy
//   rNNNNN.csv      one observable series per point
//   rNNNNN.snap     optional snapshot stream per point
//   points.csv      index of all points with parameters and file names
// Outputs are byte-identical for identical manifests regardless of worker
// count.  The first exception from any point aborts the run.
std::vector<RunOutput> run_grid(const RunManifest& m, const RunnerOptions& opt);

}  // namespace z2perc
