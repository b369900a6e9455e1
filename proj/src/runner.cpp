#include "z2perc/runner.hpp"

#include <omp.h>

#include <exception>
#include <filesystem>
#include <optional>

namespace z2perc {

namespace fs = std::filesystem;

namespace {

RunOutput run_point(const RunPoint& pt, const RunnerOptions& opt,
                    const std::array<unsigned char, 32>& hash, const std::string& hash_hex) {
  RunOutput res;
  res.index = pt.index;
  res.label = pt.label;
  res.module = pt.is_qmc ? "qmc" : "classical";
  res.csv_name = pt.label + ".csv";
  const std::string snap_name = pt.label + ".snap";
  const fs::path out_root(opt.out_dir);

  std::optional<SnapshotWriter> writer;
  std::int64_t seen = 0;
  auto keep = [&](const GaugeConfig& cfg) {
    const std::int64_t s = seen++;
    if (opt.snapshots <= 0) return;
    if (writer && static_cast<std::int64_t>(writer->count()) >= opt.snapshots) return;
    if (s % std::max<std::int64_t>(1, opt.slice_every) != 0) return;
    if (!writer) writer.emplace((out_root / snap_name).string(), *cfg.topo, cfg.basis, hash);
    writer->append(cfg);
  };

  ObservableSeries series;
  if (pt.is_qmc)
    series = run_qmc(pt.qmc, [&](const GaugeConfig& cfg, const SampleRecord&) { keep(cfg); });
  else
    series = run_classical(pt.classical, keep);

  if (writer) {
    writer->close();
    res.snapshot_name = snap_name;
    res.snapshot_count = static_cast<std::int64_t>(writer->count());
  }
  write_series_csv((out_root / res.csv_name).string(), series, hash_hex);

  std::string joined;
  for (const auto& [k, v] : series.params) {
    if (!joined.empty()) joined += ';';
    joined += k;
    joined += '=';
    joined += v;
  }
  res.params_joined = joined;
  return res;
}

}  // namespace

std::vector<RunOutput> run_grid(const RunManifest& m, const RunnerOptions& opt) {
  if (opt.out_dir.empty()) throw std::invalid_argument("run_grid: output directory not set");
  const auto points = expand_grid(m);
  fs::create_directories(opt.out_dir);

  {  // canonical manifest copy next to the outputs
    std::ofstream f(fs::path(opt.out_dir) / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("run_grid: cannot write manifest copy");
    f << m.canonical() << "\n";
  }
  const auto hash = m.hash();
  const auto hash_hex = hex_of(hash);

  std::vector<RunOutput> results(points.size());
  std::exception_ptr first_error = nullptr;

  if (opt.serial || points.size() == 1) {
    for (std::size_t i = 0; i < points.size(); ++i)
      results[i] = run_point(points[i], opt, hash, hash_hex);
  } else {
    const int n_threads = opt.workers > 0 ? opt.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(n_threads)
    for (std::size_t i = 0; i < points.size(); ++i) {
      try {
        results[i] = run_point(points[i], opt, hash, hash_hex);
      } catch (...) {
#pragma omp critical
        if (!first_error) first_error = std::current_exception();
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  {  // points.csv: one row per run point
    std::ofstream f(fs::path(opt.out_dir) / "points.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("run_grid: cannot write points.csv");
    f << "index,label,module,params,csv,snapshots,snapshot_count,manifest_hash\n";
    for (const auto& r : results)
      f << r.index << ',' << r.label << ',' << r.module << ',' << r.params_joined << ','
        << r.csv_name << ',' << r.snapshot_name << ',' << r.snapshot_count << ',' << hash_hex
        << "\n";
    if (!f) throw std::runtime_error("run_grid: writing points.csv failed");
  }
  return results;
}

}  // namespace z2perc
