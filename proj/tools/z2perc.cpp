// Command-line front end.
//
//   z2perc classical --manifest m.json [--out DIR] [--workers N] [--seed U64]
//                    [--snapshots [CAP]] [--slice-every K] [--serial]
//   z2perc qmc       (same flags; manifest module must match the subcommand)
//   z2perc percolate [--out DIR] [--workers N] [--serial] FILE.snap...
//   z2perc analyze   --task binder|cross|collapse|autocorr [options] INPUT...
//   z2perc ed        [--L n] [--mu x] [--J x] [--h x] [--lambda x] [--beta x]
//
// Exit codes: 0 ok, 1 usage, 2 runtime failure, 3 validation failure.
// Environment: Z2PERC_OUT and Z2PERC_WORKERS act as defaults for --out and
// --workers; no other setting can be overridden from the environment.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "z2perc/analysis.hpp"
#include "z2perc/ed.hpp"
#include "z2perc/io.hpp"
#include "z2perc/percolation.hpp"
#include "z2perc/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace z2perc;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- shared option state -------------------------------------------------------

struct RunCmd {
  std::string manifest_path;
  std::string out;
  int workers = 0;
  std::uint64_t seed = 0;
  std::string snapshots_raw;  // "" absent, "true" bare flag, else a count
  std::int64_t slice_every = 1;
  bool serial = false;
};

struct PercCmd {
  std::vector<std::string> inputs;
  std::string out;
  int workers = 0;
  bool serial = false;
};

struct AnalyzeCmd {
  std::string task;
  std::vector<std::string> inputs;
  std::string out;
  std::string xname;
  std::string observable;
  std::string ansatz = "strength";
  int bootstrap = 1000;
  std::uint64_t seed = 20240501;
  bool cubic = false;
};

struct EdCmd {
  EdParams p;
  std::string out;
};

// `--snapshots` doubles as a flag (keep everything sampled) and as a counted
// option (`--snapshots 100`); the bare form parses to an empty string, so the
// absent/bare distinction lives in the option count.
CLI::Validator snapshot_count_validator() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        if (s.empty() || s.find_first_not_of("0123456789") == std::string::npos) return {};
        return "expected a non-negative snapshot cap, got '" + s + "'";
      },
      "CAP");
}

std::int64_t snapshots_from_option(std::size_t count, const std::string& raw) {
  if (count == 0) return 0;  // not requested
  if (raw.empty()) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::stoll(raw));
}

CLI::App* add_run_subcommand(CLI::App& app, const char* name, const char* desc, RunCmd& st) {
  auto* sc = app.add_subcommand(name, desc);
  sc->add_option("--manifest", st.manifest_path, "run manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sc->add_option("--out", st.out, "output directory (overrides the manifest's 'out')")
      ->envname("Z2PERC_OUT");
  sc->add_option("--workers", st.workers, "threads across grid points (<=0: OpenMP default)")
      ->envname("Z2PERC_WORKERS");
  sc->add_option("--seed", st.seed, "override the manifest master seed");
  sc->add_option("--snapshots", st.snapshots_raw,
                 "persist sampled configurations, optionally capped per point")
      ->expected(0, 1)
      ->check(snapshot_count_validator());
  sc->add_option("--slice-every", st.slice_every, "keep every K-th sampled configuration")
      ->check(CLI::PositiveNumber);
  sc->add_flag("--serial", st.serial, "run grid points sequentially (reference path)");
  return sc;
}

// --- classical / qmc -------------------------------------------------------------

int exec_run(const char* module, const RunCmd& st, const CLI::App* sc) {
  RunManifest m = RunManifest::load(st.manifest_path);
  if (m.module != module)
    throw std::invalid_argument(std::string(module) + ": manifest declares module '" + m.module +
                                "'; run `z2perc " + m.module + "` or fix the manifest");
  if (sc->count("--seed") > 0) m.master_seed = st.seed;
  if (!m.code_version.empty() && m.code_version != Z2PERC_GIT_REV)
    std::fprintf(stderr, "warning: manifest pins code_version %s, this build is %s\n",
                 m.code_version.c_str(), Z2PERC_GIT_REV);

  RunnerOptions opt;
  opt.out_dir = !st.out.empty() ? st.out : m.out_dir;
  if (opt.out_dir.empty())
    throw std::invalid_argument(std::string(module) +
                                ": no output directory; pass --out, set Z2PERC_OUT, or add "
                                "'out' to the manifest");
  opt.workers = st.workers;
  opt.snapshots = snapshots_from_option(sc->count("--snapshots"), st.snapshots_raw);
  opt.slice_every = st.slice_every;
  opt.serial = st.serial;

  const auto results = run_grid(m, opt);
  for (const auto& r : results) {
    if (r.snapshot_count > 0)
      std::printf("%s  %s  ->  %s, %s (%lld snapshots)\n", r.label.c_str(),
                  r.params_joined.c_str(), r.csv_name.c_str(), r.snapshot_name.c_str(),
                  static_cast<long long>(r.snapshot_count));
    else
      std::printf("%s  %s  ->  %s\n", r.label.c_str(), r.params_joined.c_str(),
                  r.csv_name.c_str());
  }
  std::printf("%zu point(s) written to %s (manifest %.12s)\n", results.size(),
              opt.out_dir.c_str(), m.hash_hex().c_str());
  return 0;
}

// --- percolate -------------------------------------------------------------------

int exec_percolate(const PercCmd& st) {
  for (const auto& input : st.inputs) {
    SnapshotReader reader(input);
    const SnapshotInfo& info = reader.info();
    if (info.basis == Basis::Z)
      throw std::invalid_argument(
          input +
          ": Z-basis snapshots record tau^z values, but electric strings (and their "
          "percolation) live on tau^x = -1 links, so there is nothing to cluster here; "
          "produce the snapshot stream in the X basis instead");

    const LatticeTopology topo(info.dimension, static_cast<int>(info.linear_size));
    const fs::path in_path(input);
    const fs::path out_dir =
        !st.out.empty() ? fs::path(st.out)
                        : (in_path.has_parent_path() ? in_path.parent_path() : fs::path("."));
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / (in_path.stem().string() + ".percolation.csv");

    std::ofstream csv(csv_path, std::ios::binary | std::ios::trunc);
    if (!csv) throw std::runtime_error("percolate: cannot write " + csv_path.string());
    std::string hash_hex;
    hash_hex.reserve(64);
    for (unsigned char b : info.manifest_hash) {
      char hx[3];
      std::snprintf(hx, sizeof hx, "%02x", b);
      hash_hex += hx;
    }
    csv << "# module=percolate\n";
    csv << "# source=" << in_path.filename().string() << "\n";
    csv << "# D=" << info.dimension << "\n";
    csv << "# L=" << info.linear_size << "\n";
    csv << "# basis=x\n";
    csv << "# count=" << info.count << "\n";
    csv << "index,wrap0,wrap1,wrap2,percolates,largest_cluster,total_strings,strength,"
           "manifest_hash\n";

    double sum_perc = 0.0, sum_strength = 0.0;
    constexpr std::uint64_t kBatch = 4096;
    std::vector<BitArray> batch;
    for (std::uint64_t base = 0; base < info.count; base += kBatch) {
      const std::uint64_t n = std::min<std::uint64_t>(kBatch, info.count - base);
      batch.clear();
      batch.reserve(n);
      for (std::uint64_t i = 0; i < n; ++i) batch.push_back(reader.read(base + i));
      const auto reports = st.serial ? analyze_batch_serial(topo, batch)
                                     : analyze_batch(topo, batch, st.workers);
      for (std::uint64_t i = 0; i < n; ++i) {
        const auto& r = reports[i];
        csv << (base + i) << ',' << (r.wraps[0] ? 1 : 0) << ',' << (r.wraps[1] ? 1 : 0) << ','
            << (r.wraps[2] ? 1 : 0) << ',' << (r.percolates ? 1 : 0) << ','
            << r.largest_cluster_links << ',' << r.total_strings << ',' << fmt_g(r.strength)
            << ',' << hash_hex << "\n";
        sum_perc += r.percolates ? 1.0 : 0.0;
        sum_strength += r.strength;
      }
    }
    csv.flush();
    if (!csv) throw std::runtime_error("percolate: write failed for " + csv_path.string());

    json j;
    j["command"] = "percolate";
    j["input"] = input;
    j["csv"] = csv_path.string();
    j["count"] = info.count;
    j["D"] = info.dimension;
    j["L"] = info.linear_size;
    if (info.count > 0) {
      j["pi"] = sum_perc / static_cast<double>(info.count);
      j["strength_mean"] = sum_strength / static_cast<double>(info.count);
    }
    j["manifest_hash"] = hash_hex;
    std::printf("%s\n", j.dump().c_str());
  }
  return 0;
}

// --- analyze ---------------------------------------------------------------------

struct PointSeries {
  std::string file;
  LoadedSeries loaded;
  std::map<std::string, std::string> params;
  double L = 0.0;
  double x = 0.0;
  bool has_x = false;
};

// directories expand to their rNNNNN.csv members, sorted by name
std::vector<std::string> expand_inputs(const std::vector<std::string>& args) {
  std::vector<std::string> files;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<std::string> here;
      for (const auto& entry : fs::directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() == 10 && name[0] == 'r' && name.substr(6) == ".csv" &&
            name.find_first_not_of("0123456789", 1) == 6)
          here.push_back(entry.path().string());
      }
      std::sort(here.begin(), here.end());
      if (here.empty())
        throw std::invalid_argument("analyze: no rNNNNN.csv series found in directory " + a);
      files.insert(files.end(), here.begin(), here.end());
    } else {
      files.push_back(a);
    }
  }
  return files;
}

std::vector<double> observable_column(const ObservableSeries& s, const std::string& name,
                                      const std::string& file) {
  const bool has_perc = !s.samples.empty() && s.samples.front().has_percolation;
  const bool has_qmc = !s.samples.empty() && s.samples.front().has_qmc;
  const bool has_fm = !s.samples.empty() && s.samples.front().has_fm;
  const bool has_pd = !s.samples.empty() && s.samples.front().has_pair_distance;

  auto require = [&](bool ok, const char* block) {
    if (!ok)
      throw std::invalid_argument("analyze: " + file + " carries no " + block +
                                  " block, cannot extract '" + name + "'");
  };
  std::vector<double> v;
  v.reserve(s.samples.size());
  auto fill = [&](auto&& get) {
    for (const auto& r : s.samples) v.push_back(get(r));
  };
  if (name == "strength") {
    require(has_perc, "percolation");
    fill([](const SampleRecord& r) { return r.strength; });
  } else if (name == "percolates") {
    require(has_perc, "percolation");
    fill([](const SampleRecord& r) { return r.percolates ? 1.0 : 0.0; });
  } else if (name == "largest_cluster") {
    require(has_perc, "percolation");
    fill([](const SampleRecord& r) { return static_cast<double>(r.largest_cluster); });
  } else if (name == "total_strings") {
    require(has_perc, "percolation");
    fill([](const SampleRecord& r) { return static_cast<double>(r.total_strings); });
  } else if (name == "matter_density") {
    fill([](const SampleRecord& r) { return r.matter_density; });
  } else if (name == "energy") {
    fill([](const SampleRecord& r) { return r.energy; });
  } else if (name == "pair_distance") {
    require(has_pd, "pair-distance");
    fill([](const SampleRecord& r) { return r.pair_distance; });
  } else if (name == "tau_x") {
    require(has_qmc, "estimator");
    fill([](const SampleRecord& r) { return r.tau_x; });
  } else if (name == "star_avg") {
    require(has_qmc, "estimator");
    fill([](const SampleRecord& r) { return r.star_avg; });
  } else if (name == "plaq_avg") {
    require(has_qmc, "estimator");
    fill([](const SampleRecord& r) { return r.plaq_avg; });
  } else if (name == "n_events") {
    require(has_qmc, "estimator");
    fill([](const SampleRecord& r) { return static_cast<double>(r.n_events); });
  } else if (name == "fm_half") {
    require(has_fm, "loop-ratio");
    fill([](const SampleRecord& r) { return r.fm_half; });
  } else if (name == "fm_full") {
    require(has_fm, "loop-ratio");
    fill([](const SampleRecord& r) { return r.fm_full; });
  } else {
    throw std::invalid_argument(
        "analyze: unknown observable '" + name +
        "' (known: strength, percolates, largest_cluster, total_strings, matter_density, "
        "energy, pair_distance, tau_x, star_avg, plaq_avg, n_events, fm_half, fm_full)");
  }
  return v;
}

std::vector<PointSeries> load_points(const AnalyzeCmd& st, bool need_x) {
  const auto files = expand_inputs(st.inputs);
  std::vector<PointSeries> pts;
  pts.reserve(files.size());
  std::string module;
  for (const auto& f : files) {
    PointSeries p;
    p.file = f;
    p.loaded = read_series_csv(f);
    for (const auto& [k, v] : p.loaded.series.params) p.params[k] = v;
    if (module.empty())
      module = p.loaded.series.module;
    else if (module != p.loaded.series.module)
      throw std::invalid_argument("analyze: cannot mix modules '" + module + "' and '" +
                                  p.loaded.series.module + "' (" + f + ")");
    auto lit = p.params.find("L");
    if (lit == p.params.end())
      throw std::invalid_argument("analyze: " + f + " has no 'L' parameter");
    p.L = std::stod(lit->second);

    const std::string xkey =
        !st.xname.empty() ? st.xname : (p.loaded.series.module == "qmc" ? "h" : "T_over_h");
    auto xit = p.params.find(xkey);
    if (xit != p.params.end()) {
      p.x = std::stod(xit->second);
      p.has_x = true;
    } else if (need_x) {
      std::string keys;
      for (const auto& [k, v] : p.params) {
        (void)v;
        keys += keys.empty() ? k : ", " + k;
      }
      throw std::invalid_argument("analyze: " + f + " has no '" + xkey +
                                  "' parameter (available: " + keys + ")");
    }
    pts.push_back(std::move(p));
  }
  std::sort(pts.begin(), pts.end(), [](const PointSeries& a, const PointSeries& b) {
    return a.L != b.L ? a.L < b.L : a.x < b.x;
  });
  return pts;
}

std::string x_key_of(const AnalyzeCmd& st, const std::vector<PointSeries>& pts) {
  if (!st.xname.empty()) return st.xname;
  return (!pts.empty() && pts.front().loaded.series.module == "qmc") ? "h" : "T_over_h";
}

void emit_report(const std::string& out_dir, const json& j) {
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    append_jsonl((fs::path(out_dir) / "analysis.jsonl").string(), j);
  }
  std::printf("%s\n", j.dump().c_str());
}

json provenance(const std::vector<PointSeries>& pts) {
  json inputs = json::array();
  std::vector<std::string> hashes;
  for (const auto& p : pts) {
    inputs.push_back(fs::path(p.file).filename().string());
    if (std::find(hashes.begin(), hashes.end(), p.loaded.manifest_hash) == hashes.end())
      hashes.push_back(p.loaded.manifest_hash);
  }
  json j;
  j["inputs"] = inputs;
  j["manifest_hashes"] = hashes;
  return j;
}

// binder curves grouped by L, points ascending in x
std::vector<BinderCurve> build_binder_curves(const std::vector<PointSeries>& pts) {
  std::map<double, BinderCurve> by_L;
  for (const auto& p : pts) {
    auto& curve = by_L[p.L];
    curve.L = p.L;
    if (!curve.points.empty() && curve.points.back().x == p.x)
      throw std::invalid_argument("analyze: two series at L=" + fmt_g(p.L) + ", x=" +
                                  fmt_g(p.x) + "; merge repeated points upstream");
    const auto est = binder(observable_column(p.loaded.series, "strength", p.file));
    curve.points.push_back({p.x, est.value, est.error, est.defined});
  }
  std::vector<BinderCurve> curves;
  curves.reserve(by_L.size());
  for (auto& [L, c] : by_L) {
    (void)L;
    curves.push_back(std::move(c));
  }
  return curves;
}

int exec_analyze(const AnalyzeCmd& st) {
  if (st.task == "autocorr") {
    const auto pts = load_points(st, /*need_x=*/false);
    for (const auto& p : pts) {
      const std::string obs =
          !st.observable.empty()
              ? st.observable
              : (!p.loaded.series.samples.empty() && p.loaded.series.samples.front().has_percolation
                     ? "strength"
                     : "energy");
      const auto col = observable_column(p.loaded.series, obs, p.file);
      const auto a = autocorrelation(col);
      json j;
      j["task"] = "autocorr";
      j["file"] = fs::path(p.file).filename().string();
      j["module"] = p.loaded.series.module;
      j["observable"] = obs;
      j["L"] = p.L;
      if (p.has_x) j["x"] = p.x;
      j["n"] = col.size();
      j["mean"] = a.mean;
      j["error"] = a.error;
      j["tau_int"] = a.tau_int;
      j["window"] = a.window;
      j["n_eff"] = a.n_eff;
      j["degenerate"] = a.degenerate;
      j["binned_errors"] = a.binned_errors;
      j["manifest_hash"] = p.loaded.manifest_hash;
      emit_report(st.out, j);
    }
    return 0;
  }

  if (st.task == "binder") {
    const auto pts = load_points(st, /*need_x=*/true);
    const std::string xkey = x_key_of(st, pts);
    for (const auto& p : pts) {
      const auto est = binder(observable_column(p.loaded.series, "strength", p.file));
      json j;
      j["task"] = "binder";
      j["file"] = fs::path(p.file).filename().string();
      j["module"] = p.loaded.series.module;
      j["L"] = p.L;
      j["x_name"] = xkey;
      j["x"] = p.x;
      j["n_samples"] = p.loaded.series.samples.size();
      j["value"] = est.value;
      j["error"] = est.error;
      j["defined"] = est.defined;
      j["tau_int"] = est.tau_int;
      j["bins"] = est.bins;
      j["manifest_hash"] = p.loaded.manifest_hash;
      emit_report(st.out, j);
    }
    return 0;
  }

  if (st.task == "cross") {
    const auto pts = load_points(st, /*need_x=*/true);
    const auto curves = build_binder_curves(pts);
    if (curves.size() < 2) {
      std::string sizes;
      for (const auto& c : curves) sizes += (sizes.empty() ? "" : ", ") + fmt_g(c.L);
      throw std::invalid_argument(
          "analyze: crossing analysis needs Binder curves from at least two system sizes; "
          "the inputs only cover L = " +
          sizes);
    }
    const auto rep = crossing_points(curves, st.bootstrap, st.seed, st.cubic);
    json j = provenance(pts);
    j["task"] = "cross";
    j["x_name"] = x_key_of(st, pts);
    json sizes = json::array();
    for (const auto& c : curves) sizes.push_back(c.L);
    j["L"] = sizes;
    json pairs = json::array();
    for (const auto& pr : rep.pairs) {
      json e;
      e["L_a"] = pr.L_a;
      e["L_b"] = pr.L_b;
      e["found"] = pr.found;
      if (pr.found) {
        e["x"] = pr.x;
        e["error"] = pr.error;
      }
      pairs.push_back(e);
    }
    j["pairs"] = pairs;
    j["any"] = rep.any;
    if (rep.any) {
      j["consensus"] = rep.consensus;
      j["consensus_error"] = rep.consensus_error;
      j["drift_slope"] = rep.drift_slope;
    }
    j["n_bootstrap"] = st.bootstrap;
    j["seed"] = st.seed;
    j["cubic"] = st.cubic;
    emit_report(st.out, j);
    return 0;
  }

  // collapse
  const auto pts = load_points(st, /*need_x=*/true);
  const bool use_binder = st.ansatz == "binder";
  std::map<double, CurveData> by_L;
  for (const auto& p : pts) {
    auto& c = by_L[p.L];
    c.L = p.L;
    if (!c.x.empty() && c.x.back() == p.x)
      throw std::invalid_argument("analyze: two series at L=" + fmt_g(p.L) + ", x=" +
                                  fmt_g(p.x) + "; merge repeated points upstream");
    c.x.push_back(p.x);
    if (use_binder) {
      const auto est = binder(observable_column(p.loaded.series, "strength", p.file));
      c.y.push_back(est.value);
      c.yerr.push_back(est.error);
    } else {
      const auto a = autocorrelation(observable_column(p.loaded.series, "strength", p.file));
      c.y.push_back(a.mean);
      c.yerr.push_back(a.error);
    }
  }
  std::vector<CurveData> curves;
  curves.reserve(by_L.size());
  for (auto& [L, c] : by_L) {
    (void)L;
    curves.push_back(std::move(c));
  }
  const auto fit = collapse_fit(
      curves, use_binder ? CollapseAnsatz::BinderCollapse : CollapseAnsatz::StrengthCollapse);
  json j = provenance(pts);
  j["task"] = "collapse";
  j["ansatz"] = st.ansatz;
  j["x_name"] = x_key_of(st, pts);
  json sizes = json::array();
  for (const auto& c : curves) sizes.push_back(c.L);
  j["L"] = sizes;
  j["x_c"] = fit.x_c;
  j["err_x_c"] = fit.err_x_c;
  j["nu"] = fit.nu;
  j["err_nu"] = fit.err_nu;
  j["beta_p"] = fit.beta_p;
  j["err_beta_p"] = fit.err_beta_p;
  j["chi2_red"] = fit.chi2_red;
  j["n_points"] = fit.n_points;
  j["converged"] = fit.converged;
  emit_report(st.out, j);
  return 0;
}

// --- ed --------------------------------------------------------------------------

int exec_ed(const EdCmd& st) {
  const EdResult r = ed_solve(st.p);
  json j;
  j["module"] = "ed";
  j["L"] = st.p.L;
  j["mu"] = st.p.mu;
  j["J"] = st.p.J;
  j["h"] = st.p.h;
  j["lambda"] = st.p.lambda;
  j["beta"] = st.p.effective_beta();
  j["ground_energy"] = r.ground_energy;
  j["has_thermal"] = r.has_thermal;
  j["energy"] = r.energy;
  j["tau_x"] = r.tau_x;
  j["star_avg"] = r.star_avg;
  j["plaq_avg"] = r.plaq_avg;
  j["code_version"] = Z2PERC_GIT_REV;
  if (!st.out.empty()) {
    fs::create_directories(st.out);
    append_jsonl((fs::path(st.out) / "ed.jsonl").string(), j);
  }
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Z2 lattice gauge simulator and percolation analysis toolkit"};
  app.set_version_flag("--version", Z2PERC_GIT_REV);
  app.require_subcommand(1);

  RunCmd classical_st, qmc_st;
  auto* sc_classical = add_run_subcommand(
      app, "classical", "thermal Monte Carlo over a manifest grid", classical_st);
  auto* sc_qmc = add_run_subcommand(
      app, "qmc", "continuous-time quantum Monte Carlo over a manifest grid", qmc_st);

  PercCmd perc_st;
  auto* sc_perc = app.add_subcommand("percolate", "cluster analysis of snapshot streams");
  sc_perc->add_option("inputs", perc_st.inputs, "snapshot files (.snap)")
      ->required()
      ->check(CLI::ExistingFile);
  sc_perc->add_option("--out", perc_st.out, "output directory (default: next to each input)")
      ->envname("Z2PERC_OUT");
  sc_perc->add_option("--workers", perc_st.workers, "threads (<=0: OpenMP default)")
      ->envname("Z2PERC_WORKERS");
  sc_perc->add_flag("--serial", perc_st.serial, "use the serial reference analyzer");

  AnalyzeCmd an_st;
  auto* sc_an = app.add_subcommand("analyze", "statistical analysis of observable series");
  sc_an->add_option("--task", an_st.task, "binder | cross | collapse | autocorr")
      ->required()
      ->check(CLI::IsMember({"binder", "cross", "collapse", "autocorr"}));
  sc_an->add_option("inputs", an_st.inputs, "series CSVs or run directories")
      ->required()
      ->check(CLI::ExistingPath);
  sc_an->add_option("--out", an_st.out, "directory for analysis.jsonl (reports also go to stdout)")
      ->envname("Z2PERC_OUT");
  sc_an->add_option("--x", an_st.xname,
                    "parameter to use as the curve abscissa (default: T_over_h, or h for qmc)");
  sc_an->add_option("--observable", an_st.observable,
                    "series column for --task autocorr (default: strength, or energy "
                    "without a percolation block)");
  sc_an->add_option("--ansatz", an_st.ansatz, "collapse ansatz: strength | binder")
      ->check(CLI::IsMember({"strength", "binder"}));
  sc_an->add_option("--bootstrap", an_st.bootstrap, "bootstrap resamples for --task cross")
      ->check(CLI::PositiveNumber);
  sc_an->add_option("--seed", an_st.seed, "bootstrap seed for --task cross");
  sc_an->add_flag("--cubic", an_st.cubic, "cubic Hermite instead of linear interpolation");

  EdCmd ed_st;
  auto* sc_ed = app.add_subcommand("ed", "exact diagonalization reference values");
  // free the short -h so the field coupling can be spelled --h like everywhere else
  sc_ed->set_help_flag("--help", "print help");
  sc_ed->add_option("--L", ed_st.p.L, "linear size (2: thermal, 3: ground state)");
  sc_ed->add_option("--mu", ed_st.p.mu, "star coupling");
  sc_ed->add_option("--J", ed_st.p.J, "plaquette coupling");
  sc_ed->add_option("--h", ed_st.p.h, "electric field");
  sc_ed->add_option("--lambda", ed_st.p.lambda, "magnetic field");
  sc_ed->add_option("--beta", ed_st.p.beta, "inverse temperature (<=0: beta = L)");
  sc_ed->add_option("--out", ed_st.out, "directory for ed.jsonl")->envname("Z2PERC_OUT");

  try {
    app.parse(argc, argv);
    if (sc_classical->parsed()) return exec_run("classical", classical_st, sc_classical);
    if (sc_qmc->parsed()) return exec_run("qmc", qmc_st, sc_qmc);
    if (sc_perc->parsed()) return exec_percolate(perc_st);
    if (sc_an->parsed()) return exec_analyze(an_st);
    if (sc_ed->parsed()) return exec_ed(ed_st);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
