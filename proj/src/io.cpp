#include "z2perc/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "z2perc/rng.hpp"

namespace z2perc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// hashing
// ---------------------------------------------------------------------------

std::array<unsigned char, 32> sha256_bytes(const std::string& data) {
  std::array<unsigned char, 32> out{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  const bool ok = ctx && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, out.data(), &len) == 1 && len == 32;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha256 digest failed");
  return out;
}

std::string hex_of(const std::array<unsigned char, 32>& digest) {
  std::string s(64, '0');
  static const char* hexd = "0123456789abcdef";
  for (std::size_t i = 0; i < 32; ++i) {
    s[2 * i] = hexd[digest[i] >> 4];
    s[2 * i + 1] = hexd[digest[i] & 0xf];
  }
  return s;
}

std::uint32_t fnv1a32(const unsigned char* data, std::size_t n) {
  std::uint32_t h = 2166136261u;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 16777619u;
  }
  return h;
}

// ---------------------------------------------------------------------------
// manifests
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void bad_manifest(const std::string& msg) {
  throw std::invalid_argument("manifest: " + msg);
}

std::vector<json> axis_values(const json& grid, const char* key) {
  if (!grid.contains(key)) return {};
  const json& v = grid.at(key);
  if (v.is_array()) {
    if (v.empty()) bad_manifest(std::string("axis '") + key + "' is empty");
    return std::vector<json>(v.begin(), v.end());
  }
  return {v};
}

double as_double(const json& v, const char* key) {
  if (!v.is_number()) bad_manifest(std::string("axis '") + key + "' needs numbers");
  return v.get<double>();
}

int as_int(const json& v, const char* key) {
  if (!v.is_number_integer()) bad_manifest(std::string("axis '") + key + "' needs integers");
  return v.get<int>();
}

std::string as_string(const json& v, const char* key) {
  if (!v.is_string()) bad_manifest(std::string("axis '") + key + "' needs strings");
  return v.get<std::string>();
}

void check_axes(const json& grid, std::initializer_list<const char*> allowed) {
  for (const auto& item : grid.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) bad_manifest("unknown grid axis '" + item.key() + "'");
  }
}

std::int64_t sched_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) bad_manifest("schedule." + key + " needs an integer");
  return v.get<std::int64_t>();
}

ScheduleClassical classical_schedule(const json& sch) {
  ScheduleClassical sc;
  if (sch.is_null()) return sc;
  if (!sch.is_object()) bad_manifest("schedule must be an object");
  for (const auto& item : sch.items()) {
    if (item.key() == "thermalization_updates")
      sc.thermalization_updates = sched_int(item.value(), item.key());
    else if (item.key() == "updates_between_samples")
      sc.updates_between_samples = sched_int(item.value(), item.key());
    else if (item.key() == "n_samples")
      sc.n_samples = sched_int(item.value(), item.key());
    else
      bad_manifest("unknown schedule key '" + item.key() + "'");
  }
  if (sc.n_samples <= 0) bad_manifest("schedule.n_samples must be positive");
  return sc;
}

ScheduleQmc qmc_schedule(const json& sch) {
  ScheduleQmc sc;
  if (sch.is_null()) return sc;
  if (!sch.is_object()) bad_manifest("schedule must be an object");
  for (const auto& item : sch.items()) {
    if (item.key() == "therm_sweeps")
      sc.therm_sweeps = sched_int(item.value(), item.key());
    else if (item.key() == "sweeps_per_sample")
      sc.sweeps_per_sample = sched_int(item.value(), item.key());
    else if (item.key() == "n_samples")
      sc.n_samples = sched_int(item.value(), item.key());
    else
      bad_manifest("unknown schedule key '" + item.key() + "'");
  }
  if (sc.n_samples <= 0) bad_manifest("schedule.n_samples must be positive");
  return sc;
}

std::string point_label(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%05lld", static_cast<long long>(index));
  return buf;
}

}  // namespace

RunManifest RunManifest::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    bad_manifest(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_manifest("top level must be an object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "experiment" && k != "module" && k != "grid" && k != "master_seed" && k != "out" &&
        k != "schedule" && k != "code_version")
      bad_manifest("unknown key '" + k + "'");
  }

  RunManifest m;
  if (!j.contains("experiment") || !j["experiment"].is_string() ||
      j["experiment"].get<std::string>().empty())
    bad_manifest("'experiment' must be a non-empty string");
  m.experiment = j["experiment"].get<std::string>();

  if (!j.contains("module") || !j["module"].is_string()) bad_manifest("'module' must be a string");
  m.module = j["module"].get<std::string>();
  if (m.module != "classical" && m.module != "qmc")
    bad_manifest("'module' must be \"classical\" or \"qmc\"");

  if (!j.contains("grid") || !j["grid"].is_object() || j["grid"].empty())
    bad_manifest("'grid' must be a non-empty object");
  m.grid = j["grid"];

  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned() && !j["master_seed"].is_number_integer())
      bad_manifest("'master_seed' must be a non-negative integer");
    if (j["master_seed"].is_number_integer() && j["master_seed"].get<std::int64_t>() < 0)
      bad_manifest("'master_seed' must be a non-negative integer");
    m.master_seed = j["master_seed"].get<std::uint64_t>();
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) bad_manifest("'out' must be a string");
    m.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("schedule")) m.schedule = j["schedule"];
  if (j.contains("code_version")) {
    if (!j["code_version"].is_string()) bad_manifest("'code_version' must be a string");
    m.code_version = j["code_version"].get<std::string>();
  }
  return m;
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("manifest: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse(text);
}

std::string RunManifest::canonical() const {
  json j;  // json objects serialize with sorted keys, which is the canon here
  j["experiment"] = experiment;
  j["module"] = module;
  j["grid"] = grid;
  j["master_seed"] = master_seed;
  if (!out_dir.empty()) j["out"] = out_dir;
  if (!schedule.is_null()) j["schedule"] = schedule;
  if (!code_version.empty()) j["code_version"] = code_version;
  return j.dump();
}

std::vector<RunPoint> expand_grid(const RunManifest& m) {
  std::vector<RunPoint> out;
  std::int64_t index = 0;

  if (m.module == "classical") {
    check_axes(m.grid, {"ensemble", "D", "L", "N", "density", "mu", "h", "T_over_h"});
    const auto sched = classical_schedule(m.schedule);
    auto ens_ax = axis_values(m.grid, "ensemble");
    if (ens_ax.empty()) ens_ax = {json("canonical")};
    auto d_ax = axis_values(m.grid, "D");
    if (d_ax.empty()) d_ax = {json(2)};
    const auto l_ax = axis_values(m.grid, "L");
    if (l_ax.empty()) bad_manifest("classical grid must set L");
    const auto n_ax = axis_values(m.grid, "N");
    const auto dens_ax = axis_values(m.grid, "density");
    if (!n_ax.empty() && !dens_ax.empty()) bad_manifest("give either N or density, not both");
    auto mu_ax = axis_values(m.grid, "mu");
    auto h_ax = axis_values(m.grid, "h");
    if (h_ax.empty()) h_ax = {json(1.0)};
    const auto t_ax = axis_values(m.grid, "T_over_h");
    if (t_ax.empty()) bad_manifest("classical grid must set T_over_h");

    for (const auto& ens_v : ens_ax) {
      const std::string ens_s = as_string(ens_v, "ensemble");
      Ensemble ens;
      if (ens_s == "canonical")
        ens = Ensemble::Canonical;
      else if (ens_s == "grand")
        ens = Ensemble::GrandCanonical;
      else
        bad_manifest("ensemble must be \"canonical\" or \"grand\"");

      if (ens == Ensemble::Canonical) {
        if (!mu_ax.empty()) bad_manifest("canonical ensemble takes no mu axis");
        if (n_ax.empty() && dens_ax.empty()) bad_manifest("canonical ensemble needs N or density");
      } else if (!n_ax.empty() || !dens_ax.empty()) {
        bad_manifest("grand-canonical density is set by mu, not N/density");
      }
      auto mu_here = mu_ax.empty() ? std::vector<json>{json(0.0)} : mu_ax;
      // one pass over the particle-number axis even when it is implicit
      std::vector<json> fill_ax;
      if (ens == Ensemble::Canonical)
        fill_ax = n_ax.empty() ? dens_ax : n_ax;
      else
        fill_ax = {json(0)};
      const bool by_density = ens == Ensemble::Canonical && n_ax.empty();

      for (const auto& d_v : d_ax) {
        const int D = as_int(d_v, "D");
        for (const auto& l_v : l_ax) {
          const int L = as_int(l_v, "L");
          for (const auto& f_v : fill_ax) {
            for (const auto& mu_v : mu_here) {
              for (const auto& h_v : h_ax) {
                for (const auto& t_v : t_ax) {
                  RunPoint pt;
                  pt.is_qmc = false;
                  auto& p = pt.classical;
                  p.D = D;
                  p.L = L;
                  p.ensemble = ens;
                  if (ens == Ensemble::Canonical) {
                    if (by_density) {
                      const double dens = as_double(f_v, "density");
                      if (dens < 0.0 || dens > 1.0) bad_manifest("density must lie in [0,1]");
                      double sites = 1.0;
                      for (int dd = 0; dd < D; ++dd) sites *= L;
                      auto n = static_cast<std::int64_t>(std::llround(dens * sites));
                      if (n % 2 != 0) --n;  // canonical matter comes in dimer pairs
                      p.n_particles = static_cast<int>(n);
                    } else {
                      p.n_particles = as_int(f_v, "N");
                    }
                  }
                  p.mu = as_double(mu_v, "mu");
                  p.h = as_double(h_v, "h");
                  p.T_over_h = as_double(t_v, "T_over_h");
                  p.schedule = sched;
                  pt.index = index;
                  pt.seed = stream_seed(m.master_seed, static_cast<std::uint64_t>(index));
                  p.seed = pt.seed;
                  pt.label = point_label(index);
                  p.validate();
                  out.push_back(std::move(pt));
                  ++index;
                }
              }
            }
          }
        }
      }
    }
  } else {
    check_axes(m.grid, {"basis", "L", "mu", "J", "beta", "T", "h", "lambda"});
    const auto sched = qmc_schedule(m.schedule);
    auto basis_ax = axis_values(m.grid, "basis");
    if (basis_ax.empty()) basis_ax = {json("x")};
    const auto l_ax = axis_values(m.grid, "L");
    if (l_ax.empty()) bad_manifest("qmc grid must set L");
    auto mu_ax = axis_values(m.grid, "mu");
    if (mu_ax.empty()) mu_ax = {json(1.0)};
    auto j_ax = axis_values(m.grid, "J");
    if (j_ax.empty()) j_ax = {json(1.0)};
    const auto beta_ax = axis_values(m.grid, "beta");
    const auto t_ax = axis_values(m.grid, "T");
    if (!beta_ax.empty() && !t_ax.empty()) bad_manifest("give either beta or T, not both");
    auto h_ax = axis_values(m.grid, "h");
    if (h_ax.empty()) h_ax = {json(0.0)};
    auto lam_ax = axis_values(m.grid, "lambda");
    if (lam_ax.empty()) lam_ax = {json(0.0)};

    // beta <= 0 encodes the ground-state recipe beta = L
    std::vector<double> betas;
    if (!beta_ax.empty())
      for (const auto& v : beta_ax) betas.push_back(as_double(v, "beta"));
    else if (!t_ax.empty())
      for (const auto& v : t_ax) {
        const double T = as_double(v, "T");
        if (!(T > 0.0)) bad_manifest("T must be positive");
        betas.push_back(1.0 / T);
      }
    else
      betas.push_back(0.0);

    for (const auto& b_v : basis_ax) {
      std::string bs = as_string(b_v, "basis");
      Basis basis;
      if (bs == "x" || bs == "X")
        basis = Basis::X;
      else if (bs == "z" || bs == "Z")
        basis = Basis::Z;
      else
        bad_manifest("basis must be \"x\" or \"z\"");
      for (const auto& l_v : l_ax) {
        for (const auto& mu_v : mu_ax) {
          for (const auto& j_v : j_ax) {
            for (const double beta : betas) {
              for (const auto& h_v : h_ax) {
                for (const auto& lam_v : lam_ax) {
                  RunPoint pt;
                  pt.is_qmc = true;
                  auto& p = pt.qmc;
                  p.L = as_int(l_v, "L");
                  p.mu = as_double(mu_v, "mu");
                  p.J = as_double(j_v, "J");
                  p.beta = beta;
                  p.h = as_double(h_v, "h");
                  p.lambda = as_double(lam_v, "lambda");
                  p.basis = basis;
                  p.schedule = sched;
                  pt.index = index;
                  pt.seed = stream_seed(m.master_seed, static_cast<std::uint64_t>(index));
                  p.seed = pt.seed;
                  pt.label = point_label(index);
                  p.validate();
                  out.push_back(std::move(pt));
                  ++index;
                }
              }
            }
          }
        }
      }
    }
  }

  if (out.empty()) bad_manifest("grid expanded to zero run points");
  return out;
}

// ---------------------------------------------------------------------------
// snapshot streams
// ---------------------------------------------------------------------------

namespace {

void put_u16(unsigned char* p, std::uint16_t v) {
  p[0] = static_cast<unsigned char>(v & 0xff);
  p[1] = static_cast<unsigned char>(v >> 8);
}
void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}
void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}
std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::array<unsigned char, 60> SnapshotWriter::header_bytes() const {
  std::array<unsigned char, 60> b{};
  std::memcpy(b.data(), kSnapshotMagic, 8);
  put_u16(b.data() + 8, kSnapshotVersion);
  b[10] = static_cast<unsigned char>(dimension_);
  b[11] = static_cast<unsigned char>(basis_);
  put_u32(b.data() + 12, linear_size_);
  put_u64(b.data() + 16, count_);
  std::memcpy(b.data() + 24, hash_.data(), 32);
  put_u32(b.data() + 56, fnv1a32(b.data(), 56));
  return b;
}

SnapshotWriter::SnapshotWriter(const std::string& path, const LatticeTopology& topo, Basis basis,
                               const std::array<unsigned char, 32>& manifest_hash)
    : path_(path),
      out_(path, std::ios::binary | std::ios::trunc),
      dimension_(topo.dimension()),
      basis_(basis),
      linear_size_(static_cast<std::uint32_t>(topo.linear_size())),
      hash_(manifest_hash),
      record_bytes_((static_cast<std::size_t>(topo.link_count()) + 7) / 8) {
  if (!out_) throw std::runtime_error("snapshot: cannot open " + path + " for writing");
  n_links_ = static_cast<std::size_t>(topo.link_count());
  const auto h = header_bytes();
  out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
}

SnapshotWriter::~SnapshotWriter() {
  try {
    close();
  } catch (...) {
    // a failed flush in a destructor has nowhere to go
  }
}

void SnapshotWriter::append(const BitArray& spins) {
  if (closed_) throw std::logic_error("snapshot: append after close");
  if (spins.size() != n_links_)
    throw std::invalid_argument("snapshot: config size does not match stream geometry");
  std::vector<std::uint8_t> buf(record_bytes_);
  spins.to_bytes(buf.data());
  out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw std::runtime_error("snapshot: write failed on " + path_);
  ++count_;
}

void SnapshotWriter::close() {
  if (closed_) return;
  closed_ = true;
  const auto h = header_bytes();  // now holds the final count
  out_.seekp(0);
  out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
  out_.flush();
  if (!out_) throw std::runtime_error("snapshot: finalizing header failed on " + path_);
  out_.close();
}

SnapshotReader::SnapshotReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw std::runtime_error("snapshot: cannot open " + path);
  unsigned char b[60];
  in_.read(reinterpret_cast<char*>(b), 60);
  if (in_.gcount() != 60) throw std::runtime_error("snapshot: truncated header in " + path);
  if (std::memcmp(b, kSnapshotMagic, 8) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path);
  if (get_u16(b + 8) != kSnapshotVersion)
    throw std::runtime_error("snapshot: unsupported version in " + path);
  if (get_u32(b + 56) != fnv1a32(b, 56))
    throw std::runtime_error("snapshot: header checksum mismatch in " + path);

  info_.dimension = b[10];
  if (info_.dimension != 2 && info_.dimension != 3)
    throw std::runtime_error("snapshot: unsupported dimension in " + path);
  if (b[11] > 1) throw std::runtime_error("snapshot: bad basis tag in " + path);
  info_.basis = static_cast<Basis>(b[11]);
  info_.linear_size = get_u32(b + 12);
  if (info_.linear_size < 2) throw std::runtime_error("snapshot: bad linear size in " + path);
  info_.count = get_u64(b + 16);
  std::memcpy(info_.manifest_hash.data(), b + 24, 32);

  std::size_t sites = 1;
  for (int d = 0; d < info_.dimension; ++d) sites *= info_.linear_size;
  info_.n_links = sites * static_cast<std::size_t>(info_.dimension);
  info_.record_bytes = (info_.n_links + 7) / 8;

  in_.seekg(0, std::ios::end);
  const auto total = static_cast<std::uint64_t>(in_.tellg());
  if (total != 60 + info_.count * info_.record_bytes)
    throw std::runtime_error("snapshot: payload length mismatch in " + path);
}

BitArray SnapshotReader::read(std::uint64_t i) {
  if (i >= info_.count) throw std::out_of_range("snapshot: index past end of " + path_);
  in_.seekg(static_cast<std::streamoff>(60 + i * info_.record_bytes));
  std::vector<std::uint8_t> buf(info_.record_bytes);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in_.gcount()) != buf.size())
    throw std::runtime_error("snapshot: short read in " + path_);
  return BitArray::from_bytes(buf.data(), info_.n_links);
}

// ---------------------------------------------------------------------------
// series CSV
// ---------------------------------------------------------------------------

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* kCsvHeader =
    "index,percolates,strength,largest_cluster,total_strings,matter_density,energy,"
    "pair_distance,tau_x,star_avg,plaq_avg,n_events,fm_half,fm_full,manifest_hash";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_series_csv(const std::string& path, const ObservableSeries& series,
                      const std::string& manifest_hash_hex) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("csv: cannot open " + path + " for writing");
  f << "# module=" << series.module << "\n";
  for (const auto& [k, v] : series.params) f << "# " << k << "=" << v << "\n";
  for (const auto& [k, st] : series.acceptance)
    f << "# acceptance_" << k << "=" << st.accepted << "/" << st.proposed << "\n";
  f << kCsvHeader << "\n";
  for (const auto& r : series.samples) {
    f << r.index << ',';
    if (r.has_percolation) {
      f << (r.percolates ? 1 : 0) << ',' << g17(r.strength) << ',' << r.largest_cluster << ','
        << r.total_strings << ',' << g17(r.matter_density) << ',';
    } else {
      f << ",,,,,";
    }
    f << g17(r.energy) << ',';
    if (r.has_pair_distance) f << g17(r.pair_distance);
    f << ',';
    if (r.has_qmc)
      f << g17(r.tau_x) << ',' << g17(r.star_avg) << ',' << g17(r.plaq_avg) << ',' << r.n_events
        << ',';
    else
      f << ",,,,";
    if (r.has_fm) f << g17(r.fm_half) << ',' << g17(r.fm_full) << ',';
    else
      f << ",,";
    f << manifest_hash_hex << "\n";
  }
  if (!f) throw std::runtime_error("csv: write failed on " + path);
}

LoadedSeries read_series_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  LoadedSeries out;
  std::string line;
  bool saw_header = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = body.substr(0, eq);
      const std::string val = body.substr(eq + 1);
      if (key == "module") {
        out.series.module = val;
      } else if (key.rfind("acceptance_", 0) == 0) {
        AcceptanceStat st;
        const auto slash = val.find('/');
        if (slash != std::string::npos) {
          st.accepted = std::strtoll(val.c_str(), nullptr, 10);
          st.proposed = std::strtoll(val.c_str() + slash + 1, nullptr, 10);
        }
        out.series.acceptance.emplace_back(key.substr(11), st);
      } else {
        out.series.params.emplace_back(key, val);
      }
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader) throw std::runtime_error("csv: unexpected header in " + path);
      saw_header = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 15) throw std::runtime_error("csv: malformed row in " + path);
    SampleRecord r;
    r.index = std::strtoll(cells[0].c_str(), nullptr, 10);
    if (!cells[1].empty()) {
      r.has_percolation = true;
      r.percolates = cells[1] == "1";
      r.strength = std::strtod(cells[2].c_str(), nullptr);
      r.largest_cluster = std::strtoll(cells[3].c_str(), nullptr, 10);
      r.total_strings = std::strtoll(cells[4].c_str(), nullptr, 10);
      r.matter_density = std::strtod(cells[5].c_str(), nullptr);
    }
    r.energy = std::strtod(cells[6].c_str(), nullptr);
    if (!cells[7].empty()) {
      r.has_pair_distance = true;
      r.pair_distance = std::strtod(cells[7].c_str(), nullptr);
    }
    if (!cells[8].empty()) {
      r.has_qmc = true;
      r.tau_x = std::strtod(cells[8].c_str(), nullptr);
      r.star_avg = std::strtod(cells[9].c_str(), nullptr);
      r.plaq_avg = std::strtod(cells[10].c_str(), nullptr);
      r.n_events = std::strtoll(cells[11].c_str(), nullptr, 10);
    }
    if (!cells[12].empty()) {
      r.has_fm = true;
      r.fm_half = std::strtod(cells[12].c_str(), nullptr);
      r.fm_full = std::strtod(cells[13].c_str(), nullptr);
    }
    if (out.manifest_hash.empty())
      out.manifest_hash = cells[14];
    else if (out.manifest_hash != cells[14])
      throw std::runtime_error("csv: inconsistent manifest hash in " + path);
    out.series.samples.push_back(r);
  }
  if (!saw_header) throw std::runtime_error("csv: no header line in " + path);
  return out;
}

void append_jsonl(const std::string& path, const nlohmann::json& obj) {
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f) throw std::runtime_error("jsonl: cannot open " + path + " for writing");
  f << obj.dump() << "\n";
  if (!f) throw std::runtime_error("jsonl: write failed on " + path);
}

}  // namespace z2perc
