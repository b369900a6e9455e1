#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "z2perc/bits.hpp"
#include "z2perc/classical_mc.hpp"
#include "z2perc/gauge.hpp"
#include "z2perc/qmc.hpp"
#include "z2perc/series.hpp"

namespace z2perc {

// --- hashing -----------------------------------------------------------------

std::array<unsigned char, 32> sha256_bytes(const std::string& data);
std::string hex_of(const std::array<unsigned char, 32>& digest);
std::uint32_t fnv1a32(const unsigned char* data, std::size_t n);

// --- run manifests -------------------------------------------------------------

// JSON run description.  Canonical form = compact dump with sorted keys; the
// manifest hash (SHA-256 of the canonical bytes) is stamped on every output
// row and into snapshot headers, so results stay traceable to their inputs.
//
// Required: experiment (string), module ("classical"|"qmc"), grid (object).
// Optional: master_seed (default 1), out (output root; --out / Z2PERC_OUT
// override it), schedule (object), code_version (pins a build; mismatch only
// warns).  Grid values are scalars or arrays.
//
// Axis expansion order (outer to inner), run_index counts row-major:
//   classical: ensemble, D, L, density|N, mu, h, T_over_h
//   qmc:       basis, L, mu, J, beta|T, h, lambda
struct RunManifest {
  std::string experiment;
  std::string module;
  std::uint64_t master_seed = 1;
  std::string out_dir;       // may be empty
  std::string code_version;  // may be empty
  nlohmann::json grid;
  nlohmann::json schedule;  // may be null

  std::string canonical() const;
  std::array<unsigned char, 32> hash() const { return sha256_bytes(canonical()); }
  std::string hash_hex() const { return hex_of(hash()); }

  // both throw std::invalid_argument on malformed/missing fields
  static RunManifest parse(const std::string& text);
  static RunManifest load(const std::string& path);
};

struct RunPoint {
  std::int64_t index = 0;
  std::uint64_t seed = 0;
  std::string label;  // r%05d
  bool is_qmc = false;
  RunParamsClassical classical;
  QmcParams qmc;
};

// Cartesian product of the grid axes in the documented order; per-point seeds
// come from stream_seed(master_seed, run_index).  Throws std::invalid_argument
// on unknown axes, empty axes, or inconsistent ensemble settings.
std::vector<RunPoint> expand_grid(const RunManifest& m);

// --- snapshot streams -----------------------------------------------------------

// Binary format, 60-byte header followed by `count` bit-packed records:
//   [0,8)   magic "Z2SNAP01"
//   [8,10)  u16 version (= 1)
//   [10]    u8 dimension
//   [11]    u8 basis (0 = X, 1 = Z)
//   [12,16) u32 linear size
//   [16,24) u64 snapshot count
//   [24,56) 32-byte manifest hash
//   [56,60) u32 FNV-1a checksum of header bytes [0,56)
// Integers little-endian.  Each record is ceil(n_links/8) bytes; spin of link
// l sits at bit (l mod 8) of byte (l div 8), set bit == -1.
inline constexpr char kSnapshotMagic[8] = {'Z', '2', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

class SnapshotWriter {
 public:
  SnapshotWriter(const std::string& path, const LatticeTopology& topo, Basis basis,
                 const std::array<unsigned char, 32>& manifest_hash);
  ~SnapshotWriter();
  SnapshotWriter(const SnapshotWriter&) = delete;
  SnapshotWriter& operator=(const SnapshotWriter&) = delete;

  void append(const BitArray& spins);
  void append(const GaugeConfig& cfg) { append(cfg.spins); }
  std::uint64_t count() const { return count_; }
  void close();  // patches the count into the header; idempotent

 private:
  std::string path_;
  std::ofstream out_;
  int dimension_;
  Basis basis_;
  std::uint32_t linear_size_;
  std::array<unsigned char, 32> hash_;
  std::size_t record_bytes_;
  std::size_t n_links_ = 0;
  std::uint64_t count_ = 0;
  bool closed_ = false;

  std::array<unsigned char, 60> header_bytes() const;
};

struct SnapshotInfo {
  int dimension = 0;
  Basis basis = Basis::X;
  std::uint32_t linear_size = 0;
  std::uint64_t count = 0;
  std::array<unsigned char, 32> manifest_hash{};
  std::size_t record_bytes = 0;
  std::size_t n_links = 0;
};

class SnapshotReader {
 public:
  // throws std::runtime_error on bad magic/version/checksum or a payload
  // shorter/longer than the declared count
  explicit SnapshotReader(const std::string& path);

  const SnapshotInfo& info() const { return info_; }
  BitArray read(std::uint64_t i);  // random access

 private:
  std::ifstream in_;
  std::string path_;
  SnapshotInfo info_;
};

// --- series CSV -----------------------------------------------------------------

// Leading comment block (# key=value: module, params in order, acceptance
// counters as accepted/proposed), one header line, then one row per sample.
// Optional blocks serialize as empty cells.  All doubles use %.17g, and every
// row ends with the manifest hash.
void write_series_csv(const std::string& path, const ObservableSeries& series,
                      const std::string& manifest_hash_hex);

struct LoadedSeries {
  ObservableSeries series;
  std::string manifest_hash;
};
LoadedSeries read_series_csv(const std::string& path);

// one compact JSON object per line, sorted keys (fit reports and the like)
void append_jsonl(const std::string& path, const nlohmann::json& obj);

}  // namespace z2perc
