#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "z2perc/io.hpp"
#include "z2perc/rng.hpp"

using namespace z2perc;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() : dir(fs::path("io_scratch") / std::to_string(reinterpret_cast<std::uintptr_t>(this))) {
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const char* name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(bool(f));
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spew(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  REQUIRE(bool(f));
}

const char* kManifestText = R"({
  "experiment": "sweep",
  "module": "classical",
  "master_seed": 7,
  "grid": {"ensemble": "grand", "L": [8, 12], "mu": -0.5, "T_over_h": [1.0, 2.0]},
  "schedule": {"n_samples": 50}
})";

}  // namespace

// ---------------------------------------------------------------------------
// hashing primitives against published test vectors
// ---------------------------------------------------------------------------

TEST_CASE("sha256 known vectors") {
  CHECK(hex_of(sha256_bytes("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(hex_of(sha256_bytes("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("fnv1a32 known vectors") {
  CHECK(fnv1a32(nullptr, 0) == 2166136261u);
  const unsigned char a[] = {'a'};
  CHECK(fnv1a32(a, 1) == 0xe40c292cu);
  const unsigned char foobar[] = {'f', 'o', 'o', 'b', 'a', 'r'};
  CHECK(fnv1a32(foobar, 6) == 0xbf9cf968u);
}

// ---------------------------------------------------------------------------
// manifests
// ---------------------------------------------------------------------------

TEST_CASE("manifest parses and canonicalizes to a fixpoint") {
  const RunManifest m = RunManifest::parse(kManifestText);
  CHECK(m.experiment == "sweep");
  CHECK(m.module == "classical");
  CHECK(m.master_seed == 7);
  CHECK(m.out_dir.empty());
  CHECK(m.grid.at("mu").get<double>() == -0.5);

  const std::string canon = m.canonical();
  // whitespace and key order are gone; reparsing the canonical form must
  // reproduce it byte for byte, otherwise the hash would not be stable
  CHECK(RunManifest::parse(canon).canonical() == canon);
  CHECK(m.hash_hex().size() == 64);
  CHECK(m.hash_hex() == hex_of(sha256_bytes(canon)));

  RunManifest m2 = m;
  m2.grid["L"] = {8, 12, 16};
  CHECK(m2.hash_hex() != m.hash_hex());
}

TEST_CASE("manifest load from disk and failure modes") {
  Scratch tmp;
  spew(tmp("run.json"), kManifestText);
  CHECK(RunManifest::load(tmp("run.json")).hash_hex() ==
        RunManifest::parse(kManifestText).hash_hex());
  CHECK_THROWS_AS(RunManifest::load(tmp("missing.json")), std::invalid_argument);

  CHECK_THROWS_AS(RunManifest::parse("{not json"), std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse("[1,2]"), std::invalid_argument);
  // unknown top-level keys are rejected, not ignored: a typo must not
  // silently change what a manifest means
  CHECK_THROWS_AS(RunManifest::parse(R"({"experiment":"e","module":"qmc",
      "grid":{"L":2},"scheddule":{}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse(R"({"module":"qmc","grid":{"L":2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse(R"({"experiment":"","module":"qmc","grid":{"L":2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse(R"({"experiment":"e","module":"ed","grid":{"L":2}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse(R"({"experiment":"e","module":"qmc","grid":{}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(RunManifest::parse(R"({"experiment":"e","module":"qmc","grid":{"L":2},
      "master_seed":-3})"),
                  std::invalid_argument);
}

TEST_CASE("classical grid expansion order, seeds, labels") {
  RunManifest m = RunManifest::parse(R"({
    "experiment": "e", "module": "classical", "master_seed": 11,
    "grid": {"L": [16, 24], "N": 0, "T_over_h": [0.5, 1.0, 2.0]}
  })");
  const auto pts = expand_grid(m);
  REQUIRE(pts.size() == 6);
  // T_over_h is the innermost axis, L outside it
  const double want_T[] = {0.5, 1.0, 2.0, 0.5, 1.0, 2.0};
  const int want_L[] = {16, 16, 16, 24, 24, 24};
  for (std::size_t i = 0; i < 6; ++i) {
    CAPTURE(i);
    CHECK_FALSE(pts[i].is_qmc);
    CHECK(pts[i].index == static_cast<std::int64_t>(i));
    CHECK(pts[i].seed == stream_seed(11, i));
    CHECK(pts[i].classical.seed == pts[i].seed);
    CHECK(pts[i].classical.L == want_L[i]);
    CHECK(pts[i].classical.T_over_h == want_T[i]);
    CHECK(pts[i].classical.D == 2);
    CHECK(pts[i].classical.h == 1.0);
    CHECK(pts[i].classical.ensemble == Ensemble::Canonical);
  }
  CHECK(pts[0].label == "r00000");
  CHECK(pts[5].label == "r00005");
}

TEST_CASE("canonical density rounds down to an even particle number") {
  RunManifest m = RunManifest::parse(R"({
    "experiment": "e", "module": "classical",
    "grid": {"L": 4, "density": [0.25, 0.3], "T_over_h": 1.0}
  })");
  const auto pts = expand_grid(m);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].classical.n_particles == 4);  // 0.25*16 lands even
  CHECK(pts[1].classical.n_particles == 4);  // 0.3*16 = 4.8 -> 5 -> even 4
}

TEST_CASE("classical grid validation") {
  auto expand = [](const char* grid) {
    RunManifest m = RunManifest::parse(std::string(R"({"experiment":"e","module":"classical","grid":)") +
                                       grid + "}");
    return expand_grid(m);
  };
  CHECK_THROWS_AS(expand(R"({"L":8,"N":0,"density":0.5,"T_over_h":1})"), std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":8,"N":0,"mu":0.1,"T_over_h":1})"), std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":8,"T_over_h":1})"), std::invalid_argument);  // canonical needs N
  CHECK_THROWS_AS(expand(R"({"ensemble":"grand","L":8,"N":4,"T_over_h":1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":8,"N":0})"), std::invalid_argument);       // missing T_over_h
  CHECK_THROWS_AS(expand(R"({"N":0,"T_over_h":1})"), std::invalid_argument);  // missing L
  CHECK_THROWS_AS(expand(R"({"L":8,"N":0,"T_over_h":1,"J":1})"), std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":[],"N":0,"T_over_h":1})"), std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":8,"N":0,"T_over_h":1,"ensemble":"micro"})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(expand(R"({"L":8,"density":1.5,"T_over_h":1})"), std::invalid_argument);

  const auto grand = expand(R"({"ensemble":"grand","L":8,"mu":[-0.8,0.0],"T_over_h":2})");
  REQUIRE(grand.size() == 2);
  CHECK(grand[0].classical.ensemble == Ensemble::GrandCanonical);
  CHECK(grand[0].classical.mu == -0.8);
  CHECK(grand[1].classical.mu == 0.0);
}

TEST_CASE("qmc grid expansion and beta/T handling") {
  RunManifest m = RunManifest::parse(R"({
    "experiment": "e", "module": "qmc", "master_seed": 3,
    "grid": {"basis": ["x", "z"], "L": 2, "beta": 2.0,
             "h": [0.0, 0.15], "lambda": [0.0, 0.15]}
  })");
  const auto pts = expand_grid(m);
  REQUIRE(pts.size() == 8);
  // lambda innermost, then h, then basis outermost
  CHECK(pts[0].qmc.basis == Basis::X);
  CHECK(pts[4].qmc.basis == Basis::Z);
  const double want_h[] = {0, 0, 0.15, 0.15};
  const double want_lam[] = {0, 0.15, 0, 0.15};
  for (std::size_t i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(pts[i].is_qmc);
    CHECK(pts[i].qmc.h == want_h[i]);
    CHECK(pts[i].qmc.lambda == want_lam[i]);
    CHECK(pts[i].qmc.mu == 1.0);
    CHECK(pts[i].qmc.J == 1.0);
    CHECK(pts[i].qmc.beta == 2.0);
    CHECK(pts[i].seed == stream_seed(3, i));
  }

  RunManifest mt = RunManifest::parse(R"({
    "experiment": "e", "module": "qmc",
    "grid": {"L": 6, "T": [0.5, 0.25]}
  })");
  const auto tp = expand_grid(mt);
  REQUIRE(tp.size() == 2);
  CHECK(tp[0].qmc.effective_beta() == doctest::Approx(2.0));
  CHECK(tp[1].qmc.effective_beta() == doctest::Approx(4.0));

  // no beta and no T: the ground-state recipe beta = L
  RunManifest mg = RunManifest::parse(R"({
    "experiment": "e", "module": "qmc", "grid": {"L": 6}
  })");
  CHECK(expand_grid(mg)[0].qmc.effective_beta() == doctest::Approx(6.0));

  auto bad = [](const char* grid) {
    return RunManifest::parse(std::string(R"({"experiment":"e","module":"qmc","grid":)") + grid +
                              "}");
  };
  CHECK_THROWS_AS(expand_grid(bad(R"({"L":2,"beta":2,"T":0.5})")), std::invalid_argument);
  CHECK_THROWS_AS(expand_grid(bad(R"({"L":2,"T":0})")), std::invalid_argument);
  CHECK_THROWS_AS(expand_grid(bad(R"({"L":2,"basis":"y"})")), std::invalid_argument);
  CHECK_THROWS_AS(expand_grid(bad(R"({"L":2,"N":0})")), std::invalid_argument);
}

TEST_CASE("schedule keys are checked") {
  auto with_sched = [](const char* module, const char* sched) {
    return RunManifest::parse(std::string(R"({"experiment":"e","module":")") + module +
                              R"(","grid":{"L":8,"N":0,"T_over_h":1},"schedule":)" + sched + "}");
  };
  // classical schedule happy path
  RunManifest m = with_sched("classical", R"({"thermalization_updates":10,
      "updates_between_samples":5,"n_samples":3})");
  const auto pts = expand_grid(m);
  CHECK(pts[0].classical.schedule.thermalization_updates == 10);
  CHECK(pts[0].classical.schedule.updates_between_samples == 5);
  CHECK(pts[0].classical.schedule.n_samples == 3);
  CHECK_THROWS_AS(expand_grid(with_sched("classical", R"({"sweeps":2})")), std::invalid_argument);
  CHECK_THROWS_AS(expand_grid(with_sched("classical", R"({"n_samples":0})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(expand_grid(with_sched("classical", R"({"n_samples":1.5})")),
                  std::invalid_argument);

  RunManifest q = RunManifest::parse(R"({"experiment":"e","module":"qmc",
      "grid":{"L":2},"schedule":{"therm_sweeps":7,"sweeps_per_sample":2,"n_samples":4}})");
  const auto qp = expand_grid(q);
  CHECK(qp[0].qmc.schedule.therm_sweeps == 7);
  CHECK(qp[0].qmc.schedule.sweeps_per_sample == 2);
  CHECK(qp[0].qmc.schedule.n_samples == 4);
  CHECK_THROWS_AS(expand_grid(RunManifest::parse(
                      R"({"experiment":"e","module":"qmc","grid":{"L":2},
                          "schedule":{"thermalization_updates":5,"n_samples":1}})")),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// snapshot streams
// ---------------------------------------------------------------------------

namespace {

std::vector<BitArray> random_configs(const LatticeTopology& topo, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<BitArray> out;
  for (int i = 0; i < n; ++i) {
    BitArray b(static_cast<std::size_t>(topo.link_count()));
    for (std::size_t l = 0; l < b.size(); ++l)
      if (rng.coin()) b.set(l, true);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace

TEST_CASE("snapshot round-trip is exact and byte-stable") {
  Scratch tmp;
  for (const auto& [D, L] : std::vector<std::pair<int, int>>{{2, 4}, {3, 3}}) {
    CAPTURE(D);
    const LatticeTopology topo(D, L);
    const auto cfgs = random_configs(topo, 17, 99 + static_cast<std::uint64_t>(D));
    const auto hash = sha256_bytes("snapshot-test");

    for (const char* name : {"a.snap", "b.snap"}) {
      SnapshotWriter w(tmp(name), topo, Basis::Z, hash);
      for (const auto& c : cfgs) w.append(c);
      CHECK(w.count() == 17);
      w.close();
    }
    CHECK(slurp(tmp("a.snap")) == slurp(tmp("b.snap")));  // identical inputs, identical bytes

    SnapshotReader r(tmp("a.snap"));
    CHECK(r.info().dimension == D);
    CHECK(r.info().basis == Basis::Z);
    CHECK(r.info().linear_size == static_cast<std::uint32_t>(L));
    CHECK(r.info().count == 17);
    CHECK(r.info().manifest_hash == hash);
    CHECK(r.info().n_links == static_cast<std::size_t>(topo.link_count()));
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      const BitArray got = r.read(i);
      REQUIRE(got.size() == cfgs[i].size());
      for (std::size_t l = 0; l < got.size(); ++l) CHECK(got.test(l) == cfgs[i].test(l));
    }
    CHECK_THROWS_AS(r.read(17), std::out_of_range);
  }
}

TEST_CASE("snapshot header layout is the documented one") {
  Scratch tmp;
  const LatticeTopology topo(2, 6);
  const auto hash = sha256_bytes("layout");
  {
    SnapshotWriter w(tmp("s.snap"), topo, Basis::X, hash);
    for (const auto& c : random_configs(topo, 3, 5)) w.append(c);
  }  // destructor closes and patches the count
  const std::string bytes = slurp(tmp("s.snap"));
  REQUIRE(bytes.size() == 60 + 3 * ((72 + 7) / 8));
  CHECK(bytes.substr(0, 8) == "Z2SNAP01");
  const auto u8 = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  CHECK(u8(8) == 1);   // version, little endian
  CHECK(u8(9) == 0);
  CHECK(u8(10) == 2);  // dimension
  CHECK(u8(11) == 0);  // basis X
  CHECK(u8(12) == 6);  // linear size
  CHECK(u8(13) == 0);
  CHECK(u8(16) == 3);  // count patched on close
  for (std::size_t i = 0; i < 32; ++i) CHECK(u8(24 + i) == hash[i]);
  // independent FNV-1a of the first 56 bytes
  std::uint32_t f = 2166136261u;
  for (std::size_t i = 0; i < 56; ++i) f = (f ^ u8(i)) * 16777619u;
  const std::uint32_t stored = u8(56) | (u8(57) << 8) | (static_cast<std::uint32_t>(u8(58)) << 16) |
                               (static_cast<std::uint32_t>(u8(59)) << 24);
  CHECK(stored == f);
}

TEST_CASE("snapshot reader rejects damaged files") {
  Scratch tmp;
  const LatticeTopology topo(2, 4);
  const auto hash = sha256_bytes("x");
  {
    SnapshotWriter w(tmp("good.snap"), topo, Basis::X, hash);
    for (const auto& c : random_configs(topo, 4, 1)) w.append(c);
  }
  const std::string good = slurp(tmp("good.snap"));

  auto damaged = [&](std::size_t at, char to) {
    std::string b = good;
    b[at] = to;
    spew(tmp("bad.snap"), b);
    return tmp("bad.snap");
  };
  CHECK_THROWS_WITH_AS(SnapshotReader(damaged(0, 'Y')), doctest::Contains("magic"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(SnapshotReader(damaged(8, 2)), doctest::Contains("version"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(SnapshotReader(damaged(30, good[30] + 1)), doctest::Contains("checksum"),
                       std::runtime_error);

  spew(tmp("short.snap"), good.substr(0, good.size() - 1));
  CHECK_THROWS_WITH_AS(SnapshotReader(tmp("short.snap")), doctest::Contains("length"),
                       std::runtime_error);
  spew(tmp("long.snap"), good + "z");
  CHECK_THROWS_AS(SnapshotReader(tmp("long.snap")), std::runtime_error);
  spew(tmp("stub.snap"), good.substr(0, 30));
  CHECK_THROWS_WITH_AS(SnapshotReader(tmp("stub.snap")), doctest::Contains("header"),
                       std::runtime_error);
  CHECK_THROWS_AS(SnapshotReader(tmp("nothere.snap")), std::runtime_error);
}

TEST_CASE("snapshot writer misuse") {
  Scratch tmp;
  const LatticeTopology topo(2, 4);
  SnapshotWriter w(tmp("w.snap"), topo, Basis::X, {});
  CHECK_THROWS_AS(w.append(BitArray(7)), std::invalid_argument);
  w.close();
  w.close();  // idempotent
  CHECK_THROWS_AS(w.append(BitArray(static_cast<std::size_t>(topo.link_count()))),
                  std::logic_error);
}

// ---------------------------------------------------------------------------
// series CSV
// ---------------------------------------------------------------------------

namespace {

ObservableSeries mixed_series() {
  ObservableSeries s;
  s.module = "qmc";
  s.params = {{"L", "4"}, {"beta", "2.5"}, {"basis", "z"}};
  s.acceptance = {{"pair_link", {120, 37}}, {"timeshift", {80, 79}}};

  SampleRecord perc;  // percolation block only
  perc.index = 0;
  perc.has_percolation = true;
  perc.percolates = true;
  perc.strength = 0.1 + 0.2;  // exercises full-precision round-trip
  perc.largest_cluster = 9;
  perc.total_strings = 12;
  perc.matter_density = 0.125;
  perc.energy = -3.0;

  SampleRecord pair = perc;  // adds the pair-distance column
  pair.index = 1;
  pair.percolates = false;
  pair.has_pair_distance = true;
  pair.pair_distance = 1.4142135623730951;

  SampleRecord qmc;  // qmc block only
  qmc.index = 2;
  qmc.energy = -8.0719750541234567;
  qmc.has_qmc = true;
  qmc.tau_x = 0.3333333333333333;
  qmc.star_avg = 0.9999999999999998;
  qmc.plaq_avg = -1.0 / 3.0;
  qmc.n_events = 42;

  SampleRecord fm = qmc;  // qmc plus flux products
  fm.index = 3;
  fm.has_fm = true;
  fm.fm_half = -1.0;
  fm.fm_full = 1.0;

  SampleRecord all = fm;  // every optional block at once
  all.index = 4;
  all.has_percolation = true;
  all.percolates = false;
  all.strength = 0.0;
  all.largest_cluster = 0;
  all.total_strings = 0;
  all.matter_density = 0.0;
  all.has_pair_distance = true;
  all.pair_distance = 2.0;

  s.samples = {perc, pair, qmc, fm, all};
  return s;
}

}  // namespace

TEST_CASE("series csv round-trips every flag combination at full precision") {
  Scratch tmp;
  const ObservableSeries s = mixed_series();
  const std::string hash(64, 'a');
  write_series_csv(tmp("s.csv"), s, hash);
  write_series_csv(tmp("s2.csv"), s, hash);
  CHECK(slurp(tmp("s.csv")) == slurp(tmp("s2.csv")));

  const LoadedSeries back = read_series_csv(tmp("s.csv"));
  CHECK(back.manifest_hash == hash);
  CHECK(back.series.module == "qmc");
  REQUIRE(back.series.params.size() == 3);
  CHECK(back.series.params[1].first == "beta");
  CHECK(back.series.params[1].second == "2.5");
  REQUIRE(back.series.acceptance.size() == 2);
  CHECK(back.series.acceptance[0].first == "pair_link");
  CHECK(back.series.acceptance[0].second.proposed == 120);
  CHECK(back.series.acceptance[0].second.accepted == 37);
  CHECK(back.series.acceptance[1].second.accepted == 79);

  REQUIRE(back.series.samples.size() == s.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    CAPTURE(i);
    const SampleRecord& a = s.samples[i];
    const SampleRecord& b = back.series.samples[i];
    CHECK(a.index == b.index);
    CHECK(a.energy == b.energy);  // exact: %.17g is lossless for doubles
    REQUIRE(a.has_percolation == b.has_percolation);
    if (a.has_percolation) {
      CHECK(a.percolates == b.percolates);
      CHECK(a.strength == b.strength);
      CHECK(a.largest_cluster == b.largest_cluster);
      CHECK(a.total_strings == b.total_strings);
      CHECK(a.matter_density == b.matter_density);
    }
    REQUIRE(a.has_pair_distance == b.has_pair_distance);
    if (a.has_pair_distance) CHECK(a.pair_distance == b.pair_distance);
    REQUIRE(a.has_qmc == b.has_qmc);
    if (a.has_qmc) {
      CHECK(a.tau_x == b.tau_x);
      CHECK(a.star_avg == b.star_avg);
      CHECK(a.plaq_avg == b.plaq_avg);
      CHECK(a.n_events == b.n_events);
    }
    REQUIRE(a.has_fm == b.has_fm);
    if (a.has_fm) {
      CHECK(a.fm_half == b.fm_half);
      CHECK(a.fm_full == b.fm_full);
    }
  }
}

TEST_CASE("series csv rejects damage") {
  Scratch tmp;
  const ObservableSeries s = mixed_series();
  const std::string hash(64, 'b');
  write_series_csv(tmp("s.csv"), s, hash);
  std::string text = slurp(tmp("s.csv"));

  // a row whose manifest hash disagrees with the rest of the file
  std::string forged = text + "9,,,,,,1.0,,,,,,,," + std::string(64, 'c') + "\n";
  spew(tmp("forged.csv"), forged);
  CHECK_THROWS_WITH_AS(read_series_csv(tmp("forged.csv")), doctest::Contains("hash"),
                       std::runtime_error);

  spew(tmp("clipped.csv"), text + "9,,,,,,1.0\n");
  CHECK_THROWS_WITH_AS(read_series_csv(tmp("clipped.csv")), doctest::Contains("row"),
                       std::runtime_error);

  const auto hdr = text.find("index,percolates");
  std::string retitled = text;
  retitled.replace(hdr, 5, "INDEX");
  spew(tmp("retitled.csv"), retitled);
  CHECK_THROWS_WITH_AS(read_series_csv(tmp("retitled.csv")), doctest::Contains("header"),
                       std::runtime_error);

  spew(tmp("empty.csv"), "# module=qmc\n");
  CHECK_THROWS_AS(read_series_csv(tmp("empty.csv")), std::runtime_error);
  CHECK_THROWS_AS(read_series_csv(tmp("absent.csv")), std::runtime_error);
}

TEST_CASE("jsonl appends compact sorted-key lines") {
  Scratch tmp;
  append_jsonl(tmp("r.jsonl"), nlohmann::json{{"b", 1}, {"a", 2}});
  append_jsonl(tmp("r.jsonl"), nlohmann::json{{"x", "y"}});
  CHECK(slurp(tmp("r.jsonl")) == "{\"a\":2,\"b\":1}\n{\"x\":\"y\"}\n");
}
