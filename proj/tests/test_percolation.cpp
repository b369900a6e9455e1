#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "z2perc/percolation.hpp"
#include "z2perc/rng.hpp"

using namespace z2perc;

namespace {

// Covering-space oracle: unroll the torus m-fold along `dim` (an m-fold
// cyclic covering, periodic at the far end) and union-find the string
// subgraph of the covering.  A cluster with net winding w in `dim` connects
// lifts of one base site in tiles t and t+w, so it is detected iff
// w != 0 (mod m).  OR-ing m in {3,4,5} leaves only multiples of 60
// undetectable, and a winding-60 cluster needs >= 60L links — more than any
// lattice tested here even holds.
bool covering_oracle_m(const LatticeTopology& topo, const BitArray& spins, int dim,
                       int m) {
  const int n = topo.site_count();
  std::vector<int> parent(static_cast<std::size_t>(n) * m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  };
  for (LinkId l = 0; l < topo.link_count(); ++l) {
    if (!spins.test(l)) continue;
    const int shift = (topo.link_dir(l) == dim) ? topo.link_wraps(l) : 0;
    for (int t = 0; t < m; ++t)
      unite(t * n + topo.link_base(l), ((t + shift) % m) * n + topo.link_head(l));
  }
  // deck-transformation symmetry: checking tile 0 against the others suffices
  for (int s = 0; s < n; ++s) {
    const int r0 = find(s);
    for (int t = 1; t < m; ++t)
      if (find(t * n + s) == r0) return true;
  }
  return false;
}

bool covering_oracle(const LatticeTopology& topo, const BitArray& spins, int dim) {
  return covering_oracle_m(topo, spins, dim, 3) ||
         covering_oracle_m(topo, spins, dim, 4) ||
         covering_oracle_m(topo, spins, dim, 5);
}

// independent census oracle: BFS over links through shared endpoints
std::vector<std::int64_t> census_oracle(const LatticeTopology& topo,
                                        const BitArray& spins) {
  std::vector<std::uint8_t> seen(topo.link_count(), 0);
  std::vector<std::int64_t> sizes;
  std::vector<LinkId> queue;
  for (LinkId l0 = 0; l0 < topo.link_count(); ++l0) {
    if (!spins.test(l0) || seen[l0]) continue;
    std::int64_t size = 0;
    seen[l0] = 1;
    queue.assign(1, l0);
    while (!queue.empty()) {
      const LinkId l = queue.back();
      queue.pop_back();
      ++size;
      for (SiteId v : {topo.link_base(l), topo.link_head(l)})
        for (LinkId nl : topo.star_links(v))
          if (spins.test(nl) && !seen[nl]) {
            seen[nl] = 1;
            queue.push_back(nl);
          }
    }
    sizes.push_back(size);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

GaugeConfig random_config(const LatticeTopology& topo, double density, Rng& rng) {
  GaugeConfig cfg(topo);
  for (LinkId l = 0; l < topo.link_count(); ++l)
    if (rng.u01() < density) cfg.flip(l);
  return cfg;
}

GaugeConfig translated(const GaugeConfig& cfg, int dim, int shift) {
  const auto& topo = *cfg.topo;
  GaugeConfig out(topo, cfg.basis);
  for (LinkId l = 0; l < topo.link_count(); ++l) {
    if (!cfg.spins.test(l)) continue;
    SiteId s = topo.link_base(l);
    for (int i = 0; i < shift; ++i) s = topo.neighbor(s, dim, +1);
    out.flip(topo.link_at(s, topo.link_dir(l)));
  }
  return out;
}

GaugeConfig reflected(const GaugeConfig& cfg, int axis) {
  const auto& topo = *cfg.topo;
  const int L = topo.linear_size();
  GaugeConfig out(topo, cfg.basis);
  auto reflect_site = [&](SiteId s) {
    auto c = topo.site_coords(s);
    c[axis] = L - 1 - c[axis];
    return topo.site_from_coords(c[0], c[1], c[2]);
  };
  for (LinkId l = 0; l < topo.link_count(); ++l) {
    if (!cfg.spins.test(l)) continue;
    const int d = topo.link_dir(l);
    // a link along the reflected axis flips direction: its new base is the
    // image of its old head
    const SiteId nb = (d == axis) ? reflect_site(topo.link_head(l))
                                  : reflect_site(topo.link_base(l));
    out.flip(topo.link_at(nb, d));
  }
  return out;
}

}  // namespace

TEST_CASE("textbook configurations") {
  LatticeTopology topo(2, 4);

  SUBCASE("vacuum") {
    GaugeConfig cfg(topo);
    auto rep = analyze(cfg);
    CHECK(!rep.percolates);
    CHECK(rep.strength == 0.0);
    CHECK(rep.total_strings == 0);
    CHECK(rep.largest_cluster_links == 0);
    CHECK(cluster_census(cfg).empty());
  }

  SUBCASE("straight winding loop") {
    GaugeConfig cfg(topo);
    for (int x = 0; x < 4; ++x) cfg.flip(topo.link_at(topo.site_from_coords(x, 1), 0));
    CHECK(detect_wrapping(cfg, 0));
    CHECK(!detect_wrapping(cfg, 1));
    auto rep = analyze(cfg);
    CHECK(rep.wraps[0]);
    CHECK(!rep.wraps[1]);
    CHECK(rep.percolates);
    CHECK(rep.largest_cluster_links == 4);
    CHECK(rep.strength == doctest::Approx(4.0 / 32.0));
  }

  SUBCASE("contractible plaquette loop") {
    GaugeConfig cfg(topo);
    for (LinkId l : topo.plaquette_links(0)) cfg.flip(l);
    CHECK(!detect_wrapping(cfg, 0));
    CHECK(!detect_wrapping(cfg, 1));
    auto rep = analyze(cfg);
    CHECK(!rep.percolates);
    CHECK(rep.strength == 0.0);
    CHECK(rep.largest_cluster_links == 4);
    CHECK(cluster_census(cfg) == std::vector<std::int64_t>{4});
  }

  SUBCASE("fully packed") {
    GaugeConfig cfg(topo);
    for (LinkId l = 0; l < topo.link_count(); ++l) cfg.flip(l);
    auto rep = analyze(cfg);
    CHECK(rep.wraps[0]);
    CHECK(rep.wraps[1]);
    CHECK(rep.strength == doctest::Approx(1.0));
  }

  SUBCASE("winding loop plus disjoint plaquette: strength from largest component") {
    GaugeConfig cfg(topo);
    for (int x = 0; x < 4; ++x) cfg.flip(topo.link_at(topo.site_from_coords(x, 0), 0));
    const PlaqId far = topo.site_from_coords(1, 2);  // plane index == site for D=2
    for (LinkId l : topo.plaquette_links(far)) cfg.flip(l);
    auto rep = analyze(cfg);
    CHECK(rep.percolates);
    CHECK(rep.total_strings == 8);
    CHECK(rep.largest_cluster_links == 4);
    CHECK(rep.strength == doctest::Approx(4.0 / 32.0));
    CHECK(cluster_census(cfg) == std::vector<std::int64_t>{4, 4});
  }

  SUBCASE("two disjoint plaquette loops") {
    GaugeConfig cfg(topo);
    for (LinkId l : topo.plaquette_links(topo.site_from_coords(0, 0))) cfg.flip(l);
    for (LinkId l : topo.plaquette_links(topo.site_from_coords(2, 2))) cfg.flip(l);
    CHECK(cluster_census(cfg) == std::vector<std::int64_t>{4, 4});
  }
}

TEST_CASE("3D straight loops wrap only their own dimension") {
  LatticeTopology topo(3, 3);
  for (int dim = 0; dim < 3; ++dim) {
    GaugeConfig cfg(topo);
    SiteId s = topo.site_from_coords(1, 1, 1);
    for (int i = 0; i < 3; ++i) {
      cfg.flip(topo.link_at(s, dim));
      s = topo.neighbor(s, dim, +1);
    }
    for (int k = 0; k < 3; ++k) CHECK(detect_wrapping(cfg, k) == (k == dim));
  }
}

TEST_CASE("basis and dimension preconditions") {
  LatticeTopology topo(2, 4);
  GaugeConfig z(topo, Basis::Z);
  CHECK_THROWS_AS(detect_wrapping(z, 0), std::invalid_argument);
  CHECK_THROWS_AS(analyze(z), std::invalid_argument);
  CHECK_THROWS_AS(cluster_census(z), std::invalid_argument);
  GaugeConfig x(topo);
  CHECK_THROWS_AS(detect_wrapping(x, 2), std::invalid_argument);
  CHECK_THROWS_AS(detect_wrapping(x, -1), std::invalid_argument);
}

TEST_CASE("exhaustive small-lattice agreement with the covering oracle") {
  // every configuration on L=2 (2^8), every <= 8-string configuration on L=3
  SUBCASE("L=2 all configs") {
    LatticeTopology topo(2, 2);
    for (unsigned mask = 0; mask < 256; ++mask) {
      GaugeConfig cfg(topo);
      for (int l = 0; l < 8; ++l)
        if (mask >> l & 1) cfg.flip(l);
      for (int dim = 0; dim < 2; ++dim) {
        CAPTURE(mask);
        CAPTURE(dim);
        CHECK(detect_wrapping(cfg, dim) == covering_oracle(topo, cfg.spins, dim));
      }
    }
  }

  SUBCASE("L=3 configs with at most 8 strings") {
    LatticeTopology topo(2, 3);
    const int nl = topo.link_count();  // 18
    std::vector<int> comb;
    // enumerate subsets by cardinality via lexicographic combinations
    for (int k = 0; k <= 8; ++k) {
      comb.resize(k);
      std::iota(comb.begin(), comb.end(), 0);
      while (true) {
        GaugeConfig cfg(topo);
        for (int l : comb) cfg.flip(l);
        for (int dim = 0; dim < 2; ++dim)
          if (detect_wrapping(cfg, dim) != covering_oracle(topo, cfg.spins, dim)) {
            CAPTURE(dim);
            REQUIRE(false);
          }
        // next combination
        int i = k - 1;
        while (i >= 0 && comb[i] == nl - k + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      }
      if (k == 0) continue;
    }
  }
}

TEST_CASE("random configs agree with the covering oracle") {
  Rng rng(20240817);
  for (auto [D, L] : {std::pair{2, 3}, {2, 4}, {3, 3}}) {
    LatticeTopology topo(D, L);
    for (double density : {0.2, 0.35, 0.5, 0.65, 0.8}) {
      for (int rep = 0; rep < 800; ++rep) {
        auto cfg = random_config(topo, density, rng);
        for (int dim = 0; dim < D; ++dim)
          if (detect_wrapping(cfg, dim) != covering_oracle(topo, cfg.spins, dim)) {
            CAPTURE(D);
            CAPTURE(L);
            CAPTURE(density);
            CAPTURE(dim);
            REQUIRE(false);
          }
      }
    }
  }
}

TEST_CASE("census matches flood-fill oracle on random configs") {
  Rng rng(77);
  for (auto [D, L] : {std::pair{2, 3}, {2, 5}, {3, 3}}) {
    LatticeTopology topo(D, L);
    for (int rep = 0; rep < 500; ++rep) {
      auto cfg = random_config(topo, 0.15 + 0.7 * rng.u01(), rng);
      const auto got = cluster_census(cfg);
      CHECK(got == census_oracle(topo, cfg.spins));
      const auto sum = std::accumulate(got.begin(), got.end(), std::int64_t{0});
      CHECK(sum == cfg.string_count());
      CHECK(std::is_sorted(got.begin(), got.end(), std::greater<>()));
    }
  }
}

TEST_CASE("translation and reflection invariance") {
  Rng rng(5150);
  LatticeTopology topo(2, 4);
  for (int rep = 0; rep < 300; ++rep) {
    auto cfg = random_config(topo, 0.25 + 0.5 * rng.u01(), rng);
    const bool w0 = detect_wrapping(cfg, 0);
    const bool w1 = detect_wrapping(cfg, 1);
    for (int dim = 0; dim < 2; ++dim) {
      auto t = translated(cfg, dim, 1 + static_cast<int>(rng.index(3)));
      CHECK(detect_wrapping(t, 0) == w0);
      CHECK(detect_wrapping(t, 1) == w1);
      auto r = reflected(cfg, dim);
      CHECK(detect_wrapping(r, 0) == w0);
      CHECK(detect_wrapping(r, 1) == w1);
    }
  }
}

TEST_CASE("adding strings never destroys percolation") {
  Rng rng(99);
  LatticeTopology topo(2, 4);
  int checked = 0;
  while (checked < 100) {
    auto cfg = random_config(topo, 0.45, rng);
    if (!analyze(cfg).percolates) continue;
    ++checked;
    GaugeConfig more = cfg;
    for (int add = 0; add < 4; ++add) {
      more.spins.set(rng.index(topo.link_count()), true);
      CHECK(analyze(more).percolates);
    }
  }
}

TEST_CASE("early exit changes nothing") {
  Rng rng(4242);
  LatticeTopology topo(2, 4);
  for (int rep = 0; rep < 400; ++rep) {
    auto cfg = random_config(topo, 0.2 + 0.6 * rng.u01(), rng);
    const auto fast = analyze(cfg, true);
    const auto slow = analyze(cfg, false);
    CHECK(fast.wraps == slow.wraps);
    CHECK(fast.percolates == slow.percolates);
    CHECK(fast.strength == slow.strength);
    CHECK(fast.largest_cluster_links == slow.largest_cluster_links);
  }
}

TEST_CASE("parallel batch equals serial reference") {
  Rng rng(31337);
  LatticeTopology topo(2, 5);
  std::vector<BitArray> snaps;
  for (int i = 0; i < 257; ++i)
    snaps.push_back(random_config(topo, 0.1 + 0.8 * rng.u01(), rng).spins);
  const auto par = analyze_batch(topo, snaps, 4);
  const auto ser = analyze_batch_serial(topo, snaps);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].wraps == ser[i].wraps);
    CHECK(par[i].strength == ser[i].strength);
    CHECK(par[i].largest_cluster_links == ser[i].largest_cluster_links);
    CHECK(par[i].total_strings == ser[i].total_strings);
  }
}

TEST_CASE("report invariants on random configs") {
  Rng rng(8);
  LatticeTopology topo(3, 3);
  for (int rep = 0; rep < 300; ++rep) {
    auto cfg = random_config(topo, rng.u01(), rng);
    auto r = analyze(cfg);
    CHECK(r.largest_cluster_links <= r.total_strings);
    CHECK(r.total_strings <= topo.link_count());
    CHECK(r.strength >= 0.0);
    CHECK(r.strength <= 1.0);
    CHECK(r.percolates == (r.wraps[0] || r.wraps[1] || r.wraps[2]));
    if (!r.percolates) CHECK(r.strength == 0.0);
  }
}
