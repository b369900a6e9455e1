#include "z2perc/percolation.hpp"

#include <algorithm>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace z2perc {
namespace {

void require_xbasis(const GaugeConfig& cfg) {
  if (cfg.basis != Basis::X)
    throw std::invalid_argument(
        "percolation: strings are only defined on electric-field (XBasis) snapshots");
}

// One DFS pass for one dimension.  `discovered` is shared across starting
// sites: distinct clusters can never touch, so winding numbers from an
// earlier cluster are never compared against the current one.
bool detect_dim(const LatticeTopology& topo, const BitArray& spins, int dim,
                bool early_exit) {
  const SiteId n = topo.site_count();
  std::vector<std::uint8_t> discovered(n, 0);
  std::vector<std::int32_t> winding(n, 0);
  std::vector<SiteId> stack;
  bool found = false;

  for (SiteId s0 = 0; s0 < n; ++s0) {
    if (discovered[s0]) continue;
    bool touches = false;
    for (LinkId l : topo.star_links(s0))
      if (spins.test(l)) {
        touches = true;
        break;
      }
    if (!touches) continue;

    discovered[s0] = 1;
    winding[s0] = 0;
    stack.assign(1, s0);
    while (!stack.empty()) {
      const SiteId v = stack.back();
      stack.pop_back();
      const std::int32_t wv = winding[v];
      for (LinkId l : topo.star_links(v)) {
        if (!spins.test(l)) continue;
        const SiteId base = topo.link_base(l);
        const bool forward = (v == base);
        const SiteId u = forward ? topo.link_head(l) : base;
        std::int32_t wn = wv;
        if (topo.link_dir(l) == dim) {
          // crossing sign of traversing l from v; link_wraps is for base->head
          wn += forward ? topo.link_wraps(l) : -topo.link_wraps(l);
        }
        if (!discovered[u]) {
          discovered[u] = 1;
          winding[u] = wn;
          stack.push_back(u);
        } else if (winding[u] != wn) {
          // same site reached on paths with different net winding => the
          // cluster wraps the torus in this dimension
          if (early_exit) return true;
          found = true;
        }
      }
    }
  }
  return found;
}

struct UnionFind {
  std::vector<SiteId> parent;
  explicit UnionFind(SiteId n) : parent(n) {
    for (SiteId i = 0; i < n; ++i) parent[i] = i;
  }
  SiteId find(SiteId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(SiteId a, SiteId b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[b] = a;
  }
};

std::vector<std::int64_t> census_spins(const LatticeTopology& topo,
                                       const BitArray& spins) {
  UnionFind uf(topo.site_count());
  for (LinkId l = 0; l < topo.link_count(); ++l)
    if (spins.test(l)) uf.unite(topo.link_base(l), topo.link_head(l));
  std::vector<std::int64_t> cnt(topo.site_count(), 0);
  for (LinkId l = 0; l < topo.link_count(); ++l)
    if (spins.test(l)) ++cnt[uf.find(topo.link_base(l))];
  std::vector<std::int64_t> sizes;
  for (auto c : cnt)
    if (c > 0) sizes.push_back(c);
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

}  // namespace

bool detect_wrapping(const GaugeConfig& cfg, int dim, bool early_exit) {
  require_xbasis(cfg);
  if (dim < 0 || dim >= cfg.topo->dimension())
    throw std::invalid_argument("detect_wrapping: dimension out of range");
  return detect_dim(*cfg.topo, cfg.spins, dim, early_exit);
}

namespace detail {

PercolationReport analyze_spins(const LatticeTopology& topo, const BitArray& spins,
                                bool early_exit) {
  PercolationReport rep;
  for (int k = 0; k < topo.dimension(); ++k) {
    rep.wraps[k] = detect_dim(topo, spins, k, early_exit);
    rep.percolates = rep.percolates || rep.wraps[k];
  }
  const auto sizes = census_spins(topo, spins);
  rep.largest_cluster_links = sizes.empty() ? 0 : sizes.front();
  rep.total_strings = static_cast<std::int64_t>(spins.count());
  rep.strength = rep.percolates ? static_cast<double>(rep.largest_cluster_links) /
                                      static_cast<double>(topo.link_count())
                                : 0.0;
  return rep;
}

}  // namespace detail

PercolationReport analyze(const GaugeConfig& cfg, bool early_exit) {
  require_xbasis(cfg);
  return detail::analyze_spins(*cfg.topo, cfg.spins, early_exit);
}

std::vector<std::int64_t> cluster_census(const GaugeConfig& cfg) {
  require_xbasis(cfg);
  return census_spins(*cfg.topo, cfg.spins);
}

std::vector<PercolationReport> analyze_batch(const LatticeTopology& topo,
                                             std::span<const BitArray> snaps,
                                             int workers) {
  std::vector<PercolationReport> out(snaps.size());
#ifdef _OPENMP
  const std::int64_t n = static_cast<std::int64_t>(snaps.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers > 0 ? workers : omp_get_max_threads())
  for (std::int64_t i = 0; i < n; ++i)
    out[i] = detail::analyze_spins(topo, snaps[i], true);
#else
  (void)workers;
  for (std::size_t i = 0; i < snaps.size(); ++i)
    out[i] = detail::analyze_spins(topo, snaps[i], true);
#endif
  return out;
}

std::vector<PercolationReport> analyze_batch_serial(const LatticeTopology& topo,
                                                    std::span<const BitArray> snaps) {
  std::vector<PercolationReport> out(snaps.size());
  for (std::size_t i = 0; i < snaps.size(); ++i)
    out[i] = detail::analyze_spins(topo, snaps[i], true);
  return out;
}

}  // namespace z2perc
