#include "z2perc/gauge.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace z2perc {

std::vector<SiteId> gauss_residual(const GaugeConfig& cfg,
                                   const std::vector<std::uint8_t>& occupied) {
  if (occupied.size() != static_cast<std::size_t>(cfg.topo->site_count()))
    throw std::invalid_argument("gauss_residual: occupation vector has wrong size");
  std::vector<SiteId> bad;
  for (SiteId s = 0; s < cfg.topo->site_count(); ++s) {
    const int expect = occupied[s] ? -1 : +1;  // (-1)^n
    if (cfg.star_product(s) != expect) bad.push_back(s);
  }
  return bad;
}

double energy_canonical(const GaugeConfig& cfg, double h) {
  const auto links = static_cast<double>(cfg.topo->link_count());
  return -h * (links - 2.0 * static_cast<double>(cfg.spins.count()));
}

double energy_grand(const GaugeConfig& cfg, double h, double mu) {
  double n = 0;
  for (SiteId s = 0; s < cfg.topo->site_count(); ++s) n += cfg.occupation(s);
  return energy_canonical(cfg, h) - mu * n;
}

double matter_density(const GaugeConfig& cfg) {
  std::int64_t n = 0;
  for (SiteId s = 0; s < cfg.topo->site_count(); ++s) n += cfg.occupation(s);
  return static_cast<double>(n) / static_cast<double>(cfg.topo->site_count());
}

int CanonicalState::free_neighbor_count(SiteId s) const {
  const auto& topo = *config.topo;
  int free = 0;
  for (int d = 0; d < topo.dimension(); ++d) {
    if (!occupied[topo.neighbor(s, d, +1)]) ++free;
    if (!occupied[topo.neighbor(s, d, -1)]) ++free;
  }
  return free;
}

void CanonicalState::refresh_movable(SiteId s) {
  const bool should = occupied[s] && free_neighbor_count(s) > 0;
  const bool is = movable_pos[s] >= 0;
  if (should && !is) {
    movable_pos[s] = static_cast<std::int32_t>(movable.size());
    movable.push_back(s);
  } else if (!should && is) {
    const std::int32_t idx = movable_pos[s];
    const SiteId last = movable.back();
    movable[idx] = last;
    movable_pos[last] = idx;
    movable.pop_back();
    movable_pos[s] = -1;
  }
}

void CanonicalState::refresh_movable_around(SiteId s) {
  const auto& topo = *config.topo;
  refresh_movable(s);
  for (int d = 0; d < topo.dimension(); ++d) {
    refresh_movable(topo.neighbor(s, d, +1));
    refresh_movable(topo.neighbor(s, d, -1));
  }
}

bool CanonicalState::check_movable_cache() {
  const auto& topo = *config.topo;
  for (SiteId s = 0; s < topo.site_count(); ++s) {
    const bool should = occupied[s] && free_neighbor_count(s) > 0;
    const bool is = movable_pos[s] >= 0;
    if (should != is) return false;
    if (is && movable[movable_pos[s]] != s) return false;
  }
  std::size_t n = 0;
  for (SiteId s = 0; s < topo.site_count(); ++s)
    if (movable_pos[s] >= 0) ++n;
  return n == movable.size();
}

namespace {

// boustrophedon enumeration: consecutive sites are always nearest neighbors
std::vector<SiteId> snake_order(const LatticeTopology& topo) {
  const int L = topo.linear_size();
  std::vector<SiteId> order;
  order.reserve(topo.site_count());
  const int Lz = topo.dimension() == 3 ? L : 1;
  std::vector<SiteId> plane;
  for (int z = 0; z < Lz; ++z) {
    plane.clear();
    for (int y = 0; y < L; ++y)
      for (int i = 0; i < L; ++i) {
        const int x = (y % 2 == 0) ? i : L - 1 - i;
        plane.push_back(topo.site_from_coords(x, y, z));
      }
    if (z % 2 == 1) std::reverse(plane.begin(), plane.end());
    order.insert(order.end(), plane.begin(), plane.end());
  }
  return order;
}

LinkId connecting_link(const LatticeTopology& topo, SiteId a, SiteId b) {
  for (int d = 0; d < topo.dimension(); ++d) {
    if (topo.neighbor(a, d, +1) == b) return topo.link_at(a, d);
    if (topo.neighbor(b, d, +1) == a) return topo.link_at(b, d);
  }
  throw std::logic_error("connecting_link: sites are not adjacent");
}

}  // namespace

CanonicalState init_dimers(const LatticeTopology& topo, int n_particles, Rng& rng) {
  if (n_particles < 0 || n_particles % 2 != 0 || n_particles > topo.site_count())
    throw std::invalid_argument("init_dimers: particle number must be even and within [0, N_sites], got " +
                                std::to_string(n_particles));

  const int want = n_particles / 2;
  std::vector<std::pair<SiteId, SiteId>> pairs;
  pairs.reserve(want);

  // randomized greedy matching; usually succeeds well past half filling
  {
    std::vector<SiteId> perm(topo.site_count());
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.index(i)]);
    std::vector<std::uint8_t> used(topo.site_count(), 0);
    SiteId cand[6];
    for (SiteId s : perm) {
      if (static_cast<int>(pairs.size()) == want) break;
      if (used[s]) continue;
      int nc = 0;
      for (int d = 0; d < topo.dimension(); ++d) {
        if (SiteId v = topo.neighbor(s, d, +1); !used[v] && v != s) cand[nc++] = v;
        if (SiteId v = topo.neighbor(s, d, -1); !used[v] && v != s) cand[nc++] = v;
      }
      if (nc == 0) continue;
      const SiteId v = cand[rng.index(nc)];
      used[s] = used[v] = 1;
      pairs.emplace_back(s, v);
    }
  }

  // Greedy can strand isolated free sites near full packing.  Fall back to
  // pairing consecutive sites of a snake walk, which always yields
  // floor(N/2) disjoint nearest-neighbor pairs; sample the wanted number.
  if (static_cast<int>(pairs.size()) != want) {
    pairs.clear();
    const auto order = snake_order(topo);
    std::vector<std::int32_t> slot(order.size() / 2);
    std::iota(slot.begin(), slot.end(), 0);
    for (int i = 0; i < want; ++i)
      std::swap(slot[i], slot[i + rng.index(slot.size() - i)]);
    for (int i = 0; i < want; ++i)
      pairs.emplace_back(order[2 * slot[i]], order[2 * slot[i] + 1]);
  }

  CanonicalState st;
  st.config = GaugeConfig(topo, Basis::X);
  st.occupied.assign(topo.site_count(), 0);
  st.movable_pos.assign(topo.site_count(), -1);
  st.n_particles = n_particles;
  for (const auto& [a, b] : pairs) {
    st.occupied[a] = st.occupied[b] = 1;
    st.config.flip(connecting_link(topo, a, b));
  }
  for (SiteId s = 0; s < topo.site_count(); ++s) st.refresh_movable(s);
  return st;
}

}  // namespace z2perc
