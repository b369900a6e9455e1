#pragma once

#include <cstdint>
#include <vector>

#include "z2perc/bits.hpp"
#include "z2perc/lattice.hpp"
#include "z2perc/rng.hpp"

namespace z2perc {

enum class Basis : std::uint8_t { X = 0, Z = 1 };

// One spin per link, tau = +-1, stored packed (bit set == -1).  `basis` tags
// which operator the stored eigenvalues belong to; percolation observables
// are only meaningful for Basis::X, where a set bit is an electric string.
struct GaugeConfig {
  const LatticeTopology* topo = nullptr;
  BitArray spins;
  Basis basis = Basis::X;

  GaugeConfig() = default;
  GaugeConfig(const LatticeTopology& t, Basis b = Basis::X)
      : topo(&t), spins(static_cast<std::size_t>(t.link_count())), basis(b) {}

  int spin(LinkId l) const { return spins.test(l) ? -1 : +1; }
  void flip(LinkId l) { spins.flip(l); }

  int star_product(SiteId s) const {
    int prod = 1;
    for (LinkId l : topo->star_links(s)) prod *= spin(l);
    return prod;
  }

  int plaquette_product(PlaqId p) const {
    int prod = 1;
    for (LinkId l : topo->plaquette_links(p)) prod *= spin(l);
    return prod;
  }

  // matter occupation derived from the Gauss law, n = (1 - prod_star tau)/2
  int occupation(SiteId s) const { return (1 - star_product(s)) / 2; }

  std::int64_t string_count() const { return static_cast<std::int64_t>(spins.count()); }
};

// Sites where the Gauss law (-1)^n = prod_star tau is violated, given the
// intended matter occupation per site.  Empty result == valid state.
std::vector<SiteId> gauss_residual(const GaugeConfig& cfg,
                                   const std::vector<std::uint8_t>& occupied);

// H = -h sum_l tau_l
double energy_canonical(const GaugeConfig& cfg, double h);

// H = -h sum_l tau_l - mu sum_j n_j with n derived from the Gauss law
double energy_grand(const GaugeConfig& cfg, double h, double mu);

double matter_density(const GaugeConfig& cfg);

// Canonical-ensemble state: explicit matter positions plus the movable-site
// cache the sampler needs for O(1) proposal picks.
struct CanonicalState {
  GaugeConfig config;
  std::vector<std::uint8_t> occupied;   // per site
  std::vector<SiteId> movable;          // occupied sites with >= 1 free neighbor
  std::vector<std::int32_t> movable_pos;  // site -> slot in movable, -1 if absent
  int n_particles = 0;

  bool is_movable(SiteId s) const { return movable_pos[s] >= 0; }
  int free_neighbor_count(SiteId s) const;

  // re-derive a site's movable status from `occupied` and fix the cache
  void refresh_movable(SiteId s);
  // recheck s and all its neighbors (call after occupancy changed at s)
  void refresh_movable_around(SiteId s);

  // full O(N) rebuild/verify of the cache; returns false if it was stale
  bool check_movable_cache();
};

// Random N/2 nearest-neighbor dimer pairs: each pair gets two adjacent
// particles connected by one string link.  Satisfies the Gauss law by
// construction.  n_particles must be even and <= site count.
CanonicalState init_dimers(const LatticeTopology& topo, int n_particles, Rng& rng);

}  // namespace z2perc
