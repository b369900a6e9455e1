#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace z2perc {

using SiteId = std::int32_t;
using LinkId = std::int32_t;
using PlaqId = std::int32_t;

// Periodic hypercubic lattice, D = 2 or 3, with precomputed incidence tables.
//
// Index conventions (fixed; file formats and tests rely on them):
//   site  = x0 + L*x1 (+ L^2*x2), coordinate 0 fastest
//   link  = site*D + dir, where `site` is the base (lower) endpoint and the
//           link points in +dir
//   plaq  = site*P + plane with planes ordered (0,1), (0,2), (1,2);
//           P = D*(D-1)/2; `site` is the lower-left corner
//
// All tables are plain flattened arrays; spans returned by the accessors stay
// valid for the lifetime of the object.
class LatticeTopology {
 public:
  // throws std::invalid_argument unless D in {2,3} and L >= 2
  LatticeTopology(int dimension, int linear_size);

  int dimension() const { return D_; }
  int linear_size() const { return L_; }
  SiteId site_count() const { return n_sites_; }
  LinkId link_count() const { return n_links_; }
  PlaqId plaquette_count() const { return n_plaqs_; }
  int planes_per_site() const { return P_; }

  std::array<int, 3> site_coords(SiteId s) const;
  SiteId site_from_coords(int x0, int x1, int x2 = 0) const;  // coords already in range

  // neighbor in +-dim with periodic wrap
  SiteId neighbor(SiteId s, int dim, int step) const;

  SiteId link_base(LinkId l) const { return l / D_; }
  int link_dir(LinkId l) const { return l % D_; }
  SiteId link_head(LinkId l) const { return link_head_[l]; }
  LinkId link_at(SiteId base, int dir) const { return base * D_ + dir; }

  // the 2D links incident on a site: +0,+1(,+2) then -0,-1(,-2)
  std::span<const LinkId> star_links(SiteId s) const {
    return {&star_[static_cast<std::size_t>(s) * 2 * D_], static_cast<std::size_t>(2 * D_)};
  }

  // the 4 links bounding a plaquette, counterclockwise from the base corner
  std::span<const LinkId> plaquette_links(PlaqId p) const {
    return {&plaq_[static_cast<std::size_t>(p) * 4], 4};
  }

  // the 2(D-1) plaquettes containing a link
  std::span<const PlaqId> link_plaquettes(LinkId l) const {
    return {&link_plaq_[static_cast<std::size_t>(l) * 2 * (D_ - 1)],
            static_cast<std::size_t>(2 * (D_ - 1))};
  }

  // plane of plaquette p as the two participating dimensions (a < b)
  std::array<int, 2> plane_dims(int plane) const;

  // +1 if the nearest-neighbor step from -> to crosses the periodic cut of
  // dimension `dim` in the positive direction (coordinate L-1 -> 0), -1 for
  // the reverse crossing, 0 otherwise.  Throws std::invalid_argument if the
  // two sites are not nearest neighbors.
  int cut_crossing(SiteId from, SiteId to, int dim) const;

  // Per-link variant: +1 if traversing `l` from base to head wraps around the
  // periodic boundary in dir(l), else 0.  Unlike the site-pair form this is
  // unambiguous at L = 2, where the two parallel links between a pair of
  // sites must be distinguished.
  int link_wraps(LinkId l) const { return link_wraps_[l]; }

 private:
  int D_, L_, P_;
  SiteId n_sites_;
  LinkId n_links_;
  PlaqId n_plaqs_;
  std::vector<SiteId> link_head_;
  std::vector<std::uint8_t> link_wraps_;
  std::vector<LinkId> star_;
  std::vector<LinkId> plaq_;
  std::vector<PlaqId> link_plaq_;
  std::vector<SiteId> nbr_;  // site*2D + d: +0..+D-1 then -0..-D-1
};

LatticeTopology build_lattice(int dimension, int linear_size);

}  // namespace z2perc
