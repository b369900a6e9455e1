#include "z2perc/lattice.hpp"

#include <stdexcept>
#include <string>

namespace z2perc {

LatticeTopology::LatticeTopology(int dimension, int linear_size)
    : D_(dimension), L_(linear_size) {
  if (D_ != 2 && D_ != 3)
    throw std::invalid_argument("lattice: dimension must be 2 or 3, got " +
                                std::to_string(D_));
  if (L_ < 2)
    throw std::invalid_argument("lattice: linear size must be >= 2, got " +
                                std::to_string(L_));

  P_ = D_ * (D_ - 1) / 2;
  n_sites_ = 1;
  for (int d = 0; d < D_; ++d) n_sites_ *= L_;
  n_links_ = n_sites_ * D_;
  n_plaqs_ = n_sites_ * P_;

  // neighbor table
  nbr_.resize(static_cast<std::size_t>(n_sites_) * 2 * D_);
  for (SiteId s = 0; s < n_sites_; ++s) {
    const auto c = site_coords(s);
    for (int d = 0; d < D_; ++d) {
      auto cp = c;
      cp[d] = (c[d] + 1) % L_;
      nbr_[static_cast<std::size_t>(s) * 2 * D_ + d] = site_from_coords(cp[0], cp[1], cp[2]);
      cp[d] = (c[d] + L_ - 1) % L_;
      nbr_[static_cast<std::size_t>(s) * 2 * D_ + D_ + d] =
          site_from_coords(cp[0], cp[1], cp[2]);
    }
  }

  link_head_.resize(n_links_);
  link_wraps_.resize(n_links_);
  for (LinkId l = 0; l < n_links_; ++l) {
    const SiteId s = link_base(l);
    const int d = link_dir(l);
    link_head_[l] = neighbor(s, d, +1);
    link_wraps_[l] = (site_coords(s)[d] == L_ - 1) ? 1 : 0;
  }

  // star: outgoing +0..+D-1, then incoming (links based at the -d neighbor)
  star_.resize(static_cast<std::size_t>(n_sites_) * 2 * D_);
  for (SiteId s = 0; s < n_sites_; ++s) {
    LinkId* row = &star_[static_cast<std::size_t>(s) * 2 * D_];
    for (int d = 0; d < D_; ++d) row[d] = link_at(s, d);
    for (int d = 0; d < D_; ++d) row[D_ + d] = link_at(neighbor(s, d, -1), d);
  }

  // plaquettes: in plane (a,b), corners s, s+ea, s+ea+eb, s+eb
  plaq_.resize(static_cast<std::size_t>(n_plaqs_) * 4);
  for (PlaqId p = 0; p < n_plaqs_; ++p) {
    const SiteId s = p / P_;
    const auto [a, b] = plane_dims(p % P_);
    LinkId* row = &plaq_[static_cast<std::size_t>(p) * 4];
    row[0] = link_at(s, a);
    row[1] = link_at(neighbor(s, a, +1), b);
    row[2] = link_at(neighbor(s, b, +1), a);
    row[3] = link_at(s, b);
  }

  link_plaq_.resize(static_cast<std::size_t>(n_links_) * 2 * (D_ - 1));
  std::vector<int> fill(n_links_, 0);
  for (PlaqId p = 0; p < n_plaqs_; ++p)
    for (LinkId l : plaquette_links(p))
      link_plaq_[static_cast<std::size_t>(l) * 2 * (D_ - 1) + fill[l]++] = p;
}

std::array<int, 3> LatticeTopology::site_coords(SiteId s) const {
  std::array<int, 3> c{0, 0, 0};
  c[0] = s % L_;
  c[1] = (s / L_) % L_;
  if (D_ == 3) c[2] = s / (L_ * L_);
  return c;
}

SiteId LatticeTopology::site_from_coords(int x0, int x1, int x2) const {
  return x0 + L_ * (x1 + (D_ == 3 ? L_ * x2 : 0));
}

SiteId LatticeTopology::neighbor(SiteId s, int dim, int step) const {
  return nbr_[static_cast<std::size_t>(s) * 2 * D_ + (step > 0 ? dim : D_ + dim)];
}

std::array<int, 2> LatticeTopology::plane_dims(int plane) const {
  // planes ordered (0,1), (0,2), (1,2)
  static constexpr std::array<std::array<int, 2>, 3> kPlanes{{{0, 1}, {0, 2}, {1, 2}}};
  return kPlanes[plane];
}

int LatticeTopology::cut_crossing(SiteId from, SiteId to, int dim) const {
  if (dim < 0 || dim >= D_)
    throw std::invalid_argument("cut_crossing: dimension out of range");
  const auto cf = site_coords(from);
  const auto ct = site_coords(to);
  int ndiff = 0;
  for (int d = 0; d < D_; ++d) {
    const int delta = (ct[d] - cf[d] + L_) % L_;
    if (delta == 0) continue;
    if (delta != 1 && delta != L_ - 1)
      throw std::invalid_argument("cut_crossing: sites are not nearest neighbors");
    ++ndiff;
  }
  if (ndiff != 1)
    throw std::invalid_argument("cut_crossing: sites are not nearest neighbors");
  if (cf[dim] == L_ - 1 && ct[dim] == 0) return +1;
  if (cf[dim] == 0 && ct[dim] == L_ - 1) return -1;
  return 0;
}

LatticeTopology build_lattice(int dimension, int linear_size) {
  return LatticeTopology(dimension, linear_size);
}

}  // namespace z2perc
