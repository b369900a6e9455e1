#include "z2perc/qmc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "z2perc/analysis.hpp"
#include "z2perc/percolation.hpp"

namespace z2perc {

namespace {
std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void QmcParams::validate() const {
  if (L < 2) throw std::invalid_argument("qmc: L must be >= 2");
  if (mu < 0.0 || J < 0.0 || h < 0.0 || lambda < 0.0)
    throw std::invalid_argument("qmc: negative couplings introduce a sign problem");
  if (!(effective_beta() > 0.0)) throw std::invalid_argument("qmc: beta must be positive");
  if (schedule.n_samples <= 0) throw std::invalid_argument("qmc: n_samples must be positive");
}

// ---------------------------------------------------------------------------
// Worldline basics
// ---------------------------------------------------------------------------

Worldline::Worldline(const LatticeTopology& topo, const QmcParams& p)
    : topo_(&topo),
      p_(p),
      beta_(p.effective_beta()),
      init_spins_(static_cast<std::size_t>(topo.link_count())) {
  p_.validate();
  if (topo.dimension() != 2 || topo.linear_size() != p.L)
    throw std::invalid_argument("Worldline: needs the D=2 torus matching params");
  if (p_.basis == Basis::X) {
    f_ = p_.h;
    g_ = p_.mu;
    c1_ = p_.lambda;
    c4_ = p_.J;
    n_flip_groups_ = topo.plaquette_count();
    n_diag_groups_ = topo.site_count();
  } else {
    f_ = p_.lambda;
    g_ = p_.J;
    c1_ = p_.h;
    c4_ = p_.mu;
    n_flip_groups_ = topo.site_count();
    n_diag_groups_ = topo.plaquette_count();
  }
  link_ev_.resize(static_cast<std::size_t>(topo.link_count()));
  group_ev_.resize(static_cast<std::size_t>(n_flip_groups_));
  n_linkflip_.assign(static_cast<std::size_t>(topo.link_count()), 0);
}

std::span<const LinkId> Worldline::flip_group_links(std::int32_t g) const {
  return p_.basis == Basis::X ? topo_->plaquette_links(g) : topo_->star_links(g);
}

std::span<const LinkId> Worldline::diag_group_links(std::int32_t g) const {
  return p_.basis == Basis::X ? topo_->star_links(g) : topo_->plaquette_links(g);
}

std::array<std::int32_t, 2> Worldline::link_diag_groups(LinkId l) const {
  if (p_.basis == Basis::X) return {topo_->link_base(l), topo_->link_head(l)};
  const auto ps = topo_->link_plaquettes(l);
  return {ps[0], ps[1]};
}

int Worldline::spin_at(LinkId l, double t) const {
  const auto& lst = link_ev_[static_cast<std::size_t>(l)];
  const auto it = std::upper_bound(lst.begin(), lst.end(), t,
                                   [&](double v, std::int32_t id) { return v < ev_[static_cast<std::size_t>(id)].t; });
  const bool odd = ((it - lst.begin()) & 1) != 0;
  const int s = init_spins_.test(static_cast<std::size_t>(l)) ? -1 : +1;
  return odd ? -s : s;
}

GaugeConfig Worldline::slice(double t) const {
  GaugeConfig cfg(*topo_, p_.basis);
  for (LinkId l = 0; l < topo_->link_count(); ++l)
    if (spin_at(l, t) < 0) cfg.spins.set(static_cast<std::size_t>(l), true);
  return cfg;
}

// ---------------------------------------------------------------------------
// trajectory integrals
// ---------------------------------------------------------------------------

double Worldline::segment_link(LinkId l, double u, double v) const {
  const auto& lst = link_ev_[static_cast<std::size_t>(l)];
  auto it = std::upper_bound(lst.begin(), lst.end(), u,
                             [&](double val, std::int32_t id) { return val < ev_[static_cast<std::size_t>(id)].t; });
  int s = init_spins_.test(static_cast<std::size_t>(l)) ? -1 : +1;
  if ((it - lst.begin()) & 1) s = -s;
  double acc = 0.0, prev = u;
  for (; it != lst.end(); ++it) {
    const double t = ev_[static_cast<std::size_t>(*it)].t;
    if (t >= v) break;
    acc += s * (t - prev);
    prev = t;
    s = -s;
  }
  acc += s * (v - prev);
  return acc;
}

double Worldline::integral_link(LinkId l, double a, double len) const {
  const double b = a + len;
  if (b <= beta_) return segment_link(l, a, b);
  return segment_link(l, a, beta_) + segment_link(l, 0.0, b - beta_);
}

double Worldline::segment_diag_group(std::int32_t g, double u, double v) const {
  const auto links = diag_group_links(g);
  int prod = 1;
  scratch_.clear();
  for (LinkId l : links) {
    prod *= spin_at(l, u);
    const auto& lst = link_ev_[static_cast<std::size_t>(l)];
    auto it = std::upper_bound(lst.begin(), lst.end(), u,
                               [&](double val, std::int32_t id) { return val < ev_[static_cast<std::size_t>(id)].t; });
    for (; it != lst.end(); ++it) {
      const double t = ev_[static_cast<std::size_t>(*it)].t;
      if (t >= v) break;
      scratch_.push_back({t, *it});
    }
  }
  std::sort(scratch_.begin(), scratch_.end());
  double acc = 0.0, prev = u;
  std::size_t i = 0;
  while (i < scratch_.size()) {
    // a 4-body event shared by two links of this group appears twice at the
    // same (t, id): even multiplicity leaves the product unchanged
    std::size_t j = i + 1;
    while (j < scratch_.size() && scratch_[j].second == scratch_[i].second) ++j;
    acc += prod * (scratch_[i].first - prev);
    prev = scratch_[i].first;
    if ((j - i) & 1) prod = -prod;
    i = j;
  }
  acc += prod * (v - prev);
  return acc;
}

double Worldline::integral_diag_group(std::int32_t g, double a, double len) const {
  const double b = a + len;
  if (b <= beta_) return segment_diag_group(g, a, b);
  return segment_diag_group(g, a, beta_) + segment_diag_group(g, 0.0, b - beta_);
}

double Worldline::toggle_cost_link(LinkId l, double a, double len) const {
  double d = 2.0 * f_ * integral_link(l, a, len);
  for (std::int32_t g : link_diag_groups(l)) d += 2.0 * g_ * integral_diag_group(g, a, len);
  return d;
}

double Worldline::toggle_cost_group(std::int32_t g, double a, double len) const {
  // flipping all links of a flip group toggles an even number of spins inside
  // every diagonal group, so only the field terms survive
  double d = 0.0;
  for (LinkId l : flip_group_links(g)) d += 2.0 * f_ * integral_link(l, a, len);
  return d;
}

double Worldline::dressed_cost(std::int32_t g, double t0, std::span<const double> tl) const {
  const auto links = flip_group_links(g);
  double d = 0.0;
  // every diagonal group adjacent to the flip group shows up through exactly
  // two member links; remember the flip time that comes with each mention
  std::array<std::int32_t, 8> dg{};
  std::array<double, 8> dt{};
  int n = 0;
  for (std::size_t i = 0; i < links.size(); ++i) {
    const double lo = std::min(t0, tl[i]), hi = std::max(t0, tl[i]);
    d += 2.0 * f_ * integral_link(links[i], lo, hi - lo);
    for (std::int32_t q : link_diag_groups(links[i])) {
      dg[static_cast<std::size_t>(n)] = q;
      dt[static_cast<std::size_t>(n)] = tl[i];
      ++n;
    }
  }
  for (int a = 0; a < n; ++a) {
    if (dg[static_cast<std::size_t>(a)] < 0) continue;
    for (int b = a + 1; b < n; ++b) {
      if (dg[static_cast<std::size_t>(b)] != dg[static_cast<std::size_t>(a)]) continue;
      const double lo = std::min(dt[static_cast<std::size_t>(a)], dt[static_cast<std::size_t>(b)]);
      const double hi = std::max(dt[static_cast<std::size_t>(a)], dt[static_cast<std::size_t>(b)]);
      d += 2.0 * g_ * integral_diag_group(dg[static_cast<std::size_t>(a)], lo, hi - lo);
      dg[static_cast<std::size_t>(b)] = -1;
      break;
    }
    dg[static_cast<std::size_t>(a)] = -1;
  }
  return d;
}

double Worldline::field_integral() const {
  double acc = 0.0;
  for (LinkId l = 0; l < topo_->link_count(); ++l) acc += integral_link(l, 0.0, beta_);
  return acc / (beta_ * topo_->link_count());
}

double Worldline::diag_group_integral() const {
  double acc = 0.0;
  for (std::int32_t g = 0; g < n_diag_groups_; ++g) acc += integral_diag_group(g, 0.0, beta_);
  return acc / (beta_ * n_diag_groups_);
}

double Worldline::diag_energy_integral() const {
  double acc = 0.0;
  for (LinkId l = 0; l < topo_->link_count(); ++l) acc -= f_ * integral_link(l, 0.0, beta_);
  for (std::int32_t g = 0; g < n_diag_groups_; ++g) acc -= g_ * integral_diag_group(g, 0.0, beta_);
  return acc;
}

double Worldline::log_weight() const {
  if (n_link_events_ > 0 && c1_ == 0.0)
    throw std::logic_error("worldline holds link events with zero coupling (weight 0)");
  if (n_4body_events_ > 0 && c4_ == 0.0)
    throw std::logic_error("worldline holds 4-body events with zero coupling (weight 0)");
  double lw = 0.0;
  if (n_link_events_ > 0) lw += static_cast<double>(n_link_events_) * std::log(c1_);
  if (n_4body_events_ > 0) lw += static_cast<double>(n_4body_events_) * std::log(c4_);
  lw -= diag_energy_integral();
  return lw;
}

bool Worldline::check_periodicity() const {
  for (const auto& lst : link_ev_)
    if (lst.size() & 1) return false;
  return true;
}

// ---------------------------------------------------------------------------
// event bookkeeping
// ---------------------------------------------------------------------------

std::int32_t Worldline::alloc_event(double t, EvKind kind, std::int32_t target) {
  std::int32_t id;
  if (!free_slots_.empty()) {
    id = free_slots_.back();
    free_slots_.pop_back();
    ev_[static_cast<std::size_t>(id)] = {t, kind, target};
  } else {
    id = static_cast<std::int32_t>(ev_.size());
    ev_.push_back({t, kind, target});
    alive_pos_.push_back(-1);
  }
  alive_pos_[static_cast<std::size_t>(id)] = static_cast<std::int32_t>(alive_.size());
  alive_.push_back(id);
  return id;
}

void Worldline::free_event(std::int32_t id) {
  const std::int32_t pos = alive_pos_[static_cast<std::size_t>(id)];
  const std::int32_t last = alive_.back();
  alive_[static_cast<std::size_t>(pos)] = last;
  alive_pos_[static_cast<std::size_t>(last)] = pos;
  alive_.pop_back();
  alive_pos_[static_cast<std::size_t>(id)] = -1;
  free_slots_.push_back(id);
}

void Worldline::list_insert(std::vector<std::int32_t>& lst, std::int32_t id) const {
  const double t = ev_[static_cast<std::size_t>(id)].t;
  const auto it = std::lower_bound(lst.begin(), lst.end(), t, [&](std::int32_t a, double v) {
    return ev_[static_cast<std::size_t>(a)].t < v;
  });
  lst.insert(it, id);
}

void Worldline::list_erase(std::vector<std::int32_t>& lst, std::int32_t id) const {
  const double t = ev_[static_cast<std::size_t>(id)].t;
  auto it = std::lower_bound(lst.begin(), lst.end(), t, [&](std::int32_t a, double v) {
    return ev_[static_cast<std::size_t>(a)].t < v;
  });
  while (it != lst.end() && *it != id) ++it;
  if (it == lst.end()) throw std::logic_error("worldline event index out of sync");
  lst.erase(it);
}

bool Worldline::time_taken(LinkId l, double t) const {
  const auto& lst = link_ev_[static_cast<std::size_t>(l)];
  const auto it = std::lower_bound(lst.begin(), lst.end(), t, [&](std::int32_t a, double v) {
    return ev_[static_cast<std::size_t>(a)].t < v;
  });
  return it != lst.end() && ev_[static_cast<std::size_t>(*it)].t == t;
}

double Worldline::draw_free_time(LinkId l, Rng& rng) const {
  for (int tries = 0; tries < 64; ++tries) {
    const double t = rng.u01() * beta_;
    if (t > 0.0 && !time_taken(l, t)) return t;  // exact ties are resampled
  }
  return -1.0;
}

double Worldline::draw_free_time_group(std::int32_t g, Rng& rng) const {
  const auto links = flip_group_links(g);
  for (int tries = 0; tries < 64; ++tries) {
    const double t = rng.u01() * beta_;
    if (t <= 0.0) continue;
    bool clash = false;
    for (LinkId l : links)
      if (time_taken(l, t)) {
        clash = true;
        break;
      }
    if (!clash) return t;
  }
  return -1.0;
}

// ---------------------------------------------------------------------------
// updates
// ---------------------------------------------------------------------------

bool Worldline::update_pair_link(Rng& rng) {
  const auto l = static_cast<LinkId>(rng.index(static_cast<std::uint64_t>(topo_->link_count())));
  const double m = static_cast<double>(n_linkflip_[static_cast<std::size_t>(l)]);
  if (rng.coin()) {
    if (c1_ == 0.0) return false;
    const double t1 = draw_free_time(l, rng);
    const double t2 = draw_free_time(l, rng);
    if (t1 < 0.0 || t2 < 0.0 || t1 == t2) return false;
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    const double D = toggle_cost_link(l, lo, hi - lo);
    const double pairs_after = 0.5 * (m + 2.0) * (m + 1.0);
    const double A = c1_ * c1_ * std::exp(-D) * beta_ * beta_ / (2.0 * pairs_after);
    if (rng.u01() >= A) return false;
    const std::int32_t a = alloc_event(lo, EvKind::LinkFlip, l);
    const std::int32_t b = alloc_event(hi, EvKind::LinkFlip, l);
    list_insert(link_ev_[static_cast<std::size_t>(l)], a);
    list_insert(link_ev_[static_cast<std::size_t>(l)], b);
    n_linkflip_[static_cast<std::size_t>(l)] += 2;
    n_link_events_ += 2;
    return true;
  }
  // removal
  const auto mi = n_linkflip_[static_cast<std::size_t>(l)];
  if (mi < 2) return false;
  scratch_.clear();
  for (std::int32_t id : link_ev_[static_cast<std::size_t>(l)])
    if (ev_[static_cast<std::size_t>(id)].kind == EvKind::LinkFlip)
      scratch_.push_back({ev_[static_cast<std::size_t>(id)].t, id});
  const auto j = rng.index(static_cast<std::uint64_t>(mi));
  auto k = rng.index(static_cast<std::uint64_t>(mi - 1));
  if (k >= j) ++k;
  // copies, not references: the cost evaluation below reuses scratch_
  const auto pa = scratch_[static_cast<std::size_t>(std::min(j, k))];
  const auto pb = scratch_[static_cast<std::size_t>(std::max(j, k))];
  const double lo = pa.first, hi = pb.first;
  const double D = toggle_cost_link(l, lo, hi - lo);
  const double pairs_before = 0.5 * m * (m - 1.0);
  const double A = std::exp(-D) * 2.0 * pairs_before / (c1_ * c1_ * beta_ * beta_);
  if (rng.u01() >= A) return false;
  list_erase(link_ev_[static_cast<std::size_t>(l)], pa.second);
  list_erase(link_ev_[static_cast<std::size_t>(l)], pb.second);
  free_event(pa.second);
  free_event(pb.second);
  n_linkflip_[static_cast<std::size_t>(l)] -= 2;
  n_link_events_ -= 2;
  return true;
}

bool Worldline::update_pair_fourbody(Rng& rng) {
  const auto g = static_cast<std::int32_t>(rng.index(static_cast<std::uint64_t>(n_flip_groups_)));
  auto& gev = group_ev_[static_cast<std::size_t>(g)];
  const double m = static_cast<double>(gev.size());
  const auto links = flip_group_links(g);
  if (rng.coin()) {
    if (c4_ == 0.0) return false;
    const double t1 = draw_free_time_group(g, rng);
    const double t2 = draw_free_time_group(g, rng);
    if (t1 < 0.0 || t2 < 0.0 || t1 == t2) return false;
    const double lo = std::min(t1, t2), hi = std::max(t1, t2);
    const double D = toggle_cost_group(g, lo, hi - lo);
    const double pairs_after = 0.5 * (m + 2.0) * (m + 1.0);
    const double A = c4_ * c4_ * std::exp(-D) * beta_ * beta_ / (2.0 * pairs_after);
    if (rng.u01() >= A) return false;
    const std::int32_t a = alloc_event(lo, EvKind::FourBody, g);
    const std::int32_t b = alloc_event(hi, EvKind::FourBody, g);
    for (std::int32_t id : {a, b}) {
      list_insert(gev, id);
      for (LinkId l : links) list_insert(link_ev_[static_cast<std::size_t>(l)], id);
    }
    n_4body_events_ += 2;
    return true;
  }
  if (gev.size() < 2) return false;
  const auto j = rng.index(gev.size());
  auto k = rng.index(gev.size() - 1);
  if (k >= j) ++k;
  const std::int32_t ida = gev[static_cast<std::size_t>(std::min(j, k))];
  const std::int32_t idb = gev[static_cast<std::size_t>(std::max(j, k))];
  const double lo = ev_[static_cast<std::size_t>(ida)].t;
  const double hi = ev_[static_cast<std::size_t>(idb)].t;
  const double D = toggle_cost_group(g, lo, hi - lo);
  const double pairs_before = 0.5 * m * (m - 1.0);
  const double A = std::exp(-D) * 2.0 * pairs_before / (c4_ * c4_ * beta_ * beta_);
  if (rng.u01() >= A) return false;
  for (std::int32_t id : {ida, idb}) {
    list_erase(gev, id);
    for (LinkId l : links) list_erase(link_ev_[static_cast<std::size_t>(l)], id);
    free_event(id);
  }
  n_4body_events_ -= 2;
  return true;
}

bool Worldline::update_dressed(Rng& rng) {
  const auto g = static_cast<std::int32_t>(rng.index(static_cast<std::uint64_t>(n_flip_groups_)));
  const auto links = flip_group_links(g);
  auto& gev = group_ev_[static_cast<std::size_t>(g)];
  const double m4 = static_cast<double>(gev.size());
  if (rng.coin()) {
    if (c1_ == 0.0 || c4_ == 0.0) return false;
    const double t0 = draw_free_time_group(g, rng);
    if (t0 < 0.0) return false;
    std::array<double, 4> tl{};
    for (std::size_t i = 0; i < links.size(); ++i) {
      tl[i] = draw_free_time(links[i], rng);
      if (tl[i] < 0.0 || tl[i] == t0) return false;
    }
    const double D = dressed_cost(g, t0, {tl.data(), links.size()});
    double A = c4_ * std::exp(-D) * beta_ / (m4 + 1.0);
    for (std::size_t i = 0; i < links.size(); ++i)
      A *= c1_ * beta_ /
           (static_cast<double>(n_linkflip_[static_cast<std::size_t>(links[i])]) + 1.0);
    if (rng.u01() >= A) return false;
    const std::int32_t id0 = alloc_event(t0, EvKind::FourBody, g);
    list_insert(gev, id0);
    for (LinkId l : links) list_insert(link_ev_[static_cast<std::size_t>(l)], id0);
    for (std::size_t i = 0; i < links.size(); ++i) {
      const std::int32_t id = alloc_event(tl[i], EvKind::LinkFlip, links[i]);
      list_insert(link_ev_[static_cast<std::size_t>(links[i])], id);
      n_linkflip_[static_cast<std::size_t>(links[i])] += 1;
    }
    n_4body_events_ += 1;
    n_link_events_ += static_cast<std::int64_t>(links.size());
    return true;
  }
  // removal: one 4-body of this group plus one LinkFlip per member link
  if (gev.empty()) return false;
  for (LinkId l : links)
    if (n_linkflip_[static_cast<std::size_t>(l)] < 1) return false;
  const std::int32_t id0 = gev[rng.index(gev.size())];
  const double t0 = ev_[static_cast<std::size_t>(id0)].t;
  std::array<std::int32_t, 4> lids{};
  std::array<double, 4> tl{};
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto want =
        rng.index(static_cast<std::uint64_t>(n_linkflip_[static_cast<std::size_t>(links[i])]));
    std::uint64_t seen = 0;
    for (std::int32_t id : link_ev_[static_cast<std::size_t>(links[i])]) {
      if (ev_[static_cast<std::size_t>(id)].kind != EvKind::LinkFlip) continue;
      if (seen++ == want) {
        lids[i] = id;
        tl[i] = ev_[static_cast<std::size_t>(id)].t;
        break;
      }
    }
  }
  const double D = dressed_cost(g, t0, {tl.data(), links.size()});
  double A = std::exp(-D) * m4 / (c4_ * beta_);
  for (std::size_t i = 0; i < links.size(); ++i)
    A *= static_cast<double>(n_linkflip_[static_cast<std::size_t>(links[i])]) / (c1_ * beta_);
  if (rng.u01() >= A) return false;
  list_erase(gev, id0);
  for (LinkId l : links) list_erase(link_ev_[static_cast<std::size_t>(l)], id0);
  free_event(id0);
  for (std::size_t i = 0; i < links.size(); ++i) {
    list_erase(link_ev_[static_cast<std::size_t>(links[i])], lids[i]);
    free_event(lids[i]);
    n_linkflip_[static_cast<std::size_t>(links[i])] -= 1;
  }
  n_4body_events_ -= 1;
  n_link_events_ -= static_cast<std::int64_t>(links.size());
  return true;
}

bool Worldline::update_global_parity(Rng& rng) {
  // Every link sits in exactly two flip groups, so adding one FourBody per
  // group puts two kinks on each link and the trajectory stays closed.  The
  // move is priced by recomputing the full weight and rolling back on reject;
  // it runs a couple of times per sweep, so the O(total events) cost is noise.
  if (c4_ == 0.0) return false;  // the all-odd sector carries zero weight
  const auto ng = static_cast<std::size_t>(n_flip_groups_);
  std::vector<double> ts(ng);
  std::vector<std::int32_t> ids(ng);
  double sel = 0.0;  // log of the event-count selection factors
  if (rng.coin()) {
    for (std::size_t g = 0; g < ng; ++g) {
      ts[g] = draw_free_time_group(static_cast<std::int32_t>(g), rng);
      if (ts[g] < 0.0) return false;
      sel -= std::log(static_cast<double>(group_ev_[g].size()) + 1.0);
    }
    // groups sharing a link must not land two new kinks on the same instant
    std::vector<double> first_on_link(static_cast<std::size_t>(topo_->link_count()), -1.0);
    for (std::size_t g = 0; g < ng; ++g)
      for (LinkId l : flip_group_links(static_cast<std::int32_t>(g))) {
        if (first_on_link[static_cast<std::size_t>(l)] == ts[g]) return false;
        first_on_link[static_cast<std::size_t>(l)] = ts[g];
      }
    const double lw0 = log_weight();
    for (std::size_t g = 0; g < ng; ++g) {
      ids[g] = alloc_event(ts[g], EvKind::FourBody, static_cast<std::int32_t>(g));
      list_insert(group_ev_[g], ids[g]);
      for (LinkId l : flip_group_links(static_cast<std::int32_t>(g)))
        list_insert(link_ev_[static_cast<std::size_t>(l)], ids[g]);
    }
    n_4body_events_ += static_cast<std::int64_t>(ng);
    const double lr = log_weight() - lw0 + static_cast<double>(ng) * std::log(beta_) + sel;
    if (std::log(rng.u01()) < lr) return true;
    for (std::size_t g = 0; g < ng; ++g) {
      list_erase(group_ev_[g], ids[g]);
      for (LinkId l : flip_group_links(static_cast<std::int32_t>(g)))
        list_erase(link_ev_[static_cast<std::size_t>(l)], ids[g]);
      free_event(ids[g]);
    }
    n_4body_events_ -= static_cast<std::int64_t>(ng);
    return false;
  }
  // removal: one FourBody from every group
  for (std::size_t g = 0; g < ng; ++g) {
    if (group_ev_[g].empty()) return false;
    ids[g] = group_ev_[g][rng.index(group_ev_[g].size())];
    ts[g] = ev_[static_cast<std::size_t>(ids[g])].t;
    sel += std::log(static_cast<double>(group_ev_[g].size()));
  }
  const double lw0 = log_weight();
  for (std::size_t g = 0; g < ng; ++g) {
    list_erase(group_ev_[g], ids[g]);
    for (LinkId l : flip_group_links(static_cast<std::int32_t>(g)))
      list_erase(link_ev_[static_cast<std::size_t>(l)], ids[g]);
    free_event(ids[g]);
  }
  n_4body_events_ -= static_cast<std::int64_t>(ng);
  const double lr = log_weight() - lw0 - static_cast<double>(ng) * std::log(beta_) + sel;
  if (std::log(rng.u01()) < lr) return true;
  for (std::size_t g = 0; g < ng; ++g) {
    ids[g] = alloc_event(ts[g], EvKind::FourBody, static_cast<std::int32_t>(g));
    list_insert(group_ev_[g], ids[g]);
    for (LinkId l : flip_group_links(static_cast<std::int32_t>(g)))
      list_insert(link_ev_[static_cast<std::size_t>(l)], ids[g]);
  }
  n_4body_events_ += static_cast<std::int64_t>(ng);
  return false;
}

bool Worldline::update_group_lines(Rng& rng) {
  const auto g = static_cast<std::int32_t>(rng.index(static_cast<std::uint64_t>(n_flip_groups_)));
  const double D = toggle_cost_group(g, 0.0, beta_);
  if (rng.u01() >= std::exp(-D)) return false;
  for (LinkId l : flip_group_links(g)) init_spins_.flip(static_cast<std::size_t>(l));
  return true;
}

bool Worldline::update_timeshift(Rng& rng) {
  if (alive_.empty()) return false;
  const std::int32_t id = alive_[rng.index(alive_.size())];
  const Event e = ev_[static_cast<std::size_t>(id)];

  std::array<LinkId, 4> links{};
  int n_aff = 0;
  if (e.kind == EvKind::LinkFlip) {
    links[0] = e.target;
    n_aff = 1;
  } else {
    for (LinkId l : flip_group_links(e.target)) links[static_cast<std::size_t>(n_aff++)] = l;
  }

  // free window between the nearest other events on the affected links
  double gap_f = beta_, gap_b = beta_;
  bool any_other = false;
  for (int i = 0; i < n_aff; ++i) {
    const auto& lst = link_ev_[static_cast<std::size_t>(links[static_cast<std::size_t>(i)])];
    if (lst.size() < 2) continue;
    any_other = true;
    auto it = std::lower_bound(lst.begin(), lst.end(), e.t, [&](std::int32_t a, double v) {
      return ev_[static_cast<std::size_t>(a)].t < v;
    });
    while (*it != id) ++it;
    const std::size_t idx = static_cast<std::size_t>(it - lst.begin());
    const std::int32_t nxt = lst[(idx + 1) % lst.size()];
    const std::int32_t prv = lst[(idx + lst.size() - 1) % lst.size()];
    double df = ev_[static_cast<std::size_t>(nxt)].t - e.t;
    if (df <= 0.0) df += beta_;
    double db = e.t - ev_[static_cast<std::size_t>(prv)].t;
    if (db <= 0.0) db += beta_;
    gap_f = std::min(gap_f, df);
    gap_b = std::min(gap_b, db);
  }
  if (!any_other) return false;  // valid trajectories always have a neighbor

  const double w_len = gap_b + gap_f;
  const double a_old = gap_b;
  const double a_new = rng.u01() * w_len;
  if (a_new <= 0.0 || a_new >= w_len || a_new == a_old) return false;
  const double raw = e.t - gap_b + a_new;
  const bool crossed = raw < 0.0 || raw >= beta_;  // event swept past t = 0
  double t_new = raw;
  if (t_new < 0.0) t_new += beta_;
  if (t_new >= beta_) t_new -= beta_;
  if (t_new <= 0.0) return false;
  for (int i = 0; i < n_aff; ++i)
    if (time_taken(links[static_cast<std::size_t>(i)], t_new)) return false;

  const double len = std::abs(a_new - a_old);
  double u = e.t - gap_b + std::min(a_old, a_new);
  if (u < 0.0) u += beta_;
  if (u >= beta_) u -= beta_;
  const double D = e.kind == EvKind::LinkFlip ? toggle_cost_link(e.target, u, len)
                                              : toggle_cost_group(e.target, u, len);
  if (rng.u01() >= std::exp(-D)) return false;

  for (int i = 0; i < n_aff; ++i)
    list_erase(link_ev_[static_cast<std::size_t>(links[static_cast<std::size_t>(i)])], id);
  if (e.kind == EvKind::FourBody) list_erase(group_ev_[static_cast<std::size_t>(e.target)], id);
  ev_[static_cast<std::size_t>(id)].t = t_new;
  for (int i = 0; i < n_aff; ++i)
    list_insert(link_ev_[static_cast<std::size_t>(links[static_cast<std::size_t>(i)])], id);
  if (e.kind == EvKind::FourBody) list_insert(group_ev_[static_cast<std::size_t>(e.target)], id);
  // a move across t = 0 changes the event parity seen from the time origin;
  // flipping the stored t = 0 spins keeps sigma(t) equal to the trajectory
  // the acceptance step actually priced
  if (crossed)
    for (int i = 0; i < n_aff; ++i)
      init_spins_.flip(static_cast<std::size_t>(links[static_cast<std::size_t>(i)]));
  return true;
}

bool Worldline::update_segment(Rng& rng) {
  const auto l = static_cast<LinkId>(rng.index(static_cast<std::uint64_t>(topo_->link_count())));
  if (!link_ev_[static_cast<std::size_t>(l)].empty()) return false;
  const double D = toggle_cost_link(l, 0.0, beta_);
  if (rng.u01() >= std::exp(-D)) return false;
  init_spins_.flip(static_cast<std::size_t>(l));
  return true;
}

void Worldline::sweep(Rng& rng, QmcCounters& c) {
  const int n_links = topo_->link_count();
  const auto n_shift = std::max<std::int64_t>(1, event_count());
  for (int i = 0; i < n_links; ++i) {
    ++c.pair_link.proposed;
    c.pair_link.accepted += update_pair_link(rng) ? 1 : 0;
  }
  for (int i = 0; i < n_flip_groups_; ++i) {
    ++c.pair_fourbody.proposed;
    c.pair_fourbody.accepted += update_pair_fourbody(rng) ? 1 : 0;
  }
  for (int i = 0; i < n_flip_groups_; ++i) {
    ++c.dressed.proposed;
    c.dressed.accepted += update_dressed(rng) ? 1 : 0;
  }
  for (int i = 0; i < 2; ++i) {
    ++c.global_parity.proposed;
    c.global_parity.accepted += update_global_parity(rng) ? 1 : 0;
  }
  for (std::int64_t i = 0; i < n_shift; ++i) {
    ++c.timeshift.proposed;
    c.timeshift.accepted += update_timeshift(rng) ? 1 : 0;
  }
  for (int i = 0; i < n_links; ++i) {
    ++c.segment.proposed;
    c.segment.accepted += update_segment(rng) ? 1 : 0;
  }
  for (int i = 0; i < n_flip_groups_; ++i) {
    ++c.group_lines.proposed;
    c.group_lines.accepted += update_group_lines(rng) ? 1 : 0;
  }
}

// ---------------------------------------------------------------------------
// test hooks
// ---------------------------------------------------------------------------

void Worldline::force_link_pair(LinkId l, double t1, double t2) {
  if (!(t1 > 0.0 && t1 < beta_ && t2 > 0.0 && t2 < beta_ && t1 != t2))
    throw std::invalid_argument("force_link_pair: times must be distinct in (0, beta)");
  if (time_taken(l, t1) || time_taken(l, t2))
    throw std::invalid_argument("force_link_pair: time already occupied");
  for (double t : {std::min(t1, t2), std::max(t1, t2)}) {
    const std::int32_t id = alloc_event(t, EvKind::LinkFlip, l);
    list_insert(link_ev_[static_cast<std::size_t>(l)], id);
  }
  n_linkflip_[static_cast<std::size_t>(l)] += 2;
  n_link_events_ += 2;
}

void Worldline::force_fourbody_pair(std::int32_t group, double t1, double t2) {
  if (!(t1 > 0.0 && t1 < beta_ && t2 > 0.0 && t2 < beta_ && t1 != t2))
    throw std::invalid_argument("force_fourbody_pair: times must be distinct in (0, beta)");
  const auto links = flip_group_links(group);
  for (double t : {t1, t2})
    for (LinkId l : links)
      if (time_taken(l, t)) throw std::invalid_argument("force_fourbody_pair: time occupied");
  for (double t : {std::min(t1, t2), std::max(t1, t2)}) {
    const std::int32_t id = alloc_event(t, EvKind::FourBody, group);
    list_insert(group_ev_[static_cast<std::size_t>(group)], id);
    for (LinkId l : links) list_insert(link_ev_[static_cast<std::size_t>(l)], id);
  }
  n_4body_events_ += 2;
}

std::vector<Event> Worldline::events_sorted() const {
  std::vector<Event> out;
  out.reserve(alive_.size());
  for (std::int32_t id : alive_) out.push_back(ev_[static_cast<std::size_t>(id)]);
  std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return out;
}

// ---------------------------------------------------------------------------
// Fredenhagen-Marcu estimator
// ---------------------------------------------------------------------------

std::vector<LinkId> fm_contour(const LatticeTopology& topo) {
  if (topo.dimension() != 2) throw std::invalid_argument("fm_contour: D=2 only");
  const int a = topo.linear_size() / 4;
  if (a < 1) throw std::invalid_argument("fm_contour: L/4 side collapses to zero");
  std::vector<LinkId> loop;
  loop.reserve(static_cast<std::size_t>(4 * a));
  for (int i = 0; i < a; ++i) loop.push_back(topo.link_at(topo.site_from_coords(i, 0), 0));
  for (int i = 0; i < a; ++i) loop.push_back(topo.link_at(topo.site_from_coords(a, i), 1));
  for (int i = a - 1; i >= 0; --i) loop.push_back(topo.link_at(topo.site_from_coords(i, a), 0));
  for (int i = a - 1; i >= 0; --i) loop.push_back(topo.link_at(topo.site_from_coords(0, i), 1));
  return loop;
}

FmEstimate measure_fm(std::span<const double> half, std::span<const double> full) {
  if (half.empty() || half.size() != full.size())
    throw std::invalid_argument("measure_fm: empty or mismatched product series");
  const std::int64_t n = static_cast<std::int64_t>(half.size());

  double tau = 0.5;
  if (n >= 32) {
    const auto ac = autocorrelation(full);
    if (!ac.degenerate) tau = ac.tau_int;
  }
  std::int64_t bin = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * tau)));
  while (bin > 1 && n / bin < 8) bin /= 2;
  const std::int64_t nb = n / bin;

  std::vector<double> hb(static_cast<std::size_t>(nb)), fb(static_cast<std::size_t>(nb));
  for (std::int64_t b = 0; b < nb; ++b) {
    double sh = 0.0, sf = 0.0;
    for (std::int64_t i = b * bin; i < (b + 1) * bin; ++i) {
      sh += half[i];
      sf += full[i];
    }
    hb[static_cast<std::size_t>(b)] = sh / static_cast<double>(bin);
    fb[static_cast<std::size_t>(b)] = sf / static_cast<double>(bin);
  }
  FmEstimate out;
  double H = 0.0, F = 0.0;
  for (std::int64_t b = 0; b < nb; ++b) {
    H += hb[static_cast<std::size_t>(b)];
    F += fb[static_cast<std::size_t>(b)];
  }
  H /= static_cast<double>(nb);
  F /= static_cast<double>(nb);
  out.num = H;
  out.den = F;
  double vh = 0.0, vf = 0.0;
  for (std::int64_t b = 0; b < nb; ++b) {
    vh += (hb[static_cast<std::size_t>(b)] - H) * (hb[static_cast<std::size_t>(b)] - H);
    vf += (fb[static_cast<std::size_t>(b)] - F) * (fb[static_cast<std::size_t>(b)] - F);
  }
  if (nb > 1) {
    out.num_err = std::sqrt(vh / static_cast<double>(nb) / static_cast<double>(nb - 1));
    out.den_err = std::sqrt(vf / static_cast<double>(nb) / static_cast<double>(nb - 1));
  }
  out.value = F != 0.0 ? H / F : 0.0;
  if (nb > 1 && F != 0.0) {
    std::vector<double> jk(static_cast<std::size_t>(nb));
    double jm = 0.0;
    for (std::int64_t b = 0; b < nb; ++b) {
      const double Hb = (H * nb - hb[static_cast<std::size_t>(b)]) / static_cast<double>(nb - 1);
      const double Fb = (F * nb - fb[static_cast<std::size_t>(b)]) / static_cast<double>(nb - 1);
      jk[static_cast<std::size_t>(b)] = Fb != 0.0 ? Hb / Fb : out.value;
      jm += jk[static_cast<std::size_t>(b)];
    }
    jm /= static_cast<double>(nb);
    double var = 0.0;
    for (double v : jk) var += (v - jm) * (v - jm);
    var *= static_cast<double>(nb - 1) / static_cast<double>(nb);
    out.error = std::sqrt(var);
  }
  out.unreliable = F == 0.0 || std::abs(F) < 2.0 * out.den_err || nb < 2;
  return out;
}

FmEstimate measure_fm(std::span<const GaugeConfig> slices) {
  if (slices.empty()) throw std::invalid_argument("measure_fm: empty slice stream");
  const LatticeTopology& topo = *slices[0].topo;
  const auto loop = fm_contour(topo);
  const std::size_t half_n = loop.size() / 2;
  std::vector<double> half(slices.size()), full(slices.size());
  for (std::size_t s = 0; s < slices.size(); ++s) {
    if (slices[s].basis != Basis::Z)
      throw std::invalid_argument("measure_fm: loop products need Z-basis slices");
    double ph = 1.0, pf = 1.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      pf *= slices[s].spin(loop[i]);
      if (i < half_n) ph *= slices[s].spin(loop[i]);
    }
    half[s] = ph;
    full[s] = pf;
  }
  return measure_fm(half, full);
}

// ---------------------------------------------------------------------------
// driver
// ---------------------------------------------------------------------------

ObservableSeries run_qmc(const QmcParams& p, const QmcSliceSink& sink) {
  p.validate();
  const LatticeTopology topo = build_lattice(2, p.L);
  Worldline wl(topo, p);
  Rng rng(p.seed);
  QmcCounters counters;

  for (std::int64_t s = 0; s < p.therm_sweeps(); ++s) wl.sweep(rng, counters);
  counters = QmcCounters{};

  ObservableSeries out;
  out.module = "qmc";
  out.params = {
      {"D", "2"},
      {"L", std::to_string(p.L)},
      {"mu", fmt_g(p.mu)},
      {"J", fmt_g(p.J)},
      {"h", fmt_g(p.h)},
      {"lambda", fmt_g(p.lambda)},
      {"beta", fmt_g(p.effective_beta())},
      {"basis", p.basis == Basis::X ? "x" : "z"},
      {"seed", std::to_string(p.seed)},
      {"therm_sweeps", std::to_string(p.therm_sweeps())},
      {"sweeps_per_sample", std::to_string(p.sweeps_per_sample())},
      {"n_samples", std::to_string(p.schedule.n_samples)},
  };

  std::vector<LinkId> loop;
  std::size_t half_n = 0;
  if (p.basis == Basis::Z && p.L >= 4) {
    loop = fm_contour(topo);
    half_n = loop.size() / 2;
  }

  out.samples.reserve(static_cast<std::size_t>(p.schedule.n_samples));
  for (std::int64_t s = 0; s < p.schedule.n_samples; ++s) {
    for (std::int64_t k = 0; k < p.sweeps_per_sample(); ++k) wl.sweep(rng, counters);
    if (!wl.check_periodicity())
      throw std::logic_error("run_qmc: worldline lost periodicity");

    const double t = rng.u01() * wl.beta();
    const GaugeConfig cfg = wl.slice(t);

    SampleRecord rec;
    rec.index = s;
    rec.has_qmc = true;
    rec.n_events = wl.event_count();
    rec.energy = (wl.diag_energy_integral() - static_cast<double>(wl.event_count())) / wl.beta();

    if (p.basis == Basis::X) {
      rec.tau_x = wl.field_integral();
      rec.star_avg = wl.diag_group_integral();
      rec.plaq_avg = p.J > 0.0 ? static_cast<double>(wl.fourbody_count()) /
                                     (wl.beta() * p.J * topo.plaquette_count())
                               : 0.0;
      rec.has_percolation = true;
      const auto rep = analyze(cfg);
      rec.percolates = rep.percolates;
      rec.strength = rep.strength;
      rec.largest_cluster = rep.largest_cluster_links;
      rec.total_strings = rep.total_strings;
      rec.matter_density = matter_density(cfg);
    } else {
      // tau^x flips are the link events in this basis; h = 0 forces the
      // expectation to zero exactly (flip symmetry), reported as such
      rec.tau_x = p.h > 0.0 ? static_cast<double>(wl.linkflip_count()) /
                                  (wl.beta() * p.h * topo.link_count())
                            : 0.0;
      rec.star_avg = p.mu > 0.0 ? static_cast<double>(wl.fourbody_count()) /
                                      (wl.beta() * p.mu * topo.site_count())
                                : 0.0;
      rec.plaq_avg = wl.diag_group_integral();
      if (!loop.empty()) {
        double ph = 1.0, pf = 1.0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
          pf *= cfg.spin(loop[i]);
          if (i < half_n) ph *= cfg.spin(loop[i]);
        }
        rec.has_fm = true;
        rec.fm_half = ph;
        rec.fm_full = pf;
      }
    }
    out.samples.push_back(rec);
    if (sink) sink(cfg, rec);
  }

  out.acceptance = {
      {"pair_link", counters.pair_link},
      {"pair_fourbody", counters.pair_fourbody},
      {"dressed", counters.dressed},
      {"global_parity", counters.global_parity},
      {"timeshift", counters.timeshift},
      {"segment", counters.segment},
      {"group_lines", counters.group_lines},
  };
  return out;
}

}  // namespace z2perc
