#include "z2perc/classical_mc.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "z2perc/percolation.hpp"

namespace z2perc {

void RunParamsClassical::validate() const {
  if (D != 2 && D != 3) throw std::invalid_argument("run params: D must be 2 or 3");
  if (L < 2) throw std::invalid_argument("run params: L must be >= 2");
  if (!(h > 0)) throw std::invalid_argument("run params: h must be > 0");
  if (!(T_over_h > 0)) throw std::invalid_argument("run params: T/h must be > 0");
  if (schedule.n_samples <= 0) throw std::invalid_argument("run params: n_samples must be > 0");
  if (therm_updates() < 0 || stride_updates() < 1)
    throw std::invalid_argument("run params: bad schedule");
  if (ensemble == Ensemble::Canonical) {
    if (n_particles < 0 || n_particles % 2 != 0 || n_particles > site_count())
      throw std::invalid_argument("run params: N must be even and within [0, N_sites]");
  }
}

namespace {

SiteId other_end(const LatticeTopology& topo, LinkId l, SiteId v) {
  const SiteId base = topo.link_base(l);
  return v == base ? topo.link_head(l) : base;
}

// escape links of the particle at s: incident links into unoccupied sites
int escape_links(const CanonicalState& st, SiteId s, LinkId* out) {
  const auto& topo = *st.config.topo;
  int k = 0;
  for (LinkId l : topo.star_links(s))
    if (!st.occupied[other_end(topo, l, s)]) out[k++] = l;
  return k;
}

}  // namespace

UpdateResult move_update(CanonicalState& st, double beta_h, Rng& rng) {
  UpdateResult r;
  if (st.movable.empty()) return r;
  r.proposed = true;
  const auto& topo = *st.config.topo;

  const auto m_before = st.movable.size();
  const SiteId x = st.movable[rng.index(m_before)];
  LinkId esc[6];
  const int k_before = escape_links(st, x, esc);
  const LinkId l = esc[rng.index(static_cast<std::uint64_t>(k_before))];
  const SiteId y = other_end(topo, l, x);

  r.delta_e_over_h = st.config.spin(l) == -1 ? -2.0 : 2.0;

  // apply the hop, then evaluate the reverse-proposal factors in the new state
  st.occupied[x] = 0;
  st.occupied[y] = 1;
  st.config.flip(l);
  st.refresh_movable_around(x);
  st.refresh_movable_around(y);

  LinkId esc_after[6];
  const int k_after = escape_links(st, y, esc_after);
  const auto m_after = st.movable.size();

  const double ratio = std::exp(-beta_h * r.delta_e_over_h) *
                       (static_cast<double>(k_before) / static_cast<double>(k_after)) *
                       (static_cast<double>(m_before) / static_cast<double>(m_after));
  r.acceptance = ratio < 1.0 ? ratio : 1.0;

  if (rng.u01() < r.acceptance) {
    r.accepted = true;
  } else {
    st.occupied[y] = 0;
    st.occupied[x] = 1;
    st.config.flip(l);
    st.refresh_movable_around(x);
    st.refresh_movable_around(y);
  }
  return r;
}

UpdateResult plaquette_update(GaugeConfig& cfg, double beta_h, Rng& rng) {
  UpdateResult r;
  r.proposed = true;
  const auto& topo = *cfg.topo;
  const PlaqId p = static_cast<PlaqId>(rng.index(topo.plaquette_count()));
  int spin_sum = 0;
  for (LinkId l : topo.plaquette_links(p)) spin_sum += cfg.spin(l);
  r.delta_e_over_h = 2.0 * spin_sum;
  const double ratio = std::exp(-beta_h * r.delta_e_over_h);
  r.acceptance = ratio < 1.0 ? ratio : 1.0;
  if (rng.u01() < r.acceptance) {
    r.accepted = true;
    for (LinkId l : topo.plaquette_links(p)) cfg.flip(l);
  }
  return r;
}

UpdateResult gc_link_flip(GaugeConfig& cfg, double beta_h, double beta_mu, Rng& rng) {
  UpdateResult r;
  r.proposed = true;
  const auto& topo = *cfg.topo;
  const LinkId l = static_cast<LinkId>(rng.index(topo.link_count()));
  r.delta_e_over_h = 2.0 * cfg.spin(l);
  // each endpoint charge toggles: dn = +1 if currently empty else -1
  const int dn_base = 1 - 2 * cfg.occupation(topo.link_base(l));
  const int dn_head = 1 - 2 * cfg.occupation(topo.link_head(l));
  const double beta_de = beta_h * r.delta_e_over_h - beta_mu * (dn_base + dn_head);
  const double ratio = std::exp(-beta_de);
  r.acceptance = ratio < 1.0 ? ratio : 1.0;
  if (rng.u01() < r.acceptance) {
    r.accepted = true;
    cfg.flip(l);
  }
  return r;
}

void mc_step(CanonicalState& st, const RunParamsClassical& p, Rng& rng,
             UpdateCounters& counters) {
  // plaquette-only at empty or full matter (nothing is movable there)
  if (!st.movable.empty() && rng.coin()) {
    const auto r = move_update(st, p.beta_h(), rng);
    ++counters.move.proposed;
    counters.move.accepted += r.accepted;
  } else {
    const auto r = plaquette_update(st.config, p.beta_h(), rng);
    ++counters.plaquette.proposed;
    counters.plaquette.accepted += r.accepted;
  }
}

void mc_step(GaugeConfig& cfg, const RunParamsClassical& p, Rng& rng,
             UpdateCounters& counters) {
  if (rng.coin()) {
    const auto r = gc_link_flip(cfg, p.beta_h(), p.beta_mu(), rng);
    ++counters.link_flip.proposed;
    counters.link_flip.accepted += r.accepted;
  } else {
    const auto r = plaquette_update(cfg, p.beta_h(), rng);
    ++counters.plaquette.proposed;
    counters.plaquette.accepted += r.accepted;
  }
}

namespace {

double pair_distance_min_image(const LatticeTopology& topo, SiteId a, SiteId b) {
  const auto ca = topo.site_coords(a);
  const auto cb = topo.site_coords(b);
  double d2 = 0;
  for (int d = 0; d < topo.dimension(); ++d) {
    int delta = std::abs(ca[d] - cb[d]);
    delta = std::min(delta, topo.linear_size() - delta);
    d2 += static_cast<double>(delta) * delta;
  }
  return std::sqrt(d2);
}

void format_params(const RunParamsClassical& p, ObservableSeries& out) {
  char buf[64];
  auto add = [&](const char* k, const std::string& v) { out.params.emplace_back(k, v); };
  auto addf = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out.params.emplace_back(k, buf);
  };
  add("module", "classical");
  add("ensemble", p.ensemble == Ensemble::Canonical ? "canonical" : "grand");
  add("D", std::to_string(p.D));
  add("L", std::to_string(p.L));
  if (p.ensemble == Ensemble::Canonical)
    add("N", std::to_string(p.n_particles));
  else
    addf("mu", p.mu);
  addf("h", p.h);
  addf("T_over_h", p.T_over_h);
  add("therm_updates", std::to_string(p.therm_updates()));
  add("stride_updates", std::to_string(p.stride_updates()));
  add("n_samples", std::to_string(p.schedule.n_samples));
  add("seed", std::to_string(p.seed));
}

}  // namespace

ObservableSeries run_classical(const RunParamsClassical& p, const SnapshotSink& sink) {
  p.validate();
  const auto t0 = std::chrono::steady_clock::now();
  LatticeTopology topo(p.D, p.L);
  Rng rng(p.seed);

  ObservableSeries out;
  out.module = "classical";
  format_params(p, out);
  out.samples.reserve(p.schedule.n_samples);

  UpdateCounters counters;
  const bool canonical = p.ensemble == Ensemble::Canonical;

  CanonicalState st;
  GaugeConfig gc_cfg;
  if (canonical)
    st = init_dimers(topo, p.n_particles, rng);
  else
    gc_cfg = GaugeConfig(topo, Basis::X);
  GaugeConfig& cfg = canonical ? st.config : gc_cfg;

  for (std::int64_t i = 0; i < p.therm_updates(); ++i) {
    if (canonical)
      mc_step(st, p, rng, counters);
    else
      mc_step(cfg, p, rng, counters);
  }
  counters = UpdateCounters{};  // report post-thermalization rates

  for (std::int64_t s = 0; s < p.schedule.n_samples; ++s) {
    for (std::int64_t i = 0; i < p.stride_updates(); ++i) {
      if (canonical)
        mc_step(st, p, rng, counters);
      else
        mc_step(cfg, p, rng, counters);
    }

    if (canonical && !gauss_residual(cfg, st.occupied).empty())
      throw std::logic_error("run_classical: Gauss law violated during sampling");

    const auto rep = analyze(cfg);
    SampleRecord rec;
    rec.index = s;
    rec.has_percolation = true;
    rec.percolates = rep.percolates;
    rec.strength = rep.strength;
    rec.largest_cluster = rep.largest_cluster_links;
    rec.total_strings = rep.total_strings;
    rec.matter_density = matter_density(cfg);
    rec.energy = canonical ? energy_canonical(cfg, p.h) : energy_grand(cfg, p.h, p.mu);
    if (canonical && p.n_particles == 2) {
      SiteId pos[2];
      int k = 0;
      for (SiteId j = 0; j < topo.site_count() && k < 2; ++j)
        if (st.occupied[j]) pos[k++] = j;
      rec.pair_distance = pair_distance_min_image(topo, pos[0], pos[1]);
      rec.has_pair_distance = true;
    }
    out.samples.push_back(rec);
    if (sink) sink(cfg);
  }

  out.acceptance.emplace_back("plaquette", counters.plaquette);
  if (canonical)
    out.acceptance.emplace_back("move", counters.move);
  else
    out.acceptance.emplace_back("link_flip", counters.link_flip);

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace z2perc
