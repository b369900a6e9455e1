#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "z2perc/gauge.hpp"
#include "z2perc/lattice.hpp"
#include "z2perc/rng.hpp"
#include "z2perc/series.hpp"

namespace z2perc {

// Continuous-imaginary-time worldline sampler for
//   H = -mu sum_s A_s - J sum_p B_p - h sum_l tau^x_l - lambda sum_l tau^z_l
// on the D=2 torus, no gauge-sector projection.
//
// The stored trajectory is the diagonal operator content of the chosen basis:
//   XBasis: sigma = tau^x; diagonal part -h sum sigma - mu sum_s prod(sigma),
//           off-diagonal events are single-link tau^z flips (weight lambda)
//           and plaquette 4-body flips (weight J).
//   ZBasis: sigma = tau^z; diagonal part -lambda sum sigma - J sum_p prod,
//           events are tau^x link flips (weight h) and star 4-body flips
//           (weight mu).
// Sampled sectors: no temporal-winding updates are implemented, so the
// trajectory stays in the temporal sector fixed by initialization; spatial
// sectors remain reachable through whole-line segment flips.

struct ScheduleQmc {
  std::int64_t therm_sweeps = -1;     // < 0: default 500
  std::int64_t sweeps_per_sample = -1;  // < 0: default 2
  std::int64_t n_samples = 2000;
};

struct QmcParams {
  int L = 4;  // D = 2 only
  double mu = 1.0, J = 1.0;
  double h = 0.0, lambda = 0.0;
  Basis basis = Basis::X;
  double beta = 0.0;  // <= 0: ground-state recipe beta = L
  ScheduleQmc schedule;
  std::uint64_t seed = 1;

  double effective_beta() const { return beta > 0.0 ? beta : static_cast<double>(L); }
  std::int64_t therm_sweeps() const {
    return schedule.therm_sweeps >= 0 ? schedule.therm_sweeps : 500;
  }
  std::int64_t sweeps_per_sample() const {
    return schedule.sweeps_per_sample >= 0 ? schedule.sweeps_per_sample : 2;
  }
  // throws std::invalid_argument: L < 2, negative couplings (sign problem),
  // non-positive sample count
  void validate() const;
};

enum class EvKind : std::uint8_t { LinkFlip = 0, FourBody = 1 };

struct Event {
  double t = 0.0;
  EvKind kind = EvKind::LinkFlip;
  std::int32_t target = -1;  // link id or flip-group id
};

struct QmcCounters {
  AcceptanceStat pair_link, pair_fourbody, dressed, global_parity, timeshift, segment,
      group_lines;
};

class Worldline {
 public:
  Worldline(const LatticeTopology& topo, const QmcParams& p);

  const LatticeTopology& topology() const { return *topo_; }
  const QmcParams& params() const { return p_; }
  double beta() const { return beta_; }

  std::int64_t event_count() const { return static_cast<std::int64_t>(alive_.size()); }
  std::int64_t linkflip_count() const { return n_link_events_; }
  std::int64_t fourbody_count() const { return n_4body_events_; }

  int spin_at(LinkId l, double t) const;          // sigma_l just after time t
  GaugeConfig slice(double t) const;              // equal-time cut, tagged with run basis

  // log of the configuration weight, recomputed from scratch:
  //   N4 log c4 + N1 log c1 - int_0^beta E_diag
  // Events of a type whose coupling is zero make the weight identically zero;
  // that state is unreachable by the updates, so finding one is a hard error
  // (std::logic_error), never a silent -inf/NaN.
  double log_weight() const;

  // every link must carry an even number of flips (periodic trajectories)
  bool check_periodicity() const;

  // Metropolis updates; return value = accepted.
  bool update_pair_link(Rng& rng);      // insert/remove a LinkFlip pair on one link
  bool update_pair_fourbody(Rng& rng);  // insert/remove a FourBody pair on one group
  // insert/remove one FourBody together with one LinkFlip on each member
  // link.  The plain pair moves conserve the per-group and per-link event
  // parities, so on their own they never reach sectors like "one plaquette
  // flip closed off by four link flips"; this move toggles exactly those
  // parities and makes the sector graph connected.
  bool update_dressed(Rng& rng);
  // insert (or remove) one FourBody on *every* flip group at once.  With no
  // LinkFlips present the per-link closure forces all group parities equal,
  // splitting the trajectories into an all-even and an all-odd sector that no
  // local move connects; this is the only update that hops between them.
  bool update_global_parity(Rng& rng);
  bool update_timeshift(Rng& rng);      // move one event inside its free window
  bool update_segment(Rng& rng);        // flip an event-free link's whole worldline
  // flip the t = 0 spins of a whole flip group, events untouched: every line
  // of the group reverses sign for all t.  Diagonal group products are blind
  // to it (even overlap), so only the field terms enter the cost; this mixes
  // the line-sign pattern on links the segment move cannot touch.
  bool update_group_lines(Rng& rng);

  // one sweep = attempts in the ratio
  //   (link pairs : 4body pairs : dressed : timeshifts : segment flips)
  // = (n_links : n_flip_groups : n_flip_groups : current event count : n_links)
  // plus two global parity-sector attempts
  void sweep(Rng& rng, QmcCounters& counters);

  // diagonal estimators (exact time integrals over the current trajectory)
  double field_integral() const;       // (1/(beta n_links)) sum_l int sigma_l
  double diag_group_integral() const;  // (1/(beta n_groups)) sum_G int prod sigma
  double diag_energy_integral() const; // int_0^beta E_diag(t) dt

  // test hooks: unconditional insertion, no acceptance step
  void force_link_pair(LinkId l, double t1, double t2);
  void force_fourbody_pair(std::int32_t group, double t1, double t2);

  std::vector<Event> events_sorted() const;

 private:
  friend struct WorldlineInspector;

  int n_flip_groups() const { return n_flip_groups_; }
  std::span<const LinkId> flip_group_links(std::int32_t g) const;
  std::span<const LinkId> diag_group_links(std::int32_t g) const;
  std::array<std::int32_t, 2> link_diag_groups(LinkId l) const;

  double integral_link(LinkId l, double a, double len) const;
  double integral_diag_group(std::int32_t g, double a, double len) const;
  double segment_link(LinkId l, double u, double v) const;
  double segment_diag_group(std::int32_t g, double u, double v) const;

  // cost D of flipping sigma_l (resp. a whole flip group) on the window
  // starting at a, length len: D = 2 f I_l + 2 g sum_{diag groups with l} I_G.
  // The 4-body variant keeps only the field terms: a flip group shares an
  // even number of links with every diagonal group, so those integrals cancel.
  double toggle_cost_link(LinkId l, double a, double len) const;
  double toggle_cost_group(std::int32_t g, double a, double len) const;
  // combined cost of toggling each member link of flip group g on the arc
  // between t0 and its own tl: field terms per link; each adjacent diagonal
  // group shares two links whose windows meet at t0, so its product is
  // toggled exactly on the arc between the two tl's
  double dressed_cost(std::int32_t g, double t0, std::span<const double> tl) const;

  std::int32_t alloc_event(double t, EvKind kind, std::int32_t target);
  void free_event(std::int32_t id);
  void list_insert(std::vector<std::int32_t>& lst, std::int32_t id) const;
  void list_erase(std::vector<std::int32_t>& lst, std::int32_t id) const;
  bool time_taken(LinkId l, double t) const;
  double draw_free_time(LinkId l, Rng& rng) const;          // avoids exact ties
  double draw_free_time_group(std::int32_t g, Rng& rng) const;

  const LatticeTopology* topo_;
  QmcParams p_;
  double beta_;
  double f_, g_, c1_, c4_;  // diagonal field/group and off-diagonal couplings
  int n_flip_groups_, n_diag_groups_;

  BitArray init_spins_;  // sigma at t = 0^-, bit set == -1
  std::vector<Event> ev_;
  std::vector<std::int32_t> free_slots_;
  std::vector<std::int32_t> alive_;
  std::vector<std::int32_t> alive_pos_;
  std::vector<std::vector<std::int32_t>> link_ev_;   // per link, sorted by time
  std::vector<std::vector<std::int32_t>> group_ev_;  // per flip group, sorted
  std::vector<std::int32_t> n_linkflip_;             // LinkFlip events per link
  std::int64_t n_link_events_ = 0, n_4body_events_ = 0;

  mutable std::vector<std::pair<double, std::int32_t>> scratch_;
};

// --- Fredenhagen-Marcu loop ratio --------------------------------------------

// Closed square contour of side floor(L/4) anchored at the origin, links in
// cyclic traversal order (+x side, +y side, -x side, -y side).
// Throws std::invalid_argument when the side would be zero (L < 4).
std::vector<LinkId> fm_contour(const LatticeTopology& topo);

struct FmEstimate {
  double value = 0.0;  // <prod tau^z over half loop> / <prod tau^z over full loop>
  double error = 0.0;  // jackknife
  double num = 0.0, num_err = 0.0;
  double den = 0.0, den_err = 0.0;
  bool unreliable = false;  // denominator consistent with zero at 2 sigma
};

// Ratio estimator over a stream of Z-basis slices; the half loop is the first
// half of the contour in cyclic order (an open path).  Throws on an empty
// stream or non-Z-basis input.
FmEstimate measure_fm(std::span<const GaugeConfig> slices);

// same estimator from per-sample loop products already stored in a series
FmEstimate measure_fm(std::span<const double> half, std::span<const double> full);

// --- driver -------------------------------------------------------------------

// The config handed to the sink references sampler-owned topology that dies
// when run_qmc returns: copy cfg.spins (or serialize) inside the callback,
// never retain the GaugeConfig itself.
using QmcSliceSink = std::function<void(const GaugeConfig&, const SampleRecord&)>;

// Thermalize + sample.  Per sample: an equal-time slice at a uniform random
// time; X-basis slices get percolation observables, Z-basis slices get FM
// loop products.  Estimator columns: energy via E_diag integral minus
// N_events/beta; tau_x / star / plaquette averages via the diagonal or
// event-count estimator appropriate to the basis (exact zeros where symmetry
// forces them).
ObservableSeries run_qmc(const QmcParams& p, const QmcSliceSink& sink = {});

}  // namespace z2perc
