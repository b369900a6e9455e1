#pragma once

#include <cstdint>
#include <functional>

#include "z2perc/gauge.hpp"
#include "z2perc/series.hpp"

namespace z2perc {

enum class Ensemble { Canonical, GrandCanonical };

struct ScheduleClassical {
  std::int64_t thermalization_updates = -1;   // -1: 200*L^D canonical, 500*L^D grand
  std::int64_t updates_between_samples = -1;  // -1: 2*L^D canonical, 5*L^D grand
  std::int64_t n_samples = 1000;
};

struct RunParamsClassical {
  int D = 2;
  int L = 8;
  Ensemble ensemble = Ensemble::Canonical;
  int n_particles = 0;  // canonical only; must be even
  double mu = 0.0;      // grand-canonical only
  double h = 1.0;
  double T_over_h = 1.0;  // temperature in units of h; beta*h = 1/(T/h)
  ScheduleClassical schedule;
  std::uint64_t seed = 1;  // fully determines the trajectory

  double beta_h() const { return 1.0 / T_over_h; }
  double beta_mu() const { return mu / (T_over_h * h); }
  std::int64_t site_count() const {
    std::int64_t n = 1;
    for (int d = 0; d < D; ++d) n *= L;
    return n;
  }
  std::int64_t therm_updates() const {
    if (schedule.thermalization_updates >= 0) return schedule.thermalization_updates;
    return (ensemble == Ensemble::Canonical ? 200 : 500) * site_count();
  }
  std::int64_t stride_updates() const {
    if (schedule.updates_between_samples >= 0) return schedule.updates_between_samples;
    return (ensemble == Ensemble::Canonical ? 2 : 5) * site_count();
  }
  void validate() const;  // throws std::invalid_argument
};

struct UpdateResult {
  bool proposed = false;
  bool accepted = false;
  double acceptance = 0.0;       // the min(1, ...) actually used
  double delta_e_over_h = 0.0;   // field part of the energy change
};

struct UpdateCounters {
  AcceptanceStat plaquette, move, link_flip;
};

// Particle hop, Metropolis-Hastings with the two proposal-asymmetry factors:
//   A = min(1, e^{-beta dE} * K_from/K_to * M_from/M_to)
// K = number of escape links (incident links leading to an unoccupied site)
// of the moved particle before/after, M = number of movable particles
// before/after.  Counting links rather than neighbor sites keeps the
// proposal well defined on the L=2 multigraph.  Returns proposed=false if no
// particle is movable.
UpdateResult move_update(CanonicalState& state, double beta_h, Rng& rng);

// uniform random plaquette, plain Metropolis; conserves matter
UpdateResult plaquette_update(GaugeConfig& cfg, double beta_h, Rng& rng);

// grand-canonical single-link flip, plain Metropolis on the full energy
// including the chemical-potential term for the two toggled endpoint charges
UpdateResult gc_link_flip(GaugeConfig& cfg, double beta_h, double beta_mu, Rng& rng);

// one update of the configured 50/50 mix; canonical falls back to
// plaquette-only when nothing is movable (N = 0 or N = site count)
void mc_step(CanonicalState& state, const RunParamsClassical& p, Rng& rng,
             UpdateCounters& counters);
void mc_step(GaugeConfig& cfg, const RunParamsClassical& p, Rng& rng,
             UpdateCounters& counters);

using SnapshotSink = std::function<void(const GaugeConfig&)>;

// init (dimers / vacuum), thermalize, sample with stride; every sample is run
// through the percolation analyzer.  `sink`, if given, receives each sampled
// configuration (used for snapshot streams).
ObservableSeries run_classical(const RunParamsClassical& p,
                               const SnapshotSink& sink = nullptr);

}  // namespace z2perc
