#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "z2perc/gauge.hpp"

namespace z2perc {

// --- error analysis ---------------------------------------------------------

struct AutocorrResult {
  double tau_int = 0.5;  // convention: 0.5 + sum_{t>=1} rho(t); white noise -> 0.5
  int window = 0;        // self-consistent summation window actually used
  double mean = 0.0;
  double error = 0.0;    // autocorrelation-corrected error of the mean
  std::int64_t n_eff = 0;
  bool degenerate = false;  // constant series: tau_int = 0 by convention
  std::vector<double> binned_errors;  // naive error at bin sizes 1,2,4,...
};

// pre: series length >= 32 (throws std::invalid_argument)
AutocorrResult autocorrelation(std::span<const double> series);

// --- Binder cumulant ---------------------------------------------------------

struct BinderEstimate {
  double value = 0.0;
  double error = 0.0;
  bool defined = false;  // all-zero streams leave U undefined, not 0
  double tau_int = 0.0;
  std::int64_t bins = 0;
};

// U = <P^4>/<P^2>^2 with binning (autocorrelation-aware) + jackknife error
BinderEstimate binder(std::span<const double> strengths);

// --- crossing analysis -------------------------------------------------------

struct BinderPoint {
  double x = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool defined = true;
};

struct BinderCurve {
  double L = 0;
  std::vector<BinderPoint> points;  // ascending x
};

struct CrossingPoint {
  double L_a = 0, L_b = 0;
  double x = 0.0;
  double error = 0.0;
  bool found = false;
};

struct CrossingReport {
  std::vector<CrossingPoint> pairs;
  double consensus = 0.0;        // error-weighted mean over found crossings
  double consensus_error = 0.0;
  double drift_slope = 0.0;      // linear drift of x_cross against 1/L
  bool any = false;
};

// pairwise crossings by piecewise-linear (optionally cubic Hermite)
// interpolation; parametric bootstrap errors with a fixed seed.
// pre: >= 2 curves.  Pairs without a crossing in the shared window are
// reported found=false, never extrapolated.
CrossingReport crossing_points(const std::vector<BinderCurve>& curves,
                               int n_bootstrap = 1000,
                               std::uint64_t seed = 20240501,
                               bool cubic = false);

// --- scaling collapse --------------------------------------------------------

enum class CollapseAnsatz {
  BinderCollapse,    // y = f(L^{1/nu} (x - x_c)), beta_p fixed to 0
  StrengthCollapse,  // y L^{beta_p/nu} = f(L^{1/nu} (x - x_c))
};

struct CurveData {
  double L = 0;
  std::vector<double> x, y, yerr;
};

struct CollapseFit {
  double x_c = 0, nu = 0, beta_p = 0;
  double err_x_c = 0, err_nu = 0, err_beta_p = 0;
  double chi2_red = 0;  // quality of the local-regression master curve
  int n_points = 0;
  bool converged = false;
};

// Local-regression master curve with leave-one-size-out residuals: each point
// is compared against a weighted linear fit through nearby points of the
// OTHER sizes in scaled coordinates; chi2_red ~ 1 signals a good collapse.
// Multi-start coarse grid + Nelder-Mead refinement.  pre: >= 3 sizes.
CollapseFit collapse_fit(const std::vector<CurveData>& curves, CollapseAnsatz ansatz);

// --- exact reference formulas -------------------------------------------------

// per-bond string probability p = e^{-beta h} / (2 cosh beta h)
double bernoulli_p(double T_over_h);

// matter density d = (1 - (2p-1)^z)/2 for even coordination number z
double density_from_p(double p, int z);

// --- dual Ising mapping -------------------------------------------------------

struct DualIsingResult {
  bool mappable = false;
  std::vector<std::int8_t> spins;  // one per plaquette (dual site); empty if not
};

// D=2 pure-gauge configs only (throws std::invalid_argument otherwise):
// propagates dual spins from a +1 seed so that s_i s_j = tau^x across every
// link; configs with odd winding parity across a torus cut are Unmappable.
DualIsingResult dual_ising_map(const GaugeConfig& cfg);

}  // namespace z2perc
