#include "z2perc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "z2perc/rng.hpp"

namespace z2perc {

// ---------------------------------------------------------------------------
// autocorrelation
// ---------------------------------------------------------------------------

AutocorrResult autocorrelation(std::span<const double> series) {
  const std::int64_t n = static_cast<std::int64_t>(series.size());
  if (n < 32) throw std::invalid_argument("autocorrelation: need at least 32 samples");

  AutocorrResult out;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  out.mean = mean;

  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);

  if (c0 <= 0.0 || !std::isfinite(c0)) {
    // constant input: no fluctuations to decorrelate
    out.tau_int = 0.0;
    out.degenerate = true;
    out.error = 0.0;
    out.n_eff = n;
    return out;
  }

  const std::int64_t cap = n / 4;
  auto rho = [&](std::int64_t t) {
    double c = 0.0;
    for (std::int64_t i = 0; i + t < n; ++i)
      c += (series[i] - mean) * (series[i + t] - mean);
    return c / (static_cast<double>(n - t) * c0);
  };

  // Self-consistent window: smallest W with W >= 6 * tau_int(W).
  double tau = 0.5;
  std::int64_t w = 0;
  for (std::int64_t t = 1; t <= cap; ++t) {
    tau += rho(t);
    if (tau < 0.5) tau = 0.5;  // guard against strongly anticorrelated noise
    w = t;
    if (static_cast<double>(t) >= 6.0 * tau) break;
  }
  out.tau_int = tau;
  out.window = static_cast<int>(w);
  out.n_eff = static_cast<std::int64_t>(static_cast<double>(n) / (2.0 * tau));
  out.error = std::sqrt(c0 / static_cast<double>(n) * 2.0 * tau);

  // binning curve (diagnostic): naive error at bin sizes 1,2,4,...
  for (std::int64_t bs = 1; n / bs >= 16; bs *= 2) {
    const std::int64_t nb = n / bs;
    double bm = 0.0, bv = 0.0;
    std::vector<double> binned(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b) {
      double s = 0.0;
      for (std::int64_t i = b * bs; i < (b + 1) * bs; ++i) s += series[i];
      binned[static_cast<std::size_t>(b)] = s / static_cast<double>(bs);
      bm += binned[static_cast<std::size_t>(b)];
    }
    bm /= static_cast<double>(nb);
    for (double v : binned) bv += (v - bm) * (v - bm);
    bv /= static_cast<double>(nb) * static_cast<double>(nb - 1);
    out.binned_errors.push_back(std::sqrt(bv));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binder cumulant
// ---------------------------------------------------------------------------

BinderEstimate binder(std::span<const double> strengths) {
  BinderEstimate out;
  const std::int64_t n = static_cast<std::int64_t>(strengths.size());
  std::int64_t nonzero = 0;
  for (double v : strengths)
    if (v != 0.0) ++nonzero;
  if (nonzero < 2) return out;  // defined=false: moment ratio is 0/0 territory

  // decorrelate with bins of ~2*tau_int, but keep enough bins for jackknife
  double tau = 0.5;
  if (n >= 32) {
    auto ac = autocorrelation(strengths);
    if (!ac.degenerate) tau = ac.tau_int;
  }
  std::int64_t bin = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * tau)));
  while (bin > 1 && n / bin < 8) bin /= 2;
  const std::int64_t nb = n / bin;
  out.tau_int = tau;
  out.bins = nb;

  std::vector<double> m2(static_cast<std::size_t>(nb)), m4(static_cast<std::size_t>(nb));
  for (std::int64_t b = 0; b < nb; ++b) {
    double s2 = 0.0, s4 = 0.0;
    for (std::int64_t i = b * bin; i < (b + 1) * bin; ++i) {
      const double p2 = strengths[i] * strengths[i];
      s2 += p2;
      s4 += p2 * p2;
    }
    m2[static_cast<std::size_t>(b)] = s2 / static_cast<double>(bin);
    m4[static_cast<std::size_t>(b)] = s4 / static_cast<double>(bin);
  }
  const double M2 = std::accumulate(m2.begin(), m2.end(), 0.0) / static_cast<double>(nb);
  const double M4 = std::accumulate(m4.begin(), m4.end(), 0.0) / static_cast<double>(nb);
  if (M2 <= 0.0) return out;
  out.value = M4 / (M2 * M2);
  out.defined = true;

  if (nb >= 2) {
    std::vector<double> jk(static_cast<std::size_t>(nb));
    double jkm = 0.0;
    for (std::int64_t b = 0; b < nb; ++b) {
      const double m2b = (M2 * nb - m2[static_cast<std::size_t>(b)]) / static_cast<double>(nb - 1);
      const double m4b = (M4 * nb - m4[static_cast<std::size_t>(b)]) / static_cast<double>(nb - 1);
      jk[static_cast<std::size_t>(b)] = m2b > 0.0 ? m4b / (m2b * m2b) : out.value;
      jkm += jk[static_cast<std::size_t>(b)];
    }
    jkm /= static_cast<double>(nb);
    double var = 0.0;
    for (double v : jk) var += (v - jkm) * (v - jkm);
    var *= static_cast<double>(nb - 1) / static_cast<double>(nb);
    out.error = std::sqrt(var);
  }
  return out;
}

// ---------------------------------------------------------------------------
// crossing analysis
// ---------------------------------------------------------------------------

namespace {

struct Interp {
  // strictly increasing x, matching y; linear or cubic Hermite evaluation
  std::vector<double> x, y;
  bool cubic = false;

  double slope_at(std::size_t i) const {
    // central finite-difference tangents for the Hermite variant
    if (x.size() < 2) return 0.0;
    if (i == 0) return (y[1] - y[0]) / (x[1] - x[0]);
    if (i + 1 == x.size()) return (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    return (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
  }

  double operator()(double xv) const {
    if (x.size() < 2) return y.empty() ? 0.0 : y[0];
    auto it = std::upper_bound(x.begin(), x.end(), xv);
    std::size_t hi = static_cast<std::size_t>(it - x.begin());
    if (hi == 0) hi = 1;
    if (hi >= x.size()) hi = x.size() - 1;
    const std::size_t lo = hi - 1;
    const double h = x[hi] - x[lo];
    const double t = (xv - x[lo]) / h;
    if (!cubic) return y[lo] + t * (y[hi] - y[lo]);
    const double m0 = slope_at(lo) * h, m1 = slope_at(hi) * h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[lo] + (t3 - 2 * t2 + t) * m0 +
           (-2 * t3 + 3 * t2) * y[hi] + (t3 - t2) * m1;
  }
};

Interp make_interp(const BinderCurve& c, bool cubic, const std::vector<double>* jitter) {
  Interp f;
  f.cubic = cubic;
  std::size_t k = 0;
  for (const auto& p : c.points) {
    if (!p.defined) {
      ++k;
      continue;
    }
    f.x.push_back(p.x);
    f.y.push_back(p.value + (jitter ? (*jitter)[k] : 0.0));
    ++k;
  }
  return f;
}

// root of f-g on [lo,hi] by dense scan + bisection of the steepest sign change
bool find_crossing(const Interp& f, const Interp& g, double lo, double hi, double* root) {
  if (!(hi > lo)) return false;
  const int steps = 512;
  double best = 0.0, best_slope = -1.0;
  double xa = lo, da = f(lo) - g(lo);
  for (int i = 1; i <= steps; ++i) {
    const double xb = lo + (hi - lo) * i / steps;
    const double db = f(xb) - g(xb);
    if (da == 0.0) {
      best = xa;
      best_slope = std::numeric_limits<double>::max();
    } else if ((da < 0.0) != (db < 0.0)) {
      // bisect
      double a = xa, b = xb, fa = da;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m) - g(m);
        if ((fa < 0.0) == (fm < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double r = 0.5 * (a + b);
      const double eps = (hi - lo) * 1e-4;
      const double slope = std::abs((f(r + eps) - g(r + eps)) - (f(r - eps) - g(r - eps))) / (2 * eps);
      if (slope > best_slope) {
        best_slope = slope;
        best = r;
      }
    }
    xa = xb;
    da = db;
  }
  if (best_slope < 0.0) return false;
  *root = best;
  return true;
}

}  // namespace

CrossingReport crossing_points(const std::vector<BinderCurve>& curves, int n_bootstrap,
                               std::uint64_t seed, bool cubic) {
  if (curves.size() < 2) throw std::invalid_argument("crossing_points: need at least 2 curves");
  CrossingReport rep;
  Rng rng(seed);

  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      CrossingPoint cp;
      cp.L_a = curves[a].L;
      cp.L_b = curves[b].L;
      const Interp fa = make_interp(curves[a], cubic, nullptr);
      const Interp fb = make_interp(curves[b], cubic, nullptr);
      if (fa.x.size() >= 2 && fb.x.size() >= 2) {
        const double lo = std::max(fa.x.front(), fb.x.front());
        const double hi = std::min(fa.x.back(), fb.x.back());
        double root = 0.0;
        if (find_crossing(fa, fb, lo, hi, &root)) {
          cp.found = true;
          cp.x = root;
          // parametric bootstrap: resample every point within its error bar
          std::vector<double> roots;
          roots.reserve(static_cast<std::size_t>(n_bootstrap));
          for (int it = 0; it < n_bootstrap; ++it) {
            auto draw = [&](const BinderCurve& c) {
              std::vector<double> j(c.points.size(), 0.0);
              for (std::size_t k = 0; k < c.points.size(); ++k) {
                // Box-Muller from the deterministic stream
                const double u1 = std::max(rng.u01(), 1e-300);
                const double u2 = rng.u01();
                j[k] = c.points[k].error * std::sqrt(-2.0 * std::log(u1)) *
                       std::cos(6.283185307179586 * u2);
              }
              return j;
            };
            const auto ja = draw(curves[a]);
            const auto jb = draw(curves[b]);
            const Interp ra = make_interp(curves[a], cubic, &ja);
            const Interp rb = make_interp(curves[b], cubic, &jb);
            double r = 0.0;
            if (find_crossing(ra, rb, lo, hi, &r)) roots.push_back(r);
          }
          if (roots.size() >= 2) {
            double m = std::accumulate(roots.begin(), roots.end(), 0.0) /
                       static_cast<double>(roots.size());
            double v = 0.0;
            for (double r : roots) v += (r - m) * (r - m);
            cp.error = std::sqrt(v / static_cast<double>(roots.size() - 1));
          } else {
            cp.error = hi - lo;  // bootstrap unstable: quote the whole window
          }
        }
      }
      rep.pairs.push_back(cp);
    }
  }

  // consensus over found crossings + drift against 1/L
  double sw = 0.0, swx = 0.0;
  std::vector<double> inv_l, xc;
  for (const auto& cp : rep.pairs) {
    if (!cp.found) continue;
    const double w = 1.0 / std::max(cp.error * cp.error, 1e-12);
    sw += w;
    swx += w * cp.x;
    inv_l.push_back(2.0 / (1.0 / cp.L_a + 1.0 / cp.L_b));  // harmonic pair size
    xc.push_back(cp.x);
  }
  if (sw > 0.0) {
    rep.any = true;
    rep.consensus = swx / sw;
    rep.consensus_error = std::sqrt(1.0 / sw);
  }
  if (xc.size() >= 2) {
    for (double& l : inv_l) l = 1.0 / l;
    const double n = static_cast<double>(xc.size());
    const double mx = std::accumulate(inv_l.begin(), inv_l.end(), 0.0) / n;
    const double my = std::accumulate(xc.begin(), xc.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xc.size(); ++i) {
      sxx += (inv_l[i] - mx) * (inv_l[i] - mx);
      sxy += (inv_l[i] - mx) * (xc[i] - my);
    }
    rep.drift_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// scaling collapse
// ---------------------------------------------------------------------------

namespace {

struct ScaledPoint {
  double u, v, dv;
  int size_id;
};

// Houdayer-Hartmann style quality: each point is tested against a weighted
// local line through neighbouring points of the other system sizes.
double collapse_quality(const std::vector<CurveData>& curves, double x_c, double inv_nu,
                        double beta_over_nu, int* n_used) {
  std::vector<ScaledPoint> pts;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& cd = curves[c];
    const double lx = std::pow(cd.L, inv_nu);
    const double ly = std::pow(cd.L, beta_over_nu);
    for (std::size_t i = 0; i < cd.x.size(); ++i) {
      double dv = cd.yerr.empty() ? 0.0 : cd.yerr[i];
      pts.push_back({lx * (cd.x[i] - x_c), cd.y[i] * ly, dv * ly, static_cast<int>(c)});
    }
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.u < b.u; });

  double chi2 = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    // nearest points in u from other sizes (leave own size out)
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (pts[j].size_id == pts[i].size_id) continue;
      near.push_back({std::abs(pts[j].u - pts[i].u), j});
    }
    if (near.size() < 3) continue;
    const std::size_t k = std::min<std::size_t>(6, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());

    // only interpolate: the chosen neighbours must bracket u_i, otherwise the
    // local line would be an extrapolation off the end of the master curve
    bool lo = false, hi = false;
    for (std::size_t m = 0; m < k; ++m) {
      const double du = pts[near[m].second].u - pts[i].u;
      lo = lo || du <= 0.0;
      hi = hi || du >= 0.0;
    }
    if (!lo || !hi) continue;

    // weighted least-squares line v = p + q (u - u_i)
    double sw = 0, su = 0, sv = 0, suu = 0, suv = 0;
    for (std::size_t m = 0; m < k; ++m) {
      const auto& q = pts[near[m].second];
      const double w = 1.0 / std::max(q.dv * q.dv, 1e-12);
      const double du = q.u - pts[i].u;
      sw += w;
      su += w * du;
      sv += w * q.v;
      suu += w * du * du;
      suv += w * du * q.v;
    }
    const double det = sw * suu - su * su;
    if (std::abs(det) < 1e-30) continue;
    const double p = (suu * sv - su * suv) / det;   // prediction at u_i
    const double var_p = suu / det;                 // its variance
    const double denom = pts[i].dv * pts[i].dv + var_p;
    if (denom <= 0.0) continue;
    chi2 += (pts[i].v - p) * (pts[i].v - p) / denom;
    ++used;
  }
  if (n_used) *n_used = used;
  return used > 0 ? chi2 / static_cast<double>(used) : 1e30;
}

// minimal Nelder-Mead for 2-3 parameters
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x0, std::vector<double> step, int max_iter,
                                bool* converged) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> sx(n + 1, x0);
  std::vector<double> sf(n + 1);
  for (std::size_t i = 0; i < n; ++i) sx[i + 1][i] += step[i];
  for (std::size_t i = 0; i <= n; ++i) sf[i] = f(sx[i]);

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sf[a] < sf[b]; });
    std::vector<std::vector<double>> nx(n + 1);
    std::vector<double> nf(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      nx[i] = sx[idx[i]];
      nf[i] = sf[idx[i]];
    }
    sx = std::move(nx);
    sf = std::move(nf);
  };

  *converged = false;
  for (int it = 0; it < max_iter; ++it) {
    order();
    if (std::abs(sf[n] - sf[0]) < 1e-10 * (1.0 + std::abs(sf[0]))) {
      *converged = true;
      break;
    }
    std::vector<double> cen(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < n; ++d) cen[d] += sx[i][d] / static_cast<double>(n);
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t d = 0; d < n; ++d) p[d] = cen[d] + t * (sx[n][d] - cen[d]);
      return p;
    };
    const auto xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < sf[0]) {
      const auto xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        sx[n] = xe;
        sf[n] = fe;
      } else {
        sx[n] = xr;
        sf[n] = fr;
      }
    } else if (fr < sf[n - 1]) {
      sx[n] = xr;
      sf[n] = fr;
    } else {
      const auto xc = blend(0.5);
      const double fc = f(xc);
      if (fc < sf[n]) {
        sx[n] = xc;
        sf[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t d = 0; d < n; ++d) sx[i][d] = sx[0][d] + 0.5 * (sx[i][d] - sx[0][d]);
          sf[i] = f(sx[i]);
        }
      }
    }
  }
  order();
  return sx[0];
}

}  // namespace

CollapseFit collapse_fit(const std::vector<CurveData>& curves, CollapseAnsatz ansatz) {
  if (curves.size() < 3) throw std::invalid_argument("collapse_fit: need at least 3 sizes");
  for (const auto& c : curves)
    if (c.x.size() < 3 || c.x.size() != c.y.size() ||
        (!c.yerr.empty() && c.yerr.size() != c.x.size()))
      throw std::invalid_argument("collapse_fit: malformed curve data");

  const bool fit_beta = (ansatz == CollapseAnsatz::StrengthCollapse);
  double xlo = std::numeric_limits<double>::max(), xhi = std::numeric_limits<double>::lowest();
  for (const auto& c : curves) {
    xlo = std::min(xlo, *std::min_element(c.x.begin(), c.x.end()));
    xhi = std::max(xhi, *std::max_element(c.x.begin(), c.x.end()));
  }

  auto eval = [&](const std::vector<double>& th) {
    const double x_c = th[0];
    const double inv_nu = th[1];
    const double bon = fit_beta ? th[2] : 0.0;
    if (inv_nu < 0.05 || inv_nu > 5.0) return 1e30;
    if (bon < -0.05 || bon > 3.0) return 1e30;
    if (x_c < xlo - 0.5 * (xhi - xlo) || x_c > xhi + 0.5 * (xhi - xlo)) return 1e30;
    return collapse_quality(curves, x_c, inv_nu, bon, nullptr);
  };

  // coarse multi-start grid
  struct Start {
    double q;
    std::vector<double> th;
  };
  std::vector<Start> starts;
  for (int ix = 0; ix <= 14; ++ix) {
    const double x_c = xlo + (xhi - xlo) * ix / 14.0;
    for (double inv_nu : {0.4, 0.6, 0.75, 1.0, 1.33, 1.6, 2.0}) {
      if (!fit_beta) {
        starts.push_back({eval({x_c, inv_nu}), {x_c, inv_nu}});
      } else {
        for (double bon : {0.0, 0.1, 0.2, 0.4, 0.8, 1.2})
          starts.push_back({eval({x_c, inv_nu, bon}), {x_c, inv_nu, bon}});
      }
    }
  }
  std::sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.q < b.q; });

  CollapseFit best;
  double best_q = 1e30;
  std::vector<double> best_th;
  const std::size_t n_refine = std::min<std::size_t>(5, starts.size());
  for (std::size_t s = 0; s < n_refine; ++s) {
    bool conv = false;
    std::vector<double> step = fit_beta
                                   ? std::vector<double>{(xhi - xlo) * 0.05, 0.1, 0.05}
                                   : std::vector<double>{(xhi - xlo) * 0.05, 0.1};
    auto th = nelder_mead(eval, starts[s].th, step, 400, &conv);
    const double q = eval(th);
    if (q < best_q) {
      best_q = q;
      best_th = th;
      best.converged = conv;
    }
  }

  best.x_c = best_th[0];
  best.nu = 1.0 / best_th[1];
  best.beta_p = fit_beta ? best_th[2] / best_th[1] : 0.0;
  int used = 0;
  best.chi2_red = collapse_quality(curves, best_th[0], best_th[1],
                                   fit_beta ? best_th[2] : 0.0, &used);
  best.n_points = used;

  // parameter errors from the curvature of chi2_total = chi2_red * n_used
  {
    const double scale = std::max(1.0, static_cast<double>(used));
    auto chi2_tot = [&](const std::vector<double>& th) { return eval(th) * scale; };
    const std::size_t np = best_th.size();
    std::vector<double> hstep = {std::max(1e-4, (xhi - xlo) * 1e-3), 1e-3, 1e-3};
    std::vector<double> err(np, 0.0);
    for (std::size_t i = 0; i < np; ++i) {
      auto tp = best_th, tm = best_th;
      tp[i] += hstep[i];
      tm[i] -= hstep[i];
      const double d2 = (chi2_tot(tp) - 2.0 * chi2_tot(best_th) + chi2_tot(tm)) /
                        (hstep[i] * hstep[i]);
      err[i] = d2 > 0.0 ? std::sqrt(2.0 / d2) : 0.0;  // delta-chi2 = 1 ellipsoid, diagonal
    }
    best.err_x_c = err[0];
    // nu = 1/inv_nu; beta_p = bon/inv_nu -- first-order propagation
    best.err_nu = err[1] / (best_th[1] * best_th[1]);
    if (fit_beta) {
      const double bon_err = err[2];
      best.err_beta_p = std::sqrt(bon_err * bon_err / (best_th[1] * best_th[1]) +
                                  best_th[2] * best_th[2] * err[1] * err[1] /
                                      std::pow(best_th[1], 4));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// exact reference formulas
// ---------------------------------------------------------------------------

double bernoulli_p(double T_over_h) {
  if (!(T_over_h > 0.0)) throw std::invalid_argument("bernoulli_p: temperature must be positive");
  return 1.0 / (1.0 + std::exp(2.0 / T_over_h));
}

double density_from_p(double p, int z) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("density_from_p: p outside [0,1]");
  if (z <= 0 || z % 2 != 0)
    throw std::invalid_argument("density_from_p: coordination number must be positive and even");
  return 0.5 * (1.0 - std::pow(2.0 * p - 1.0, z));
}

// ---------------------------------------------------------------------------
// dual Ising mapping
// ---------------------------------------------------------------------------

DualIsingResult dual_ising_map(const GaugeConfig& cfg) {
  const LatticeTopology& topo = *cfg.topo;
  if (topo.dimension() != 2) throw std::invalid_argument("dual_ising_map: D=2 only");
  if (cfg.basis != Basis::X) throw std::invalid_argument("dual_ising_map: X-basis configs only");
  for (SiteId s = 0; s < topo.site_count(); ++s)
    if (cfg.star_product(s) != +1)
      throw std::invalid_argument("dual_ising_map: configuration carries matter");

  // dual site <-> plaquette, indexed by its base corner; s_p s_q = tau across
  // the link separating the two plaquettes
  const std::int64_t n = topo.plaquette_count();
  DualIsingResult out;
  std::vector<std::int8_t> spin(static_cast<std::size_t>(n), 0);
  spin[0] = +1;
  std::queue<PlaqId> bfs;
  bfs.push(0);
  while (!bfs.empty()) {
    const PlaqId p = bfs.front();
    bfs.pop();
    const SiteId s = p;  // plaquette index == base site index in 2D
    struct Step {
      SiteId q;
      LinkId link;
    };
    const Step steps[4] = {
        {topo.neighbor(s, 0, +1), topo.link_at(topo.neighbor(s, 0, +1), 1)},  // +x
        {topo.neighbor(s, 0, -1), topo.link_at(s, 1)},                        // -x
        {topo.neighbor(s, 1, +1), topo.link_at(topo.neighbor(s, 1, +1), 0)},  // +y
        {topo.neighbor(s, 1, -1), topo.link_at(s, 0)},                        // -y
    };
    for (const auto& st : steps) {
      const std::int8_t want =
          static_cast<std::int8_t>(spin[static_cast<std::size_t>(p)] * cfg.spin(st.link));
      auto& sq = spin[static_cast<std::size_t>(st.q)];
      if (sq == 0) {
        sq = want;
        bfs.push(st.q);
      } else if (sq != want) {
        return out;  // frustrated cycle: odd winding parity, not representable
      }
    }
  }
  out.mappable = true;
  out.spins = std::move(spin);
  return out;
}

}  // namespace z2perc
