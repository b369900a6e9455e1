#include "z2perc/ed.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "z2perc/lattice.hpp"
#include "z2perc/rng.hpp"

namespace z2perc {

namespace {

// Basis states are bitmasks over links of tau^x eigenvalues, bit set == -1
// (the same packing the samplers use).  In this basis A_s and tau^x are
// diagonal; B_p and tau^z_l flip bits.
struct Masks {
  int n_links = 0;
  std::vector<std::uint32_t> star;  // per site
  std::vector<std::uint32_t> plaq;  // per plaquette
};

Masks build_masks(const LatticeTopology& topo) {
  Masks m;
  m.n_links = topo.link_count();
  if (m.n_links > 20) throw std::invalid_argument("ed_solve: Hilbert space too large");
  m.star.resize(static_cast<std::size_t>(topo.site_count()), 0);
  for (SiteId s = 0; s < topo.site_count(); ++s)
    for (LinkId l : topo.star_links(s)) m.star[static_cast<std::size_t>(s)] |= 1u << l;
  m.plaq.resize(static_cast<std::size_t>(topo.plaquette_count()), 0);
  for (PlaqId p = 0; p < topo.plaquette_count(); ++p)
    for (LinkId l : topo.plaquette_links(p)) m.plaq[static_cast<std::size_t>(p)] |= 1u << l;
  return m;
}

double diag_energy(std::uint32_t state, const Masks& m, double mu, double h) {
  double e = 0.0;
  for (std::uint32_t sm : m.star)
    e -= mu * (__builtin_parity(state & sm) ? -1.0 : 1.0);
  e -= h * static_cast<double>(m.n_links - 2 * __builtin_popcount(state));
  return e;
}

EdResult solve_dense(const LatticeTopology& topo, const EdParams& p) {
  const Masks m = build_masks(topo);
  const std::size_t dim = std::size_t{1} << m.n_links;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    H(col, col) = diag_energy(static_cast<std::uint32_t>(s), m, p.mu, p.h);
    for (std::uint32_t pm : m.plaq)
      H(static_cast<Eigen::Index>(s ^ pm), col) -= p.J;
    for (int l = 0; l < m.n_links; ++l)
      H(static_cast<Eigen::Index>(s ^ (1u << l)), col) -= p.lambda;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXd& V = es.eigenvectors();

  EdResult out;
  out.ground_energy = ev(0);
  out.has_thermal = true;

  const double beta = p.effective_beta();
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = std::exp(-beta * (ev(i) - ev(0)));
  const double Z = w.sum();

  double e_th = 0.0, tx_th = 0.0, star_th = 0.0, plq_th = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w(i) < 1e-300 * Z) continue;
    double tx = 0.0, st = 0.0, pl = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
      const double p2 = V(s, i) * V(s, i);
      const auto state = static_cast<std::uint32_t>(s);
      tx += p2 * static_cast<double>(m.n_links - 2 * __builtin_popcount(state));
      double stp = 0.0;
      for (std::uint32_t sm : m.star) stp += __builtin_parity(state & sm) ? -1.0 : 1.0;
      st += p2 * stp;
      for (std::uint32_t pm : m.plaq)
        pl += V(s, i) * V(static_cast<Eigen::Index>(s ^ static_cast<Eigen::Index>(pm)), i);
    }
    e_th += w(i) * ev(i);
    tx_th += w(i) * tx / m.n_links;
    star_th += w(i) * st / static_cast<double>(m.star.size());
    plq_th += w(i) * pl / static_cast<double>(m.plaq.size());
  }
  out.energy = e_th / Z;
  out.tau_x = tx_th / Z;
  out.star_avg = star_th / Z;
  out.plaq_avg = plq_th / Z;
  return out;
}

struct Matvec {
  const Masks* m;
  double mu, J, h, lambda;
  std::vector<double> diag;

  explicit Matvec(const Masks& masks, const EdParams& p)
      : m(&masks), mu(p.mu), J(p.J), h(p.h), lambda(p.lambda) {
    const std::size_t dim = std::size_t{1} << m->n_links;
    diag.resize(dim);
    for (std::size_t s = 0; s < dim; ++s)
      diag[s] = diag_energy(static_cast<std::uint32_t>(s), *m, mu, h);
  }

  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t dim = x.size();
    for (std::size_t s = 0; s < dim; ++s) y[s] = diag[s] * x[s];
    if (J != 0.0)
      for (std::uint32_t pm : m->plaq)
        for (std::size_t s = 0; s < dim; ++s) y[s ^ pm] -= J * x[s];
    if (lambda != 0.0)
      for (int l = 0; l < m->n_links; ++l) {
        const std::uint32_t lm = 1u << l;
        for (std::size_t s = 0; s < dim; ++s) y[s ^ lm] -= lambda * x[s];
      }
  }
};

EdResult solve_lanczos(const LatticeTopology& topo, const EdParams& p) {
  const Masks masks = build_masks(topo);
  const std::size_t dim = std::size_t{1} << masks.n_links;
  const Matvec H(masks, p);

  // deterministic start vector
  std::vector<double> v(dim);
  {
    Rng rng(0x5eedu);
    double norm2 = 0.0;
    for (auto& x : v) {
      x = rng.u01() - 0.5;
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x *= inv;
  }
  const std::vector<double> v0 = v;

  const int max_iter = 300;
  std::vector<double> alpha, beta;  // tridiagonal coefficients
  std::vector<double> prev(dim, 0.0), w(dim);

  auto recurrence = [&](int k_max, const Eigen::VectorXd* coeff, std::vector<double>* accum) {
    std::fill(prev.begin(), prev.end(), 0.0);
    std::vector<double> cur = v0;
    double b_prev = 0.0;
    for (int k = 0; k < k_max; ++k) {
      if (accum && coeff) {
        const double c = (*coeff)(k);
        for (std::size_t i = 0; i < dim; ++i) (*accum)[i] += c * cur[i];
        if (k + 1 == k_max) break;  // last basis vector collected
      }
      H.apply(cur, w);
      double a = 0.0;
      for (std::size_t i = 0; i < dim; ++i) a += cur[i] * w[i];
      if (!accum) alpha.push_back(a);
      for (std::size_t i = 0; i < dim; ++i) w[i] -= a * cur[i] + b_prev * prev[i];
      double b = 0.0;
      for (double x : w) b += x * x;
      b = std::sqrt(b);
      if (!accum) {
        if (b < 1e-12) return k + 1;  // invariant subspace exhausted
        beta.push_back(b);
      }
      const double inv = 1.0 / (b > 1e-300 ? b : 1.0);
      prev.swap(cur);
      for (std::size_t i = 0; i < dim; ++i) cur[i] = w[i] * inv;
      b_prev = (!accum) ? b : beta[static_cast<std::size_t>(k)];
    }
    return k_max;
  };

  const int k_used = recurrence(max_iter, nullptr, nullptr);

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k_used, k_used);
  for (int i = 0; i < k_used; ++i) {
    T(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k_used) {
      T(i, i + 1) = beta[static_cast<std::size_t>(i)];
      T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const double e0 = es.eigenvalues()(0);
  const Eigen::VectorXd coeff = es.eigenvectors().col(0);

  // second pass: reassemble the ground vector from the Krylov basis
  std::vector<double> psi(dim, 0.0);
  recurrence(k_used, &coeff, &psi);
  double norm2 = 0.0;
  for (double x : psi) norm2 += x * x;
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : psi) x *= inv;

  EdResult out;
  out.ground_energy = e0;
  out.has_thermal = false;
  out.energy = e0;
  double tx = 0.0, st = 0.0, pl = 0.0;
  for (std::size_t s = 0; s < dim; ++s) {
    const double p2 = psi[s] * psi[s];
    const auto state = static_cast<std::uint32_t>(s);
    tx += p2 * static_cast<double>(masks.n_links - 2 * __builtin_popcount(state));
    double stp = 0.0;
    for (std::uint32_t sm : masks.star) stp += __builtin_parity(state & sm) ? -1.0 : 1.0;
    st += p2 * stp;
  }
  for (std::uint32_t pm : masks.plaq)
    for (std::size_t s = 0; s < dim; ++s) pl += psi[s] * psi[s ^ pm];
  out.tau_x = tx / masks.n_links;
  out.star_avg = st / static_cast<double>(masks.star.size());
  out.plaq_avg = pl / static_cast<double>(masks.plaq.size());
  return out;
}

}  // namespace

EdResult ed_solve(const EdParams& p) {
  if (p.L == 2) {
    const LatticeTopology topo(2, 2);
    return solve_dense(topo, p);
  }
  if (p.L == 3) {
    const LatticeTopology topo(2, 3);
    return solve_lanczos(topo, p);
  }
  throw std::invalid_argument("ed_solve: only L=2 (dense) and L=3 (Lanczos) are feasible");
}

}  // namespace z2perc
