#pragma once

#include <cstdint>

namespace z2perc {

// H = -mu sum_s A_s - J sum_p B_p - h sum_l tau^x_l - lambda sum_l tau^z_l
// on the full 2^{n_links} Hilbert space (no gauge-sector projection), D = 2.
struct EdParams {
  int L = 2;
  double mu = 1.0, J = 1.0;
  double h = 0.0, lambda = 0.0;
  double beta = 0.0;  // <= 0: ground-state recipe beta = L

  double effective_beta() const { return beta > 0.0 ? beta : static_cast<double>(L); }
};

struct EdResult {
  double ground_energy = 0.0;
  // Thermal averages at effective_beta (L=2, dense full spectrum).  For L=3
  // the solver is a matrix-free Lanczos ground-state pass: has_thermal is
  // false and the fields below hold ground-state expectation values instead.
  bool has_thermal = false;
  double energy = 0.0;    // <H>
  double tau_x = 0.0;     // (1/n_links) sum_l <tau^x_l>
  double star_avg = 0.0;  // (1/n_sites) sum_s <A_s>
  double plaq_avg = 0.0;  // (1/n_plaqs) sum_p <B_p>
};

// L=2: dense diagonalization (dim 256), exact thermal averages.
// L=3: Lanczos ground state (dim 2^18), a few seconds.
// L>=4 is out of reach and throws std::invalid_argument.
EdResult ed_solve(const EdParams& p);

}  // namespace z2perc
