// quadrature.hpp - direct numerical integration over the spectral density.
// Independent of the pole expansion; used for truncation diagnostics and as
// a reference in the test suites.

#pragma once

#include "heom/bath.hpp"

namespace heom {

struct QuadratureOptions {
    double rel_tol{1e-12};
    double tail_fraction{1e-10}; // integrand tail cut relative to its peak
};

// C(t) = (1/pi) int_0^inf J(w) [coth(beta w / 2) cos(w t) - i sin(w t)] dw.
cplx correlation_by_quadrature(double t, const BathSpec& spec, const QuadratureOptions& opt = {});

// Pure-dephasing decay exponent for S = sigma_z:
//   Phi(t) = (4/pi) int_0^inf J(w) coth(beta w / 2) (1 - cos w t) / w^2 dw,
// so that |rho_12(t)| = |rho_12(0)| exp(-Phi(t)) when the inter-state coupling vanishes.
// The factor 4 is the squared difference (+1 - (-1))^2 of the sigma_z eigenvalues.
double dephasing_exponent(double t, const BathSpec& spec, const QuadratureOptions& opt = {});

// Upper frequency limit where J(w) coth(beta w/2) has fallen below tail_fraction of its peak.
double quadrature_cutoff(const BathSpec& spec, double tail_fraction);

} // namespace heom
