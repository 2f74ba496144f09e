// bath.hpp - four-pole Lorentzian spectral densities and their exponential
// correlation-function expansion (pole residues + Matsubara terms)

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "heom/types.hpp"

namespace heom {

// One four-pole term p w^3 / (Lambda_1(w) Lambda_2(w)), with
// Lambda_i(w) = [(w + Omega_i)^2 + Gamma_i^2] [(w - Omega_i)^2 + Gamma_i^2].
// All quantities in atomic units (p carries energy^6).
struct LorentzianTerm {
    double p{0.0};
    double omega1{0.0};
    double gamma1{0.0};
    double omega2{0.0};
    double gamma2{0.0};
};

struct BathSpec {
    std::vector<LorentzianTerm> terms;
    double temperature_K{298.0};
    std::optional<int> matsubara_count; // empty = auto
    double auto_rel_tol{1e-6};
    int max_modes{64};                   // hard cap on n_cor in auto mode

    void validate() const;
    double beta() const;                 // 1 / k_B T in inverse hartree
};

// C(t) = sum_k alpha_k exp(i gamma_k t), C*(t) = sum_k alpha_tilde_k exp(i gamma_k t).
// Per Lorentzian term the four modes are ordered
//   (Omega1 + i Gamma1, -Omega1 + i Gamma1, Omega2 + i Gamma2, -Omega2 + i Gamma2)
// followed by the Matsubara modes i nu_1, i nu_2, ...
struct CorrelationExpansion {
    std::vector<cplx> alpha;
    std::vector<cplx> alpha_tilde;
    std::vector<cplx> gamma;
    int lorentzian_modes{0};
    int matsubara_modes{0};

    std::size_t size() const { return alpha.size(); }
    // Multiplies every amplitude by s (used for weak-coupling and decoupled variants).
    CorrelationExpansion scaled(double s) const;
};

template <typename Real> Real spectral_density(Real omega, const BathSpec& spec) {
    Real sum(0);
    for (const auto& t : spec.terms) {
        const Real o1(t.omega1), g1(t.gamma1), o2(t.omega2), g2(t.gamma2);
        const Real l1 = ((omega + o1) * (omega + o1) + g1 * g1) * ((omega - o1) * (omega - o1) + g1 * g1);
        const Real l2 = ((omega + o2) * (omega + o2) + g2 * g2) * ((omega - o2) * (omega - o2) + g2 * g2);
        sum += Real(t.p) * omega * omega * omega / (l1 * l2);
    }
    return sum;
}

// J(w)/w, finite at w = 0.
double spectral_density_over_omega(double omega, const BathSpec& spec);

CorrelationExpansion correlation_expansion(const BathSpec& spec);

// C(t) for t >= 0; throws ConfigError for negative t.
cplx correlation_function(double t, const CorrelationExpansion& exp);
cplx conjugate_correlation(double t, const CorrelationExpansion& exp);

} // namespace heom
