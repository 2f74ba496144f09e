#include "heom/bath.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "heom/errors.hpp"
#include "heom/units.hpp"

namespace heom {

namespace {

// Bose function 1 / (exp(beta z) - 1) for complex z off the imaginary axis.
cplx bose(cplx z, double beta) {
    const cplx x = beta * z;
    if (x.real() > 40.0) {
        const cplx e = std::exp(-x);
        return e / (1.0 - e);
    }
    return 1.0 / (std::exp(x) - 1.0);
}

cplx spectral_density_complex(cplx z, const BathSpec& spec) {
    cplx sum{0.0};
    for (const auto& t : spec.terms) {
        auto lambda = [&](double o, double g) {
            return ((z + o) * (z + o) + g * g) * ((z - o) * (z - o) + g * g);
        };
        sum += t.p * z * z * z / (lambda(t.omega1, t.gamma1) * lambda(t.omega2, t.gamma2));
    }
    return sum;
}

// Residue contributions 2 i Res[J(w) n(w) e^{iwt}] at the four upper-half-plane
// poles of one term, in the pairing order documented in the header.
void append_term_modes(const LorentzianTerm& t, double beta, CorrelationExpansion& out) {
    const std::array<cplx, 8> roots{cplx{t.omega1, t.gamma1},  cplx{-t.omega1, t.gamma1},
                                    cplx{t.omega2, t.gamma2},  cplx{-t.omega2, t.gamma2},
                                    cplx{t.omega1, -t.gamma1}, cplx{-t.omega1, -t.gamma1},
                                    cplx{t.omega2, -t.gamma2}, cplx{-t.omega2, -t.gamma2}};
    std::array<cplx, 4> a{};
    for (std::size_t i = 0; i < 4; ++i) {
        cplx denom{1.0};
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (j != i) denom *= roots[i] - roots[j];
        const cplx residue = t.p * roots[i] * roots[i] * roots[i] / denom;
        a[i] = 2.0 * I * residue * bose(roots[i], beta);
    }
    for (std::size_t i = 0; i < 4; ++i) {
        out.alpha.push_back(a[i]);
        out.gamma.push_back(roots[i]);
    }
    // C*(t): conj(a_1 e^{i g_1 t}) = conj(a_1) e^{i g_2 t} since g_2 = -conj(g_1).
    out.alpha_tilde.push_back(std::conj(a[1]));
    out.alpha_tilde.push_back(std::conj(a[0]));
    out.alpha_tilde.push_back(std::conj(a[3]));
    out.alpha_tilde.push_back(std::conj(a[2]));
}

void append_matsubara_mode(int j, const BathSpec& spec, double beta, CorrelationExpansion& out) {
    const double nu = 2.0 * std::numbers::pi * j / beta;
    // Residue of n(w) at i nu_j is 1/beta; J(i nu) is purely imaginary so alpha is real.
    const double a = (2.0 * I * spectral_density_complex(cplx{0.0, nu}, spec) / beta).real();
    out.alpha.emplace_back(a);
    out.alpha_tilde.emplace_back(a);
    out.gamma.emplace_back(0.0, nu);
    ++out.matsubara_modes;
}

cplx alpha_sum(const CorrelationExpansion& e) {
    cplx s{0.0};
    for (auto a : e.alpha) s += a;
    return s;
}

} // namespace

void BathSpec::validate() const {
    if (!(temperature_K > 0.0) || !std::isfinite(temperature_K))
        throw ConfigError("bath: temperature must be positive, got " + std::to_string(temperature_K));
    if (terms.empty()) throw ConfigError("bath: at least one Lorentzian term is required");
    for (const auto& t : terms) {
        if (!std::isfinite(t.p)) throw ConfigError("bath: amplitude p must be finite");
        if (!(t.omega1 > 0.0 && t.omega2 > 0.0)) throw ConfigError("bath: resonance frequencies must be positive");
        if (!(t.gamma1 > 0.0 && t.gamma2 > 0.0)) throw ConfigError("bath: widths must be positive");
        const double scale = std::max(t.omega1, t.omega2);
        if (std::abs(t.omega1 - t.omega2) < 1e-9 * scale && std::abs(t.gamma1 - t.gamma2) < 1e-9 * scale)
            throw ConfigError("bath: coincident pole pairs (Omega1, Gamma1) == (Omega2, Gamma2) are not supported");
    }
    if (matsubara_count && *matsubara_count < 0) throw ConfigError("bath: matsubara count must be >= 0");
    if (!matsubara_count && !(auto_rel_tol > 0.0)) throw ConfigError("bath: auto tolerance must be positive");
    if (max_modes < 1) throw ConfigError("bath: mode cap must be >= 1");
}

double BathSpec::beta() const { return 1.0 / units::thermal_energy_au(temperature_K); }

CorrelationExpansion CorrelationExpansion::scaled(double s) const {
    CorrelationExpansion out = *this;
    for (auto& a : out.alpha) a *= s;
    for (auto& a : out.alpha_tilde) a *= s;
    return out;
}

double spectral_density_over_omega(double omega, const BathSpec& spec) {
    double sum = 0.0;
    for (const auto& t : spec.terms) {
        auto lambda = [&](double o, double g) {
            return ((omega + o) * (omega + o) + g * g) * ((omega - o) * (omega - o) + g * g);
        };
        sum += t.p * omega * omega / (lambda(t.omega1, t.gamma1) * lambda(t.omega2, t.gamma2));
    }
    return sum;
}

CorrelationExpansion correlation_expansion(const BathSpec& spec) {
    spec.validate();
    const double beta = spec.beta();
    CorrelationExpansion out;
    for (const auto& t : spec.terms) append_term_modes(t, beta, out);
    out.lorentzian_modes = static_cast<int>(out.alpha.size());

    if (spec.matsubara_count) {
        for (int j = 1; j <= *spec.matsubara_count; ++j) append_matsubara_mode(j, spec, beta, out);
        return out;
    }

    for (int j = 1;; ++j) {
        if (static_cast<int>(out.size()) >= spec.max_modes) {
            std::ostringstream tol;
            tol << spec.auto_rel_tol;
            throw TruncationError("bath: automatic Matsubara selection exceeded the cap of " +
                                  std::to_string(spec.max_modes) + " modes; temperature too low for tolerance " + tol.str());
        }
        const cplx before = alpha_sum(out);
        append_matsubara_mode(j, spec, beta, out);
        const cplx after = alpha_sum(out);
        if (std::abs(after - before) < spec.auto_rel_tol * std::abs(after)) break;
    }
    return out;
}

cplx correlation_function(double t, const CorrelationExpansion& exp) {
    if (t < 0.0) throw ConfigError("correlation_function: negative time");
    cplx s{0.0};
    for (std::size_t k = 0; k < exp.size(); ++k) s += exp.alpha[k] * std::exp(I * exp.gamma[k] * t);
    return s;
}

cplx conjugate_correlation(double t, const CorrelationExpansion& exp) {
    if (t < 0.0) throw ConfigError("conjugate_correlation: negative time");
    cplx s{0.0};
    for (std::size_t k = 0; k < exp.size(); ++k) s += exp.alpha_tilde[k] * std::exp(I * exp.gamma[k] * t);
    return s;
}

} // namespace heom
