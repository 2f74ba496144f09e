#include <doctest.h>

#include <limits>
#include <numeric>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "heom/errors.hpp"
#include "heom/quadrature.hpp"
#include "support.hpp"

using namespace heom;
using support::reference_bath;

namespace {

// Lambda(w) rewritten as (w^2 + O^2 + G^2)^2 - 4 w^2 O^2, evaluated with 50 digits.
double spectral_density_oracle(double omega, const LorentzianTerm& t) {
    using big = boost::multiprecision::cpp_bin_float_50;
    auto lambda = [&](big w, big o, big g) {
        const big s = w * w + o * o + g * g;
        return s * s - 4 * w * w * o * o;
    };
    const big w(omega);
    const big j = big(t.p) * w * w * w / (lambda(w, t.omega1, t.gamma1) * lambda(w, t.omega2, t.gamma2));
    return static_cast<double>(j);
}

double c0_quadrature_error(const BathSpec& b) {
    const auto e = correlation_expansion(b);
    const cplx q = correlation_by_quadrature(0.0, b);
    return std::abs(correlation_function(0.0, e) - q) / std::abs(q);
}

} // namespace

TEST_CASE("spectral density vanishes at zero and is odd") {
    const auto b = reference_bath();
    CHECK(spectral_density(0.0, b) == 0.0);
    for (double w : {0.01, 0.05, 0.2}) CHECK(spectral_density(-w, b) == doctest::Approx(-spectral_density(w, b)).epsilon(1e-14));
}

TEST_CASE("spectral density matches a 50-digit evaluation") {
    BathSpec b;
    b.terms.push_back({1.0, 0.1, 0.02, 0.2, 0.05});
    const double ref = spectral_density_oracle(0.1, b.terms[0]);
    CHECK(std::abs(spectral_density(0.1, b) - ref) <= 1e-13 * std::abs(ref));
    for (double w : {1e-3, 0.07, 0.15, 0.6}) {
        const double r = spectral_density_oracle(w, b.terms[0]);
        CHECK(std::abs(spectral_density(w, b) - r) <= 1e-12 * std::abs(r));
        CHECK(std::abs(spectral_density_over_omega(w, b) * w - r) <= 1e-12 * std::abs(r));
    }
}

TEST_CASE("first Matsubara frequency at room temperature") {
    const double nu1 = units::matsubara_frequency_au(1, 298.0);
    CHECK(units::au_to_eV(nu1) == doctest::Approx(0.1614).epsilon(1e-3));
    CHECK(nu1 == doctest::Approx(5.93e-3).epsilon(1e-3));
    const auto e = correlation_expansion(reference_bath(3));
    REQUIRE(e.matsubara_modes == 3);
    for (int j = 1; j <= 3; ++j) CHECK(e.gamma[3 + j].imag() == doctest::Approx(j * nu1).epsilon(1e-14));
}

TEST_CASE("every mode decays forward in time") {
    for (int m : {0, 2, 8}) {
        const auto e = correlation_expansion(reference_bath(m));
        CHECK(e.size() == static_cast<std::size_t>(4 + m));
        for (auto g : e.gamma) CHECK(g.imag() > 0.0);
    }
}

TEST_CASE("conjugate pairing reproduces C*(t)") {
    BathSpec b = reference_bath(4);
    b.terms.push_back({3e-14, units::eV_to_au(0.1), units::eV_to_au(0.03), units::eV_to_au(0.7), units::eV_to_au(0.2)});
    const auto e = correlation_expansion(b);
    for (double t_fs = 0.0; t_fs <= 100.0; t_fs += 0.5) {
        const double t = units::fs_to_au(t_fs);
        CHECK(std::abs(std::conj(correlation_function(t, e)) - conjugate_correlation(t, e)) < 1e-12);
    }
    for (int k = 4; k < 8; ++k) CHECK(e.alpha_tilde[k] == std::conj(e.alpha[k ^ 1]));
    for (std::size_t k = 8; k < e.size(); ++k) {
        CHECK(e.alpha[k].imag() == 0.0);
        CHECK(e.alpha_tilde[k] == e.alpha[k]);
    }
}

TEST_CASE("C(0) from the converged expansion matches quadrature") {
    for (double temp : {150.0, 298.0, 600.0}) {
        BathSpec b = reference_bath(std::nullopt);
        b.temperature_K = temp;
        b.auto_rel_tol = 1e-8;
        b.max_modes = 512;
        CHECK(c0_quadrature_error(b) < 1e-6);
    }
    BathSpec two = reference_bath(std::nullopt);
    two.terms.push_back({3e-14, units::eV_to_au(0.1), units::eV_to_au(0.03), units::eV_to_au(0.7), units::eV_to_au(0.2)});
    two.auto_rel_tol = 1e-8;
    two.max_modes = 512;
    CHECK(c0_quadrature_error(two) < 1e-6);
}

TEST_CASE("C(t) matches quadrature across five correlation times") {
    BathSpec b = reference_bath(std::nullopt);
    b.auto_rel_tol = 1e-7;
    const auto e = correlation_expansion(b);
    const double c0 = std::abs(correlation_by_quadrature(0.0, b));
    double worst = 0.0;
    for (double t_fs = 0.0; t_fs <= 135.0; t_fs += 1.0) {
        const double t = units::fs_to_au(t_fs);
        worst = std::max(worst, std::abs(correlation_function(t, e) - correlation_by_quadrature(t, b)) / c0);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("C(0) error against quadrature never grows with more Matsubara terms") {
    double prev = std::numeric_limits<double>::infinity();
    for (int m : {0, 1, 2, 4, 8, 16}) {
        const double err = c0_quadrature_error(reference_bath(m));
        CHECK(err <= prev);
        prev = err;
    }
}

TEST_CASE("reference bath decorrelates in about 25 fs") {
    const auto e = correlation_expansion(reference_bath());
    const double c0 = std::abs(correlation_function(0.0, e));
    double last_above = 0.0;
    for (double t_fs = 0.0; t_fs <= 100.0; t_fs += 0.1)
        if (std::abs(correlation_function(units::fs_to_au(t_fs), e)) > 0.1 * c0) last_above = t_fs;
    MESSAGE("|C(t)| last above 10% of C(0) at " << last_above << " fs");
    CHECK(last_above > 20.0);
    CHECK(last_above < 30.0);
}

TEST_CASE("correlation function rejects negative time") {
    const auto e = correlation_expansion(reference_bath());
    CHECK(correlation_function(0.0, e) == std::accumulate(e.alpha.begin(), e.alpha.end(), cplx{0.0}));
    CHECK_THROWS_AS(correlation_function(-1.0, e), ConfigError);
    CHECK_THROWS_AS(conjugate_correlation(-1.0, e), ConfigError);
}

TEST_CASE("invalid baths are rejected") {
    BathSpec b = reference_bath();
    b.temperature_K = 0.0;
    CHECK_THROWS_AS(correlation_expansion(b), ConfigError);
    b = reference_bath();
    b.terms.clear();
    CHECK_THROWS_AS(correlation_expansion(b), ConfigError);
    b = reference_bath();
    b.terms[0].gamma2 = -1.0;
    CHECK_THROWS_AS(correlation_expansion(b), ConfigError);
    b = reference_bath();
    b.terms[0].omega2 = b.terms[0].omega1;
    b.terms[0].gamma2 = b.terms[0].gamma1;
    CHECK_THROWS_AS(correlation_expansion(b), ConfigError);
}

TEST_CASE("auto Matsubara selection stops at the mode cap") {
    BathSpec b = reference_bath(std::nullopt);
    b.temperature_K = 2.0;
    b.auto_rel_tol = 1e-12;
    b.max_modes = 16;
    CHECK_THROWS_AS(correlation_expansion(b), TruncationError);
}
