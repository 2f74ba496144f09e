// support.hpp - shared fixtures and independent oracles for the test suites

#pragma once

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "heom/bath.hpp"
#include "heom/hierarchy.hpp"
#include "heom/units.hpp"
#include "heom/witness.hpp"

namespace support {

using namespace heom;

// The documented reference bath shipped in configs/field_free.toml.
inline BathSpec reference_bath(std::optional<int> matsubara = 2) {
    BathSpec b;
    b.terms.push_back({1e-13, units::eV_to_au(0.25), units::eV_to_au(0.06), units::eV_to_au(0.45), units::eV_to_au(0.06)});
    b.temperature_K = 298.0;
    b.matsubara_count = matsubara;
    return b;
}

inline SystemSpec reference_system() {
    SystemSpec s;
    s.delta = units::eV_to_au(0.21);
    s.w = units::eV_to_au(0.13);
    return s;
}

inline std::shared_ptr<const HierarchyLayout> layout_for(const CorrelationExpansion& e, int level) {
    return std::make_shared<const HierarchyLayout>(static_cast<int>(e.size()), level);
}

inline Mat2 random_hermitian(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Mat2 a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx{n(rng), n(rng)};
    return (a + a.adjoint()) / 2.0;
}

inline Mat2 random_density(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Mat2 a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) a(i, j) = cplx{n(rng), n(rng)};
    Mat2 r = a * a.adjoint();
    return r / r.trace();
}

inline Mat2 random_pure(std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    Eigen::Vector2cd v(cplx{n(rng), n(rng)}, cplx{n(rng), n(rng)});
    v.normalize();
    return v * v.adjoint();
}

inline Mat2 random_unitary(std::mt19937_64& rng) {
    const Mat2 h = random_hermitian(rng);
    return (I * h).exp();
}

// Basis-matrix representation of a superoperator acting on 2x2 matrices:
// L(m, n) = Tr(G_m Lambda[G_n]). Real for Hermiticity-preserving maps.
template <typename Super> Mat4 basis_matrix(Super&& lambda) {
    const auto& g = hermitian_basis();
    Mat4 out;
    for (int n = 0; n < 4; ++n) {
        const Mat2 img = lambda(g[n]);
        for (int m = 0; m < 4; ++m) out(m, n) = (g[m] * img).trace().real();
    }
    return out;
}

// Constant Lindblad generator -i[H, rho] + sum_k rate_k (A_k rho A_k^+ - {A_k^+ A_k, rho}/2).
struct Lindblad {
    Mat2 h{Mat2::Zero()};
    std::vector<std::pair<double, Mat2>> jumps;

    Mat2 operator()(const Mat2& rho) const {
        Mat2 out = -I * (h * rho - rho * h);
        for (const auto& [rate, a] : jumps)
            out += rate * (a * rho * a.adjoint() - 0.5 * (a.adjoint() * a * rho + rho * a.adjoint() * a));
        return out;
    }
};

// Exact map series exp(L t) and its derivative L exp(L t) on a uniform grid.
inline MapSeries lindblad_map_series(const Lindblad& gen, double dt, int n) {
    const Mat4 L = basis_matrix(gen);
    MapSeries ms;
    for (int i = 0; i <= n; ++i) {
        const double t = i * dt;
        const Mat4 F = (L * t).exp();
        ms.times.push_back(t);
        ms.F.push_back(F);
        ms.Fdot.push_back(L * F);
    }
    return ms;
}

} // namespace support
