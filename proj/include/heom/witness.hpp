// witness.hpp - dynamical-map reconstruction and non-Markovianity witnesses:
// accessible-state volume, canonical rates and channels, channel weights, entropy

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "heom/propagate.hpp"

namespace heom {

// G0 = I/sqrt2, G1..G3 = sigma_{x,y,z}/sqrt2; orthonormal under Tr(A B).
const std::array<Mat2, 4>& hermitian_basis();

// Coordinates r_m = Tr(G_m rho) and the inverse map.
Eigen::Vector4d basis_coordinates(const Mat2& rho);
Mat2 from_basis_coordinates(const Eigen::Vector4d& r);

struct MapSeries {
    std::vector<double> times;
    std::vector<Mat4> F;    // F_mn(t) = Tr(G_m phi_t[G_n])
    std::vector<Mat4> Fdot; // generator applied to the basis trajectories (right derivative at field steps)
};

// Propagates G_0..G_3 as initial reduced matrices (all ADOs zero) and assembles F and dF/dt.
MapSeries reconstruct_map(const SystemSpec& sys, const CorrelationExpansion& exp, const FieldGrid& field,
                          int max_level, const StepControl& ctl = {}, std::size_t max_slots = kDefaultMaxSlots);

std::vector<double> volume(const MapSeries& ms);

struct CanonicalPoint {
    bool valid{false};
    double rcond{0.0};
    Eigen::Vector3d rates{Eigen::Vector3d::Zero()}; // ascending
    std::array<Mat2, 3> channels{};                 // orthonormal, Tr(C_k^dagger C_j) = delta_kj
    Mat3 eigenvectors{Mat3::Zero()};                // column k holds the basis coefficients of C_k
    Mat2 h_cor{Mat2::Zero()};
    Mat3 D{Mat3::Zero()};                           // Hermitized decoherence matrix
    double antihermitian_residual{0.0};
};

struct CanonicalDecomposition {
    std::vector<double> times;
    std::vector<CanonicalPoint> points;
    double rcond_cutoff{1e-10};
    std::optional<double> cutoff_time; // first time the map became too ill-conditioned
};

// One time point: generator matrix Fdot F^-1, coefficient matrix, Hamiltonian/dissipator split.
CanonicalPoint canonical_point(const Mat4& F, const Mat4& Fdot);

CanonicalDecomposition canonical_decomposition(const MapSeries& ms, double rcond_cutoff = 1e-10);

// Gamma(t) = g1 + g2 + g3; NaN where the decomposition is invalid.
std::vector<double> gamma_sum(const CanonicalDecomposition& cd);

// ln V(t) - ln V(0) predicted by -2 int Gamma (trapezoidal), NaN past the cutoff.
std::vector<double> log_volume_from_rates(const CanonicalDecomposition& cd);

// c_k = Tr(C_k^dagger rho) on the decomposition grid; NaN where invalid.
std::vector<std::array<cplx, 3>> channel_weights(const CanonicalDecomposition& cd, const std::vector<Mat2>& rhos);

// Von Neumann entropy in bits; eigenvalues clamped to [0, 1] inside a 1e-10 band.
double entropy(const Mat2& rho);

} // namespace heom
