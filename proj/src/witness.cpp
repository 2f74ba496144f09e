#include "heom/witness.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "heom/errors.hpp"

namespace heom {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Largest-magnitude component made real positive (first index wins a tie).
void fix_phase(Eigen::Ref<Eigen::Vector3cd> v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < 3; ++i)
        if (std::abs(v[i]) > std::abs(v[best]) * (1.0 + 1e-12)) best = i;
    if (std::abs(v[best]) > 0.0) v *= std::conj(v[best]) / std::abs(v[best]);
}

// Replaces each block of (numerically) equal rates by the Gram-Schmidt image of
// e_x, e_y, e_z projected into that block, so degenerate channels are reproducible.
void break_ties(const Eigen::Vector3d& g, Mat3& u) {
    const double tol = 1e-9 * g.cwiseAbs().maxCoeff() + 1e-15;
    Eigen::Index start = 0;
    while (start < 3) {
        Eigen::Index end = start + 1;
        while (end < 3 && g[end] - g[start] <= tol) ++end;
        const Eigen::Index n = end - start;
        if (n > 1) {
            const Eigen::MatrixXcd block = u.middleCols(start, n);
            const Mat3 proj = block * block.adjoint();
            Eigen::Index filled = 0;
            for (Eigen::Index axis = 0; axis < 3 && filled < n; ++axis) {
                Eigen::Vector3cd v = proj.col(axis);
                for (Eigen::Index j = 0; j < filled; ++j) {
                    const auto prev = u.col(start + j);
                    v -= prev.dot(v) * prev;
                }
                if (v.norm() < 1e-6) continue;
                u.col(start + filled) = v.normalized();
                ++filled;
            }
        }
        start = end;
    }
}

} // namespace

const std::array<Mat2, 4>& hermitian_basis() {
    static const std::array<Mat2, 4> basis = [] {
        const double s = 1.0 / std::sqrt(2.0);
        return std::array<Mat2, 4>{Mat2(Mat2::Identity() * s), Mat2(sigma_x() * s), Mat2(sigma_y() * s),
                                   Mat2(sigma_z() * s)};
    }();
    return basis;
}

Eigen::Vector4d basis_coordinates(const Mat2& rho) {
    const auto& g = hermitian_basis();
    Eigen::Vector4d r;
    for (int m = 0; m < 4; ++m) r[m] = (g[m] * rho).trace().real();
    return r;
}

Mat2 from_basis_coordinates(const Eigen::Vector4d& r) {
    const auto& g = hermitian_basis();
    Mat2 out = Mat2::Zero();
    for (int m = 0; m < 4; ++m) out += r[m] * g[m];
    return out;
}

MapSeries reconstruct_map(const SystemSpec& sys, const CorrelationExpansion& exp, const FieldGrid& field,
                          int max_level, const StepControl& ctl, std::size_t max_slots) {
    const auto& g = hermitian_basis();
    auto layout = std::make_shared<const HierarchyLayout>(static_cast<int>(exp.size()), max_level, max_slots);
    const auto gen = HeomGenerator::forward(layout, sys, exp);

    MapSeries ms;
    const std::size_t n_t = field.intervals() + 1;
    ms.times.resize(n_t);
    ms.F.assign(n_t, Mat4::Zero());
    ms.Fdot.assign(n_t, Mat4::Zero());
    for (std::size_t i = 0; i < n_t; ++i) ms.times[i] = field.time(i);

    for (int n = 0; n < 4; ++n) {
        auto observe = [&](std::size_t i, const HierarchyState& s) {
            const Mat2 rho = s.rho();
            const Mat2 drho = gen.slot_derivative(0, field.value_at_sample(i), s.ados);
            for (int m = 0; m < 4; ++m) {
                const cplx f = (g[m] * rho).trace();
                const cplx fd = (g[m] * drho).trace();
                if (std::abs(f.imag()) > 1e-10 * std::max(1.0, std::abs(f.real())))
                    throw NumericalError("reconstruct_map: non-real map entry; reduced matrix lost Hermiticity");
                ms.F[i](m, n) = f.real();
                ms.Fdot[i](m, n) = fd.real();
            }
        };
        propagate(HierarchyState::factorized(layout, g[n], field.t0), field, gen, ctl, observe);
    }
    return ms;
}

std::vector<double> volume(const MapSeries& ms) {
    std::vector<double> v;
    v.reserve(ms.F.size());
    for (const auto& f : ms.F) v.push_back(f.determinant());
    return v;
}

CanonicalPoint canonical_point(const Mat4& F, const Mat4& Fdot) {
    CanonicalPoint pt;
    const Eigen::JacobiSVD<Mat4> svd(F);
    const auto& sv = svd.singularValues();
    pt.rcond = sv[0] > 0.0 ? sv[3] / sv[0] : 0.0;

    const auto& g = hermitian_basis();
    // Generator in the basis: Lambda[G_n] = sum_m L(m, n) G_m.
    const Mat4 L = Fdot * F.inverse();
    std::array<Mat2, 4> lam;
    for (int n = 0; n < 4; ++n) {
        lam[n] = Mat2::Zero();
        for (int m = 0; m < 4; ++m) lam[n] += L(m, n) * g[m];
    }

    // Coefficient matrix of Lambda[rho] = sum_ij c_ij G_i rho G_j.
    Eigen::Matrix4cd c;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            cplx s{0.0};
            for (int m = 0; m < 4; ++m) s += (g[m] * g[i] * lam[m] * g[j]).trace();
            c(i, j) = s;
        }

    constexpr double d = 2.0;
    Mat2 o = c(0, 0) / (2.0 * d) * Mat2::Identity();
    for (int i = 1; i < 4; ++i) o += c(i, 0) / std::sqrt(d) * g[i];
    pt.h_cor = I * (o - o.adjoint()) / 2.0;

    const Mat3 raw = c.bottomRightCorner<3, 3>();
    pt.D = (raw + raw.adjoint()) / 2.0;
    pt.antihermitian_residual = ((raw - raw.adjoint()) / 2.0).cwiseAbs().maxCoeff();

    const Eigen::SelfAdjointEigenSolver<Mat3> es(pt.D);
    pt.rates = es.eigenvalues();
    pt.eigenvectors = es.eigenvectors();
    break_ties(pt.rates, pt.eigenvectors);
    for (int k = 0; k < 3; ++k) {
        fix_phase(pt.eigenvectors.col(k));
        pt.channels[k] = Mat2::Zero();
        for (int i = 0; i < 3; ++i) pt.channels[k] += pt.eigenvectors(i, k) * g[i + 1];
    }
    pt.valid = true;
    return pt;
}

CanonicalDecomposition canonical_decomposition(const MapSeries& ms, double rcond_cutoff) {
    CanonicalDecomposition cd;
    cd.times = ms.times;
    cd.rcond_cutoff = rcond_cutoff;
    cd.points.resize(ms.F.size());
    for (std::size_t i = 0; i < ms.F.size(); ++i) {
        if (cd.cutoff_time) continue;
        auto pt = canonical_point(ms.F[i], ms.Fdot[i]);
        if (pt.rcond < rcond_cutoff) {
            cd.cutoff_time = ms.times[i];
            continue;
        }
        cd.points[i] = std::move(pt);
    }
    return cd;
}

std::vector<double> gamma_sum(const CanonicalDecomposition& cd) {
    std::vector<double> out;
    out.reserve(cd.points.size());
    for (const auto& p : cd.points) out.push_back(p.valid ? p.rates.sum() : nan);
    return out;
}

std::vector<double> log_volume_from_rates(const CanonicalDecomposition& cd) {
    const auto gam = gamma_sum(cd);
    std::vector<double> out(gam.size(), nan);
    if (gam.empty() || !cd.points[0].valid) return out;
    out[0] = 0.0;
    for (std::size_t i = 1; i < gam.size() && cd.points[i].valid; ++i)
        out[i] = out[i - 1] - (cd.times[i] - cd.times[i - 1]) * (gam[i] + gam[i - 1]);
    return out;
}

std::vector<std::array<cplx, 3>> channel_weights(const CanonicalDecomposition& cd, const std::vector<Mat2>& rhos) {
    if (rhos.size() != cd.points.size())
        throw ConfigError("channel_weights: density-matrix series and decomposition grids differ");
    std::vector<std::array<cplx, 3>> out(rhos.size());
    for (std::size_t i = 0; i < rhos.size(); ++i)
        for (int k = 0; k < 3; ++k)
            out[i][k] = cd.points[i].valid ? (cd.points[i].channels[k].adjoint() * rhos[i]).trace() : cplx{nan, nan};
    return out;
}

double entropy(const Mat2& rho) {
    const Mat2 h = (rho + rho.adjoint()) / 2.0;
    const Eigen::SelfAdjointEigenSolver<Mat2> es(h, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int k = 0; k < 2; ++k) {
        double lam = es.eigenvalues()[k];
        if (lam < -1e-10 || lam > 1.0 + 1e-10)
            throw InvalidStateError("entropy: eigenvalue " + std::to_string(lam) + " outside [0, 1]");
        lam = std::clamp(lam, 0.0, 1.0);
        if (lam > 0.0) s -= lam * std::log2(lam);
    }
    return s;
}

} // namespace heom
