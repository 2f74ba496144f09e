// hierarchy.hpp - driven two-level system, HEOM state stack and its generator

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "heom/bath.hpp"
#include "heom/layout.hpp"
#include "heom/types.hpp"

namespace heom {

// H_S(t) = delta/2 sigma_z + W sigma_x - mu E(t); coupling operator S enters H_SB = S B.
struct SystemSpec {
    double delta{0.0};
    double w{0.0};
    Mat2 dipole{sigma_z()};
    Mat2 coupling{sigma_z()};

    void validate() const;
    Mat2 hamiltonian(double field) const;
    // Field-free eigen-gap sqrt(delta^2 + 4 W^2).
    double eigen_gap() const;
};

// Piecewise-constant field: values[i] holds on [t0 + i dt, t0 + (i+1) dt).
struct FieldGrid {
    double t0{0.0};
    double dt{2.0};
    std::vector<double> values;

    // Uniform grid covering [t0, t1] with the closest step not larger than dt_target.
    static FieldGrid uniform(double t0, double t1, double dt_target, double value = 0.0);

    std::size_t intervals() const { return values.size(); }
    double t1() const { return t0 + dt * static_cast<double>(values.size()); }
    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    // Right-continuous value; the final grid point reuses the last interval.
    double value_at_sample(std::size_t i) const;
    double max_abs() const;
    void validate() const;
};

FieldGrid sine_squared_field(double t0, double t1, double dt_target, double amplitude);

struct HierarchyState {
    std::shared_ptr<const HierarchyLayout> layout;
    Eigen::VectorXcd ados; // 4 entries per slot, each a column-major 2x2 block
    double time{0.0};

    HierarchyState() = default;
    HierarchyState(std::shared_ptr<const HierarchyLayout> l, double t = 0.0);

    // rho in slot 0, every auxiliary matrix zero.
    static HierarchyState factorized(std::shared_ptr<const HierarchyLayout> l, const Mat2& rho, double t = 0.0);

    std::size_t slots() const { return layout->size(); }
    Eigen::Map<Mat2> ado(std::size_t slot) { return Eigen::Map<Mat2>(ados.data() + 4 * slot); }
    Eigen::Map<const Mat2> ado(std::size_t slot) const { return Eigen::Map<const Mat2>(ados.data() + 4 * slot); }
    Mat2 rho() const { return ado(0); }
};

// Linear generator of the stacked equations, precomputed for one (layout, system, bath).
//
// Forward equation for rho_n:
//   d rho_n = -i[H, rho_n] + i sum_k n_k gamma_k rho_n - i [S, sum_k rho_{n_k^+}]
//             - i sum_k n_k (alpha_k S rho_{n_k^-} - alpha~_k rho_{n_k^-} S)
// Adjoint (Hilbert-Schmidt adjoint, propagated backward in time):
//   d chi_n = -i[H, chi_n] + i sum_k n_k gamma_k^* chi_n - i [S, sum_k chi_{n_k^-}]
//             - i sum_k (n_k + 1)(alpha_k^* S chi_{n_k^+} - alpha~_k^* chi_{n_k^+} S)
// Both share the per-slot shape  -i[H, x] + c x - i[S, sum x_c] - i(S A - B S).
class HeomGenerator {
  public:
    static HeomGenerator forward(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys,
                                 const CorrelationExpansion& exp);
    static HeomGenerator adjoint(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys,
                                 const CorrelationExpansion& exp);

    void apply(double field, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const;
    Mat2 slot_derivative(std::size_t slot, double field, const Eigen::VectorXcd& y) const;

    const HierarchyLayout& layout() const { return *layout_; }
    const std::shared_ptr<const HierarchyLayout>& layout_ptr() const { return layout_; }

  private:
    struct AlphaLink {
        std::int32_t slot;
        cplx a; // multiplies S x
        cplx b; // multiplies x S
    };

    HeomGenerator(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys);

    std::shared_ptr<const HierarchyLayout> layout_;
    Mat2 h0_;
    Mat2 mu_;
    Mat2 s_;
    std::vector<cplx> damping_;
    std::vector<std::size_t> comm_offsets_;
    std::vector<std::int32_t> comm_slots_;
    std::vector<std::size_t> alpha_offsets_;
    std::vector<AlphaLink> alpha_links_;
};

// Truncated stack (plain terminator) derivative for one field value.
HierarchyState heom_rhs(const HierarchyState& state, double field_value, const SystemSpec& sys,
                        const CorrelationExpansion& exp);

// X^(1) = -sum of the level-one auxiliary matrices.
Mat2 first_moment(const HierarchyState& state);

void check_compatible(const HierarchyLayout& layout, const CorrelationExpansion& exp);

// Worker threads used by generator evaluation (0 = runtime default).
void set_thread_count(int n);

} // namespace heom
