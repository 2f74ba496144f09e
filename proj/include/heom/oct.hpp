// oct.hpp - monotonic (immediate-feedback) optimal control of the driving field
// with forward rho and backward Lagrange-multiplier hierarchies

#pragma once

#include <string>
#include <vector>

#include "heom/propagate.hpp"

namespace heom {

struct ControlProblem {
    Mat2 rho_init{population_projector(1)};
    Mat2 rho_target{population_projector(1)};
    FieldGrid guess;
    double alpha0{1.0};
    int max_iters{50};
    double fidelity_tol{1e-6};
    double amp_cap{1e-2};

    void validate() const;
};

struct ControlResult {
    FieldGrid field;
    std::vector<double> fidelity; // entry 0 is the guess field
    std::vector<double> max_amp;
    Trajectory trajectory;        // forward sweep on the final field
    long cap_events{0};
    std::vector<std::string> warnings;
};

// Adjoint-hierarchy derivative (integrated backward from the final time).
HierarchyState backward_rhs(const HierarchyState& chi, double field_value, const SystemSpec& sys,
                            const CorrelationExpansion& exp);

// 2x2 field correction  -(1/alpha0) Im{ Tr(rho chi) Tr(chi [mu, rho]) }.
// The leading minus makes the step ascend Re Tr(rho(tf)^dagger rho_target) with
// H = ... - mu E; see field_update(HierarchyState...) for the full-hierarchy form.
double field_update(const Mat2& rho, const Mat2& chi, const Mat2& dipole, double alpha0);

// Same correction with both traces replaced by the full-hierarchy pairing
// <chi, X> = sum_n Tr(chi_n^dagger X_n), which is conserved by the exact adjoint.
double field_update(const HierarchyState& rho, const HierarchyState& chi, const Mat2& dipole, double alpha0);

// Fidelity Re Tr(rho^dagger rho_target).
double control_fidelity(const Mat2& rho, const Mat2& target);

// Backward sweep from chi(tf) = target (zero auxiliaries); returns chi on every grid point.
std::vector<HierarchyState> backward_sweep(const Mat2& target, const FieldGrid& field, const HeomGenerator& adjoint,
                                           const StepControl& ctl = {});

// Field corrections at every sample for a frozen field (no feedback); used for gradient checks.
std::vector<double> update_direction(const ControlProblem& problem, const SystemSpec& sys,
                                     const CorrelationExpansion& exp, int max_level, const StepControl& ctl = {});

ControlResult optimize(const ControlProblem& problem, const SystemSpec& sys, const CorrelationExpansion& exp,
                       int max_level, const StepControl& ctl = {}, std::size_t max_slots = kDefaultMaxSlots);

} // namespace heom
