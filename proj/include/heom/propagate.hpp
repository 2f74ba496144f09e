// propagate.hpp - time stepping of the hierarchy over a piecewise-constant field

#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "heom/cash_karp.hpp"
#include "heom/hierarchy.hpp"

namespace heom {

struct TrajectorySample {
    double t{0.0};
    Mat2 rho;
    Mat2 x1;       // zero when the hierarchy has no level-one slots
    double field{0.0};
};

struct Trajectory {
    std::vector<TrajectorySample> samples; // one per field grid point, t0 .. t1 inclusive
    HierarchyState final_state;
    double max_trace_defect{0.0};
    double max_hermiticity_defect{0.0};
    StepStats steps;
};

// Called at every grid point with the sample index and the full state.
using SampleObserver = std::function<void(std::size_t, const HierarchyState&)>;

// Integrates one generator piecewise: the field is constant between calls.
class Propagator {
  public:
    Propagator(const HeomGenerator& gen, StepControl ctl = {}) : gen_(&gen), stepper_(ctl) {}

    // Advances (or, for t_end < state.time, rewinds) the state at fixed field.
    void advance(HierarchyState& state, double t_end, double field);

    const StepStats& stats() const { return stepper_.stats(); }

  private:
    const HeomGenerator* gen_;
    CashKarpStepper<Eigen::VectorXcd> stepper_;
};

Trajectory propagate(HierarchyState state, const FieldGrid& field, const HeomGenerator& gen,
                     const StepControl& ctl = {}, const SampleObserver& observer = {});

Trajectory propagate(HierarchyState state, const FieldGrid& field, const SystemSpec& sys,
                     const CorrelationExpansion& exp, const StepControl& ctl = {},
                     const SampleObserver& observer = {});

// Max over samples and entries of |rho_L(t) - rho_ref(t)| for each level in `levels`,
// with the reference being the last (highest) level. Zero for the reference itself.
std::vector<double> hierarchy_convergence(const SystemSpec& sys, const CorrelationExpansion& exp,
                                          const FieldGrid& field, const std::vector<int>& levels,
                                          const Mat2& rho0, const StepControl& ctl = {},
                                          std::size_t max_slots = kDefaultMaxSlots);

double trace_defect(const Mat2& rho);

} // namespace heom
