#include "heom/oct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include <Eigen/Eigenvalues>

#include "heom/errors.hpp"
#include "heom/units.hpp"

namespace heom {

namespace {

void check_density(const Mat2& rho, const char* name) {
    if (hermiticity_defect(rho) > 1e-12 || std::abs(rho.trace() - 1.0) > 1e-12)
        throw ConfigError(std::string("control: ") + name + " must be Hermitian with unit trace");
    const Eigen::SelfAdjointEigenSolver<Mat2> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) throw ConfigError(std::string("control: ") + name + " is not positive");
}

cplx pairing(const HierarchyState& a, const HierarchyState& b) { return a.ados.dot(b.ados); }

// Applies X -> [mu, X] slot by slot.
HierarchyState dipole_commutator(const HierarchyState& s, const Mat2& mu) {
    HierarchyState out(s.layout, s.time);
    for (std::size_t i = 0; i < s.slots(); ++i) out.ado(i) = mu * s.ado(i) - s.ado(i) * mu;
    return out;
}

} // namespace

void ControlProblem::validate() const {
    check_density(rho_init, "initial state");
    check_density(rho_target, "target state");
    guess.validate();
    if (!(alpha0 > 0.0)) throw ConfigError("control: penalty alpha0 must be positive");
    if (max_iters < 0) throw ConfigError("control: max_iters must be >= 0");
    if (!(amp_cap > 0.0)) throw ConfigError("control: amplitude cap must be positive");
    if (!(fidelity_tol >= 0.0)) throw ConfigError("control: fidelity tolerance must be >= 0");
}

HierarchyState backward_rhs(const HierarchyState& chi, double field_value, const SystemSpec& sys,
                            const CorrelationExpansion& exp) {
    const auto gen = HeomGenerator::adjoint(chi.layout, sys, exp);
    HierarchyState out(chi.layout, chi.time);
    gen.apply(field_value, chi.ados, out.ados);
    return out;
}

double field_update(const Mat2& rho, const Mat2& chi, const Mat2& dipole, double alpha0) {
    const cplx p = (rho * chi).trace();
    const cplx q = (chi * (dipole * rho - rho * dipole)).trace();
    return -(p * q).imag() / alpha0;
}

double field_update(const HierarchyState& rho, const HierarchyState& chi, const Mat2& dipole, double alpha0) {
    const cplx p = pairing(chi, rho);
    const cplx q = pairing(chi, dipole_commutator(rho, dipole));
    return -(p * q).imag() / alpha0;
}

double control_fidelity(const Mat2& rho, const Mat2& target) { return (rho.adjoint() * target).trace().real(); }

std::vector<HierarchyState> backward_sweep(const Mat2& target, const FieldGrid& field, const HeomGenerator& adjoint,
                                           const StepControl& ctl) {
    const std::size_t m = field.intervals();
    std::vector<HierarchyState> chi(m + 1);
    HierarchyState s = HierarchyState::factorized(adjoint.layout_ptr(), target, field.t1());
    Propagator prop(adjoint, ctl);
    chi[m] = s;
    for (std::size_t i = m; i-- > 0;) {
        prop.advance(s, field.time(i), field.values[i]);
        chi[i] = s;
    }
    return chi;
}

std::vector<double> update_direction(const ControlProblem& problem, const SystemSpec& sys,
                                     const CorrelationExpansion& exp, int max_level, const StepControl& ctl) {
    problem.validate();
    auto layout = std::make_shared<const HierarchyLayout>(static_cast<int>(exp.size()), max_level);
    const auto fwd = HeomGenerator::forward(layout, sys, exp);
    const auto adj = HeomGenerator::adjoint(layout, sys, exp);
    const auto chi = backward_sweep(problem.rho_target, problem.guess, adj, ctl);
    std::vector<double> out;
    propagate(HierarchyState::factorized(layout, problem.rho_init, problem.guess.t0), problem.guess, fwd, ctl,
              [&](std::size_t i, const HierarchyState& rho) {
                  if (i < problem.guess.intervals())
                      out.push_back(field_update(rho, chi[i], sys.dipole, problem.alpha0));
              });
    return out;
}

ControlResult optimize(const ControlProblem& problem, const SystemSpec& sys, const CorrelationExpansion& exp,
                       int max_level, const StepControl& ctl, std::size_t max_slots) {
    problem.validate();
    sys.validate();
    auto layout = std::make_shared<const HierarchyLayout>(static_cast<int>(exp.size()), max_level, max_slots);
    const auto fwd = HeomGenerator::forward(layout, sys, exp);
    const auto adj = HeomGenerator::adjoint(layout, sys, exp);

    ControlResult res;
    res.field = problem.guess;
    auto& field = res.field;
    const std::size_t m = field.intervals();

    res.trajectory = propagate(HierarchyState::factorized(layout, problem.rho_init, field.t0), field, fwd, ctl);
    res.fidelity.push_back(control_fidelity(res.trajectory.final_state.rho(), problem.rho_target));
    res.max_amp.push_back(field.max_abs());

    for (int iter = 1; iter <= problem.max_iters; ++iter) {
        const auto chi = backward_sweep(problem.rho_target, field, adj, ctl);

        // Forward sweep: each sample is corrected with the current rho before it is used.
        HierarchyState rho = HierarchyState::factorized(layout, problem.rho_init, field.t0);
        Trajectory traj;
        traj.samples.reserve(m + 1);
        Propagator prop(fwd, ctl);
        auto record = [&](double e) {
            TrajectorySample s{rho.time, rho.rho(), layout->max_level() >= 1 ? first_moment(rho) : Mat2::Zero(), e};
            traj.max_trace_defect = std::max(traj.max_trace_defect, trace_defect(s.rho));
            traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, hermiticity_defect(s.rho));
            traj.samples.push_back(s);
        };
        for (std::size_t i = 0; i < m; ++i) {
            const double target = field.values[i] + field_update(rho, chi[i], sys.dipole, problem.alpha0);
            const double clipped = std::clamp(target, -problem.amp_cap, problem.amp_cap);
            if (clipped != target) ++res.cap_events;
            field.values[i] = clipped;
            record(clipped);
            prop.advance(rho, field.time(i + 1), clipped);
        }
        record(field.value_at_sample(m));
        traj.steps = prop.stats();
        traj.final_state = rho;

        const double f = control_fidelity(rho.rho(), problem.rho_target);
        const double gain = f - res.fidelity.back();
        res.fidelity.push_back(f);
        res.max_amp.push_back(field.max_abs());
        res.trajectory = std::move(traj);
        if (gain < -1e-6) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "iteration %d: fidelity dropped by %.3e", iter, -gain);
            res.warnings.emplace_back(buf);
        }
        if (gain < problem.fidelity_tol) break;
    }
    return res;
}

} // namespace heom
