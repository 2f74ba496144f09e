#include "heom/propagate.hpp"

#include <algorithm>
#include <memory>

#include "heom/errors.hpp"

namespace heom {

double trace_defect(const Mat2& rho) { return std::abs(rho.trace() - 1.0); }

void Propagator::advance(HierarchyState& state, double t_end, double field) {
    stepper_.integrate([&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { gen_->apply(field, y, dy); },
                       state.time, t_end, state.ados);
    state.time = t_end;
}

namespace {

TrajectorySample sample_of(const HierarchyState& s, double field) {
    TrajectorySample out;
    out.t = s.time;
    out.rho = s.rho();
    out.x1 = s.layout->max_level() >= 1 ? first_moment(s) : Mat2::Zero();
    out.field = field;
    return out;
}

} // namespace

Trajectory propagate(HierarchyState state, const FieldGrid& field, const HeomGenerator& gen, const StepControl& ctl,
                     const SampleObserver& observer) {
    field.validate();
    if (std::abs(state.time - field.t0) > 1e-9 * std::max(1.0, std::abs(field.t0)))
        throw ConfigError("propagate: state time does not match the field grid start");
    state.time = field.t0;

    Trajectory traj;
    traj.samples.reserve(field.intervals() + 1);
    Propagator prop(gen, ctl);
    auto record = [&](std::size_t i) {
        auto s = sample_of(state, field.value_at_sample(i));
        traj.max_trace_defect = std::max(traj.max_trace_defect, trace_defect(s.rho));
        traj.max_hermiticity_defect = std::max(traj.max_hermiticity_defect, hermiticity_defect(s.rho));
        traj.samples.push_back(s);
        if (observer) observer(i, state);
    };

    record(0);
    for (std::size_t i = 0; i < field.intervals(); ++i) {
        prop.advance(state, field.time(i + 1), field.values[i]);
        record(i + 1);
    }
    traj.steps = prop.stats();
    traj.final_state = std::move(state);
    return traj;
}

Trajectory propagate(HierarchyState state, const FieldGrid& field, const SystemSpec& sys,
                     const CorrelationExpansion& exp, const StepControl& ctl, const SampleObserver& observer) {
    const auto gen = HeomGenerator::forward(state.layout, sys, exp);
    return propagate(std::move(state), field, gen, ctl, observer);
}

std::vector<double> hierarchy_convergence(const SystemSpec& sys, const CorrelationExpansion& exp,
                                          const FieldGrid& field, const std::vector<int>& levels, const Mat2& rho0,
                                          const StepControl& ctl, std::size_t max_slots) {
    if (levels.empty()) throw ConfigError("convergence: empty level list");
    if (!std::is_sorted(levels.begin(), levels.end()))
        throw ConfigError("convergence: levels must be ascending");

    std::vector<std::vector<Mat2>> runs;
    for (int level : levels) {
        auto layout = std::make_shared<const HierarchyLayout>(static_cast<int>(exp.size()), level, max_slots);
        const auto traj = propagate(HierarchyState::factorized(layout, rho0, field.t0), field, sys, exp, ctl);
        std::vector<Mat2> rhos;
        rhos.reserve(traj.samples.size());
        for (const auto& s : traj.samples) rhos.push_back(s.rho);
        runs.push_back(std::move(rhos));
    }

    const auto& ref = runs.back();
    std::vector<double> dev;
    for (const auto& run : runs) {
        double m = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) m = std::max(m, (run[i] - ref[i]).cwiseAbs().maxCoeff());
        dev.push_back(m);
    }
    return dev;
}

} // namespace heom
