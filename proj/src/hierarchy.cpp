#include "heom/hierarchy.hpp"

#include <cmath>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "heom/errors.hpp"

namespace heom {

void SystemSpec::validate() const {
    if (!std::isfinite(delta) || !std::isfinite(w)) throw ConfigError("system: delta and W must be finite");
    if (hermiticity_defect(dipole) > 1e-14) throw ConfigError("system: dipole matrix must be Hermitian");
    if (hermiticity_defect(coupling) > 1e-14) throw ConfigError("system: coupling operator must be Hermitian");
}

Mat2 SystemSpec::hamiltonian(double field) const {
    return 0.5 * delta * sigma_z() + w * sigma_x() - field * dipole;
}

double SystemSpec::eigen_gap() const { return std::sqrt(delta * delta + 4.0 * w * w); }

FieldGrid FieldGrid::uniform(double t0, double t1, double dt_target, double value) {
    if (!(t1 > t0) || !(dt_target > 0.0)) throw ConfigError("field: need t1 > t0 and a positive sample step");
    const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / dt_target - 1e-9));
    FieldGrid g;
    g.t0 = t0;
    g.dt = (t1 - t0) / static_cast<double>(n);
    g.values.assign(n, value);
    return g;
}

double FieldGrid::value_at_sample(std::size_t i) const {
    if (values.empty()) return 0.0;
    return values[std::min(i, values.size() - 1)];
}

double FieldGrid::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

void FieldGrid::validate() const {
    if (values.empty()) throw ConfigError("field: empty sample grid");
    if (!(dt > 0.0)) throw ConfigError("field: sample step must be positive");
    for (double v : values)
        if (!std::isfinite(v)) throw ConfigError("field: non-finite sample");
}

FieldGrid sine_squared_field(double t0, double t1, double dt_target, double amplitude) {
    FieldGrid g = FieldGrid::uniform(t0, t1, dt_target);
    const double span = t1 - t0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double s = std::sin(M_PI * (g.time(i) - t0) / span);
        g.values[i] = amplitude * s * s;
    }
    return g;
}

HierarchyState::HierarchyState(std::shared_ptr<const HierarchyLayout> l, double t)
    : layout(std::move(l)), ados(Eigen::VectorXcd::Zero(4 * static_cast<Eigen::Index>(layout->size()))), time(t) {}

HierarchyState HierarchyState::factorized(std::shared_ptr<const HierarchyLayout> l, const Mat2& rho, double t) {
    HierarchyState s(std::move(l), t);
    s.ado(0) = rho;
    return s;
}

void check_compatible(const HierarchyLayout& layout, const CorrelationExpansion& exp) {
    if (static_cast<std::size_t>(layout.modes()) != exp.size())
        throw ConfigError("hierarchy: layout has " + std::to_string(layout.modes()) +
                          " modes but the correlation expansion has " + std::to_string(exp.size()));
}

HeomGenerator::HeomGenerator(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys)
    : layout_(std::move(layout)), h0_(sys.hamiltonian(0.0)), mu_(sys.dipole), s_(sys.coupling) {}

HeomGenerator HeomGenerator::forward(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys,
                                     const CorrelationExpansion& exp) {
    check_compatible(*layout, exp);
    HeomGenerator g(std::move(layout), sys);
    const auto& lay = *g.layout_;
    const int nc = lay.modes();
    g.damping_.resize(lay.size());
    g.comm_offsets_.push_back(0);
    g.alpha_offsets_.push_back(0);
    for (std::size_t s = 0; s < lay.size(); ++s) {
        const auto occ = lay.occupation(s);
        cplx damp{0.0};
        for (int k = 0; k < nc; ++k) {
            damp += static_cast<double>(occ[k]) * exp.gamma[k];
            if (const auto up = lay.raise(s, k); up != HierarchyLayout::absent) g.comm_slots_.push_back(up);
            if (const auto dn = lay.lower(s, k); dn != HierarchyLayout::absent) {
                const double n = occ[k];
                g.alpha_links_.push_back({dn, n * exp.alpha[k], n * exp.alpha_tilde[k]});
            }
        }
        g.damping_[s] = I * damp;
        g.comm_offsets_.push_back(g.comm_slots_.size());
        g.alpha_offsets_.push_back(g.alpha_links_.size());
    }
    return g;
}

HeomGenerator HeomGenerator::adjoint(std::shared_ptr<const HierarchyLayout> layout, const SystemSpec& sys,
                                     const CorrelationExpansion& exp) {
    check_compatible(*layout, exp);
    HeomGenerator g(std::move(layout), sys);
    const auto& lay = *g.layout_;
    const int nc = lay.modes();
    g.damping_.resize(lay.size());
    g.comm_offsets_.push_back(0);
    g.alpha_offsets_.push_back(0);
    for (std::size_t s = 0; s < lay.size(); ++s) {
        const auto occ = lay.occupation(s);
        cplx damp{0.0};
        for (int k = 0; k < nc; ++k) {
            damp += static_cast<double>(occ[k]) * std::conj(exp.gamma[k]);
            if (const auto dn = lay.lower(s, k); dn != HierarchyLayout::absent) g.comm_slots_.push_back(dn);
            if (const auto up = lay.raise(s, k); up != HierarchyLayout::absent) {
                const double n = occ[k] + 1.0;
                g.alpha_links_.push_back({up, n * std::conj(exp.alpha[k]), n * std::conj(exp.alpha_tilde[k])});
            }
        }
        g.damping_[s] = I * damp;
        g.comm_offsets_.push_back(g.comm_slots_.size());
        g.alpha_offsets_.push_back(g.alpha_links_.size());
    }
    return g;
}

Mat2 HeomGenerator::slot_derivative(std::size_t slot, double field, const Eigen::VectorXcd& y) const {
    auto x = [&](std::size_t s) { return Eigen::Map<const Mat2>(y.data() + 4 * s); };
    const Mat2 h = h0_ - field * mu_;
    const Mat2 r = x(slot);
    Mat2 d = -I * (h * r - r * h) + damping_[slot] * r;

    Mat2 c = Mat2::Zero();
    for (std::size_t j = comm_offsets_[slot]; j < comm_offsets_[slot + 1]; ++j) c += x(comm_slots_[j]);
    d -= I * (s_ * c - c * s_);

    Mat2 a = Mat2::Zero();
    Mat2 b = Mat2::Zero();
    for (std::size_t j = alpha_offsets_[slot]; j < alpha_offsets_[slot + 1]; ++j) {
        const auto& link = alpha_links_[j];
        const auto m = x(link.slot);
        a += link.a * m;
        b += link.b * m;
    }
    d -= I * (s_ * a - b * s_);
    return d;
}

void HeomGenerator::apply(double field, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) const {
    const auto n = static_cast<std::ptrdiff_t>(layout_->size());
    dy.resize(y.size());
#pragma omp parallel for schedule(static) if (n > 128)
    for (std::ptrdiff_t s = 0; s < n; ++s)
        Eigen::Map<Mat2>(dy.data() + 4 * s) = slot_derivative(static_cast<std::size_t>(s), field, y);
}

HierarchyState heom_rhs(const HierarchyState& state, double field_value, const SystemSpec& sys,
                        const CorrelationExpansion& exp) {
    const auto gen = HeomGenerator::forward(state.layout, sys, exp);
    HierarchyState out(state.layout, state.time);
    gen.apply(field_value, state.ados, out.ados);
    return out;
}

Mat2 first_moment(const HierarchyState& state) {
    const auto& lay = *state.layout;
    if (lay.max_level() < 1) throw ConfigError("first_moment: needs a hierarchy of level >= 1");
    Mat2 x = Mat2::Zero();
    for (std::size_t s = lay.level_begin(1); s < lay.level_begin(2); ++s) x -= state.ado(s);
    return x;
}

void set_thread_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

} // namespace heom
