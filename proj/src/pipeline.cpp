#include "heom/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <memory>

#include "heom/errors.hpp"
#include "heom/output.hpp"
#include "heom/quadrature.hpp"
#include "heom/units.hpp"
#include "heom/witness.hpp"

#ifndef HEOM_VERSION
#define HEOM_VERSION "0.0.0"
#endif

namespace heom {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Diagnostics {
    double max_trace_defect{0.0};
    double max_hermiticity_defect{0.0};
    long cap_events{0};
    std::optional<double> rcond_cutoff_time_fs;
    double max_antihermitian_residual{0.0};
    long steps_accepted{0};
    long steps_rejected{0};
    std::vector<std::string> warnings;

    void absorb(const Trajectory& t) {
        max_trace_defect = std::max(max_trace_defect, t.max_trace_defect);
        max_hermiticity_defect = std::max(max_hermiticity_defect, t.max_hermiticity_defect);
        steps_accepted += t.steps.accepted;
        steps_rejected += t.steps.rejected;
    }

    json to_json() const {
        json j{{"max_trace_defect", max_trace_defect},
               {"max_hermiticity_defect", max_hermiticity_defect},
               {"cap_events", cap_events},
               {"max_antihermitian_residual", max_antihermitian_residual},
               {"integrator_steps_accepted", steps_accepted},
               {"integrator_steps_rejected", steps_rejected},
               {"warnings", warnings}};
        j["rcond_cutoff_time_fs"] = rcond_cutoff_time_fs ? json(*rcond_cutoff_time_fs) : json(nullptr);
        return j;
    }
};

struct Context {
    const RunConfig& cfg;
    const RunOptions& opt;
    Diagnostics diag;
    std::vector<std::string> outputs;

    fs::path file(const std::string& name) {
        outputs.push_back(name);
        return opt.out_dir / name;
    }

    void warn(const std::string& w) {
        std::cerr << "warning: " << w << "\n";
        diag.warnings.push_back(w);
    }

    void check_trace(const Trajectory& t) {
        diag.absorb(t);
        if (t.max_trace_defect > cfg.tolerances.trace_monitor)
            warn("trace defect " + format_number(t.max_trace_defect) + " exceeds the monitor tolerance");
        if (t.max_hermiticity_defect > cfg.tolerances.trace_monitor)
            warn("Hermiticity defect " + format_number(t.max_hermiticity_defect) + " exceeds the monitor tolerance");
    }
};

std::shared_ptr<const HierarchyLayout> make_layout(const RunConfig& cfg, const CorrelationExpansion& exp) {
    return std::make_shared<const HierarchyLayout>(static_cast<int>(exp.size()), cfg.heom_level,
                                                   cfg.tolerances.max_ados);
}

void write_trajectory(Context& ctx, const Trajectory& traj) {
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.samples.size());
    for (const auto& s : traj.samples)
        rows.push_back({units::au_to_fs(s.t), s.rho(0, 0).real(), s.rho(1, 1).real(), s.rho(0, 1).real(),
                        s.rho(0, 1).imag(), s.x1(0, 0).real(), s.x1(1, 1).real(), s.field});
    write_csv(ctx.file("trajectory.csv"),
              {"t_fs", "rho11", "rho22", "Re_rho12", "Im_rho12", "X1_11", "X1_22", "E_t"}, rows);
}

json matrix_json(const Eigen::Ref<const Eigen::MatrixXcd>& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

void run_witness(Context& ctx, const CorrelationExpansion& exp, const FieldGrid& field, const Trajectory& traj) {
    const auto& cfg = ctx.cfg;
    const auto ms =
        reconstruct_map(cfg.system, exp, field, cfg.heom_level, cfg.tolerances.step_control(), cfg.tolerances.max_ados);
    const auto vol = volume(ms);
    const auto cd = canonical_decomposition(ms, cfg.tolerances.f_rcond_cutoff);
    const auto gam = gamma_sum(cd);
    std::vector<Mat2> rhos;
    for (const auto& s : traj.samples) rhos.push_back(s.rho);
    const auto w = channel_weights(cd, rhos);

    if (cd.cutoff_time) ctx.diag.rcond_cutoff_time_fs = units::au_to_fs(*cd.cutoff_time);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < ms.times.size(); ++i) {
        const auto& p = cd.points[i];
        const double nan = std::numeric_limits<double>::quiet_NaN();
        ctx.diag.max_antihermitian_residual = std::max(ctx.diag.max_antihermitian_residual, p.antihermitian_residual);
        rows.push_back({units::au_to_fs(ms.times[i]), vol[i], gam[i], p.valid ? p.rates[0] : nan,
                        p.valid ? p.rates[1] : nan, p.valid ? p.rates[2] : nan, std::norm(w[i][0]),
                        std::norm(w[i][1]), std::norm(w[i][2]), entropy(rhos[i])});
    }
    write_csv(ctx.file("witness.csv"), {"t_fs", "V", "Gamma", "g1", "g2", "g3", "w1", "w2", "w3", "S_rho"}, rows);

    json points = json::array();
    for (double t_fs : cfg.output.decomposition_times_fs) {
        const double t = units::fs_to_au(t_fs);
        const auto i = static_cast<std::size_t>(
            std::clamp(std::lround((t - field.t0) / field.dt), 0L, static_cast<long>(ms.times.size() - 1)));
        const auto& p = cd.points[i];
        json e{{"requested_t_fs", t_fs}, {"t_fs", units::au_to_fs(ms.times[i])}, {"valid", p.valid}};
        if (p.valid) {
            e["rates"] = {p.rates[0], p.rates[1], p.rates[2]};
            e["h_cor"] = matrix_json(p.h_cor);
            json ch = json::array();
            for (const auto& c : p.channels) ch.push_back(matrix_json(c));
            e["channels"] = ch;
            e["D"] = matrix_json(p.D);
            e["antihermitian_residual"] = p.antihermitian_residual;
        }
        points.push_back(e);
    }
    json dec{{"basis", "G0=I/sqrt2, G1..G3=sigma_x,y,z/sqrt2"},
             {"rates_unit", "1/au_time"},
             {"rcond_cutoff", cd.rcond_cutoff},
             {"points", points}};
    dec["cutoff_time_fs"] = cd.cutoff_time ? json(units::au_to_fs(*cd.cutoff_time)) : json(nullptr);
    write_json(ctx.file("decomposition.json"), dec);
}

void run_correlation(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto exp = correlation_expansion(cfg.bath);
    std::vector<std::vector<double>> rows;
    const auto n = static_cast<long>(std::floor(cfg.output.correlation_t_max_fs / cfg.output.correlation_dt_fs + 1e-9));
    for (long i = 0; i <= n; ++i) {
        const double t_fs = i * cfg.output.correlation_dt_fs;
        const cplx c = correlation_function(units::fs_to_au(t_fs), exp);
        rows.push_back({t_fs, c.real(), c.imag(), std::abs(c)});
    }
    write_csv(ctx.file("correlation.csv"), {"t_fs", "Re_C", "Im_C", "Abs_C"}, rows);
}

Trajectory run_propagate(Context& ctx, const CorrelationExpansion& exp, const FieldGrid& field) {
    const auto& cfg = ctx.cfg;
    auto traj = propagate(HierarchyState::factorized(make_layout(cfg, exp), cfg.initial_state, field.t0), field,
                          cfg.system, exp, cfg.tolerances.step_control());
    ctx.check_trace(traj);
    return traj;
}

ControlResult run_optimize(Context& ctx, const CorrelationExpansion& exp) {
    const auto& cfg = ctx.cfg;
    const auto problem = build_control_problem(cfg);
    auto res = optimize(problem, cfg.system, exp, cfg.heom_level, cfg.tolerances.step_control(), cfg.tolerances.max_ados);
    ctx.check_trace(res.trajectory);
    ctx.diag.cap_events += res.cap_events;
    for (const auto& w : res.warnings) ctx.warn("monotonicity: " + w);
    if (res.cap_events > 0) ctx.warn(std::to_string(res.cap_events) + " field samples clipped at the amplitude cap");
    return res;
}

double c0_relative_error(const BathSpec& bath, const CorrelationExpansion& exp) {
    const cplx ref = correlation_by_quadrature(0.0, bath);
    return std::abs(correlation_function(0.0, exp) - ref) / std::abs(ref);
}

json run_scan(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const std::string param = ctx.opt.scan_parameter.value_or(cfg.scan ? cfg.scan->parameter : "");
    const std::vector<double> values = ctx.opt.scan_values.value_or(cfg.scan ? cfg.scan->values : std::vector<double>{});
    const RunMode base = cfg.scan ? cfg.scan->base : RunMode::propagate;
    if (param.empty()) throw ConfigError("scan: no parameter given");
    if (values.empty()) throw ConfigError("scan: empty value list");
    if (base != RunMode::propagate && base != RunMode::optimize)
        throw ConfigError("scan: base mode must be propagate or optimize");

    struct Row {
        std::vector<Mat2> rhos;
        double fidelity;
        double c0_error;
        double runtime;
    };
    std::vector<Row> rows;
    for (double v : values) {
        const auto t_start = std::chrono::steady_clock::now();
        const RunConfig vc = apply_scan_value(cfg, param, v);
        Context sub{vc, ctx.opt, {}, {}};
        const auto exp = correlation_expansion(vc.bath);
        Row row;
        row.c0_error = c0_relative_error(vc.bath, exp);
        Trajectory traj;
        if (base == RunMode::optimize) {
            auto res = run_optimize(sub, exp);
            row.fidelity = res.fidelity.back();
            traj = std::move(res.trajectory);
        } else {
            traj = run_propagate(sub, exp, build_field(vc));
            row.fidelity = vc.oct ? control_fidelity(traj.final_state.rho(), build_control_problem(vc).rho_target)
                                  : std::numeric_limits<double>::quiet_NaN();
        }
        for (const auto& s : traj.samples) row.rhos.push_back(s.rho);
        ctx.diag.max_trace_defect = std::max(ctx.diag.max_trace_defect, sub.diag.max_trace_defect);
        ctx.diag.max_hermiticity_defect = std::max(ctx.diag.max_hermiticity_defect, sub.diag.max_hermiticity_defect);
        ctx.diag.cap_events += sub.diag.cap_events;
        for (auto& w : sub.diag.warnings) ctx.diag.warnings.push_back(param + "=" + format_number(v) + ": " + w);
        row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        rows.push_back(std::move(row));
    }

    // Deviations are measured against the last value of the list.
    const auto& ref = rows.back().rhos;
    std::vector<std::vector<double>> out;
    json runtimes = json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        double dev = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) dev = std::max(dev, (rows[k].rhos[i] - ref[i]).cwiseAbs().maxCoeff());
        out.push_back({values[k], rows[k].fidelity, dev, rows[k].c0_error});
        runtimes.push_back({{"value", values[k]}, {"runtime_s", rows[k].runtime}});
    }
    write_csv(ctx.file("scan.csv"), {"value", "final_fidelity", "max_deviation", "c0_rel_error"}, out);
    return json{{"parameter", param}, {"base", mode_name(base)}, {"runtimes", runtimes}};
}

void run_convergence(Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.convergence_levels.empty()) throw ConfigError("convergence mode needs [convergence] levels");
    const auto exp = correlation_expansion(cfg.bath);
    const auto dev = hierarchy_convergence(cfg.system, exp, build_field(cfg), cfg.convergence_levels,
                                           cfg.initial_state, cfg.tolerances.step_control(), cfg.tolerances.max_ados);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < dev.size(); ++i) rows.push_back({static_cast<double>(cfg.convergence_levels[i]), dev[i]});
    write_csv(ctx.file("convergence.csv"), {"level", "max_deviation"}, rows);
}

} // namespace

const char* code_version() { return HEOM_VERSION; }

RunConfig apply_scan_value(const RunConfig& cfg, const std::string& parameter, double value) {
    RunConfig out = cfg;
    auto as_count = [&](const char* what) {
        if (value < 0 || value != std::floor(value))
            throw ConfigError(std::string("scan: ") + what + " values must be nonnegative integers");
        return static_cast<int>(value);
    };
    if (parameter == "heom_level") {
        out.heom_level = as_count("heom_level");
    } else if (parameter == "matsubara") {
        out.bath.matsubara_count = as_count("matsubara");
    } else if (parameter == "dipole_offdiag") {
        out.system.dipole(0, 1) = value;
        out.system.dipole(1, 0) = value;
    } else if (parameter == "amp_cap") {
        if (!out.oct) throw ConfigError("scan: amp_cap needs an [oct] section");
        if (!(value > 0.0)) throw ConfigError("scan: amp_cap values must be positive");
        out.oct->amp_cap_au = value;
    } else {
        throw ConfigError("scan: unknown parameter '" + parameter +
                          "' (expected heom_level, matsubara, dipole_offdiag or amp_cap)");
    }
    return out;
}

json run_pipeline(const RunConfig& cfg, RunMode mode, const RunOptions& opt) {
    const auto t_start = std::chrono::steady_clock::now();
    set_thread_count(opt.threads);
    fs::create_directories(opt.out_dir);
    Context ctx{cfg, opt, {}, {}};
    json extra;

    switch (mode) {
    case RunMode::correlation:
        run_correlation(ctx);
        break;
    case RunMode::propagate:
    case RunMode::witness: {
        const auto exp = correlation_expansion(cfg.bath);
        const auto field = build_field(cfg);
        const auto traj = run_propagate(ctx, exp, field);
        write_trajectory(ctx, traj);
        if (mode == RunMode::witness || opt.witness) run_witness(ctx, exp, field, traj);
        break;
    }
    case RunMode::optimize: {
        const auto exp = correlation_expansion(cfg.bath);
        const auto res = run_optimize(ctx, exp);
        std::vector<std::vector<double>> frows;
        for (std::size_t i = 0; i <= res.field.intervals(); ++i)
            frows.push_back({units::au_to_fs(res.field.time(i)), res.field.value_at_sample(i)});
        write_csv(ctx.file("field_optimal.csv"), {"t_fs", "E_au"}, frows);
        std::vector<std::vector<double>> hrows;
        for (std::size_t k = 0; k < res.fidelity.size(); ++k)
            hrows.push_back({static_cast<double>(k), res.fidelity[k], res.max_amp[k]});
        write_csv(ctx.file("fidelity.csv"), {"iter", "fidelity", "max_amp"}, hrows);
        write_trajectory(ctx, res.trajectory);
        if (opt.witness) run_witness(ctx, exp, res.field, res.trajectory);
        extra["iterations"] = res.fidelity.size() - 1;
        extra["final_fidelity"] = res.fidelity.back();
        break;
    }
    case RunMode::scan:
        extra = run_scan(ctx);
        break;
    case RunMode::convergence:
        run_convergence(ctx);
        break;
    }

    json manifest;
    manifest["code_version"] = code_version();
    manifest["mode"] = mode_name(mode);
    manifest["config"] = config_echo(cfg);
    manifest["threads"] = opt.threads;
    manifest["witness"] = opt.witness || mode == RunMode::witness;
    manifest["outputs"] = ctx.outputs;
    manifest["diagnostics"] = ctx.diag.to_json();
    if (!extra.is_null()) manifest["summary"] = extra;
    manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_json(opt.out_dir / "manifest.json", manifest);
    return manifest;
}

} // namespace heom
