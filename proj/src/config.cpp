#include "heom/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "heom/errors.hpp"
#include "heom/units.hpp"

namespace heom {

namespace {

using Unit = std::pair<const char*, double (*)(double)>;

double same(double x) { return x; }
double p_eV6_to_au(double p) { return p / std::pow(units::hartree_eV, 6); }
double kelvin(double t) { return t; }

const std::vector<Unit> energy_units{{"eV", units::eV_to_au}, {"au", same}};
const std::vector<Unit> time_units{{"fs", units::fs_to_au}, {"au", same}};
const std::vector<Unit> field_units{{"au", same}};
const std::vector<Unit> amplitude_p_units{{"eV6", p_eV6_to_au}, {"au", same}};
const std::vector<Unit> temperature_units{{"K", kelvin}};

// One TOML table with consumed-key tracking, so leftovers can be rejected.
class Section {
  public:
    Section(const toml::table* t, std::string name) : t_(t), name_(std::move(name)) {}

    bool present() const { return t_ != nullptr; }
    const std::string& name() const { return name_; }

    const toml::node* take(std::string_view key) {
        if (!t_) return nullptr;
        const toml::node* n = t_->get(key);
        if (n) used_.insert(std::string(key));
        return n;
    }

    std::optional<double> number(std::string_view key) {
        const auto* n = take(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<double>()) return v;
        fail(key, "expected a number");
    }

    std::optional<long long> integer(std::string_view key) {
        const auto* n = take(key);
        if (!n) return std::nullopt;
        if (n->is_integer()) return n->value<long long>();
        fail(key, "expected an integer");
    }

    std::optional<std::string> string(std::string_view key) {
        const auto* n = take(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<std::string>()) return v;
        fail(key, "expected a string");
    }

    std::optional<bool> boolean(std::string_view key) {
        const auto* n = take(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<bool>()) return v;
        fail(key, "expected true or false");
    }

    // Dimensional value: exactly one of stem_<unit> may appear; the bare stem is an error.
    std::optional<double> quantity(const std::string& stem, const std::vector<Unit>& unit_list) {
        if (t_ && t_->contains(stem)) {
            std::string hint;
            for (const auto& u : unit_list) hint += (hint.empty() ? "" : " or ") + stem + "_" + u.first;
            throw ConfigError("[" + name_ + "] key '" + stem + "' is missing its unit suffix (use " + hint + ")");
        }
        std::optional<double> out;
        std::string found;
        for (const auto& [suffix, convert] : unit_list) {
            const std::string key = stem + "_" + suffix;
            if (auto v = number(key)) {
                if (out) throw ConfigError("[" + name_ + "] both '" + found + "' and '" + key + "' given");
                out = convert(*v);
                found = key;
            }
        }
        return out;
    }

    double require_quantity(const std::string& stem, const std::vector<Unit>& unit_list) {
        if (auto v = quantity(stem, unit_list)) return *v;
        throw ConfigError("[" + name_ + "] missing required key '" + stem + "_" + unit_list.front().first + "'");
    }

    const toml::table* table(std::string_view key) {
        const auto* n = take(key);
        if (!n) return nullptr;
        if (const auto* t = n->as_table()) return t;
        fail(key, "expected a table");
    }

    const toml::array* array(std::string_view key) {
        const auto* n = take(key);
        if (!n) return nullptr;
        if (const auto* a = n->as_array()) return a;
        fail(key, "expected an array");
    }

    void finish() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_) {
            const std::string key(k.str());
            if (!used_.count(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
        }
    }

    [[noreturn]] void fail(std::string_view key, const std::string& what) const {
        throw ConfigError("[" + name_ + "] key '" + std::string(key) + "': " + what);
    }

  private:
    const toml::table* t_;
    std::string name_;
    std::set<std::string> used_;
};

cplx parse_entry(const toml::node& n, const std::string& where) {
    if (auto v = n.value<double>()) return {*v, 0.0};
    if (const auto* a = n.as_array(); a && a->size() == 2) {
        const auto re = (*a)[0].value<double>();
        const auto im = (*a)[1].value<double>();
        if (re && im) return {*re, *im};
    }
    throw ConfigError(where + ": matrix entries must be numbers or [re, im] pairs");
}

Mat2 parse_matrix(const toml::node& n, const std::string& where) {
    const auto* rows = n.as_array();
    if (!rows || rows->size() != 2) throw ConfigError(where + ": expected a 2x2 matrix [[a, b], [c, d]]");
    Mat2 m;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto* row = (*rows)[i].as_array();
        if (!row || row->size() != 2) throw ConfigError(where + ": expected a 2x2 matrix [[a, b], [c, d]]");
        for (std::size_t j = 0; j < 2; ++j) m(i, j) = parse_entry((*row)[j], where);
    }
    return m;
}

Mat2 parse_state(const toml::node& n, const std::string& where) {
    if (auto k = n.value<long long>(); k && n.is_integer()) {
        if (*k != 1 && *k != 2) throw ConfigError(where + ": state label must be 1 or 2");
        return population_projector(static_cast<int>(*k));
    }
    return parse_matrix(n, where);
}

std::vector<double> parse_numbers(const toml::array& a, const std::string& where) {
    std::vector<double> out;
    for (const auto& e : a) {
        const auto v = e.value<double>();
        if (!v) throw ConfigError(where + ": expected numbers");
        out.push_back(*v);
    }
    return out;
}

FieldConfig parse_field(const toml::table& t, const std::string& where) {
    Section s(&t, where);
    FieldConfig fc;
    fc.shape = s.string("shape").value_or("zero");
    if (fc.shape != "zero" && fc.shape != "constant" && fc.shape != "sine_squared" && fc.shape != "file")
        throw ConfigError("[" + where + "] unknown field shape '" + fc.shape + "'");
    fc.amplitude_au = s.quantity("amplitude", field_units).value_or(0.0);
    if (auto d = s.quantity("duration", time_units)) fc.duration_fs = units::au_to_fs(*d);
    if (auto p = s.string("path")) fc.path = *p;
    if (fc.shape == "file" && fc.path.empty()) throw ConfigError("[" + where + "] file field needs 'path'");
    s.finish();
    return fc;
}

void parse_run(Section s, RunConfig& cfg) {
    if (auto m = s.string("mode")) cfg.mode = parse_mode(*m);
    if (const auto* n = s.take("initial_state")) cfg.initial_state = parse_state(*n, "[run] initial_state");
    if (auto seed = s.integer("seed")) {
        if (*seed < 0) s.fail("seed", "must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    s.finish();
}

void parse_bath(Section s, RunConfig& cfg) {
    if (!s.present()) throw ConfigError("missing [bath] section");
    auto& b = cfg.bath;
    b.temperature_K = s.require_quantity("temperature", temperature_units);
    if (const auto* n = s.take("matsubara")) {
        if (auto str = n->value<std::string>(); str && n->is_string()) {
            if (*str != "auto") s.fail("matsubara", "expected an integer or \"auto\"");
            b.matsubara_count.reset();
        } else if (n->is_integer()) {
            b.matsubara_count = static_cast<int>(*n->value<long long>());
        } else {
            s.fail("matsubara", "expected an integer or \"auto\"");
        }
    } else {
        b.matsubara_count.reset();
    }
    if (auto tol = s.number("matsubara_rel_tol")) b.auto_rel_tol = *tol;
    const auto* terms = s.array("terms");
    if (!terms || terms->empty()) throw ConfigError("[bath] needs a non-empty 'terms' array");
    for (std::size_t i = 0; i < terms->size(); ++i) {
        const auto* t = (*terms)[i].as_table();
        const std::string where = "bath.terms[" + std::to_string(i) + "]";
        if (!t) throw ConfigError(where + ": expected a table");
        Section ts(t, where);
        LorentzianTerm term;
        term.p = ts.require_quantity("p", amplitude_p_units);
        term.omega1 = ts.require_quantity("omega1", energy_units);
        term.gamma1 = ts.require_quantity("gamma1", energy_units);
        term.omega2 = ts.require_quantity("omega2", energy_units);
        term.gamma2 = ts.require_quantity("gamma2", energy_units);
        ts.finish();
        b.terms.push_back(term);
    }
    s.finish();
}

void parse_system(Section s, RunConfig& cfg) {
    if (!s.present()) throw ConfigError("missing [system] section");
    auto& sys = cfg.system;
    sys.delta = s.require_quantity("delta", energy_units);
    sys.w = s.require_quantity("w", energy_units);
    if (s.present() && s.take("dipole")) throw ConfigError("[system] key 'dipole' is missing its unit suffix (use dipole_au)");
    if (const auto* n = s.take("dipole_au")) sys.dipole = parse_matrix(*n, "[system] dipole_au");
    if (const auto* n = s.take("coupling_op")) {
        if (auto name = n->value<std::string>(); name && n->is_string()) {
            if (*name == "sigma_z") sys.coupling = sigma_z();
            else if (*name == "sigma_x") sys.coupling = sigma_x();
            else if (*name == "zero") sys.coupling = Mat2::Zero();
            else throw ConfigError("[system] coupling_op must be sigma_z, sigma_x, zero or a matrix");
        } else {
            sys.coupling = parse_matrix(*n, "[system] coupling_op");
        }
    }
    cfg.t_final_fs = units::au_to_fs(s.require_quantity("t_final", time_units));
    if (auto l = s.integer("heom_level")) cfg.heom_level = static_cast<int>(*l);
    if (const auto* f = s.table("field")) cfg.field = parse_field(*f, "system.field");
    if (auto dt = s.quantity("field_dt", time_units)) cfg.field_dt_au = *dt;
    s.finish();
}

void parse_oct(Section s, RunConfig& cfg) {
    if (!s.present()) return;
    OctConfig oc;
    if (auto t = s.string("target")) oc.target = *t;
    if (oc.target != "revive_1" && oc.target != "revive_2" && oc.target != "swap_12" && oc.target != "custom")
        throw ConfigError("[oct] target must be revive_1, revive_2, swap_12 or custom");
    if (const auto* n = s.take("rho_init")) oc.custom_init = parse_state(*n, "[oct] rho_init");
    if (const auto* n = s.take("rho_target")) oc.custom_target = parse_state(*n, "[oct] rho_target");
    if (oc.target == "custom" && !oc.custom_target)
        throw ConfigError("[oct] target = \"custom\" needs rho_target");
    if (oc.target != "custom" && (oc.custom_init || oc.custom_target))
        throw ConfigError("[oct] rho_init / rho_target are only used with target = \"custom\"");
    if (auto a = s.quantity("alpha0", field_units)) oc.alpha0_au = *a;
    if (auto n = s.integer("max_iters")) oc.max_iters = static_cast<int>(*n);
    if (auto f = s.number("fidelity_tol")) oc.fidelity_tol = *f;
    if (auto c = s.quantity("amp_cap", field_units)) oc.amp_cap_au = *c;
    if (const auto* g = s.table("guess")) oc.guess = parse_field(*g, "oct.guess");
    s.finish();
    cfg.oct = oc;
}

void parse_tolerances(Section s, RunConfig& cfg) {
    auto& t = cfg.tolerances;
    if (auto v = s.number("rk_rel")) t.rk_rel = *v;
    if (auto v = s.number("rk_abs")) t.rk_abs = *v;
    if (auto v = s.number("trace_monitor")) t.trace_monitor = *v;
    if (auto v = s.number("f_rcond_cutoff")) t.f_rcond_cutoff = *v;
    if (auto v = s.integer("max_ados")) {
        if (*v < 1) s.fail("max_ados", "must be positive");
        t.max_ados = static_cast<std::size_t>(*v);
    }
    if (auto v = s.integer("matsubara_cap")) t.matsubara_cap = static_cast<int>(*v);
    s.finish();
    if (!(t.rk_rel > 0.0) || !(t.rk_abs > 0.0)) throw ConfigError("[tolerances] integrator tolerances must be positive");
    cfg.bath.max_modes = t.matsubara_cap;
}

void parse_scan(Section s, RunConfig& cfg) {
    if (!s.present()) return;
    ScanConfig sc;
    sc.parameter = s.string("parameter").value_or("");
    if (const auto* a = s.array("values")) sc.values = parse_numbers(*a, "[scan] values");
    if (auto b = s.string("base")) sc.base = parse_mode(*b);
    s.finish();
    cfg.scan = sc;
}

void parse_convergence(Section s, RunConfig& cfg) {
    if (const auto* a = s.array("levels"))
        for (double v : parse_numbers(*a, "[convergence] levels")) cfg.convergence_levels.push_back(static_cast<int>(v));
    s.finish();
}

void parse_output(Section s, RunConfig& cfg) {
    if (s.take("decomposition_times"))
        throw ConfigError("[output] key 'decomposition_times' is missing its unit suffix (use decomposition_times_fs)");
    if (const auto* a = s.array("decomposition_times_fs"))
        cfg.output.decomposition_times_fs = parse_numbers(*a, "[output] decomposition_times_fs");
    if (auto v = s.quantity("correlation_t_max", time_units)) cfg.output.correlation_t_max_fs = units::au_to_fs(*v);
    if (auto v = s.quantity("correlation_dt", time_units)) cfg.output.correlation_dt_fs = units::au_to_fs(*v);
    s.finish();
}

void validate(const RunConfig& cfg) {
    cfg.bath.validate();
    cfg.system.validate();
    if (cfg.mode == RunMode::optimize && !cfg.oct) throw ConfigError("mode \"optimize\" needs an [oct] section");
    if (cfg.mode == RunMode::scan && cfg.scan && cfg.scan->parameter.empty())
        throw ConfigError("[scan] needs a 'parameter'");
    if (!(cfg.t_final_fs > 0.0)) throw ConfigError("[system] t_final must be positive");
    if (cfg.heom_level < 0) throw ConfigError("[system] heom_level must be >= 0");
    if (!(cfg.field_dt_au > 0.0)) throw ConfigError("[system] field_dt must be positive");
    if (hermiticity_defect(cfg.initial_state) > 1e-12 || std::abs(cfg.initial_state.trace() - 1.0) > 1e-12)
        throw ConfigError("[run] initial_state must be Hermitian with unit trace");
    if (!std::is_sorted(cfg.convergence_levels.begin(), cfg.convergence_levels.end()))
        throw ConfigError("[convergence] levels must be ascending");
    if (!(cfg.output.correlation_dt_fs > 0.0) || !(cfg.output.correlation_t_max_fs > 0.0))
        throw ConfigError("[output] correlation grid must be positive");
}

nlohmann::json matrix_json(const Mat2& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 2; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < 2; ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json field_json(const FieldConfig& f) {
    nlohmann::json j{{"shape", f.shape}, {"amplitude_au", f.amplitude_au}};
    if (f.duration_fs) j["duration_fs"] = *f.duration_fs;
    if (!f.path.empty()) j["path"] = f.path.string();
    return j;
}

} // namespace

RunMode parse_mode(std::string_view name) {
    if (name == "propagate") return RunMode::propagate;
    if (name == "witness") return RunMode::witness;
    if (name == "optimize") return RunMode::optimize;
    if (name == "scan") return RunMode::scan;
    if (name == "convergence" || name == "convergence-scan") return RunMode::convergence;
    if (name == "correlation") return RunMode::correlation;
    throw ConfigError("unknown run mode '" + std::string(name) + "'");
}

std::string mode_name(RunMode m) {
    switch (m) {
    case RunMode::propagate: return "propagate";
    case RunMode::witness: return "witness";
    case RunMode::optimize: return "optimize";
    case RunMode::scan: return "scan";
    case RunMode::convergence: return "convergence";
    case RunMode::correlation: return "correlation";
    }
    return "?";
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config syntax error: " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(os.str());
    }

    static const std::set<std::string> sections{"run",  "bath",        "system", "oct",
                                                "scan", "convergence", "output", "tolerances"};
    for (const auto& [k, v] : root) {
        const std::string key(k.str());
        if (!sections.count(key)) throw ConfigError("unknown top-level key or section '" + key + "'");
        if (!v.is_table()) throw ConfigError("'" + key + "' must be a section");
    }
    auto section = [&](const char* name) { return Section(root[name].as_table(), name); };

    RunConfig cfg;
    cfg.base_dir = base_dir;
    parse_run(section("run"), cfg);
    parse_bath(section("bath"), cfg);
    parse_system(section("system"), cfg);
    parse_oct(section("oct"), cfg);
    parse_tolerances(section("tolerances"), cfg);
    parse_scan(section("scan"), cfg);
    parse_convergence(section("convergence"), cfg);
    parse_output(section("output"), cfg);
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

nlohmann::json config_echo(const RunConfig& cfg) {
    using nlohmann::json;
    json terms = json::array();
    for (const auto& t : cfg.bath.terms)
        terms.push_back({{"p_au", t.p},
                         {"omega1_eV", units::au_to_eV(t.omega1)},
                         {"gamma1_eV", units::au_to_eV(t.gamma1)},
                         {"omega2_eV", units::au_to_eV(t.omega2)},
                         {"gamma2_eV", units::au_to_eV(t.gamma2)}});
    json j;
    j["run"] = {{"mode", mode_name(cfg.mode)}, {"initial_state", matrix_json(cfg.initial_state)}, {"seed", cfg.seed}};
    j["bath"] = {{"temperature_K", cfg.bath.temperature_K},
                 {"matsubara", cfg.bath.matsubara_count ? json(*cfg.bath.matsubara_count) : json("auto")},
                 {"matsubara_rel_tol", cfg.bath.auto_rel_tol},
                 {"terms", terms}};
    j["system"] = {{"delta_eV", units::au_to_eV(cfg.system.delta)},
                   {"w_eV", units::au_to_eV(cfg.system.w)},
                   {"dipole_au", matrix_json(cfg.system.dipole)},
                   {"coupling_op", matrix_json(cfg.system.coupling)},
                   {"t_final_fs", cfg.t_final_fs},
                   {"heom_level", cfg.heom_level},
                   {"field", field_json(cfg.field)},
                   {"field_dt_au", cfg.field_dt_au}};
    if (cfg.oct) {
        const auto& o = *cfg.oct;
        j["oct"] = {{"target", o.target},     {"alpha0_au", o.alpha0_au},   {"max_iters", o.max_iters},
                    {"fidelity_tol", o.fidelity_tol}, {"amp_cap_au", o.amp_cap_au}, {"guess", field_json(o.guess)}};
        if (o.custom_init) j["oct"]["rho_init"] = matrix_json(*o.custom_init);
        if (o.custom_target) j["oct"]["rho_target"] = matrix_json(*o.custom_target);
    }
    if (cfg.scan)
        j["scan"] = {{"parameter", cfg.scan->parameter}, {"values", cfg.scan->values}, {"base", mode_name(cfg.scan->base)}};
    if (!cfg.convergence_levels.empty()) j["convergence"] = {{"levels", cfg.convergence_levels}};
    j["output"] = {{"decomposition_times_fs", cfg.output.decomposition_times_fs},
                   {"correlation_t_max_fs", cfg.output.correlation_t_max_fs},
                   {"correlation_dt_fs", cfg.output.correlation_dt_fs}};
    const auto& t = cfg.tolerances;
    j["tolerances"] = {{"rk_rel", t.rk_rel},           {"rk_abs", t.rk_abs},     {"trace_monitor", t.trace_monitor},
                       {"f_rcond_cutoff", t.f_rcond_cutoff}, {"max_ados", t.max_ados}, {"matsubara_cap", t.matsubara_cap}};
    return j;
}

FieldGrid build_field(const FieldConfig& fc, const RunConfig& cfg) {
    const double t1 = units::fs_to_au(cfg.t_final_fs);
    if (fc.shape == "zero") return FieldGrid::uniform(0.0, t1, cfg.field_dt_au, 0.0);
    if (fc.shape == "constant") return FieldGrid::uniform(0.0, t1, cfg.field_dt_au, fc.amplitude_au);
    if (fc.shape == "sine_squared") {
        const double dur = fc.duration_fs ? units::fs_to_au(*fc.duration_fs) : t1;
        FieldGrid g = FieldGrid::uniform(0.0, t1, cfg.field_dt_au, 0.0);
        for (std::size_t i = 0; i < g.intervals(); ++i) {
            const double t = g.time(i);
            if (t < dur) {
                const double s = std::sin(M_PI * t / dur);
                g.values[i] = fc.amplitude_au * s * s;
            }
        }
        return g;
    }
    // file: rows t_fs,E_au on a uniform grid; the last row is the end point.
    const auto path = fc.path.is_absolute() ? fc.path : cfg.base_dir / fc.path;
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot read field file " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("t_fs,E_au", 0) != 0) throw ConfigError("field file " + path.string() + ": header must be t_fs,E_au");
    std::vector<double> ts, es;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        double t, e;
        char comma;
        if (!(row >> t >> comma >> e) || comma != ',') throw ConfigError("field file: malformed row '" + line + "'");
        ts.push_back(units::fs_to_au(t));
        es.push_back(e);
    }
    if (ts.size() < 2) throw ConfigError("field file: need at least two rows");
    FieldGrid g;
    g.t0 = ts.front();
    g.dt = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (std::abs(ts[i] - ts[i - 1] - g.dt) > 1e-6 * g.dt) throw ConfigError("field file: grid is not uniform");
    g.values.assign(es.begin(), es.end() - 1);
    g.validate();
    return g;
}

FieldGrid build_field(const RunConfig& cfg) { return build_field(cfg.field, cfg); }

ControlProblem build_control_problem(const RunConfig& cfg) {
    if (!cfg.oct) throw ConfigError("optimize mode needs an [oct] section");
    const auto& o = *cfg.oct;
    ControlProblem p;
    if (o.target == "revive_1") {
        p.rho_init = p.rho_target = population_projector(1);
    } else if (o.target == "revive_2") {
        p.rho_init = p.rho_target = population_projector(2);
    } else if (o.target == "swap_12") {
        p.rho_init = population_projector(1);
        p.rho_target = population_projector(2);
    } else {
        p.rho_init = o.custom_init.value_or(cfg.initial_state);
        p.rho_target = *o.custom_target;
    }
    p.guess = build_field(o.guess, cfg);
    p.alpha0 = o.alpha0_au;
    p.max_iters = o.max_iters;
    p.fidelity_tol = o.fidelity_tol;
    p.amp_cap = o.amp_cap_au;
    p.validate();
    return p;
}

} // namespace heom
