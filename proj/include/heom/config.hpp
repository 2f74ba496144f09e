// config.hpp - run configuration: strict TOML loading with unit-suffixed keys

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "heom/bath.hpp"
#include "heom/hierarchy.hpp"
#include "heom/oct.hpp"
#include "heom/propagate.hpp"

namespace heom {

enum class RunMode { propagate, witness, optimize, scan, convergence, correlation };

RunMode parse_mode(std::string_view name);
std::string mode_name(RunMode m);

struct FieldConfig {
    std::string shape{"zero"}; // zero | constant | sine_squared | file
    double amplitude_au{0.0};
    std::optional<double> duration_fs; // sine_squared envelope length, defaults to the horizon
    std::filesystem::path path;        // file: CSV with t_fs,E_au rows on a uniform grid
};

struct Tolerances {
    double rk_rel{1e-9};
    double rk_abs{1e-12};
    double trace_monitor{1e-8};
    double f_rcond_cutoff{1e-10};
    std::size_t max_ados{kDefaultMaxSlots};
    int matsubara_cap{64};

    StepControl step_control() const { return {rk_rel, rk_abs}; }
};

struct OctConfig {
    std::string target{"revive_1"}; // revive_1 | revive_2 | swap_12 | custom
    std::optional<Mat2> custom_init;
    std::optional<Mat2> custom_target;
    double alpha0_au{100.0};
    int max_iters{50};
    double fidelity_tol{1e-6};
    double amp_cap_au{1e-2};
    FieldConfig guess{"sine_squared", 1e-3, std::nullopt, {}};
};

struct ScanConfig {
    std::string parameter;
    std::vector<double> values;
    RunMode base{RunMode::propagate};
};

struct OutputConfig {
    std::vector<double> decomposition_times_fs;
    double correlation_t_max_fs{100.0};
    double correlation_dt_fs{0.25};
};

struct RunConfig {
    RunMode mode{RunMode::propagate};
    Mat2 initial_state{population_projector(1)};
    std::uint64_t seed{0};

    BathSpec bath;
    SystemSpec system;
    double t_final_fs{20.0};
    int heom_level{6};
    FieldConfig field;
    double field_dt_au{2.0};

    std::optional<OctConfig> oct;
    std::optional<ScanConfig> scan;
    std::vector<int> convergence_levels;
    OutputConfig output;
    Tolerances tolerances;

    std::filesystem::path base_dir; // relative paths in the file resolve against this
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

// Resolved configuration (atomic units added alongside the input units).
nlohmann::json config_echo(const RunConfig& cfg);

FieldGrid build_field(const FieldConfig& fc, const RunConfig& cfg);
FieldGrid build_field(const RunConfig& cfg);

// Initial and target states for the control problem (target names resolved).
ControlProblem build_control_problem(const RunConfig& cfg);

} // namespace heom
