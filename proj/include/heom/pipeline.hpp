// pipeline.hpp - run orchestration behind the command-line front end

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heom/config.hpp"

namespace heom {

struct RunOptions {
    std::filesystem::path out_dir{"out"};
    int threads{0};
    bool witness{false};
    std::optional<std::string> scan_parameter;
    std::optional<std::vector<double>> scan_values;
};

// Executes one mode, writes its data files and manifest.json; returns the manifest.
nlohmann::json run_pipeline(const RunConfig& cfg, RunMode mode, const RunOptions& opt);

// Applies one scan value to a copy of the configuration.
RunConfig apply_scan_value(const RunConfig& cfg, const std::string& parameter, double value);

const char* code_version();

} // namespace heom
