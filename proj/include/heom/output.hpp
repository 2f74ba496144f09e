// output.hpp - deterministic CSV/JSON writers (17 significant digits, atomic replace)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace heom {

std::string format_number(double x);

// Writes to <path>.tmp and renames over <path>.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

} // namespace heom
