#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace newscap::testing {

// Directory holding the checked-in fixtures.
std::filesystem::path data_dir();
std::string read_text(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

// Fresh, empty scratch directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace newscap::testing
