#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sttl/config.hpp"

namespace sttl {

// Short revision hash baked in at configure time.
std::string build_stamp();

// Trailing mean over the given window; entries before a full window average
// whatever prefix is available.
std::vector<double> moving_average(const std::vector<double>& values, int window);

// Opens path (creating parent directories), writes the build stamp and the
// full configuration as '#' comment lines, then the header row. The caller
// appends one line per data row. Throws on I/O failure.
std::ofstream open_csv(const std::filesystem::path& path, const Config& cfg,
                       const std::string& header);

}  // namespace sttl
