#include "sttl/util.hpp"

#include <stdexcept>

#ifndef STTL_GIT_HASH
#define STTL_GIT_HASH "untracked"
#endif

namespace sttl {

std::string build_stamp() { return STTL_GIT_HASH; }

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  if (window <= 0) throw std::invalid_argument("moving_average: window must be positive");
  std::vector<double> prefix(values.size() + 1, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) prefix[i + 1] = prefix[i] + values[i];
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(window)
                               ? i + 1 - static_cast<std::size_t>(window)
                               : 0;
    out[i] = (prefix[i + 1] - prefix[lo]) / static_cast<double>(i + 1 - lo);
  }
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path, const Config& cfg,
                       const std::string& header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# build = " << build_stamp() << "\n";
  for (const auto& [key, value] : cfg.echo()) out << "# " << key << " = " << value << "\n";
  out << header << "\n";
  return out;
}

}  // namespace sttl
