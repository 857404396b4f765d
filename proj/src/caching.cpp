#include "sttl/caching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sttl {

int slot_index(double tau, double update_period, int num_slots) {
  if (tau < 0) throw std::invalid_argument("slot_index: tau must be >= 0");
  if (!(update_period > 0)) throw std::invalid_argument("slot_index: T must be > 0");
  if (num_slots < 0) throw std::invalid_argument("slot_index: K must be >= 0");
  const double q = std::floor(tau / update_period);
  if (q >= static_cast<double>(num_slots)) return num_slots;
  return static_cast<int>(q);
}

double sbs_download_from_sum(double mu_sum) { return std::min(mu_sum, 1.0); }

double sbs_download(std::span<const double> mu_in_coverage) {
  double sum = 0.0;
  for (const double mu : mu_in_coverage) sum += mu;
  return sbs_download_from_sum(sum);
}

double mbs_download_from_sum(double mu_sum) { return std::max(1.0 - mu_sum, 0.0); }

double mbs_download(std::span<const double> mu_in_coverage) {
  double sum = 0.0;
  for (const double mu : mu_in_coverage) sum += mu;
  return mbs_download_from_sum(sum);
}

double update_traffic(std::span<const double> x, double mu_prev, int ell,
                      int num_caches) {
  if (ell < 0 || static_cast<std::size_t>(ell) >= x.size())
    throw std::invalid_argument("update_traffic: ell must be in 0..K");
  double pushed = std::max(x[0] - mu_prev, 0.0);
  for (int j = 1; j <= ell; ++j)
    pushed += std::max(x[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j - 1)], 0.0);
  return num_caches * pushed;
}

double average_occupancy(std::span<const double> x, double tau, double update_period) {
  if (!(tau > 0)) throw std::invalid_argument("average_occupancy: tau must be > 0");
  const int K = static_cast<int>(x.size()) - 1;
  const int ell = slot_index(tau, update_period, K);
  double area = 0.0;
  for (int j = 0; j < ell; ++j) area += update_period * x[static_cast<std::size_t>(j)];
  area += (tau - ell * update_period) * x[static_cast<std::size_t>(ell)];
  return area / tau;
}

LoadLedger::Summary LoadLedger::finalize() const {
  Summary s;
  if (elapsed_time > 0) {
    s.rate_mbs = mbs_bytes / elapsed_time;
    s.rate_sbs = sbs_bytes / elapsed_time;
    s.rate_upd = update_bytes / elapsed_time;
  }
  s.load = s.rate_mbs + cost_sbs * s.rate_sbs + cost_update * s.rate_upd;
  if (num_requests > 0) {
    const double n = static_cast<double>(num_requests);
    s.load_norm = (mbs_bytes + cost_sbs * sbs_bytes + cost_update * update_bytes) / n;
    s.objective = (sbs_bytes - cost_update * update_bytes) / n;
  }
  return s;
}

}  // namespace sttl
