#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sttl {

// Slot of an inter-request time: min(floor(tau/T), K). Rejects tau < 0.
int slot_index(double tau, double update_period, int num_slots);

// Amount served by SBSs: min(sum of cached fractions in coverage, 1).
double sbs_download_from_sum(double mu_sum);
double sbs_download(std::span<const double> mu_in_coverage);

// Complement served by the MBS: max(1 - sum, 0). Always 1 - sbs_download.
double mbs_download_from_sum(double mu_sum);
double mbs_download(std::span<const double> mu_in_coverage);

// Data pushed to refresh caches when policy x replaces previous fraction
// mu_prev and the request lands in slot ell:
// num_caches * ( max(x[0]-mu_prev, 0) + sum_{j=1..ell} max(x[j]-x[j-1], 0) ).
double update_traffic(std::span<const double> x, double mu_prev, int ell,
                      int num_caches);

// Time-average of the piecewise-constant slot occupancy over a gap tau:
// (1/tau) * ( T * sum_{j<ell} x[j] + (tau - ell*T) * x[ell] ). Rejects tau <= 0.
double average_occupancy(std::span<const double> x, double tau, double update_period);

// Accumulates delivered and pushed bytes over a simulation and reports the
// weighted network load both as raw rates (per elapsed time) and normalized
// per request. Mergeable component-wise so parallel replicas can combine.
struct LoadLedger {
  double sbs_bytes = 0.0;
  double mbs_bytes = 0.0;
  double update_bytes = 0.0;
  double elapsed_time = 0.0;
  std::uint64_t num_requests = 0;
  double cost_sbs = 0.0;
  double cost_update = 0.0;

  void add_request(double sbs_amount, double mbs_amount) {
    sbs_bytes += sbs_amount;
    mbs_bytes += mbs_amount;
    ++num_requests;
  }
  void add_update(double bytes) { update_bytes += bytes; }

  void merge(const LoadLedger& other) {
    sbs_bytes += other.sbs_bytes;
    mbs_bytes += other.mbs_bytes;
    update_bytes += other.update_bytes;
    elapsed_time += other.elapsed_time;
    num_requests += other.num_requests;
  }

  struct Summary {
    double rate_mbs = 0.0;     // L_MBS, bytes per unit time
    double rate_sbs = 0.0;     // L_SBS
    double rate_upd = 0.0;     // L_C
    double load = 0.0;         // L = L_MBS + c_SBS*L_SBS + c_C*L_C
    double load_norm = 1.0;    // per-request weighted load; 1 with no caching
    double objective = 0.0;    // per-request L_SBS - c_C*L_C
  };
  Summary finalize() const;
};

}  // namespace sttl
