#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sttl/config.hpp"
#include "sttl/geometry.hpp"
#include "sttl/rng.hpp"

namespace sttl {

struct TraceRecord {
  double time = 0.0;
  int file = 0;                 // 1..F
  std::uint32_t coverage = 0;   // bit b-1 set iff SBS b is in range
  int next_same_file = -1;      // index of the next request for this file, -1 if none
  bool is_last = true;          // no later request for this file in the trace
};

struct RequestTrace {
  int num_files = 0;
  int num_sbs = 0;
  std::vector<TraceRecord> records;

  // Inter-request time from record i to the next request for the same file.
  // Valid only when records[i].next_same_file >= 0.
  double gap_after(int i) const {
    return records[records[i].next_same_file].time - records[i].time;
  }
};

// p_f = f^{-alpha} / sum_j j^{-alpha}, decreasing in f, sums to 1.
std::vector<double> zipf_popularity(int num_files, double alpha);

// Scale of a Weibull(shape k) whose mean equals 1/rate.
double weibull_scale_from_rate(double shape, double rate);

// Sampling seam so traces can be driven by deterministic stubs in tests.
class TraceSampler {
 public:
  virtual ~TraceSampler() = default;
  virtual double gap(int file, Rng& rng) = 0;
  virtual std::uint32_t coverage(int file, Rng& rng) = 0;
};

// Per-file Weibull renewal gaps with Zipf rate split plus the placement model.
class ScenarioSampler : public TraceSampler {
 public:
  ScenarioSampler(const Config& cfg);
  double gap(int file, Rng& rng) override;
  std::uint32_t coverage(int file, Rng& rng) override;

 private:
  double shape_;
  std::vector<double> scale_;  // per file
  PlacementModel placement_;
};

// Superposes the per-file renewal streams into one time-sorted trace of
// exactly num_requests records and links same-file successors.
RequestTrace generate_trace(TraceSampler& sampler, int num_files, int num_sbs,
                            int num_requests, std::uint64_t seed);

// Convenience wrapper building a ScenarioSampler from cfg.
RequestTrace generate_trace(const Config& cfg, int num_requests, std::uint64_t seed);

// Subsequence of records whose coverage contains SBS b, with successor links
// and last-request flags recomputed on the subsequence.
RequestTrace filter_trace(const RequestTrace& trace, int b);

// Recomputes next_same_file and is_last in place.
void link_same_file(RequestTrace& trace);

// Columns: time, file, coverage bitmask.
void write_trace_csv(std::ostream& out, const RequestTrace& trace);

}  // namespace sttl
