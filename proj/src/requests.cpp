#include "sttl/requests.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <utility>

namespace sttl {

std::vector<double> zipf_popularity(int num_files, double alpha) {
  if (num_files < 1) throw std::invalid_argument("zipf_popularity: num_files must be >= 1");
  if (alpha < 0) throw std::invalid_argument("zipf_popularity: alpha must be >= 0");
  long double norm = 0.0L;
  for (int f = 1; f <= num_files; ++f)
    norm += powl(static_cast<long double>(f), static_cast<long double>(-alpha));
  std::vector<double> p(static_cast<std::size_t>(num_files));
  for (int f = 1; f <= num_files; ++f)
    p[f - 1] = static_cast<double>(
        powl(static_cast<long double>(f), static_cast<long double>(-alpha)) / norm);
  return p;
}

double weibull_scale_from_rate(double shape, double rate) {
  if (!(shape > 0) || shape > 1)
    throw std::invalid_argument("weibull_scale_from_rate: shape must be in (0, 1]");
  if (!(rate > 0)) throw std::invalid_argument("weibull_scale_from_rate: rate must be > 0");
  return 1.0 / (rate * std::tgamma(1.0 + 1.0 / shape));
}

ScenarioSampler::ScenarioSampler(const Config& cfg) : shape_(cfg.weibull_shape) {
  const auto p = zipf_popularity(cfg.num_files, cfg.zipf_alpha);
  scale_.resize(p.size());
  for (std::size_t f = 0; f < p.size(); ++f)
    scale_[f] = weibull_scale_from_rate(shape_, cfg.aggregate_rate * p[f]);
  placement_.num_sbs = cfg.num_sbs;
  placement_.comm_range = cfg.comm_range;
  placement_.uniform = cfg.zeta_uniform;
  placement_.zeta = cfg.zeta;
}

double ScenarioSampler::gap(int file, Rng& rng) {
  return rng.weibull(shape_, scale_[static_cast<std::size_t>(file - 1)]);
}

std::uint32_t ScenarioSampler::coverage(int file, Rng& rng) {
  return placement_.sample_coverage(file, rng);
}

void link_same_file(RequestTrace& trace) {
  std::vector<int> seen(static_cast<std::size_t>(trace.num_files), -1);
  for (int i = static_cast<int>(trace.records.size()) - 1; i >= 0; --i) {
    auto& rec = trace.records[static_cast<std::size_t>(i)];
    const std::size_t f = static_cast<std::size_t>(rec.file - 1);
    rec.next_same_file = seen[f];
    rec.is_last = rec.next_same_file < 0;
    seen[f] = i;
  }
}

RequestTrace generate_trace(TraceSampler& sampler, int num_files, int num_sbs,
                            int num_requests, std::uint64_t seed) {
  if (num_requests < 1)
    throw std::invalid_argument("generate_trace: degenerate episode, horizon too small");
  Rng rng(seed);
  RequestTrace trace;
  trace.num_files = num_files;
  trace.num_sbs = num_sbs;
  trace.records.reserve(static_cast<std::size_t>(num_requests));

  // Next arrival per file; min-heap on (time, file) so ties break by file.
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (int f = 1; f <= num_files; ++f) heap.emplace(sampler.gap(f, rng), f);

  double prev = -1.0;
  for (int i = 0; i < num_requests; ++i) {
    auto [t, f] = heap.top();
    heap.pop();
    // Strictly increasing timestamps; equal draws get an ulp nudge.
    if (t <= prev) t = std::nextafter(prev, std::numeric_limits<double>::infinity());
    prev = t;
    trace.records.push_back({t, f, sampler.coverage(f, rng), -1, true});
    heap.emplace(t + sampler.gap(f, rng), f);
  }
  link_same_file(trace);
  return trace;
}

RequestTrace generate_trace(const Config& cfg, int num_requests, std::uint64_t seed) {
  ScenarioSampler sampler(cfg);
  return generate_trace(sampler, cfg.num_files, cfg.num_sbs, num_requests, seed);
}

RequestTrace filter_trace(const RequestTrace& trace, int b) {
  RequestTrace out;
  out.num_files = trace.num_files;
  out.num_sbs = trace.num_sbs;
  const std::uint32_t bit = 1u << (b - 1);
  for (const auto& rec : trace.records)
    if (rec.coverage & bit) out.records.push_back(rec);
  link_same_file(out);
  return out;
}

void write_trace_csv(std::ostream& out, const RequestTrace& trace) {
  out << "time,file,coverage\n";
  for (const auto& rec : trace.records)
    out << format_double(rec.time) << ',' << rec.file << ',' << rec.coverage << '\n';
}

}  // namespace sttl
