#include <cmath>
#include <vector>

#include "doctest.h"
#include "sttl/config.hpp"
#include "sttl/requests.hpp"

using namespace sttl;

namespace {

// Fixed gaps per file, fixed coverage: makes the merge order hand-checkable.
class StubSampler : public TraceSampler {
 public:
  StubSampler(std::vector<double> gaps, std::uint32_t coverage)
      : gaps_(std::move(gaps)), coverage_(coverage) {}
  double gap(int file, Rng&) override { return gaps_[static_cast<std::size_t>(file - 1)]; }
  std::uint32_t coverage(int, Rng&) override { return coverage_; }

 private:
  std::vector<double> gaps_;
  std::uint32_t coverage_;
};

Config seeded() {
  Config cfg;
  cfg.apply("rng_seed", "9");
  return cfg;
}

}  // namespace

TEST_CASE("zipf popularity matches the independent oracle") {
  std::vector<double> p = zipf_popularity(20, 0.7);
  REQUIRE(p.size() == 20);
  // 1 / sum_{j=1..20} j^-0.7, from a 30-digit computation.
  CHECK(p[0] == doctest::Approx(0.182786898147448).epsilon(1e-9));
  double sum = 0.0;
  for (double v : p) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t f = 1; f < p.size(); ++f) CHECK(p[f] < p[f - 1]);

  std::vector<double> flat = zipf_popularity(5, 0.0);
  for (double v : flat) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("weibull scale reproduces the requested mean rate") {
  // Gamma(1 + 1/0.6) = 1.5045754882515563.
  CHECK(weibull_scale_from_rate(0.6, 1.0) ==
        doctest::Approx(0.6646393004594834).epsilon(1e-12));
  CHECK(weibull_scale_from_rate(1.0, 4.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS(weibull_scale_from_rate(1.5, 1.0));
  CHECK_THROWS(weibull_scale_from_rate(0.0, 1.0));
  CHECK_THROWS(weibull_scale_from_rate(0.6, 0.0));
}

TEST_CASE("stub-driven merge is hand-checkable") {
  StubSampler sampler({1.0, 1.5}, 0x1u);
  RequestTrace trace = generate_trace(sampler, 2, 1, 6, 123);
  REQUIRE(trace.records.size() == 6);
  // Per-file renewal times: file 1 at 1,2,3,4..., file 2 at 1.5,3,4.5...
  // The 3.0 tie resolves to the smaller file id; the loser is nudged up.
  CHECK(trace.records[0].file == 1);
  CHECK(trace.records[0].time == doctest::Approx(1.0));
  CHECK(trace.records[1].file == 2);
  CHECK(trace.records[1].time == doctest::Approx(1.5));
  CHECK(trace.records[2].file == 1);
  CHECK(trace.records[2].time == doctest::Approx(2.0));
  CHECK(trace.records[3].file == 1);
  CHECK(trace.records[3].time == doctest::Approx(3.0));
  CHECK(trace.records[4].file == 2);
  CHECK(trace.records[4].time > trace.records[3].time);  // nudged past the tie
  CHECK(trace.records[4].time == doctest::Approx(3.0));
  CHECK(trace.records[5].file == 1);

  // Successor links.
  CHECK(trace.records[0].next_same_file == 2);
  CHECK(trace.records[1].next_same_file == 4);
  CHECK(trace.records[2].next_same_file == 3);
  CHECK(trace.records[3].next_same_file == 5);
  CHECK(trace.records[4].next_same_file == -1);
  CHECK(trace.records[4].is_last);
  CHECK(trace.records[5].is_last);
  CHECK_FALSE(trace.records[0].is_last);
  CHECK(trace.gap_after(2) == doctest::Approx(1.0));
}

TEST_CASE("generated traces are strictly ordered and correctly linked") {
  Config cfg = seeded();
  RequestTrace trace = generate_trace(cfg, 600, cfg.seed());
  REQUIRE(trace.records.size() == 600);
  for (std::size_t i = 1; i < trace.records.size(); ++i)
    CHECK(trace.records[i].time > trace.records[i - 1].time);

  // Brute-force successor check.
  for (int i = 0; i < 600; ++i) {
    int expected = -1;
    for (int j = i + 1; j < 600; ++j)
      if (trace.records[j].file == trace.records[i].file) {
        expected = j;
        break;
      }
    CHECK(trace.records[i].next_same_file == expected);
    CHECK(trace.records[i].is_last == (expected < 0));
    if (expected >= 0) CHECK(trace.gap_after(i) > 0.0);
  }
  CHECK(trace.records.back().is_last);

  for (const TraceRecord& rec : trace.records) {
    CHECK(rec.file >= 1);
    CHECK(rec.file <= cfg.num_files);
    CHECK(rec.coverage < (1u << cfg.num_sbs));
  }
}

TEST_CASE("request rates split by popularity") {
  Config cfg = seeded();
  cfg.num_files = 4;
  cfg.zipf_alpha = 0.7;
  const int n = 40000;
  RequestTrace trace = generate_trace(cfg, n, cfg.seed());
  std::vector<double> p = zipf_popularity(4, 0.7);
  std::vector<int> counts(5, 0);
  for (const TraceRecord& rec : trace.records) ++counts[static_cast<std::size_t>(rec.file)];
  for (int f = 1; f <= 4; ++f)
    CHECK(counts[static_cast<std::size_t>(f)] / static_cast<double>(n) ==
          doctest::Approx(p[static_cast<std::size_t>(f - 1)]).epsilon(0.05));
}

TEST_CASE("empirical mean gap matches the Weibull mean") {
  for (double k : {0.5, 0.6, 1.0}) {
    Config cfg = seeded();
    cfg.num_files = 1;
    cfg.weibull_shape = k;
    cfg.aggregate_rate = 2.0;  // mean gap 0.5
    const int n = 100000;
    RequestTrace trace = generate_trace(cfg, n, cfg.seed());
    double sum = 0.0;
    int gaps = 0;
    for (int i = 0; i + 1 < n; ++i) {
      sum += trace.gap_after(i);
      ++gaps;
    }
    CHECK(sum / gaps == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("filtering keeps exactly the covered records and relinks them") {
  Config cfg = seeded();
  cfg.num_files = 3;
  RequestTrace trace = generate_trace(cfg, 400, cfg.seed());
  for (int b = 1; b <= cfg.num_sbs; ++b) {
    RequestTrace filtered = filter_trace(trace, b);
    std::size_t expected = 0;
    for (const TraceRecord& rec : trace.records)
      if (rec.coverage & (1u << (b - 1))) ++expected;
    REQUIRE(filtered.records.size() == expected);

    std::size_t pos = 0;
    for (const TraceRecord& rec : trace.records) {
      if (!(rec.coverage & (1u << (b - 1)))) continue;
      CHECK(filtered.records[pos].time == rec.time);
      CHECK(filtered.records[pos].file == rec.file);
      CHECK(filtered.records[pos].coverage == rec.coverage);
      ++pos;
    }
    // Links recomputed within the subsequence.
    for (int i = 0; i < static_cast<int>(filtered.records.size()); ++i) {
      int expected_next = -1;
      for (int j = i + 1; j < static_cast<int>(filtered.records.size()); ++j)
        if (filtered.records[j].file == filtered.records[i].file) {
          expected_next = j;
          break;
        }
      CHECK(filtered.records[i].next_same_file == expected_next);
      CHECK(filtered.records[i].is_last == (expected_next < 0));
    }
  }
}

TEST_CASE("same seed reproduces the trace exactly") {
  Config cfg = seeded();
  RequestTrace a = generate_trace(cfg, 200, cfg.seed());
  RequestTrace b = generate_trace(cfg, 200, cfg.seed());
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].time == b.records[i].time);
    CHECK(a.records[i].file == b.records[i].file);
    CHECK(a.records[i].coverage == b.records[i].coverage);
  }
}
