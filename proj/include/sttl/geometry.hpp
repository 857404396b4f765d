#pragma once

#include <cstdint>

#include "sttl/rng.hpp"

namespace sttl {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// SBS b sits at corner b of the unit square, counted cyclically:
// 1 -> (0,0), 2 -> (1,0), 3 -> (1,1), 4 -> (0,1).
Vec2 sbs_position(int b);

// Home SBS of a file under heterogeneous placement: b* = (f mod B) + 1.
int home_sbs(int file, int num_sbs);

// Bitmask of SBSs (bit b-1) within Euclidean distance r of pos.
std::uint32_t coverage_from_position(Vec2 pos, int num_sbs, double comm_range);

Vec2 sample_position_uniform(Rng& rng);

// Uniform on the quarter disc of radius r around corner b (r <= 1 keeps it
// inside the square); rejection against the disc's bounding square.
Vec2 sample_position_in_cell(int b, double comm_range, Rng& rng);

// Uniform on the unit square minus that quarter disc.
Vec2 sample_position_in_complement(int b, double comm_range, Rng& rng);

struct PlacementModel {
  int num_sbs = 4;
  double comm_range = 0.7071067811865476;
  bool uniform = true;
  double zeta = 0.0;  // P(position lands in the home SBS's cell), used when !uniform

  // Coverage set of one request for file f.
  std::uint32_t sample_coverage(int file, Rng& rng) const;
};

}  // namespace sttl
