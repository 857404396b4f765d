#include "sttl/geometry.hpp"

#include <cassert>
#include <stdexcept>

namespace sttl {

Vec2 sbs_position(int b) {
  switch (b) {
    case 1: return {0.0, 0.0};
    case 2: return {1.0, 0.0};
    case 3: return {1.0, 1.0};
    case 4: return {0.0, 1.0};
    default: throw std::invalid_argument("sbs_position: b must be in 1..4");
  }
}

int home_sbs(int file, int num_sbs) {
  assert(file >= 1 && num_sbs >= 1);
  return file % num_sbs + 1;
}

std::uint32_t coverage_from_position(Vec2 pos, int num_sbs, double comm_range) {
  const double r2 = comm_range * comm_range;
  std::uint32_t mask = 0;
  for (int b = 1; b <= num_sbs; ++b) {
    const Vec2 s = sbs_position(b);
    const double dx = pos.x - s.x;
    const double dy = pos.y - s.y;
    if (dx * dx + dy * dy <= r2) mask |= 1u << (b - 1);
  }
  return mask;
}

Vec2 sample_position_uniform(Rng& rng) {
  return {rng.uniform01(), rng.uniform01()};
}

Vec2 sample_position_in_cell(int b, double comm_range, Rng& rng) {
  const Vec2 s = sbs_position(b);
  const double r2 = comm_range * comm_range;
  for (int iter = 0; iter < 100000; ++iter) {
    // Bounding square of the quarter disc, clipped to [0,1] implicitly by r <= 1.
    const double dx = rng.uniform01() * comm_range;
    const double dy = rng.uniform01() * comm_range;
    if (dx * dx + dy * dy > r2) continue;
    const double x = s.x == 0.0 ? dx : s.x - dx;
    const double y = s.y == 0.0 ? dy : s.y - dy;
    return {x, y};
  }
  throw std::runtime_error("sample_position_in_cell: rejection sampling stalled");
}

Vec2 sample_position_in_complement(int b, double comm_range, Rng& rng) {
  const Vec2 s = sbs_position(b);
  const double r2 = comm_range * comm_range;
  for (int iter = 0; iter < 100000; ++iter) {
    const Vec2 p{rng.uniform01(), rng.uniform01()};
    const double dx = p.x - s.x;
    const double dy = p.y - s.y;
    if (dx * dx + dy * dy > r2) return p;
  }
  throw std::runtime_error("sample_position_in_complement: rejection sampling stalled");
}

std::uint32_t PlacementModel::sample_coverage(int file, Rng& rng) const {
  Vec2 pos;
  if (uniform) {
    pos = sample_position_uniform(rng);
  } else {
    const int b = home_sbs(file, num_sbs);
    pos = rng.uniform01() < zeta ? sample_position_in_cell(b, comm_range, rng)
                                 : sample_position_in_complement(b, comm_range, rng);
  }
  return coverage_from_position(pos, num_sbs, comm_range);
}

}  // namespace sttl
