#pragma once
// Small deterministic generators for the property tests.
#include <cstdint>
#include <vector>

#include "nsfp/grid.hpp"

namespace testgen {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next()
  {
    // xorshift64*
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545f4914f6cdd1dull;
  }
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * (next() >> 11) * 0x1.0p-53; }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

private:
  std::uint64_t s_;
};

inline nsfp::ScalarField scalar(Rng& r, const nsfp::Grid2D& g, double lo = -1, double hi = 1)
{
  nsfp::ScalarField f(g.size());
  for (auto& v : f)
    v = r.uniform(lo, hi);
  return f;
}

inline nsfp::VectorField vector(Rng& r, const nsfp::Grid2D& g)
{
  nsfp::VectorField v = g.vector();
  for (std::size_t c = 0; c < g.size(); ++c) {
    v.x[c] = r.uniform(-1, 1);
    v.y[c] = r.uniform(-1, 1);
  }
  return v;
}

inline double dot(const nsfp::Grid2D& g, const nsfp::VectorField& a, const nsfp::VectorField& b)
{
  double s = 0;
  for (std::size_t c = 0; c < a.size(); ++c)
    s += a.x[c] * b.x[c] + a.y[c] * b.y[c];
  return s * g.cell_area();
}

} // namespace testgen
