#include "secretsweep/entropy.hpp"

#include <array>
#include <cmath>
#include <cstddef>

namespace secretsweep {

double shannon_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (unsigned char c : s) ++counts[c];
  const double n = static_cast<double>(s.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  // A single repeated symbol yields -1 * log2(1) = -0.0.
  return h <= 0.0 ? 0.0 : h;
}

}  // namespace secretsweep
