#pragma once

#include <string_view>

namespace secretsweep {

/// Shannon entropy in bits of the byte distribution of `s`. Empty input gives 0.
double shannon_entropy(std::string_view s);

}  // namespace secretsweep
