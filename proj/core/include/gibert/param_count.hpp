#pragma once

#include <cstdint>

#include "gibert/model_config.hpp"

namespace gibert {

/// Closed-form count of the parameters an injection mechanism adds to an
/// encoder with hidden size `hidden` fed `embedding_dim`-dimensional vectors:
///   gated     D(E + 2)          projection W [D x E], bias [D], gate [D]
///   ungated   D(E + 1)          projection only
///   attention 2D^2 + 2ED + 4D   W^Q, W^O [D x D]; W^K, W^V [E x D]; 4 biases
///   none      0
std::uint64_t count_injection_params(InjectionMode mode, std::uint64_t hidden, std::uint64_t embedding_dim);

}  // namespace gibert
