#include "gibert/param_count.hpp"

#include "gibert/error.hpp"

namespace gibert {

std::uint64_t count_injection_params(InjectionMode mode, std::uint64_t hidden, std::uint64_t embedding_dim) {
  const std::uint64_t d = hidden;
  const std::uint64_t e = embedding_dim;
  switch (mode) {
    case InjectionMode::none: return 0;
    case InjectionMode::gated: return d * (e + 2);
    case InjectionMode::ungated: return d * (e + 1);
    case InjectionMode::attention: return 2 * d * d + 2 * e * d + 4 * d;
  }
  throw ConfigError("count_injection_params: unknown injection mode");
}

}  // namespace gibert
