#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace stotiht {

/// Every random constructor in the library takes one of these explicitly.
using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derive an independent stream seed from a base seed and a list of
/// coordinates (trial index, grid cell, ...). Pure: the same inputs always
/// give the same seed, regardless of which worker evaluates it.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::span<const std::uint64_t> coords) noexcept {
  std::uint64_t h = detail::splitmix64(base);
  for (std::uint64_t c : coords) h = detail::splitmix64(h ^ detail::splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> coords) noexcept {
  return derive_seed(base, std::span<const std::uint64_t>(coords.begin(), coords.size()));
}

}  // namespace stotiht
