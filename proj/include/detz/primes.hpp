#pragma once

#include <cstdint>
#include <vector>

namespace detz {

/// Deterministic primality test for 64-bit integers (Miller-Rabin with a
/// base set proven sufficient below 2^64).
bool is_prime_u64(std::uint64_t n);

/// Stream of distinct primes in (2^61, 2^62), emitted in decreasing order
/// starting just below 2^62. Copies continue independently.
class PrimeStream {
public:
    PrimeStream() = default;

    std::uint64_t next();
    const std::vector<std::uint64_t>& emitted() const { return emitted_; }

private:
    std::uint64_t candidate_ = (std::uint64_t{1} << 62) - 1;
    std::vector<std::uint64_t> emitted_;
};

/// First `count` primes below 2^22 in decreasing order, skipping `skip`.
std::vector<std::uint32_t> small_primes(std::size_t count, std::size_t skip = 0);

/// Uniformly drawn prime with exactly `bits` bits (2 <= bits <= 62).
class Rng;
std::uint64_t random_prime(std::size_t bits, Rng& rng);

}  // namespace detz
