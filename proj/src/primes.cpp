#include "detz/primes.hpp"

#include <mutex>
#include <stdexcept>

#include "detz/generator.hpp"

namespace detz {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m)
{
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m)
{
    std::uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1)
            r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

}  // namespace

bool is_prime_u64(std::uint64_t n)
{
    if (n < 2)
        return false;
    for (std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
        if (n % p == 0)
            return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // Jaeschke / Sinclair bases, sufficient for all n < 2^64.
    for (std::uint64_t a : {2ull, 325ull, 9375ull, 28178ull, 450775ull, 9780504ull, 1795265022ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 0 || x == 1 || x == n - 1)
            continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite)
            return false;
    }
    return true;
}

std::uint64_t PrimeStream::next()
{
    constexpr std::uint64_t floor = std::uint64_t{1} << 61;
    while (candidate_ > floor) {
        std::uint64_t c = candidate_;
        candidate_ -= 2;
        if (is_prime_u64(c)) {
            emitted_.push_back(c);
            return c;
        }
    }
    throw std::runtime_error("PrimeStream exhausted");
}

std::vector<std::uint32_t> small_primes(std::size_t count, std::size_t skip)
{
    // Shared decreasing list of primes below 2^22, grown on demand.
    static std::mutex mu;
    static std::vector<std::uint32_t> cache;
    static std::uint32_t next_candidate = (1u << 22) - 1;

    std::lock_guard<std::mutex> lock(mu);
    while (cache.size() < skip + count) {
        if (next_candidate < (1u << 20))
            throw std::runtime_error("small_primes: request too large");
        std::uint32_t c = next_candidate;
        next_candidate -= 2;
        if (is_prime_u64(c))
            cache.push_back(c);
    }
    return {cache.begin() + static_cast<std::ptrdiff_t>(skip),
            cache.begin() + static_cast<std::ptrdiff_t>(skip + count)};
}

std::uint64_t random_prime(std::size_t bits, Rng& rng)
{
    if (bits < 2 || bits > 62)
        throw std::invalid_argument("random_prime: bits must be in [2, 62]");
    const std::uint64_t lo = std::uint64_t{1} << (bits - 1);
    for (;;) {
        std::uint64_t c = lo + rng.below(lo);
        if (is_prime_u64(c))
            return c;
    }
}

}  // namespace detz
