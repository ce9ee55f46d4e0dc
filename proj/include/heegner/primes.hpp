#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "heegner/isogeny.hpp"
#include "heegner/quadfield.hpp"

namespace heegner {

// Deterministic Miller-Rabin for the full 64-bit range (witness set valid
// below 3.3 * 10^24).  Kept independent of GMP's primality test so the two
// can serve as cross-checks.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while (d % 2 == 0) { d /= 2; ++s; }
    auto mulmod = [](std::uint64_t a, std::uint64_t b, std::uint64_t m) {
        return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
    };
    auto powmod = [&](std::uint64_t a, std::uint64_t e, std::uint64_t m) {
        std::uint64_t r = 1;
        a %= m;
        while (e) {
            if (e & 1) r = mulmod(r, a, m);
            a = mulmod(a, a, m);
            e >>= 1;
        }
        return r;
    };
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

struct IndexPair {
    std::int64_t p = 0, q = 0;
};

namespace detail {

inline bool coprime_to_frame(std::int64_t x, const ImagQuadField& K, const LevelStructure& ls) {
    if (K.d_K() % x == 0) return false;
    if (ls.c != 0 && std::abs(ls.c) % x == 0) return false;
    mpz_class M = ls.ctd_norm(K);
    return !mpz_divisible_ui_p(M.get_mpz_t(), static_cast<unsigned long>(x));
}

}  // namespace detail

// All pairs (p, q) with q < p <= limit, both odd primes congruent to 1 mod N
// and coprime to c d_K |c tau + d|^2, q inert in K; ordered by (q, p).
inline std::vector<IndexPair> index_stream(const ImagQuadField& K, const LevelStructure& ls,
                                           long N, std::int64_t limit) {
    if (!heegner_hypothesis(K.d_K(), N))
        throw PreconditionError("primes", "heegner", "Heegner hypothesis fails");
    std::vector<std::int64_t> ps, qs;
    for (std::int64_t n = 1 + N; n <= limit; n += N) {
        if (!is_prime_u64(static_cast<std::uint64_t>(n)) || n % 2 == 0) continue;
        if (!detail::coprime_to_frame(n, K, ls)) continue;
        ps.push_back(n);
        if (splitting_type(n, K) == SplittingType::inert) qs.push_back(n);
    }
    std::vector<IndexPair> out;
    for (std::int64_t q : qs)
        for (std::int64_t p : ps)
            if (p > q) out.push_back({p, q});
    return out;
}

// Primes q = 1 mod N, q = -1 mod ell, inert in K, coprime to
// c d_K |c tau + d|^2.  Inertness is realized as the union of the residue
// classes a mod d_K with Kronecker(-d_K | a) = -1, combined with the other
// congruences by the Chinese remainder theorem.
inline std::vector<std::int64_t> theorem_q_search(const ImagQuadField& K,
                                                  const LevelStructure& ls, long N,
                                                  std::int64_t ell, int count) {
    if (!is_prime_u64(static_cast<std::uint64_t>(ell)))
        throw PreconditionError("primes", "ell", "ell must be prime");
    long dk = K.d_K();
    if (arith::gcd(static_cast<long>(ell), N) != 1 ||
        arith::gcd(static_cast<long>(ell), dk) != 1 || arith::gcd(N, dk) != 1)
        throw PreconditionError("primes", "ell", "N, d_K, ell must be pairwise coprime");

    // Inert residue classes mod d_K.
    std::vector<std::int64_t> inert_classes;
    for (long a = 1; a < dk; ++a)
        if (arith::kronecker(mpz_class(-dk), mpz_class(a)) == -1) inert_classes.push_back(a);
    if (inert_classes.empty())
        throw Error("primes", "internal", "no inert residue classes mod d_K");

    // CRT with q = 1 mod N and q = -1 mod ell.
    const std::int64_t L = static_cast<std::int64_t>(N) * dk * ell;
    std::vector<std::int64_t> classes;
    for (std::int64_t a : inert_classes) {
        // Solve x = a (d_K), x = 1 (N), x = ell-1 (ell).
        std::int64_t x = a, mod = dk;
        auto lift = [&](std::int64_t res, std::int64_t m) {
            long inv = arith::mod_inverse(static_cast<long>(mod % m), static_cast<long>(m));
            std::int64_t t = ((res - x) % m + m) % m * inv % m;
            x += mod * t;
            mod *= m;
        };
        lift(1, N);
        lift(ell - 1, ell);
        classes.push_back(((x % L) + L) % L);
    }
    std::sort(classes.begin(), classes.end());

    std::vector<std::int64_t> out;
    for (std::int64_t base = 0; static_cast<int>(out.size()) < count; base += L) {
        if (base > (std::int64_t(1) << 60))
            throw Error("primes", "internal", "search range exhausted");
        for (std::int64_t cls : classes) {
            std::int64_t n = base + cls;
            if (n < 3 || !is_prime_u64(static_cast<std::uint64_t>(n))) continue;
            if (!detail::coprime_to_frame(n, K, ls)) continue;
            if (splitting_type(n, K) != SplittingType::inert)
                throw Error("primes", "internal", "inert class sieve is wrong");
            out.push_back(n);
            if (static_cast<int>(out.size()) == count) break;
        }
    }
    return out;
}

}  // namespace heegner
