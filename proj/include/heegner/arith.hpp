#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "heegner/errors.hpp"

namespace heegner {
namespace arith {

// GMP-backed primality (BPSW + Miller-Rabin rounds).  The primes module has
// its own deterministic Miller-Rabin so the two can cross-check each other.
inline bool is_prime(const mpz_class& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 40) > 0;
}
inline bool is_prime(long n) { return is_prime(mpz_class(n)); }

inline mpz_class pollard_rho(const mpz_class& n) {
    // Brent's cycle variant with a deterministic seed schedule.
    for (unsigned long c = 1; c < 64; ++c) {
        mpz_class x = 2, y = 2, d = 1;
        while (d == 1) {
            x = (x * x + c) % n;
            y = (y * y + c) % n;
            y = (y * y + c) % n;
            mpz_class diff = x > y ? x - y : y - x;
            if (diff == 0) break;
            mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
        }
        if (d != 1 && d != n) return d;
    }
    throw Error("quadfield", "factor", "pollard rho failed on " + mpz_class(n).get_str());
}

inline void factor_into(mpz_class n, std::vector<std::pair<mpz_class, unsigned>>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        for (auto& [p, e] : out)
            if (p == n) { ++e; return; }
        out.emplace_back(n, 1);
        return;
    }
    mpz_class d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

// Prime factorization of n >= 1, trial division first, rho for the rest.
inline std::vector<std::pair<mpz_class, unsigned>> factorize(const mpz_class& n_in) {
    if (n_in < 1)
        throw PreconditionError("quadfield", "factor", "factorize needs n >= 1");
    std::vector<std::pair<mpz_class, unsigned>> out;
    mpz_class n = n_in;
    for (long p : {2L, 3L, 5L, 7L, 11L, 13L}) {
        unsigned e = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) { n /= p; ++e; }
        if (e) out.emplace_back(p, e);
    }
    long d = 17;
    while (n > 1 && d <= 100000 && mpz_cmp_ui(n.get_mpz_t(), (unsigned long)d * d) >= 0) {
        unsigned e = 0;
        while (mpz_divisible_ui_p(n.get_mpz_t(), d)) { n /= d; ++e; }
        if (e) out.emplace_back(d, e);
        d += 2;
    }
    if (n > 1) factor_into(n, out);
    return out;
}

inline unsigned long divisor_count(const mpz_class& n) {
    unsigned long t = 1;
    for (const auto& [p, e] : factorize(n)) t *= (e + 1);
    return t;
}

inline int kronecker(const mpz_class& a, const mpz_class& n) {
    return mpz_kronecker(a.get_mpz_t(), n.get_mpz_t());
}
inline int kronecker(long a, long n) { return kronecker(mpz_class(a), mpz_class(n)); }

// g = gcd(a, b) together with x, y such that a x + b y = g.
inline long ext_gcd(long a, long b, long& x, long& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return a >= 0 ? a : -a;
    }
    long x1, y1;
    long g = ext_gcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline long gcd(long a, long b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) { long t = a % b; a = b; b = t; }
    return a;
}

inline long mod_inverse(long a, long m) {
    long x, y;
    long g = ext_gcd(((a % m) + m) % m, m, x, y);
    if (g != 1)
        throw PreconditionError("quadfield", "inverse", "element not invertible");
    return ((x % m) + m) % m;
}

inline mpz_class binomial(long n, long k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

inline mpz_class factorial(long n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

// n! / (n-k)!
inline mpz_class falling_factorial(long n, long k) {
    mpz_class r = 1;
    for (long i = 0; i < k; ++i) r *= (n - i);
    return r;
}

inline mpz_class pow_z(const mpz_class& b, unsigned long e) {
    mpz_class r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

}  // namespace arith
}  // namespace heegner
