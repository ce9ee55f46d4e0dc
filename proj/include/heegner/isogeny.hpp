#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "heegner/quadfield.hpp"

namespace heegner {

// A point of P^1(F_q): either the distinguished point at infinity or a least
// nonnegative residue.
struct P1 {
    long value = 0;
    bool inf = false;

    static P1 infinity() { return P1{0, true}; }
    static P1 of(long v, long q) { return P1{((v % q) + q) % q, false}; }

    std::string str() const { return inf ? "inf" : std::to_string(value); }

    friend bool operator==(const P1& a, const P1& b) {
        return a.inf == b.inf && (a.inf || a.value == b.value);
    }
};

// gamma = (a b; c d) in SL_2(Z) whose bottom row reduces mod N to the pair
// defining the level structure t = (c tau + d)/N.
struct LevelStructure {
    long a = 1, b = 0, c = 1, d = 1;
    long N = 5;

    long det() const { return a * d - b * c; }

    // |c tau + d|^2 = c^2 d_K(d_K+1)/4 - c d d_K + d^2, a positive integer.
    mpz_class ctd_norm(const ImagQuadField& K) const {
        mpz_class m = mpz_class(c) * c * K.tau_norm_z() - mpz_class(c) * d * K.d_K() +
                      mpz_class(d) * d;
        if (m <= 0)
            throw Error("isogeny", "internal", "|c tau + d|^2 must be positive");
        return m;
    }
};

// Completes (c, d) mod N to an SL_2(Z) matrix.  c, d are adjusted by
// multiples of N only if gcd(c, d) > 1; among all completions the one with
// the smallest |b| (then |a|) is chosen.
inline LevelStructure level_structure_from_t(long c, long d, long N) {
    if (N < 5)
        throw PreconditionError("isogeny", "level", "level N must be >= 5");
    if (arith::gcd(arith::gcd(c, d), N) != 1)
        throw PreconditionError("isogeny", "level", "gcd(c, d, N) must be 1");
    if (((c % N) + N) % N == 0)
        throw PreconditionError("isogeny", "level", "c must be nonzero mod N");

    long cc = c, dd = d;
    if (arith::gcd(cc, dd) != 1) {
        bool found = false;
        for (long s = 1; s <= 64 && !found; ++s) {
            for (long i = -s; i <= s && !found; ++i) {
                long jabs = s - (i < 0 ? -i : i);
                for (long j : {jabs, -jabs}) {
                    if (arith::gcd(c + i * N, d + j * N) == 1) {
                        cc = c + i * N;
                        dd = d + j * N;
                        found = true;
                        break;
                    }
                    if (jabs == 0) break;
                }
            }
        }
        if (!found)
            throw Error("isogeny", "internal", "could not make (c, d) coprime");
    }

    // Particular solution of a d - b c = 1, then minimize over a += t c,
    // b += t d.
    long a0, mb0;
    arith::ext_gcd(dd, cc, a0, mb0);  // a0*d + mb0*c = 1
    long b0 = -mb0;

    auto pick = [&](long t) {
        return std::pair<long, long>{a0 + t * cc, b0 + t * dd};
    };
    long best_t = 0;
    if (dd != 0) {
        // t near -b0 / d minimizes |b|.
        long t_guess = static_cast<long>(std::llround(-static_cast<double>(b0) / dd));
        bool have = false;
        std::pair<long, long> best{0, 0};
        for (long t = t_guess - 2; t <= t_guess + 2; ++t) {
            auto [aa, bb] = pick(t);
            auto key = [&](long x, long y, long tt) {
                return std::tuple<long, long, long>{x < 0 ? -x : x, y < 0 ? -y : y, tt};
            };
            if (!have || key(bb, aa, t) < key(best.second, best.first, best_t)) {
                best = {aa, bb};
                best_t = t;
                have = true;
            }
        }
    } else {
        // d = 0 forces c = +-1 and b = -1/c; minimize |a| = 0.
        best_t = -a0 / cc;
    }
    auto [aa, bb] = pick(best_t);

    LevelStructure ls{aa, bb, cc, dd, N};
    if (ls.det() != 1)
        throw Error("isogeny", "internal", "SL2 completion failed");
    return ls;
}

// gamma(tau) = (a tau + b) / (c tau + d), exactly in K.
inline FieldElement gamma_tau(const ImagQuadField& K, const LevelStructure& ls) {
    FieldElement tau = K.tau();
    FieldElement num = tau * ls.a + FieldElement(K.d_K(), ls.b, 0);
    FieldElement den = tau * ls.c + FieldElement(K.d_K(), ls.d, 0);
    return num / den;
}

// A CM point tau' together with the bookkeeping of the explicit isogeny that
// produced it.
struct CMPoint {
    FieldElement value;
    long degree = 1;
    mpz_class conductor = 1;
    long kappa = 1;            // 1 for beta = inf, q otherwise
    mpq_class gamma_scale;     // Im(value) = gamma_scale * sqrt(d_K) / (2 |c tau + d|^2)
    P1 beta;
    std::optional<long> p;
    long q = 0;
    mpz_class ctd_norm = 1;    // 1 when no level structure is involved

    Real imag(const PrecisionContext& ctx) const {
        return Real::of(value.v, ctx.bits) * sqrt(Real::of(mpz_class(value.d_K), ctx.bits));
    }
};

namespace detail {

inline void check_odd_prime(long q, const char* who) {
    if (q < 3 || q % 2 == 0 || !arith::is_prime(q))
        throw PreconditionError("isogeny", "prime", std::string(who) + " must be an odd prime");
}

inline mpz_class conductor_of(const FieldElement& x, long expect_fundamental) {
    QuadraticForm f = minimal_quadratic(x);
    ConductorResult c = conductor_of_quadratic(f);
    if (c.fundamental_d != expect_fundamental)
        throw Error("isogeny", "conductor",
                    "fundamental discriminant mismatch for " + x.str());
    return c.conductor;
}

}  // namespace detail

// The q+1 lattice points q*tau (beta = inf) and (tau + beta)/q.
inline CMPoint tau_q_beta(const ImagQuadField& K, long q, const P1& beta) {
    detail::check_odd_prime(q, "q");
    if (K.d_K() % q == 0)
        throw PreconditionError("isogeny", "coprime", "q must be coprime to d_K");
    FieldElement tau = K.tau();
    CMPoint pt;
    pt.q = q;
    pt.degree = q;
    pt.beta = beta.inf ? beta : P1::of(beta.value, q);
    if (beta.inf) {
        pt.value = tau * q;
        pt.kappa = 1;
        pt.gamma_scale = mpq_class(q);
    } else {
        pt.value = (tau + FieldElement(K.d_K(), pt.beta.value, 0)) * mpq_class(1, q);
        pt.kappa = q;
        pt.gamma_scale = mpq_class(1, q);
    }
    pt.conductor = detail::conductor_of(pt.value, K.d_K());
    pt.ctd_norm = 1;
    return pt;
}

// Level-structure twist: q gamma(tau) or (gamma(tau) + beta)/q.
inline CMPoint tau_t(const ImagQuadField& K, const LevelStructure& ls, long q, const P1& beta) {
    detail::check_odd_prime(q, "q");
    if (K.d_K() % q == 0 || ls.c % q == 0)
        throw PreconditionError("isogeny", "coprime", "q must be coprime to c and d_K");
    FieldElement g = gamma_tau(K, ls);
    CMPoint pt;
    pt.q = q;
    pt.degree = q;
    pt.beta = beta.inf ? beta : P1::of(beta.value, q);
    if (beta.inf) {
        pt.value = g * q;
        pt.kappa = 1;
        pt.gamma_scale = mpq_class(q);
    } else {
        pt.value = (g + FieldElement(K.d_K(), pt.beta.value, 0)) * mpq_class(1, q);
        pt.kappa = q;
        pt.gamma_scale = mpq_class(1, q);
    }
    pt.ctd_norm = ls.ctd_norm(K);
    pt.conductor = detail::conductor_of(pt.value, K.d_K());
    if (splitting_type(q, K) == SplittingType::inert && pt.conductor != q)
        throw Error("isogeny", "conductor",
                    "inert q should give conductor q at " + pt.value.str());
    return pt;
}

// Degree-pq point p * tau^t_{q, beta}.
inline CMPoint tau_pq_t(const ImagQuadField& K, const LevelStructure& ls, long p, long q,
                        const P1& beta) {
    detail::check_odd_prime(p, "p");
    detail::check_odd_prime(q, "q");
    if (p == q)
        throw PreconditionError("isogeny", "primes", "p and q must be distinct");
    mpz_class M = ls.ctd_norm(K);
    if (K.d_K() % p == 0 || ls.c % p == 0 || ls.N % p == 0 ||
        mpz_divisible_ui_p(M.get_mpz_t(), static_cast<unsigned long>(p)))
        throw PreconditionError("isogeny", "coprime",
                                "p must be coprime to c, d_K, N and |c tau + d|^2");
    CMPoint pt = tau_t(K, ls, q, beta);
    pt.value = pt.value * p;
    pt.p = p;
    pt.degree = p * q;
    pt.gamma_scale = pt.gamma_scale * p;  // pq for inf, p/q otherwise
    pt.conductor = detail::conductor_of(pt.value, K.d_K());
    if (splitting_type(q, K) == SplittingType::inert && pt.conductor != mpz_class(p) * q)
        throw Error("isogeny", "conductor",
                    "expected conductor pq at " + pt.value.str());
    return pt;
}

// Matches the kernel of the twisted isogeny at beta with the plain lattice
// family: the composite with multiplication by (c tau + d)^{-1} has the same
// kernel as the plain isogeny at beta'.
inline P1 kernel_match(const LevelStructure& ls, long q, const P1& beta) {
    detail::check_odd_prime(q, "q");
    if (ls.c % q == 0)
        throw PreconditionError("isogeny", "kernel", "q must not divide c");
    long a = ((ls.a % q) + q) % q, b = ((ls.b % q) + q) % q;
    long c = ((ls.c % q) + q) % q, d = ((ls.d % q) + q) % q;
    if (beta.inf) return P1::of(arith::mod_inverse(c, q) * d % q, q);
    long t = (a + c * (beta.value % q)) % q;
    if (t == 0) return P1::infinity();
    long num = (b + d * (beta.value % q)) % q;
    return P1::of(arith::mod_inverse(t, q) * num % q, q);
}

struct IsogenyClassSummary {
    long q = 0;
    SplittingType type = SplittingType::inert;
    std::vector<std::pair<P1, mpz_class>> points;  // (beta, conductor), beta = inf first
    long conductor_one_count = 0;
    long conductor_q_count = 0;
    // (q+1)/u_K classes for inert q, (q-1)/u_K conductor-q classes for split
    // q; absent when u_K does not divide.
    std::optional<long> class_count;
};

inline IsogenyClassSummary enumerate_isogeny_classes(const ImagQuadField& K, long q) {
    detail::check_odd_prime(q, "q");
    if (splitting_type(q, K) == SplittingType::ramified)
        throw PreconditionError("isogeny", "ramified", "ramified q not covered");
    IsogenyClassSummary s;
    s.q = q;
    s.type = splitting_type(q, K);
    s.points.emplace_back(P1::infinity(), tau_q_beta(K, q, P1::infinity()).conductor);
    for (long b = 0; b < q; ++b)
        s.points.emplace_back(P1::of(b, q), tau_q_beta(K, q, P1::of(b, q)).conductor);
    for (const auto& [beta, cond] : s.points) {
        if (cond == 1) ++s.conductor_one_count;
        if (cond == q) ++s.conductor_q_count;
    }
    long classes = s.type == SplittingType::inert ? q + 1 : q - 1;
    if (classes % K.u_K() == 0) s.class_count = classes / K.u_K();
    return s;
}

}  // namespace heegner
