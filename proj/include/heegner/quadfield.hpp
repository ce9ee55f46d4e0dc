#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>

#include "heegner/arith.hpp"
#include "heegner/errors.hpp"
#include "heegner/numerics.hpp"

namespace heegner {

// u + v*sqrt(-d_K) with exact rational u, v.
struct FieldElement {
    long d_K = 0;
    mpq_class u, v;

    FieldElement() = default;
    FieldElement(long dk, mpq_class uu, mpq_class vv)
        : d_K(dk), u(std::move(uu)), v(std::move(vv)) {
        u.canonicalize();
        v.canonicalize();
    }

    FieldElement conj() const { return FieldElement(d_K, u, -v); }
    mpq_class norm() const { return u * u + d_K * v * v; }
    mpq_class trace() const { return 2 * u; }
    bool is_rational() const { return v == 0; }

    BallComplex to_ball(const PrecisionContext& ctx) const {
        BallComplex root = ball_sqrt_ui(static_cast<unsigned long>(d_K), ctx);
        BallComplex vi = ball_mul(ball_from(v, ctx), root, ctx);
        BallComplex ur = ball_from(u, ctx);
        return ball_add(ur, ball_mul_i(vi), ctx);
    }

    std::string str() const {
        return u.get_str() + " + " + v.get_str() + "*sqrt(-" + std::to_string(d_K) + ")";
    }
};

namespace detail {
inline void check_same_field(const FieldElement& a, const FieldElement& b) {
    if (a.d_K != b.d_K)
        throw PreconditionError("quadfield", "field_mismatch",
                                "operands lie in different quadratic fields");
}
}  // namespace detail

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) {
    detail::check_same_field(a, b);
    return FieldElement(a.d_K, a.u + b.u, a.v + b.v);
}
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) {
    detail::check_same_field(a, b);
    return FieldElement(a.d_K, a.u - b.u, a.v - b.v);
}
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) {
    detail::check_same_field(a, b);
    return FieldElement(a.d_K, a.u * b.u - a.d_K * a.v * b.v, a.u * b.v + a.v * b.u);
}
inline FieldElement operator*(const FieldElement& a, const mpq_class& s) {
    return FieldElement(a.d_K, a.u * s, a.v * s);
}
inline FieldElement operator*(const FieldElement& a, long s) { return a * mpq_class(s); }
inline FieldElement operator/(const FieldElement& a, const FieldElement& b) {
    detail::check_same_field(a, b);
    mpq_class nb = b.norm();
    if (nb == 0) throw PreconditionError("quadfield", "division", "division by zero element");
    FieldElement num = a * b.conj();
    return FieldElement(a.d_K, num.u / nb, num.v / nb);
}
inline bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.d_K == b.d_K && a.u == b.u && a.v == b.v;
}

// -d0 fundamental and conductor c with D = -c^2 d0.  Requires D < 0 and
// D = 0 or 1 mod 4.
struct FundamentalPart {
    mpz_class conductor;
    mpz_class d0;  // positive; the fundamental discriminant is -d0
};

inline FundamentalPart fundamental_decomposition(const mpz_class& D) {
    if (D >= 0)
        throw PreconditionError("quadfield", "discriminant", "discriminant must be negative");
    mpz_class m = mpz_class(((-D) % 4 + 4) % 4);
    if (m != 0 && m != 3)
        throw PreconditionError("quadfield", "discriminant",
                                "discriminant must be 0 or 1 mod 4");
    mpz_class n = -D;
    mpz_class c0 = 1, n0 = 1;
    for (const auto& [p, e] : arith::factorize(n)) {
        c0 *= arith::pow_z(p, e / 2);
        if (e % 2) n0 *= p;
    }
    if (n0 % 4 == 3) return {c0, n0};
    if (c0 % 2 != 0)
        throw Error("quadfield", "discriminant",
                    "cannot identify fundamental part of " + D.get_str());
    return {c0 / 2, 4 * n0};
}

inline bool is_fundamental(long d_K) {
    if (d_K <= 0) return false;
    try {
        return fundamental_decomposition(mpz_class(-d_K)).conductor == 1;
    } catch (const Error&) {
        return false;
    }
}

// The imaginary quadratic field of discriminant -d_K, -d_K fundamental.
class ImagQuadField {
public:
    explicit ImagQuadField(long d_K) : d_K_(d_K) {
        if (!is_fundamental(d_K))
            throw PreconditionError("quadfield", "fundamental",
                                    "-" + std::to_string(d_K) + " is not a fundamental discriminant");
        u_K_ = d_K == 3 ? 3 : (d_K == 4 ? 2 : 1);
    }

    long d_K() const { return d_K_; }
    int u_K() const { return u_K_; }

    // Standard generator (-d_K + sqrt(-d_K)) / 2 of the maximal order.
    FieldElement tau() const {
        return FieldElement(d_K_, mpq_class(-d_K_, 2), mpq_class(1, 2));
    }

    // Constant coefficient d_K (d_K + 1) / 4 of the minimal quadratic of tau.
    mpz_class tau_norm_z() const {
        mpz_class d(d_K_);
        return d * (d + 1) / 4;
    }

private:
    long d_K_;
    int u_K_;
};

enum class SplittingType { split, inert, ramified };

inline bool heegner_hypothesis(long d_K, long N) {
    if (!is_fundamental(d_K))
        throw PreconditionError("quadfield", "fundamental",
                                "-" + std::to_string(d_K) + " is not a fundamental discriminant");
    if (N < 5)
        throw PreconditionError("quadfield", "level", "level N must be >= 5");
    if (arith::gcd(d_K, N) != 1)
        throw PreconditionError("quadfield", "coprime", "need gcd(N, d_K) = 1");
    for (const auto& [p, e] : arith::factorize(mpz_class(N))) {
        (void)e;
        if (arith::kronecker(mpz_class(-d_K), p) != 1) return false;
    }
    return true;
}

// N = (N, (b + sqrt(-d_K))/2) with O_K / N cyclic of order N.
struct CyclicIdeal {
    long N;
    long b;  // least residue in [0, 2N) with b^2 = -d_K mod 4N
};

inline CyclicIdeal find_cyclic_ideal(long d_K, long N) {
    if (!heegner_hypothesis(d_K, N))
        throw PreconditionError("quadfield", "heegner",
                                "Heegner hypothesis fails for d_K=" + std::to_string(d_K) +
                                    ", N=" + std::to_string(N));
    mpz_class mod = 4 * mpz_class(N);
    for (long b = 0; b < 2 * N; ++b) {
        mpz_class lhs = (mpz_class(b) * b + d_K) % mod;
        if (lhs == 0) return {N, b};
    }
    throw Error("quadfield", "heegner", "no square root of -d_K mod 4N exists");
}

inline SplittingType splitting_type(long q, long d_K) {
    if (q < 3 || q % 2 == 0 || !arith::is_prime(q))
        throw PreconditionError("quadfield", "prime", "q must be an odd prime");
    if (!is_fundamental(d_K))
        throw PreconditionError("quadfield", "fundamental",
                                "-" + std::to_string(d_K) + " is not a fundamental discriminant");
    if (d_K % q == 0) return SplittingType::ramified;
    return arith::kronecker(mpz_class(-d_K), mpz_class(q)) == 1 ? SplittingType::split
                                                                : SplittingType::inert;
}

inline SplittingType splitting_type(long q, const ImagQuadField& K) {
    return splitting_type(q, K.d_K());
}

// Primitive integral quadratic A x^2 + B x + C = 0 satisfied by x, A > 0.
struct QuadraticForm {
    mpz_class A, B, C;
    mpz_class discriminant() const { return B * B - 4 * A * C; }
};

inline QuadraticForm minimal_quadratic(const FieldElement& x) {
    if (x.is_rational())
        throw PreconditionError("quadfield", "rational",
                                "rational elements have no quadratic minimal polynomial");
    // x^2 - tr(x) x + nm(x) = 0, cleared to primitive integers.
    mpq_class Bq = -x.trace(), Cq = x.norm();
    mpz_class L;
    mpz_lcm(L.get_mpz_t(), Bq.get_den().get_mpz_t(), Cq.get_den().get_mpz_t());
    mpz_class A = L;
    mpq_class Bl = Bq * L, Cl = Cq * L;
    mpz_class B = Bl.get_num(), C = Cl.get_num();
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), A.get_mpz_t(), B.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), C.get_mpz_t());
    return {A / g, B / g, C / g};
}

struct ConductorResult {
    mpz_class conductor;
    mpz_class fundamental_d;  // fundamental discriminant is -fundamental_d
};

// Conductor of the order <1, A theta> for a root theta of the primitive form.
inline ConductorResult conductor_of_quadratic(const mpz_class& A, const mpz_class& B,
                                              const mpz_class& C) {
    if (A <= 0)
        throw PreconditionError("quadfield", "form", "leading coefficient must be positive");
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), A.get_mpz_t(), B.get_mpz_t());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), C.get_mpz_t());
    if (g != 1)
        throw PreconditionError("quadfield", "form", "form is not primitive");
    mpz_class D = B * B - 4 * A * C;
    if (D >= 0)
        throw PreconditionError("quadfield", "form", "form is not definite");
    FundamentalPart f = fundamental_decomposition(D);
    return {f.conductor, f.d0};
}

inline ConductorResult conductor_of_quadratic(const QuadraticForm& q) {
    return conductor_of_quadratic(q.A, q.B, q.C);
}

}  // namespace heegner
