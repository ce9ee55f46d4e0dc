#pragma once

#include <string>
#include <vector>

#include "heegner/modforms.hpp"
#include "heegner/numerics.hpp"

namespace heegner {

// Lattice functional J_{0, i inf, P}(f) = (2 pi i)^{k+1} int_0^{i inf} P(z) f(z) dz
// for an integer polynomial P of degree <= k = weight - 2.
struct CuspFunctional {
    std::vector<mpz_class> P;
    long k = 0;
    BallComplex value;
};

// int_{Y0}^inf y^m e^{-2 pi n y} dy
//   = e^{-2 pi n Y0} sum_{s=0}^m m!/(m-s)! Y0^{m-s} (2 pi n)^{-(s+1)}.
inline BallComplex monomial_kernel(long m, long n, const BallComplex& Y0,
                                   const PrecisionContext& ctx) {
    if (m < 0 || n < 1)
        throw PreconditionError("periods", "kernel", "need m >= 0 and n >= 1");
    if (Y0.re.sign() <= 0)
        throw PreconditionError("periods", "kernel", "need Y0 > 0");
    BallComplex two_pi_n = ball_mul(ball_from(2L * n, ctx), ball_pi(ctx), ctx);
    std::vector<BallComplex> ypow{ball_from(1L, ctx)};
    for (long i = 1; i <= m; ++i) ypow.push_back(ball_mul(ypow.back(), Y0, ctx));
    BallComplex inv = ball_div(ball_from(1L, ctx), two_pi_n, ctx);
    std::vector<BallComplex> ipow{inv};
    for (long i = 1; i <= m; ++i) ipow.push_back(ball_mul(ipow.back(), inv, ctx));

    BallComplex sum = ball_from(0L, ctx);
    for (long s = 0; s <= m; ++s) {
        mpz_class coef = arith::falling_factorial(m, s);
        BallComplex term = ball_mul(ball_from(mpq_class(coef), ctx),
                                    ball_mul(ypow[m - s], ipow[s], ctx), ctx);
        sum = ball_add(sum, term, ctx);
    }
    BallComplex damp = ball_exp(ball_neg(ball_mul(two_pi_n, Y0, ctx)), ctx);
    return ball_mul(damp, sum, ctx);
}

// Image of P under the weight-(k+2) Fricke substitution z -> -1/(Nz),
// including the change-of-variables factor:
//   int_0^{i/sqrt N} P f dz = int_{i/sqrt N}^{i inf} Ptilde f dz,
//   Ptilde(w) = -eps N^{k/2} w^k P(-1/(Nw)),
// which is again a polynomial of degree <= k with rational coefficients.
inline std::vector<mpq_class> fricke_transform(const std::vector<mpq_class>& P, int eps, long N,
                                               long k) {
    if (k % 2 != 0)
        throw PreconditionError("periods", "transform", "k must be even");
    std::vector<mpq_class> out(static_cast<size_t>(k) + 1, mpq_class(0));
    for (size_t m = 0; m < P.size(); ++m) {
        if (P[m] == 0) continue;
        // coefficient of w^{k-m}: -eps (-1)^m N^{k/2 - m} c_m
        long e = k / 2 - static_cast<long>(m);
        mpq_class scale;
        if (e >= 0)
            scale = mpq_class(arith::pow_z(mpz_class(N), static_cast<unsigned long>(e)));
        else
            scale = mpq_class(mpz_class(1), arith::pow_z(mpz_class(N), static_cast<unsigned long>(-e)));
        mpq_class c = -eps * P[m] * scale;
        if (m % 2) c = -c;
        out[static_cast<size_t>(k) - m] += c;
    }
    return out;
}

namespace detail {

inline std::vector<mpq_class> to_mpq(const std::vector<mpz_class>& v) {
    std::vector<mpq_class> out;
    out.reserve(v.size());
    for (const auto& x : v) out.emplace_back(x);
    return out;
}

}  // namespace detail

// J_{0, i inf, P}(f) via the Fricke splitting at height i/sqrt(N): both legs
// become integrals over [1/sqrt N, inf) evaluated termwise with
// monomial_kernel.
inline CuspFunctional j_functional(const Newform& f, const std::vector<mpz_class>& P,
                                   const PrecisionContext& ctx) {
    if (!f.fricke)
        throw Error("periods", "fricke_required",
                    "the Fricke eigenvalue must be declared for period functionals");
    long k = f.weight - 2;
    if (static_cast<long>(P.size()) > k + 1)
        throw PreconditionError("periods", "degree", "deg P must be at most weight - 2");

    std::vector<mpq_class> Pq = detail::to_mpq(P);
    std::vector<mpq_class> Pt = fricke_transform(Pq, *f.fricke, f.level, k);
    std::vector<mpq_class> Q(static_cast<size_t>(k) + 1, mpq_class(0));
    for (size_t m = 0; m < Pq.size(); ++m) Q[m] += Pq[m];
    for (size_t m = 0; m < Pt.size(); ++m) Q[m] += Pt[m];

    BallComplex Y0 = ball_div(ball_from(1L, ctx),
                              ball_sqrt_ui(static_cast<unsigned long>(f.level), ctx), ctx);
    Real y_lo(64);
    mpfr_sub(y_lo.raw(), Y0.re.raw(), Y0.rad.raw(), MPFR_RNDD);

    // Rotated coefficients i^m Q_m, and sum(|Q_m|) bounds per power for the
    // truncation rule.
    std::vector<BallComplex> rot;
    for (size_t m = 0; m < Q.size(); ++m) {
        BallComplex c = ball_from(Q[m], ctx);
        for (size_t i = 0; i < m % 4; ++i) c = ball_mul_i(c);
        rot.push_back(c);
    }

    BallComplex acc = ball_from(0L, ctx);
    bool done = false;
    Mag tail;
    for (long n = 1; n <= f.M(); ++n) {
        BallComplex inner = ball_from(0L, ctx);
        Mag kmag;
        for (long m = 0; m <= k; ++m) {
            if (Q[static_cast<size_t>(m)] == 0) continue;
            BallComplex km = monomial_kernel(m, n, Y0, ctx);
            BallComplex prod = ball_mul(rot[static_cast<size_t>(m)], km, ctx);
            kmag.add(ball_abs_upper(prod));
            inner = ball_add(inner, prod, ctx);
        }
        // Bound on all terms from index n+1 on: the same inner sum decays at
        // least like e^{-2 pi y} per index.
        Mag bound = kmag;
        {
            Mag u;
            detail::smooth_majorant_upper(u, f, n + 1);
            bound.mul(u);
            Real e(64);
            mpfr_const_pi(e.raw(), MPFR_RNDD);
            mpfr_mul_si(e.raw(), e.raw(), 2, MPFR_RNDD);
            mpfr_mul(e.raw(), e.raw(), y_lo.raw(), MPFR_RNDD);
            mpfr_neg(e.raw(), e.raw(), MPFR_RNDU);
            mpfr_exp(e.raw(), e.raw(), MPFR_RNDU);
            Mag dampu;
            mpfr_set(dampu.raw(), e.raw(), MPFR_RNDU);
            bound.mul(dampu);
        }
        acc = ball_add(acc, ball_mul(ball_from(f.a(n), ctx), inner, ctx), ctx);
        if (detail::geometric_tail(bound, detail::majorant_ratio_upper(f, n + 1, y_lo),
                                   ctx.target_eps, tail)) {
            done = true;
            break;
        }
    }
    if (!done)
        throw Error("periods", "insufficient_coefficients",
                    "series tail does not fit target_eps with " + std::to_string(f.M()) +
                        " coefficients");
    acc.rad.add(tail);

    // (2 pi i)^{k+1} * i * acc
    BallComplex two_pi_i = ball_mul_i(ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx));
    BallComplex scale = ball_mul_i(ball_from(1L, ctx));
    for (long i = 0; i < k + 1; ++i) scale = ball_mul(scale, two_pi_i, ctx);

    CuspFunctional out;
    out.P = P;
    out.k = k;
    out.value = ball_mul(scale, acc, ctx);
    return out;
}

}  // namespace heegner
