#pragma once

#include <string>
#include <vector>

#include "heegner/aj.hpp"
#include "heegner/isogeny.hpp"

namespace heegner {

namespace detail {

inline void check_pq(const ImagQuadField& K, const LevelStructure& ls, long p, long q) {
    check_odd_prime(p, "p");
    check_odd_prime(q, "q");
    if (p <= q)
        throw PreconditionError("asym", "pair", "need p > q");
    if (splitting_type(q, K) != SplittingType::inert)
        throw PreconditionError("asym", "pair", "q must be inert in K");
    mpz_class M = ls.ctd_norm(K);
    for (long x : {p, q}) {
        if (K.d_K() % x == 0 || ls.c % x == 0 ||
            mpz_divisible_ui_p(M.get_mpz_t(), static_cast<unsigned long>(x)))
            throw PreconditionError("asym", "pair",
                                    "p, q must be coprime to c, d_K and |c tau + d|^2");
    }
}

// Re(gamma(tau)) as an exact rational: (ac|tau|^2 - bc d_K + bd - d_K/2) / M.
inline mpq_class re_gamma_tau(const ImagQuadField& K, const LevelStructure& ls) {
    mpq_class num = mpq_class(ls.a) * ls.c * mpq_class(K.tau_norm_z()) -
                    mpq_class(ls.b) * ls.c * K.d_K() + mpq_class(ls.b) * ls.d -
                    mpq_class(K.d_K(), 2);
    return num / mpq_class(ls.ctd_norm(K));
}

}  // namespace detail

// The closed form of I = int_Y^inf (y^2 - Y^2)^r e^{-2 pi y} dy obtained by
// unfolding the power and integrating by parts, parameterized by
// gamma = pq or p/q rather than by Y directly.
inline BallComplex I_closed(const ImagQuadField& K, const LevelStructure& ls, long r, long p,
                            long q, const P1& beta, const PrecisionContext& ctx) {
    detail::check_pq(K, ls, p, q);
    long k = 2 * r;
    mpq_class gamma = beta.inf ? mpq_class(p) * q : mpq_class(p, q);
    mpz_class M = ls.ctd_norm(K);

    BallComplex root = ball_sqrt_ui(static_cast<unsigned long>(K.d_K()), ctx);
    BallComplex c0 = ball_mul(root, ball_from(mpq_class(mpz_class(1), mpz_class(2) * M), ctx), ctx);
    BallComplex two_pi_g = ball_mul(ball_from(2 * gamma, ctx), ball_pi(ctx), ctx);

    std::vector<BallComplex> c0pow;  // c0^0 .. c0^k
    c0pow.push_back(ball_from(1L, ctx));
    for (long i = 1; i <= k; ++i) c0pow.push_back(ball_mul(c0pow.back(), c0, ctx));
    std::vector<BallComplex> ipow;  // (2 pi gamma)^{-1} ..
    ipow.push_back(ball_div(ball_from(1L, ctx), two_pi_g, ctx));
    for (long i = 1; i <= k; ++i) ipow.push_back(ball_mul(ipow.back(), ipow.front(), ctx));

    BallComplex sum = ball_from(0L, ctx);
    for (long j = 0; j <= r; ++j) {
        for (long s = 0; s <= 2 * j; ++s) {
            mpz_class coef = arith::binomial(r, j) * arith::falling_factorial(2 * j, s);
            if ((r - j) % 2) coef = -coef;
            BallComplex term = ball_mul(ball_from(mpq_class(coef), ctx),
                                        ball_mul(c0pow[k - s], ipow[s], ctx), ctx);
            sum = ball_add(sum, term, ctx);
        }
    }
    // gamma^{k+1} e^{-gamma pi sqrt(d_K) / M}
    BallComplex expo = ball_neg(
        ball_mul(ball_mul(ball_from(gamma / mpq_class(M), ctx), ball_pi(ctx), ctx), root, ctx));
    BallComplex damp = ball_exp(expo, ctx);
    mpq_class gk = 1;
    for (long i = 0; i <= k; ++i) gk *= gamma;
    return ball_mul(ball_from(gk, ctx), ball_mul(damp, sum, ctx), ctx);
}

// The quantities attached to an explicit degree-pq isogeny at beta.
struct AsymptoticDatum {
    long p = 0, q = 0;
    P1 beta;
    mpq_class gamma;       // pq or p/q
    long kappa = 1;        // 1 or q
    mpq_class X_exact;     // Re tau^t, a rational
    mpq_class Y_coeff;     // Im tau^t = Y_coeff sqrt(d_K)
    Real X, Y;
    BallComplex I;
    BallComplex J;
    BallComplex J_mag;     // |J| as a real ball
    long i_power = 0;      // phase of J: i^{i_power} e^{2 pi i phase_frac}
    mpq_class phase_frac;  // X mod 1
};

inline AsymptoticDatum datum(const ImagQuadField& K, const LevelStructure& ls, long r, long p,
                             long q, const P1& beta, const PrecisionContext& ctx) {
    detail::check_pq(K, ls, p, q);
    long k = 2 * r;
    mpz_class M = ls.ctd_norm(K);

    AsymptoticDatum d;
    d.p = p;
    d.q = q;
    d.beta = beta.inf ? beta : P1::of(beta.value, q);
    d.gamma = beta.inf ? mpq_class(p) * q : mpq_class(p, q);
    d.kappa = beta.inf ? 1 : q;
    mpq_class re = detail::re_gamma_tau(K, ls);
    if (beta.inf)
        d.X_exact = re * p * q;
    else
        d.X_exact = (re + d.beta.value) * mpq_class(p, q);
    d.Y_coeff = d.gamma / (2 * mpq_class(M));

    d.X = Real::of(d.X_exact, ctx.bits);
    d.Y = Real::of(d.Y_coeff, ctx.bits) * sqrt(Real::of(mpz_class(K.d_K()), ctx.bits));
    d.I = I_closed(K, ls, r, p, q, beta, ctx);

    // |J| = 2^{k+1} pi^{r+1} M^r (pq)^r kappa^k m_{k,k}^2 I.
    mpz_class m = m_factor(ls.N, k, k);
    mpq_class coef = mpq_class(arith::pow_z(mpz_class(2), static_cast<unsigned long>(k + 1))) *
                     mpq_class(arith::pow_z(M, static_cast<unsigned long>(r))) *
                     mpq_class(arith::pow_z(mpz_class(p) * q, static_cast<unsigned long>(r))) *
                     mpq_class(arith::pow_z(mpz_class(d.kappa), static_cast<unsigned long>(k))) *
                     mpq_class(m * m);
    BallComplex pi_pow = ball_from(1L, ctx);
    for (long i = 0; i < r + 1; ++i) pi_pow = ball_mul(pi_pow, ball_pi(ctx), ctx);
    d.J_mag = ball_mul(ball_from(coef, ctx), ball_mul(pi_pow, d.I, ctx), ctx);

    d.i_power = ((r % 4) + 4) % 4;
    mpq_class fl(d.X_exact.get_num() / d.X_exact.get_den());
    d.phase_frac = d.X_exact - fl;
    if (d.phase_frac < 0) d.phase_frac += 1;

    BallComplex phase = ball_exp_2pi_i(d.phase_frac, ctx);
    d.J = ball_mul(d.J_mag, phase, ctx);
    for (long i = 0; i < d.i_power; ++i) d.J = ball_mul_i(d.J);
    return d;
}

// P(X) = sum_{j,s} (-1)^{r-j} C(r,j) (2j)!/(2j-s)! (sqrt(d_K)/2M)^{k-s}
//        (2 pi)^{-(s+1)} X^{k-s}, so that I = e^{-gamma pi sqrt(d_K)/M} P(gamma).
struct PPolynomial {
    long k = 0;
    long d_K = 0;
    mpz_class M;                // |c tau + d|^2
    std::vector<mpz_class> T;   // T[s] = sum_j (-1)^{r-j} C(r,j) (2j)!/(2j-s)!

    long degree() const {
        for (long s = 0; s <= k; ++s)
            if (T[s] != 0) return k - s;
        return -1;
    }

    BallComplex coefficient(long s, const PrecisionContext& ctx) const {
        BallComplex root = ball_sqrt_ui(static_cast<unsigned long>(d_K), ctx);
        BallComplex c0 = ball_mul(root, ball_from(mpq_class(mpz_class(1), mpz_class(2) * M), ctx), ctx);
        BallComplex c0p = ball_from(1L, ctx);
        for (long i = 0; i < k - s; ++i) c0p = ball_mul(c0p, c0, ctx);
        BallComplex inv2pi = ball_div(ball_from(1L, ctx),
                                      ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx), ctx);
        BallComplex ip = ball_from(1L, ctx);
        for (long i = 0; i < s + 1; ++i) ip = ball_mul(ip, inv2pi, ctx);
        return ball_mul(ball_from(mpq_class(T[s]), ctx), ball_mul(c0p, ip, ctx), ctx);
    }

    BallComplex eval(const mpq_class& x, const PrecisionContext& ctx) const {
        BallComplex acc = ball_from(0L, ctx);
        BallComplex xb = ball_from(x, ctx);
        for (long s = 0; s <= k; ++s) {
            if (T[s] == 0) continue;
            BallComplex xp = ball_from(1L, ctx);
            for (long i = 0; i < k - s; ++i) xp = ball_mul(xp, xb, ctx);
            acc = ball_add(acc, ball_mul(coefficient(s, ctx), xp, ctx), ctx);
        }
        return acc;
    }
};

inline PPolynomial p_polynomial(const ImagQuadField& K, const LevelStructure& ls, long r) {
    if (r < 0) throw PreconditionError("asym", "weight", "need r >= 0");
    PPolynomial P;
    P.k = 2 * r;
    P.d_K = K.d_K();
    P.M = ls.ctd_norm(K);
    P.T.assign(P.k + 1, 0);
    for (long j = 0; j <= r; ++j) {
        for (long s = 0; s <= 2 * j; ++s) {
            mpz_class coef = arith::binomial(r, j) * arith::falling_factorial(2 * j, s);
            if ((r - j) % 2) coef = -coef;
            P.T[s] += coef;
        }
    }
    return P;
}

// |J_inf / J_beta| by the closed formula
//   q^{-k} P(pq)/P(p/q) e^{-pi sqrt(d_K) (q^2-1) p / (q M)}.
inline BallComplex ratio_J_formula(const ImagQuadField& K, const LevelStructure& ls, long r,
                                   long p, long q, const P1& beta,
                                   const PrecisionContext& ctx) {
    if (beta.inf)
        throw PreconditionError("asym", "ratio", "beta must be finite");
    detail::check_pq(K, ls, p, q);
    long k = 2 * r;
    PPolynomial P = p_polynomial(K, ls, r);
    BallComplex Ppq = P.eval(mpq_class(p) * q, ctx);
    BallComplex Ppoq = P.eval(mpq_class(p, q), ctx);
    if (ball_abs_lower(Ppoq).sign() <= 0)
        throw Error("asym", "domain", "P(p/q) is not positively bounded away from zero");

    mpz_class M = ls.ctd_norm(K);
    mpq_class expo_coef = mpq_class(mpz_class(q) * q - 1) * p / (mpq_class(q) * mpq_class(M));
    BallComplex root = ball_sqrt_ui(static_cast<unsigned long>(K.d_K()), ctx);
    BallComplex expo =
        ball_neg(ball_mul(ball_mul(ball_from(expo_coef, ctx), ball_pi(ctx), ctx), root, ctx));
    BallComplex damp = ball_exp(expo, ctx);

    mpq_class qk(1);
    for (long i = 0; i < k; ++i) qk /= q;
    return ball_mul(ball_from(qk, ctx), ball_mul(ball_div(Ppq, Ppoq, ctx), damp, ctx), ctx);
}

// Same ratio assembled from the two |J| values.
inline BallComplex ratio_J_direct(const ImagQuadField& K, const LevelStructure& ls, long r,
                                  long p, long q, const P1& beta,
                                  const PrecisionContext& ctx) {
    if (beta.inf)
        throw PreconditionError("asym", "ratio", "beta must be finite");
    AsymptoticDatum dinf = datum(K, ls, r, p, q, P1::infinity(), ctx);
    AsymptoticDatum dbeta = datum(K, ls, r, p, q, beta, ctx);
    return ball_div(dinf.J_mag, dbeta.J_mag, ctx);
}

// The relative-error bound c e^{-gamma pi sqrt(d_K) / |c tau + d|^2} on
// |AJ_scaled - J| / |J|, rounded up.
inline Real lem_est_bound(const ImagQuadField& K, const LevelStructure& ls, long p, long q,
                          const P1& beta, const Real& c_majorant) {
    long wp = 64;
    mpq_class gamma = beta.inf ? mpq_class(p) * q : mpq_class(p, q);
    mpq_class coef = gamma / mpq_class(ls.ctd_norm(K));
    Real x(wp);
    mpfr_set_q(x.raw(), coef.get_mpq_t(), MPFR_RNDD);
    Real pi_lo(wp);
    mpfr_const_pi(pi_lo.raw(), MPFR_RNDD);
    Real rt(wp);
    mpfr_sqrt_ui(rt.raw(), static_cast<unsigned long>(K.d_K()), MPFR_RNDD);
    mpfr_mul(x.raw(), x.raw(), pi_lo.raw(), MPFR_RNDD);
    mpfr_mul(x.raw(), x.raw(), rt.raw(), MPFR_RNDD);
    mpfr_neg(x.raw(), x.raw(), MPFR_RNDU);
    Real out(wp);
    mpfr_exp(out.raw(), x.raw(), MPFR_RNDU);
    mpfr_mul(out.raw(), out.raw(), c_majorant.raw(), MPFR_RNDU);
    return out;
}

}  // namespace heegner
