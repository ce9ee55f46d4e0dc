#pragma once

#include <optional>
#include <string>
#include <utility>

#include "heegner/isogeny.hpp"
#include "heegner/modforms.hpp"
#include "heegner/numerics.hpp"

namespace heegner {

// m_{k,k'} = (2N)^k k! 2^{k'} k'!
inline mpz_class m_factor(long N, long k, long kp) {
    return arith::pow_z(mpz_class(2 * N), static_cast<unsigned long>(k)) * arith::factorial(k) *
           arith::pow_z(mpz_class(2), static_cast<unsigned long>(kp)) * arith::factorial(kp);
}

// E(r, n, Y) = int_Y^inf (y^2 - Y^2)^r e^{-2 pi n y} dy, via the closed form
//   e^{-2 pi n Y} sum_{j<=r} sum_{s<=2j} (-1)^{r-j} C(r,j) (2j)!/(2j-s)!
//                  Y^{2r-s} (2 pi n)^{-(s+1)}.
inline BallComplex kernel_integral_E(long r, long n, const BallComplex& Y,
                                     const PrecisionContext& ctx) {
    if (r < 0 || n < 1)
        throw PreconditionError("aj", "kernel", "need r >= 0 and n >= 1");
    if (Y.re.sign() < 0)
        throw PreconditionError("aj", "kernel", "need Y >= 0");

    BallComplex two_pi_n = ball_mul(ball_from(2L * n, ctx), ball_pi(ctx), ctx);

    std::vector<BallComplex> ypow;  // Y^0 .. Y^{2r}; 0^0 = 1
    ypow.push_back(ball_from(1L, ctx));
    for (long i = 1; i <= 2 * r; ++i) ypow.push_back(ball_mul(ypow.back(), Y, ctx));

    std::vector<BallComplex> ipow;  // (2 pi n)^{-1} .. (2 pi n)^{-(2r+1)}
    ipow.push_back(ball_div(ball_from(1L, ctx), two_pi_n, ctx));
    for (long i = 1; i <= 2 * r; ++i) ipow.push_back(ball_mul(ipow.back(), ipow.front(), ctx));

    BallComplex sum = ball_from(0L, ctx);
    for (long j = 0; j <= r; ++j) {
        for (long s = 0; s <= 2 * j; ++s) {
            mpz_class coef = arith::binomial(r, j) * arith::falling_factorial(2 * j, s);
            if ((r - j) % 2) coef = -coef;
            BallComplex term = ball_mul(ball_from(mpq_class(coef), ctx),
                                        ball_mul(ypow[2 * r - s], ipow[s], ctx), ctx);
            sum = ball_add(sum, term, ctx);
        }
    }
    BallComplex damp = ball_exp(ball_neg(ball_mul(two_pi_n, Y, ctx)), ctx);
    return ball_mul(damp, sum, ctx);
}

inline BallComplex kernel_integral_E(long r, long n, const Real& Y,
                                     const PrecisionContext& ctx) {
    return kernel_integral_E(r, n, ball_exact(Real(Y), Real::of(0L, ctx.bits)), ctx);
}

// The oriented line integral from i*infinity down to tau' of
// (z - tau')^r (z - conj tau')^r f(z) dz, evaluated termwise on the vertical
// path as -i (-1)^r sum_n a_n e^{2 pi i n X} E(r, n, Y).
inline BallComplex heegner_line_integral(const Newform& f, const CMPoint& P,
                                         const PrecisionContext& ctx, double y_min = 0.05) {
    long r = f.r();
    const mpq_class& X = P.value.u;
    BallComplex Y = ball_mul(ball_from(P.value.v, ctx),
                             ball_sqrt_ui(static_cast<unsigned long>(P.value.d_K), ctx), ctx);

    Real y_lo(64);
    mpfr_sub(y_lo.raw(), Y.re.raw(), Y.rad.raw(), MPFR_RNDD);
    if (mpfr_cmp_d(y_lo.raw(), y_min) < 0)
        throw PreconditionError("aj", "height", "Im tau' below minimum height");

    BallComplex acc = ball_from(0L, ctx);
    BallComplex En = kernel_integral_E(r, 1, Y, ctx);
    Mag tail;
    bool done = false;
    for (long n = 1; n <= f.M(); ++n) {
        BallComplex phase = ball_exp_2pi_i(X * n, ctx);
        BallComplex term = ball_mul(ball_from(f.a(n), ctx), ball_mul(phase, En, ctx), ctx);
        acc = ball_add(acc, term, ctx);

        BallComplex Enext = kernel_integral_E(r, n + 1, Y, ctx);
        Mag bound;
        detail::smooth_majorant_upper(bound, f, n + 1);
        bound.mul(ball_abs_upper(Enext));
        if (detail::geometric_tail(bound, detail::majorant_ratio_upper(f, n + 1, y_lo),
                                   ctx.target_eps, tail)) {
            done = true;
            break;
        }
        En = std::move(Enext);
    }
    if (!done)
        throw Error("aj", "insufficient_coefficients",
                    "series tail does not fit target_eps with " + std::to_string(f.M()) +
                        " coefficients");
    acc.rad.add(tail);
    // -i (-1)^r
    BallComplex rotated = ball_neg(ball_mul_i(acc));
    if (r % 2) rotated = ball_neg(rotated);
    return rotated;
}

// The scalar in front of the line integral:
//   (-2 sqrt(-d_K))^r d_phi^k (2 pi i)^{r+1} m_{k,k}^2 / (tau' - conj tau')^r.
// With tau' - conj tau' = 2 i v sqrt(d_K), the d_K and most 2-powers cancel,
// leaving (-1)^r i^{r+1} (2 pi)^{r+1} d_phi^k m_{k,k}^2 / v^r.
struct AJConstant {
    mpq_class rational;
    long i_power = 0;    // exponent of i, reduced mod 4
    long pi_power = 0;   // exponent of (2 pi)

    BallComplex value(const PrecisionContext& ctx) const {
        BallComplex two_pi = ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx);
        BallComplex acc = ball_from(rational, ctx);
        for (long i = 0; i < pi_power; ++i) acc = ball_mul(acc, two_pi, ctx);
        for (long i = 0; i < ((i_power % 4) + 4) % 4; ++i) acc = ball_mul_i(acc);
        return acc;
    }
};

inline AJConstant aj_constant(long N, long d_phi, long r, const mpq_class& v_im) {
    if (r < 1) throw PreconditionError("aj", "weight", "need r >= 1");
    if (d_phi < 1 || v_im <= 0)
        throw PreconditionError("aj", "constant", "need d_phi >= 1 and Im tau' > 0");
    long k = 2 * r;
    mpz_class m = m_factor(N, k, k);
    mpq_class rat = mpq_class(arith::pow_z(mpz_class(d_phi), static_cast<unsigned long>(k))) *
                    mpq_class(m * m);
    mpq_class vr = 1;
    for (long i = 0; i < r; ++i) vr *= v_im;
    rat /= vr;
    if (r % 2) rat = -rat;
    return AJConstant{rat, (r + 1) % 4, r + 1};
}

// Same scalar straight from the displayed formula, as a numeric ball; used to
// cross-check the exact simplification.
inline BallComplex aj_constant_direct(const ImagQuadField& K, long N, long d_phi, long r,
                                      const FieldElement& tau_prime,
                                      const PrecisionContext& ctx) {
    long k = 2 * r;
    BallComplex sqrt_md = ball_mul_i(ball_sqrt_ui(static_cast<unsigned long>(K.d_K()), ctx));
    BallComplex base = ball_mul(ball_from(-2L, ctx), sqrt_md, ctx);
    BallComplex num = ball_from(1L, ctx);
    for (long i = 0; i < r; ++i) num = ball_mul(num, base, ctx);
    num = ball_mul(num, ball_from(mpq_class(arith::pow_z(mpz_class(d_phi),
                                                         static_cast<unsigned long>(k))),
                                  ctx),
                   ctx);
    BallComplex two_pi_i = ball_mul_i(ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx));
    for (long i = 0; i < r + 1; ++i) num = ball_mul(num, two_pi_i, ctx);
    mpz_class m = m_factor(N, k, k);
    num = ball_mul(num, ball_from(mpq_class(m * m), ctx), ctx);

    BallComplex tp = tau_prime.to_ball(ctx);
    BallComplex diff = ball_sub(tp, tau_prime.conj().to_ball(ctx), ctx);
    BallComplex den = ball_from(1L, ctx);
    for (long i = 0; i < r; ++i) den = ball_mul(den, diff, ctx);
    return ball_div(num, den, ctx);
}

// One distinguished representative of the Abel-Jacobi value, with its parts.
struct AJResult {
    BallComplex integral;
    AJConstant constant;
    BallComplex representative;
    std::string label;
    CMPoint point;
    long r = 0;
    long N = 0;
    mpz_class m_kk;
};

inline AJResult aj_representative(const Newform& f, const CMPoint& P,
                                  const PrecisionContext& ctx, double y_min = 0.05) {
    if (f.weight < 4 || f.weight % 2 != 0)
        throw PreconditionError("aj", "weight", "weight must be an even integer >= 4");
    if (P.value.v <= 0)
        throw PreconditionError("aj", "point", "CM point must lie in the upper half-plane");
    if (P.degree < 1)
        throw PreconditionError("aj", "point", "degree bookkeeping is inconsistent");
    if (P.p && (*P.p % f.level != 1 || P.q % f.level != 1))
        throw PreconditionError("aj", "normalization",
                                "the explicit family meets the normalization phi(t) = 1/N "
                                "only when p = q = 1 mod N");

    AJResult out;
    out.r = f.r();
    out.N = f.level;
    out.m_kk = m_factor(f.level, 2 * out.r, 2 * out.r);
    out.label = f.label;
    out.point = P;
    out.constant = aj_constant(f.level, P.degree, out.r, P.value.v);
    out.integral = heegner_line_integral(f, P, ctx, y_min);
    out.representative = ball_mul(out.constant.value(ctx), out.integral, ctx);
    return out;
}

}  // namespace heegner
