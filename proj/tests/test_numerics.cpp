#include "catch_amalgamated.hpp"

#include <random>

#include "heegner/numerics.hpp"
#include "heegner/quadrature.hpp"

using namespace heegner;

namespace {

PrecisionContext ctx128() { return PrecisionContext(128, 1e-25); }

BallComplex ball_d(double re, double im, long bits) {
    return ball_exact(Real::of(re, bits), Real::of(im, bits));
}

double abs_d(const BallComplex& b) {
    return hypot(b.re, b.im).to_double();
}

}  // namespace

TEST_CASE("precision context validates its invariants") {
    CHECK_THROWS_AS(PrecisionContext(32, 1e-5), PreconditionError);
    CHECK_THROWS_AS(PrecisionContext(64, 0.0), PreconditionError);
    CHECK_THROWS_AS(PrecisionContext(64, 1e-40), PreconditionError);
    CHECK_NOTHROW(PrecisionContext(53, 1e-10));
    CHECK_NOTHROW(PrecisionContext(4096, 1e-200));
}

TEST_CASE("exact sums carry only rounding-sized radii") {
    auto ctx = ctx128();
    BallComplex a = ball_d(1.0, 0.0, ctx.bits);
    BallComplex b = ball_d(0.0, 1.0, ctx.bits);
    BallComplex s = ball_add(a, b, ctx);
    CHECK(s.re.to_double() == 1.0);
    CHECK(s.im.to_double() == 1.0);
    CHECK(s.rad.to_double() <= std::ldexp(1.0, 1 - 128));
}

TEST_CASE("multiplication by an exact zero is absorbing") {
    auto ctx = ctx128();
    BallComplex z = ball_from(0L, ctx);
    BallComplex w = ball_d(3.25, -7.5, ctx.bits);
    BallComplex p = ball_mul(z, w, ctx);
    CHECK(p.re.is_zero());
    CHECK(p.im.is_zero());
    CHECK(p.rad.is_zero());
}

TEST_CASE("exp(0) = 1 with only rounding error") {
    auto ctx = ctx128();
    BallComplex e = ball_exp(ball_from(0L, ctx), ctx);
    CHECK(e.re.to_double() == 1.0);
    CHECK(e.im.is_zero());
    CHECK(e.rad.to_double() <= std::ldexp(1.0, 8 - 128));
}

TEST_CASE("exponent overflow raises precision exhausted") {
    auto ctx = ctx128();
    BallComplex huge = ball_d(1e300, 0.0, ctx.bits);
    BallComplex sq = ball_mul(huge, huge, ctx);  // still in range for mpfr
    CHECK(sq.re.is_number());
    CHECK_THROWS_AS(ball_exp(ball_mul(sq, sq, ctx), ctx), Error);
}

TEST_CASE("ball containment under recomputation at twice the precision") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> dist(-8.0, 8.0);
    PrecisionContext lo(64, 1e-9);
    PrecisionContext hi(128, 1e-18);
    for (int i = 0; i < 10000; ++i) {
        double xr = dist(rng), xi = dist(rng), yr = dist(rng), yi = dist(rng);
        BallComplex xl = ball_d(xr, xi, lo.bits), yl = ball_d(yr, yi, lo.bits);
        BallComplex xh = ball_d(xr, xi, hi.bits), yh = ball_d(yr, yi, hi.bits);
        int op = i % 3;
        BallComplex rl = op == 0   ? ball_add(xl, yl, lo)
                         : op == 1 ? ball_mul(xl, yl, lo)
                                   : ball_exp(ball_mul(xl, yl, lo), lo);
        BallComplex rh = op == 0   ? ball_add(xh, yh, hi)
                         : op == 1 ? ball_mul(xh, yh, hi)
                                   : ball_exp(ball_mul(xh, yh, hi), hi);
        INFO("op " << op << " at (" << xr << "," << xi << ")*(" << yr << "," << yi << ")");
        CHECK(ball_contains(rl, rh));
    }
}

TEST_CASE("division is the inverse of multiplication") {
    auto ctx = ctx128();
    BallComplex a = ball_d(1.375, -2.25, ctx.bits);
    BallComplex b = ball_d(0.5, 3.0, ctx.bits);
    BallComplex q = ball_div(ball_mul(a, b, ctx), b, ctx);
    CHECK(ball_distance_upper(q, a).to_double() < 1e-35);
    CHECK_THROWS_AS(ball_div(a, ball_from(0L, ctx), ctx), Error);
}

TEST_CASE("reduced exponential of huge rational arguments") {
    auto ctx = ctx128();
    // exp(2 pi i (n + 1/8)) must not lose accuracy to argument reduction.
    mpq_class t(1, 8);
    t += mpz_class("123456789123456789");
    BallComplex e = ball_exp_2pi_i(t, ctx);
    BallComplex ref = ball_exp_2pi_i(mpq_class(1, 8), ctx);
    CHECK(ball_distance_upper(e, ref).to_double() < 1e-35);
    CHECK(std::abs(abs_d(e) - 1.0) < 1e-30);
}

TEST_CASE("unit interval integral of 1") {
    PrecisionContext ctx(128, 1e-20);
    auto one = [&](const Real&) { return ball_from(1L, ctx); };
    BallComplex v = quad_adaptive(one, Real::of(0L, ctx.bits), Real::of(1L, ctx.bits), ctx);
    CHECK(std::abs(v.re.to_double() - 1.0) < 1e-20);
    CHECK(v.rad.to_double() < 1e-20);
}

TEST_CASE("exponential decay integral matches its antiderivative") {
    PrecisionContext ctx(128, 1e-22);
    auto g = [&](const Real& y) {
        BallComplex yb = ball_exact(Real(y), Real::of(0L, ctx.bits));
        return ball_exp(ball_neg(ball_mul(ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx), yb, ctx)),
                        ctx);
    };
    Real two_pi = Real::of(2L, 64) * Real::pi(64);
    Real T = choose_truncation(0, two_pi, 1e-28);
    BallComplex v = quad_to_infinity(g, Real::of(0L, ctx.bits), T,
                                     tail_bound_poly_exp(0, two_pi, T), ctx);
    double expected = 1.0 / (2.0 * M_PI);
    CHECK(std::abs(v.re.to_double() - expected) < 1e-18);
    CHECK(v.rad.to_double() < 1e-21);
}

TEST_CASE("halving the tolerance never increases the radius") {
    for (double tol : {1e-8, 1e-12, 1e-16}) {
        PrecisionContext a(192, tol);
        PrecisionContext b(192, tol / 2);
        auto g = [&](const Real& y) {
            BallComplex yb = ball_exact(Real(y), Real::of(0L, a.bits));
            BallComplex y2 = ball_mul(yb, yb, a);
            return ball_exp(ball_neg(y2), a);
        };
        BallComplex va = quad_adaptive(g, Real::of(0L, a.bits), Real::of(3L, a.bits), a);
        BallComplex vb = quad_adaptive(g, Real::of(0L, b.bits), Real::of(3L, b.bits), b);
        CHECK(vb.rad.to_double() <= va.rad.to_double());
    }
}

TEST_CASE("unreachable tolerance reports the achieved radius") {
    PrecisionContext ctx(64, 1e-15);
    // |y - 1/3|: the kink defeats the fixed-order rule near 1/3, and the
    // panel budget is tiny.
    auto g = [&](const Real& y) {
        Real t = y - Real::of(1L, ctx.bits) / 3L;
        return ball_exact(abs(t), Real::of(0L, ctx.bits));
    };
    QuadOptions opt;
    opt.max_depth = 3;
    opt.max_panels = 16;
    try {
        quad_adaptive(g, Real::of(0L, ctx.bits), Real::of(1L, ctx.bits), ctx, opt);
        FAIL("should have thrown");
    } catch (const ToleranceError& e) {
        CHECK(e.achieved_radius() > 0);
        CHECK(std::string(e.what()).find("E:numerics:tolerance") == 0);
    }
}
