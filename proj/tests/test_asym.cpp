#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "heegner/asym.hpp"
#include "heegner/quadrature.hpp"

using namespace heegner;

namespace {

PrecisionContext ctx128() { return PrecisionContext(128, 1e-28); }

struct Frame {
    ImagQuadField K{11};
    LevelStructure ls = level_structure_from_t(1, 1, 5);
};

}  // namespace

TEST_CASE("datum bookkeeping on the worked pairs") {
    Frame fr;
    auto ctx = ctx128();
    AsymptoticDatum dinf = datum(fr.K, fr.ls, 1, 13, 7, P1::infinity(), ctx);
    CHECK(dinf.gamma == 91);
    CHECK(dinf.kappa == 1);
    CHECK(dinf.Y_coeff == mpq_class(91, 46));

    AsymptoticDatum d3 = datum(fr.K, fr.ls, 1, 13, 7, P1::of(3, 7), ctx);
    CHECK(d3.gamma == mpq_class(13, 7));
    CHECK(d3.kappa == 7);

    // Y = gamma sqrt(d_K) / (2 |c tau + d|^2) numerically.
    double y_expect = 91.0 * std::sqrt(11.0) / 46.0;
    CHECK(dinf.Y.to_double() == Catch::Approx(y_expect).epsilon(1e-12));

    CHECK_THROWS_AS(datum(fr.K, fr.ls, 1, 7, 13, P1::infinity(), ctx), PreconditionError);
    CHECK_THROWS_AS(datum(fr.K, fr.ls, 1, 31, 3, P1::infinity(), ctx),
                    PreconditionError);  // q = 3 splits
}

TEST_CASE("I_closed equals E(r, 1, Y) across random tuples") {
    Frame fr;
    auto ctx = ctx128();
    std::mt19937_64 rng(99);
    std::vector<long> qs{7, 13, 17, 41};
    std::vector<long> ps{19, 29, 37, 43, 61, 89, 97};
    int done = 0;
    while (done < 50) {
        long q = qs[rng() % qs.size()];
        long p = ps[rng() % ps.size()];
        if (p <= q) continue;
        long r = 0 + static_cast<long>(rng() % 4);
        P1 beta = (rng() % 4 == 0) ? P1::infinity() : P1::of(static_cast<long>(rng() % q), q);
        AsymptoticDatum d = datum(fr.K, fr.ls, r, p, q, beta, ctx);
        BallComplex viaE = kernel_integral_E(
            r, 1,
            ball_mul(ball_from(d.Y_coeff, ctx),
                     ball_sqrt_ui(static_cast<unsigned long>(fr.K.d_K()), ctx), ctx),
            ctx);
        Mag dist = ball_distance_upper(d.I, viaE);
        CHECK(dist.to_double() <= 4 * ctx.target_eps);
        Real lo = ball_abs_lower(d.I);
        if (lo.to_double() > 1e-200) {
            CHECK(dist.to_double() / lo.to_double() < 1e-28);
        }
        ++done;
    }
}

TEST_CASE("I_closed equals the quadrature of its defining integral") {
    Frame fr;
    PrecisionContext ctx(128, 1e-30);
    for (auto [p, q, binf] : {std::tuple<long, long, bool>{13, 7, false}, {29, 7, true}}) {
        P1 beta = binf ? P1::infinity() : P1::of(2, q);
        AsymptoticDatum d = datum(fr.K, fr.ls, 2, p, q, beta, ctx);
        Real Y(d.Y);
        auto g = [&](const Real& y) {
            BallComplex yb = ball_exact(Real(y), Real::of(0L, ctx.bits));
            BallComplex base = ball_sub(ball_mul(yb, yb, ctx),
                                        ball_mul(ball_exact(Real(Y)), ball_exact(Real(Y)), ctx), ctx);
            BallComplex pw = ball_mul(base, base, ctx);
            BallComplex arg =
                ball_mul(ball_from(-2L, ctx), ball_mul(ball_pi(ctx), yb, ctx), ctx);
            return ball_mul(pw, ball_exp(arg, ctx), ctx);
        };
        double scale = std::abs(d.I.re.to_double());
        if (scale < 1e-250) continue;  // quadrature tolerance would underflow
        double eps = std::max(scale * 1e-20, 1e-280);
        long bits = std::max(192L, (long)(-std::log2(eps)) + 32);
        PrecisionContext qctx(bits, eps);
        Real a2pi = Real::of(2L, 64) * Real::pi(64);
        Real T = choose_truncation(4, a2pi, qctx.target_eps / 4, d.Y.to_double() + 1);
        BallComplex oracle = quad_to_infinity(g, Y, T, tail_bound_poly_exp(4, a2pi, T), qctx);
        double rel = ball_distance_upper(d.I, oracle).to_double() / scale;
        CHECK(rel < 1e-15);
    }
}

TEST_CASE("P polynomial at r = 0 is the constant 1/(2 pi)") {
    Frame fr;
    auto ctx = ctx128();
    PPolynomial P = p_polynomial(fr.K, fr.ls, 0);
    CHECK(P.degree() == 0);
    CHECK(P.T[0] == 1);
    BallComplex c = P.coefficient(0, ctx);
    CHECK(c.re.to_double() == Catch::Approx(1.0 / (2 * M_PI)).epsilon(1e-12));
}

TEST_CASE("top coefficient cancels for r >= 1") {
    Frame fr;
    for (long r : {1L, 2L, 3L}) {
        PPolynomial P = p_polynomial(fr.K, fr.ls, r);
        CHECK(P.T[0] == 0);          // X^k coefficient vanishes
        CHECK(P.degree() < 2 * r);
        CHECK(P.degree() >= 0);
    }
}

TEST_CASE("I = e^{-2 pi Y} P(gamma) for random rational gamma") {
    Frame fr;
    auto ctx = ctx128();
    std::mt19937_64 rng(4321);
    for (int i = 0; i < 20; ++i) {
        long r = 1 + static_cast<long>(rng() % 3);
        mpq_class gamma(1 + static_cast<long>(rng() % 400), 1 + static_cast<long>(rng() % 7));
        gamma.canonicalize();
        PPolynomial P = p_polynomial(fr.K, fr.ls, r);
        // Y = gamma sqrt(d_K) / (2M); E(r, 1, Y) is the same integral.
        BallComplex Y = ball_mul(ball_from(gamma / (2 * mpq_class(fr.ls.ctd_norm(fr.K))), ctx),
                                 ball_sqrt_ui(11, ctx), ctx);
        BallComplex lhs = kernel_integral_E(r, 1, Y, ctx);
        BallComplex damp = ball_exp(
            ball_neg(ball_mul(ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx), Y, ctx)), ctx);
        BallComplex rhs = ball_mul(damp, P.eval(gamma, ctx), ctx);
        Mag dist = ball_distance_upper(lhs, rhs);
        Real lo = ball_abs_lower(lhs);
        if (lo.to_double() > 1e-200)
            CHECK(dist.to_double() / lo.to_double() < 1e-25);
        else
            CHECK(dist.to_double() < 1e-220);
    }
}

TEST_CASE("|J| ratio: direct versus closed formula") {
    Frame fr;
    PrecisionContext ctx(192, 1e-40);
    std::mt19937_64 rng(10001);
    std::vector<long> qs{7, 13, 17};
    std::vector<long> ps{19, 29, 37, 43, 53, 61};  // 23 divides |c tau + d|^2
    int done = 0;
    while (done < 20) {
        long q = qs[rng() % qs.size()];
        long p = ps[rng() % ps.size()];
        if (p <= q) continue;
        long r = 1 + static_cast<long>(rng() % 2);
        P1 beta = P1::of(static_cast<long>(rng() % q), q);
        BallComplex direct = ratio_J_direct(fr.K, fr.ls, r, p, q, beta, ctx);
        BallComplex formula = ratio_J_formula(fr.K, fr.ls, r, p, q, beta, ctx);
        double rel = ball_distance_upper(direct, formula).to_double() /
                     ball_abs_lower(formula).to_double();
        INFO("p=" << p << " q=" << q << " r=" << r << " beta=" << beta.str());
        CHECK(rel < 1e-12);
        ++done;
    }
}

TEST_CASE("ratio tends to zero and decreases in p") {
    Frame fr;
    PrecisionContext ctx(192, 1e-40);
    // Values underflow doubles quickly, so compare at full precision.
    Real prev(ctx.bits);
    mpfr_set_inf(prev.raw(), 1);
    for (long p : {19L, 43L, 89L, 151L, 251L}) {
        BallComplex ratio = ratio_J_formula(fr.K, fr.ls, 1, p, 7, P1::of(1, 7), ctx);
        CHECK(ball_abs_lower(ratio).sign() > 0);
        CHECK(ratio.re < prev);
        prev = ratio.re;
    }
    CHECK(prev.exponent() < -332);  // below 1e-100
}

TEST_CASE("lem_est bound: substitution value and decay") {
    Frame fr;
    Real c = Real::of(3L, 64);
    Real b1 = lem_est_bound(fr.K, fr.ls, 13, 7, P1::infinity(), c);
    double expect = 3.0 * std::exp(-91.0 * M_PI * std::sqrt(11.0) / 23.0);
    CHECK(b1.to_double() == Catch::Approx(expect).epsilon(1e-9));
    // Monotone decay in p for fixed q, beta.
    double prev = 1e300;
    for (long p : {19L, 43L, 89L}) {
        double b = lem_est_bound(fr.K, fr.ls, p, 7, P1::of(0, 7), c).to_double();
        CHECK(b < prev);
        prev = b;
    }
}

TEST_CASE("J reassembles from magnitude and phase") {
    Frame fr;
    auto ctx = ctx128();
    AsymptoticDatum d = datum(fr.K, fr.ls, 1, 13, 7, P1::of(3, 7), ctx);
    // |J| from the complex value matches the stored magnitude ball.
    Real modulus = hypot(d.J.re, d.J.im);
    CHECK(std::abs(modulus.to_double() - d.J_mag.re.to_double()) <
          1e-20 * d.J_mag.re.to_double());
    // And the displayed assembly: 2^{k+1} pi^{r+1} |ctd|^k (pq)^r kappa^k m^2 I.
    long r = 1, k = 2;
    mpz_class m = m_factor(fr.ls.N, k, k);
    double expect = std::pow(2.0, k + 1) * std::pow(M_PI, r + 1) *
                    mpz_get_d(fr.ls.ctd_norm(fr.K).get_mpz_t()) *  // M^r with r = 1
                    (13.0 * 7.0) * std::pow(7.0, k) * mpz_get_d(mpz_class(m * m).get_mpz_t()) *
                    d.I.re.to_double();
    CHECK(d.J_mag.re.to_double() == Catch::Approx(expect).epsilon(1e-10));
}
