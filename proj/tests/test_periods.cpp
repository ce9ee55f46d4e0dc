#include "catch_amalgamated.hpp"

#include <cmath>

#include "heegner/aj.hpp"
#include "heegner/periods.hpp"
#include "heegner/quadrature.hpp"

using namespace heegner;

namespace {

const char* kFixture = HEEGNER_FIXTURE;

PrecisionContext ctx128() { return PrecisionContext(128, 1e-26); }

}  // namespace

TEST_CASE("monomial kernel closed forms") {
    auto ctx = ctx128();
    BallComplex y1 = ball_from(1L, ctx);

    BallComplex k0 = monomial_kernel(0, 3, y1, ctx);
    CHECK(k0.re.to_double() == Catch::Approx(std::exp(-6 * M_PI) / (6 * M_PI)).epsilon(1e-12));

    BallComplex k1 = monomial_kernel(1, 1, y1, ctx);
    double expect = std::exp(-2 * M_PI) * (1 / (2 * M_PI) + 1 / (4 * M_PI * M_PI));
    CHECK(k1.re.to_double() == Catch::Approx(expect).epsilon(1e-12));

    // Quadrature oracle for m = 1, n = 1, Y0 = 1.
    PrecisionContext qctx(128, 1e-28);
    auto g = [&](const Real& y) {
        BallComplex yb = ball_exact(Real(y), Real::of(0L, qctx.bits));
        BallComplex arg = ball_mul(ball_from(-2L, qctx), ball_mul(ball_pi(qctx), yb, qctx), qctx);
        return ball_mul(yb, ball_exp(arg, qctx), qctx);
    };
    Real a2pi = Real::of(2L, 64) * Real::pi(64);
    Real T = choose_truncation(1, a2pi, 1e-30, 2);
    BallComplex oracle =
        quad_to_infinity(g, Real::of(1L, qctx.bits), T, tail_bound_poly_exp(1, a2pi, T), qctx);
    CHECK(ball_distance_upper(k1, oracle).to_double() < 1e-24);
}

TEST_CASE("binomial reassembly of the two-square kernel") {
    // (y^2 - Y^2)^r expands into monomials: E(r, n, Y) must equal
    // sum_j C(r,j) (-1)^{r-j} Y^{2(r-j)} K(2j, n, Y).
    auto ctx = ctx128();
    for (long r : {1L, 2L, 3L}) {
        for (long n : {1L, 2L}) {
            BallComplex Y = ball_from(mpq_class(4, 5), ctx);
            BallComplex lhs = kernel_integral_E(r, n, Y, ctx);
            BallComplex rhs = ball_from(0L, ctx);
            for (long j = 0; j <= r; ++j) {
                mpq_class coef(arith::binomial(r, j));
                BallComplex term = ball_from(coef, ctx);
                BallComplex ypow = ball_from(1L, ctx);
                for (long i = 0; i < 2 * (r - j); ++i) ypow = ball_mul(ypow, Y, ctx);
                term = ball_mul(term, ball_mul(ypow, monomial_kernel(2 * j, n, Y, ctx), ctx), ctx);
                if ((r - j) % 2) term = ball_neg(term);
                rhs = ball_add(rhs, term, ctx);
            }
            CHECK(ball_distance_upper(lhs, rhs).to_double() < 1e-30);
        }
    }
}

TEST_CASE("Fricke transform is an involution on polynomials") {
    for (int eps : {1, -1}) {
        std::vector<mpq_class> P{mpq_class(3), mpq_class(-7, 2), mpq_class(5)};
        auto Q = fricke_transform(fricke_transform(P, eps, 5, 2), eps, 5, 2);
        REQUIRE(Q.size() >= P.size());
        for (size_t i = 0; i < Q.size(); ++i) {
            mpq_class want = i < P.size() ? P[i] : mpq_class(0);
            CHECK(Q[i] == want);
        }
    }
}

TEST_CASE("functional requires a declared Fricke eigenvalue") {
    Newform f = parse_newform(kFixture);
    f.fricke.reset();
    auto ctx = ctx128();
    try {
        j_functional(f, {mpz_class(1)}, ctx);
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == "fricke_required");
    }
}

TEST_CASE("degree guard") {
    Newform f = parse_newform(kFixture);
    auto ctx = ctx128();
    CHECK_THROWS_AS(j_functional(f, {mpz_class(1), mpz_class(0), mpz_class(0), mpz_class(1)}, ctx),
                    PreconditionError);
}

TEST_CASE("functional is linear in P") {
    Newform f = parse_newform(kFixture);
    auto ctx = ctx128();
    auto J1 = j_functional(f, {mpz_class(1)}, ctx);
    auto JX = j_functional(f, {mpz_class(0), mpz_class(1)}, ctx);
    auto Jsum = j_functional(f, {mpz_class(1), mpz_class(1)}, ctx);
    BallComplex sum = ball_add(J1.value, JX.value, ctx);
    CHECK(ball_distance_upper(sum, Jsum.value).to_double() < 1e-22);
}

TEST_CASE("parity symmetry classes") {
    Newform f = parse_newform(kFixture);
    auto ctx = ctx128();
    // P = X (odd powers): value is purely imaginary.
    auto JX = j_functional(f, {mpz_class(0), mpz_class(1)}, ctx);
    Mag rad = JX.value.rad;
    rad.add_pow2(-60);
    CHECK(Mag::of_abs(JX.value.re) <= rad);
    // P = 1 (even powers after the Fricke fold): value is purely real.
    auto J1 = j_functional(f, {mpz_class(1)}, ctx);
    Mag rad1 = J1.value.rad;
    rad1.add_pow2(-60);
    CHECK(Mag::of_abs(J1.value.im) <= rad1);
}

TEST_CASE("splitting agrees with direct two-leg quadrature") {
    Newform f = parse_newform(kFixture);
    PrecisionContext ctx(192, 1e-30);
    long k = f.weight - 2;
    std::vector<mpz_class> P{mpz_class(1), mpz_class(-2), mpz_class(3)};
    auto J = j_functional(f, P, ctx);

    // Each leg integrates Q(iy) f(iy) i dy over [1/sqrt(5), T].
    std::vector<mpq_class> Pq;
    for (const auto& c : P) Pq.emplace_back(c);
    std::vector<mpq_class> Pt = fricke_transform(Pq, *f.fricke, f.level, k);

    // The integrand is evaluated well below the quadrature tolerance so its
    // truncation jitter does not masquerade as quadrature error.
    PrecisionContext ectx(ctx.bits + 64, ctx.target_eps * 1e-12);
    auto leg = [&](const std::vector<mpq_class>& coeffs) {
        auto integrand = [&](const Real& y) {
            BallComplex z = ball_exact(Real::of(0L, ectx.bits), Real(y));
            BallComplex poly = ball_from(0L, ectx);
            BallComplex zp = ball_from(1L, ectx);
            for (size_t m = 0; m < coeffs.size(); ++m) {
                poly = ball_add(poly, ball_mul(ball_from(coeffs[m], ectx), zp, ectx), ectx);
                zp = ball_mul(zp, z, ectx);
            }
            return ball_mul(poly, eval_newform(f, z, ectx), ectx);
        };
        Real Y0 = Real::of(1L, ctx.bits) / sqrt(Real::of(5L, ctx.bits));
        Real a2pi = Real::of(2L, 64) * Real::pi(64);
        Real T = choose_truncation(static_cast<long>(coeffs.size()) - 1, a2pi, 1e-34, 2);
        Mag tail = tail_bound_poly_exp(static_cast<long>(coeffs.size()) - 1, a2pi, T);
        Mag csum;
        for (const auto& c : coeffs) csum.add(Mag::of_abs(Real::of(c, 64)));
        Real cb = cusp_bound_constant(f, Real::of(0.4, 64));
        Mag cf = Mag::of_abs(cb);
        cf.add(Mag::of(1.0));
        tail.mul(cf);
        tail.mul(csum);
        return quad_to_infinity(integrand, Y0, T, tail, ctx);
    };

    BallComplex total = ball_add(leg(Pq), leg(Pt), ctx);
    total = ball_mul_i(total);  // dz = i dy
    BallComplex two_pi_i = ball_mul_i(ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx));
    for (long i = 0; i < k + 1; ++i) total = ball_mul(total, two_pi_i, ctx);

    double rel = ball_distance_upper(J.value, total).to_double() /
                 ball_abs_lower(J.value).to_double();
    CHECK(rel < 1e-10);
}
