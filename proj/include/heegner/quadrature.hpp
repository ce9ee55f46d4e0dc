#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "heegner/numerics.hpp"

namespace heegner {

using Integrand = std::function<BallComplex(const Real&)>;

struct QuadOptions {
    int order = 15;        // Gauss-Legendre points per panel
    int max_depth = 42;    // bisection depth limit
    long max_panels = 60000;
};

namespace detail {

// Gauss-Legendre nodes and weights on [-1, 1], computed once per
// (order, precision) by Newton iteration on the Legendre recurrence.
inline std::shared_ptr<const std::vector<std::pair<Real, Real>>> gl_rule(int n, long prec) {
    static std::mutex mu;
    static std::map<std::pair<int, long>, std::shared_ptr<const std::vector<std::pair<Real, Real>>>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({n, prec});
        if (it != cache.end()) return it->second;
    }
    long wp = prec + 32;
    auto rule = std::make_shared<std::vector<std::pair<Real, Real>>>();
    Real one = Real::of(1L, wp);
    for (int i = 1; i <= n; ++i) {
        Real x = Real(wp);
        mpfr_set_d(x.raw(), std::cos(M_PI * (i - 0.25) / (n + 0.5)), MPFR_RNDN);
        Real dp(wp);
        for (int iter = 0; iter < 200; ++iter) {
            // Legendre recurrence for P_n and its derivative at x.
            Real p0 = one, p1 = x;
            for (int k = 2; k <= n; ++k) {
                Real pk = (x * p1 * (2 * k - 1) - p0 * (k - 1)) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = (x * p1 - p0) * n / (x * x - one);
            Real dx = p1 / dp;
            x = x - dx;
            Real adx = abs(dx);
            if (!adx.is_zero() && adx.exponent() < -(wp - 8)) break;
            if (adx.is_zero()) break;
        }
        // Recompute P' at the converged node for the weight.
        Real p0 = one, p1 = x;
        for (int k = 2; k <= n; ++k) {
            Real pk = (x * p1 * (2 * k - 1) - p0 * (k - 1)) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = (x * p1 - p0) * n / (x * x - one);
        Real w = Real::of(2L, wp) / ((one - x * x) * dp * dp);
        Real xr(prec), wr(prec);
        mpfr_set(xr.raw(), x.raw(), MPFR_RNDN);
        mpfr_set(wr.raw(), w.raw(), MPFR_RNDN);
        rule->emplace_back(std::move(xr), std::move(wr));
    }
    std::lock_guard<std::mutex> lock(mu);
    cache[{n, prec}] = rule;
    return rule;
}

inline BallComplex gl_panel(const Integrand& g, const Real& a, const Real& b,
                            const std::vector<std::pair<Real, Real>>& rule,
                            const PrecisionContext& ctx) {
    Real half = (b - a) / 2;
    Real mid = (a + b) / 2;
    BallComplex acc = ball_from(0L, ctx);
    for (const auto& [x, w] : rule) {
        Real node = mid + half * x;
        BallComplex val = g(node);
        BallComplex wb = ball_exact(Real(w));
        wb.rad.add_pow2(detail::exp_or(w, -1) - w.prec() + 6);  // node/weight slop
        acc = ball_add(acc, ball_mul(wb, val, ctx), ctx);
    }
    return ball_mul(acc, ball_exact(half), ctx);
}

}  // namespace detail

struct QuadOutcome {
    BallComplex value;
    bool tolerance_met = true;
};

// Adaptive bisection with a fixed-order interior Gauss-Legendre rule.  A
// panel is accepted when the defect between its estimate and the sum of its
// half-panel estimates fits within the panel's share of the tolerance; the
// defect is charged to the radius.
inline QuadOutcome quad_adaptive_try(const Integrand& g, const Real& a, const Real& b,
                                     const PrecisionContext& ctx, QuadOptions opt = {}) {
    if (!(a < b))
        throw PreconditionError("numerics", "quad", "empty or inverted interval");
    auto rule = detail::gl_rule(opt.order, ctx.bits);
    Real total_len = b - a;
    Real tol = Real::of(ctx.target_eps, 64);

    struct Seg {
        Real a, b;
        BallComplex est;
        int depth;
    };
    std::vector<Seg> stack;
    stack.push_back({a, b, detail::gl_panel(g, a, b, *rule, ctx), 0});

    BallComplex result = ball_from(0L, ctx);
    bool ok = true;
    long panels = 1;

    while (!stack.empty()) {
        Seg s = std::move(stack.back());
        stack.pop_back();
        Real mid = (s.a + s.b) / 2;
        BallComplex left = detail::gl_panel(g, s.a, mid, *rule, ctx);
        BallComplex right = detail::gl_panel(g, mid, s.b, *rule, ctx);
        panels += 2;
        BallComplex sum2 = ball_add(left, right, ctx);

        Mag defect;
        {
            Real dr = s.est.re - sum2.re, di = s.est.im - sum2.im;
            mpfr_hypot(defect.raw(), dr.raw(), di.raw(), MPFR_RNDU);
        }
        // Panel budget: tol * len / (2 * total).
        Real budget = tol * ((s.b - s.a) / total_len) / 2;
        bool fits = mpfr_cmp(defect.raw(), budget.raw()) <= 0;
        bool may_refine = s.depth < opt.max_depth && panels < opt.max_panels;

        if (fits || !may_refine) {
            if (!fits) ok = false;
            result = ball_add(result, sum2, ctx);
            result.rad.add(defect);
        } else {
            stack.push_back({s.a, mid, std::move(left), s.depth + 1});
            stack.push_back({mid, s.b, std::move(right), s.depth + 1});
        }
    }
    return {std::move(result), ok};
}

inline BallComplex quad_adaptive(const Integrand& g, const Real& a, const Real& b,
                                 const PrecisionContext& ctx, QuadOptions opt = {}) {
    QuadOutcome out = quad_adaptive_try(g, a, b, ctx, opt);
    if (!out.tolerance_met)
        throw ToleranceError("numerics", "quadrature tolerance not met",
                             out.value.rad.to_double());
    return out.value;
}

// Integral over [a, +inf): the caller truncates at `truncation` and supplies
// a bound on the discarded remainder, which is added to the radius.
inline BallComplex quad_to_infinity(const Integrand& g, const Real& a, const Real& truncation,
                                    const Mag& tail_bound, const PrecisionContext& ctx,
                                    QuadOptions opt = {}) {
    BallComplex v = quad_adaptive(g, a, truncation, ctx, opt);
    v.rad.add(tail_bound);
    return v;
}

// Upper bound of int_T^inf y^m e^{-c y} dy for m >= 0, c > 0, valid whenever
// T > m / c:  y^m <= T^m e^{(m/T)(y-T)} gives T^m e^{-cT} / (c - m/T).
inline Mag tail_bound_poly_exp(long m, const Real& c, const Real& T) {
    if (!(c.sign() > 0) || !(T.sign() > 0))
        throw PreconditionError("numerics", "tail", "need c > 0 and T > 0");
    long wp = 64;
    Real mt(wp);
    mpfr_div_si(mt.raw(), T.raw(), m == 0 ? 1 : m, MPFR_RNDD);  // T/m lower
    if (m > 0) {
        Real thr(wp);
        mpfr_ui_div(thr.raw(), 1, mt.raw(), MPFR_RNDU);  // m/T upper
        if (mpfr_cmp(thr.raw(), c.raw()) >= 0)
            throw PreconditionError("numerics", "tail", "truncation too small: need T > m/c");
    }
    Mag num;
    {
        Real p(wp);
        mpfr_pow_si(p.raw(), T.raw(), m, MPFR_RNDU);  // T^m upper
        Real ct(wp);
        mpfr_mul(ct.raw(), c.raw(), T.raw(), MPFR_RNDD);
        mpfr_neg(ct.raw(), ct.raw(), MPFR_RNDU);
        Real e(wp);
        mpfr_exp(e.raw(), ct.raw(), MPFR_RNDU);  // e^{-cT} upper
        mpfr_mul(num.raw(), p.raw(), e.raw(), MPFR_RNDU);
    }
    Real den(wp);
    if (m > 0) {
        Real moverT(wp);
        mpfr_si_div(moverT.raw(), m, T.raw(), MPFR_RNDU);
        mpfr_sub(den.raw(), c.raw(), moverT.raw(), MPFR_RNDD);
    } else {
        mpfr_set(den.raw(), c.raw(), MPFR_RNDD);
    }
    Mag out;
    mpfr_div(out.raw(), num.raw(), den.raw(), MPFR_RNDU);
    return out;
}

// Smallest T (by doubling from T0) with tail_bound_poly_exp(m, c, T) < eps.
inline Real choose_truncation(long m, const Real& c, double eps, double T0 = 1.0) {
    Real T = Real::of(T0, 64);
    Real floor_T = Real::of((m + 1.0), 64) / c;
    while (T <= floor_T) T = T * 2L;
    for (int i = 0; i < 4000; ++i) {
        if (tail_bound_poly_exp(m, c, T).to_double() < eps) return T;
        T = T + Real::of(1L, 64);
    }
    throw ToleranceError("numerics", "could not find truncation point", eps);
}

}  // namespace heegner
