#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "heegner/errors.hpp"

namespace heegner {

// ---------------------------------------------------------------------------
// PrecisionContext: runtime-sized working precision plus a requested absolute
// error.  Every numeric routine in the library is parameterized by one of
// these; nothing reads global state.
// ---------------------------------------------------------------------------
struct PrecisionContext {
    long bits;
    double target_eps;

    explicit PrecisionContext(long bits_ = 128, double eps = 1e-30)
        : bits(bits_), target_eps(eps) {
        if (bits < 53)
            throw PreconditionError("numerics", "precision", "bits must be >= 53");
        if (!(target_eps > 0))
            throw PreconditionError("numerics", "precision", "target_eps must be positive");
        // 2^(1-bits) underflows to 0 for very large bit counts, which is the
        // intended "no constraint" case.
        if (target_eps < std::ldexp(1.0, static_cast<int>(std::max(1 - bits, -1100L))))
            throw PreconditionError("numerics", "precision",
                                    "target_eps below representable resolution 2^(1-bits)");
    }

    PrecisionContext with_bits(long b) const { return PrecisionContext(b, target_eps); }
    PrecisionContext with_eps(double e) const { return PrecisionContext(bits, e); }
};

// ---------------------------------------------------------------------------
// Real: a value-semantic wrapper over mpfr_t.  Precision is fixed per value;
// binary operations round once, to the larger of the operand precisions.
// ---------------------------------------------------------------------------
class Real {
public:
    Real() { mpfr_init2(v_, 64); mpfr_set_zero(v_, 1); }
    explicit Real(mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v_, 64); mpfr_swap(v_, o.v_); }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    static Real of(long x, mpfr_prec_t prec) {
        Real r(prec); mpfr_set_si(r.v_, x, MPFR_RNDN); return r;
    }
    static Real of(double x, mpfr_prec_t prec) {
        Real r(prec); mpfr_set_d(r.v_, x, MPFR_RNDN); return r;
    }
    static Real of(const mpz_class& x, mpfr_prec_t prec) {
        Real r(prec); mpfr_set_z(r.v_, x.get_mpz_t(), MPFR_RNDN); return r;
    }
    static Real of(const mpq_class& x, mpfr_prec_t prec) {
        Real r(prec); mpfr_set_q(r.v_, x.get_mpq_t(), MPFR_RNDN); return r;
    }
    static Real pi(mpfr_prec_t prec) {
        Real r(prec); mpfr_const_pi(r.v_, MPFR_RNDN); return r;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

    bool is_number() const { return mpfr_number_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }
    mpfr_exp_t exponent() const { return mpfr_get_exp(v_); }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

    std::string to_string(int digits = 0) const {
        char fmt[32];
        if (digits <= 0)
            std::snprintf(fmt, sizeof fmt, "%%Re");
        else
            std::snprintf(fmt, sizeof fmt, "%%.%dRe", digits);
        char* s = nullptr;
        mpfr_asprintf(&s, fmt, v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

    friend Real operator+(const Real& a, const Real& b) {
        Real r(std::max(a.prec(), b.prec()));
        mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a, const Real& b) {
        Real r(std::max(a.prec(), b.prec()));
        mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, const Real& b) {
        Real r(std::max(a.prec(), b.prec()));
        mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator/(const Real& a, const Real& b) {
        Real r(std::max(a.prec(), b.prec()));
        mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator-(const Real& a) {
        Real r(a.prec());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }
    friend Real operator*(const Real& a, long b) {
        Real r(a.prec()); mpfr_mul_si(r.v_, a.v_, b, MPFR_RNDN); return r;
    }
    friend Real operator/(const Real& a, long b) {
        Real r(a.prec()); mpfr_div_si(r.v_, a.v_, b, MPFR_RNDN); return r;
    }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    int cmp(long x) const { return mpfr_cmp_si(v_, x); }

    friend Real sqrt(const Real& a) {
        Real r(a.prec()); mpfr_sqrt(r.v_, a.v_, MPFR_RNDN); return r;
    }
    friend Real exp(const Real& a) {
        Real r(a.prec()); mpfr_exp(r.v_, a.v_, MPFR_RNDN); return r;
    }
    friend Real log(const Real& a) {
        Real r(a.prec()); mpfr_log(r.v_, a.v_, MPFR_RNDN); return r;
    }
    friend Real abs(const Real& a) {
        Real r(a.prec()); mpfr_abs(r.v_, a.v_, MPFR_RNDN); return r;
    }
    friend Real pow_si(const Real& a, long e) {
        Real r(a.prec()); mpfr_pow_si(r.v_, a.v_, e, MPFR_RNDN); return r;
    }
    friend Real mul_2si(const Real& a, long e) {
        Real r(a.prec()); mpfr_mul_2si(r.v_, a.v_, e, MPFR_RNDN); return r;
    }
    friend Real hypot(const Real& a, const Real& b) {
        Real r(std::max(a.prec(), b.prec()));
        mpfr_hypot(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }

private:
    mpfr_t v_;
};

// ---------------------------------------------------------------------------
// Mag: a nonnegative magnitude used for error radii.  Low precision, every
// operation rounds up, so a Mag can only overestimate.
// ---------------------------------------------------------------------------
class Mag {
public:
    static constexpr mpfr_prec_t kPrec = 32;

    Mag() { mpfr_init2(v_, kPrec); mpfr_set_zero(v_, 1); }
    Mag(const Mag& o) { mpfr_init2(v_, kPrec); mpfr_set(v_, o.v_, MPFR_RNDU); }
    Mag(Mag&& o) noexcept { mpfr_init2(v_, kPrec); mpfr_swap(v_, o.v_); }
    Mag& operator=(const Mag& o) {
        if (this != &o) mpfr_set(v_, o.v_, MPFR_RNDU);
        return *this;
    }
    Mag& operator=(Mag&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Mag() { mpfr_clear(v_); }

    static Mag of(double x) {
        if (!(x >= 0)) throw PreconditionError("numerics", "mag", "magnitude must be >= 0");
        Mag m; mpfr_set_d(m.v_, x, MPFR_RNDU); return m;
    }
    // Upper bound of |x|.
    static Mag of_abs(const Real& x) {
        Mag m; mpfr_abs(m.v_, x.raw(), MPFR_RNDU); return m;
    }
    static Mag pow2(mpfr_exp_t e) {
        Mag m; mpfr_set_ui_2exp(m.v_, 1, e, MPFR_RNDU); return m;
    }

    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    bool is_finite() const { return mpfr_number_p(v_) != 0; }
    double to_double() const { return mpfr_get_d(v_, MPFR_RNDU); }

    void add(const Mag& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDU); }
    void add_pow2(mpfr_exp_t e) {
        mpfr_t t; mpfr_init2(t, kPrec);
        mpfr_set_ui_2exp(t, 1, e, MPFR_RNDU);
        mpfr_add(v_, v_, t, MPFR_RNDU);
        mpfr_clear(t);
    }
    void mul(const Mag& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDU); }
    void mul_2si(long e) { mpfr_mul_2si(v_, v_, e, MPFR_RNDU); }
    void max_with(const Mag& o) { mpfr_max(v_, v_, o.v_, MPFR_RNDU); }

    friend Mag operator+(const Mag& a, const Mag& b) { Mag r(a); r.add(b); return r; }
    friend Mag operator*(const Mag& a, const Mag& b) { Mag r(a); r.mul(b); return r; }
    friend bool operator<=(const Mag& a, const Mag& b) { return mpfr_cmp(a.v_, b.v_) <= 0; }
    friend bool operator<(const Mag& a, const Mag& b) { return mpfr_cmp(a.v_, b.v_) < 0; }

    // Compares against a Real (used when radii meet tolerances).
    bool leq(const Real& x) const { return mpfr_cmp(v_, x.raw()) <= 0; }

    std::string to_string() const {
        char* s = nullptr;
        mpfr_asprintf(&s, "%.2Re", v_);
        std::string out(s);
        mpfr_free_str(s);
        return out;
    }

private:
    mpfr_t v_;
};

// ---------------------------------------------------------------------------
// BallComplex: center at working precision plus one radius bounding the
// distance from the true value in the complex plane.
// ---------------------------------------------------------------------------
struct BallComplex {
    Real re, im;
    Mag rad;

    BallComplex() = default;
    BallComplex(Real r, Real i, Mag e = Mag()) : re(std::move(r)), im(std::move(i)), rad(std::move(e)) {}
};

namespace detail {

inline void require_number(const Real& x) {
    if (!x.is_number())
        throw Error("numerics", "precision_exhausted",
                    "result left the representable exponent range");
}

// A few ulps on an inexactly rounded component; `slack` is the log2 of the
// number of chained roundings covered.
inline void bump_rounding(Mag& rad, const Real& x, int ternary, mpfr_exp_t fallback_exp,
                          int slack = 1) {
    if (ternary == 0) return;
    mpfr_exp_t e = x.is_zero() ? fallback_exp : x.exponent();
    rad.add_pow2(e - x.prec() + slack);
}

inline mpfr_exp_t exp_or(const Real& x, mpfr_exp_t fb) {
    return x.is_zero() || !x.is_number() ? fb : x.exponent();
}

}  // namespace detail

inline BallComplex ball_exact(Real re, Real im = Real()) {
    return BallComplex(std::move(re), std::move(im));
}

inline BallComplex ball_from(long x, const PrecisionContext& ctx) {
    return ball_exact(Real::of(x, ctx.bits), Real::of(0L, ctx.bits));
}

inline BallComplex ball_from(const mpq_class& x, const PrecisionContext& ctx) {
    Real re(ctx.bits);
    int t = mpfr_set_q(re.raw(), x.get_mpq_t(), MPFR_RNDN);
    BallComplex b = ball_exact(std::move(re), Real::of(0L, ctx.bits));
    detail::bump_rounding(b.rad, b.re, t, detail::exp_or(b.re, 0));
    return b;
}

inline BallComplex ball_from(const mpq_class& re_q, const mpq_class& im_q,
                             const PrecisionContext& ctx) {
    Real re(ctx.bits), im(ctx.bits);
    int tr = mpfr_set_q(re.raw(), re_q.get_mpq_t(), MPFR_RNDN);
    int ti = mpfr_set_q(im.raw(), im_q.get_mpq_t(), MPFR_RNDN);
    BallComplex b = ball_exact(std::move(re), std::move(im));
    detail::bump_rounding(b.rad, b.re, tr, detail::exp_or(b.re, 0));
    detail::bump_rounding(b.rad, b.im, ti, detail::exp_or(b.im, 0));
    return b;
}

// pi as a ball.
inline BallComplex ball_pi(const PrecisionContext& ctx) {
    Real p(ctx.bits);
    mpfr_const_pi(p.raw(), MPFR_RNDN);
    BallComplex b = ball_exact(std::move(p), Real::of(0L, ctx.bits));
    b.rad.add_pow2(b.re.exponent() - ctx.bits + 1);
    return b;
}

// sqrt(n) for a nonnegative integer, as a ball.
inline BallComplex ball_sqrt_ui(unsigned long n, const PrecisionContext& ctx) {
    Real r(ctx.bits);
    int t = mpfr_sqrt_ui(r.raw(), n, MPFR_RNDN);
    BallComplex b = ball_exact(std::move(r), Real::of(0L, ctx.bits));
    detail::bump_rounding(b.rad, b.re, t, detail::exp_or(b.re, 0));
    return b;
}

// Upper bound of |center|.
inline Mag ball_center_abs_upper(const BallComplex& x) {
    Mag m;
    mpfr_hypot(m.raw(), x.re.raw(), x.im.raw(), MPFR_RNDU);
    return m;
}

// Upper bound of |value| over the whole ball.
inline Mag ball_abs_upper(const BallComplex& x) {
    Mag m = ball_center_abs_upper(x);
    m.add(x.rad);
    return m;
}

// Lower bound of |value| over the whole ball (clamped at zero).
inline Real ball_abs_lower(const BallComplex& x) {
    Real h(Mag::kPrec * 2);
    mpfr_hypot(h.raw(), x.re.raw(), x.im.raw(), MPFR_RNDD);
    mpfr_sub(h.raw(), h.raw(), x.rad.raw(), MPFR_RNDD);
    if (h.sign() < 0) mpfr_set_zero(h.raw(), 1);
    return h;
}

inline BallComplex ball_add(const BallComplex& x, const BallComplex& y,
                            const PrecisionContext& ctx) {
    Real re(ctx.bits), im(ctx.bits);
    int tr = mpfr_add(re.raw(), x.re.raw(), y.re.raw(), MPFR_RNDN);
    int ti = mpfr_add(im.raw(), x.im.raw(), y.im.raw(), MPFR_RNDN);
    detail::require_number(re);
    detail::require_number(im);
    BallComplex b = ball_exact(std::move(re), std::move(im));
    b.rad = x.rad + y.rad;
    mpfr_exp_t fb = std::max(detail::exp_or(x.re, -1), detail::exp_or(y.re, -1));
    detail::bump_rounding(b.rad, b.re, tr, fb);
    fb = std::max(detail::exp_or(x.im, -1), detail::exp_or(y.im, -1));
    detail::bump_rounding(b.rad, b.im, ti, fb);
    return b;
}

inline BallComplex ball_neg(const BallComplex& x) {
    return BallComplex(-x.re, -x.im, x.rad);
}

inline BallComplex ball_sub(const BallComplex& x, const BallComplex& y,
                            const PrecisionContext& ctx) {
    return ball_add(x, ball_neg(y), ctx);
}

// Multiplication by i, exact.
inline BallComplex ball_mul_i(const BallComplex& x) {
    return BallComplex(-x.im, x.re, x.rad);
}

namespace detail {

// Exponent bound for |z| from the component exponents.
inline mpfr_exp_t ball_exp_bound(const BallComplex& z) {
    mpfr_exp_t e = mpfr_get_emin();
    if (!z.re.is_zero() && z.re.is_number()) e = std::max(e, z.re.exponent());
    if (!z.im.is_zero() && z.im.is_number()) e = std::max(e, z.im.exponent());
    return e + 1;
}

}  // namespace detail

inline BallComplex ball_mul(const BallComplex& x, const BallComplex& y,
                            const PrecisionContext& ctx) {
    Real re(ctx.bits), im(ctx.bits);
    // One rounding per component via fused operations.
    int tr = mpfr_fmms(re.raw(), x.re.raw(), y.re.raw(), x.im.raw(), y.im.raw(), MPFR_RNDN);
    int ti = mpfr_fmma(im.raw(), x.re.raw(), y.im.raw(), x.im.raw(), y.re.raw(), MPFR_RNDN);
    detail::require_number(re);
    detail::require_number(im);
    Mag ax = ball_center_abs_upper(x), ay = ball_center_abs_upper(y);
    BallComplex b = ball_exact(std::move(re), std::move(im));
    b.rad = ax * y.rad + ay * x.rad + x.rad * y.rad;
    mpfr_exp_t fb = detail::ball_exp_bound(x) + detail::ball_exp_bound(y);
    detail::bump_rounding(b.rad, b.re, tr, fb);
    detail::bump_rounding(b.rad, b.im, ti, fb);
    return b;
}

inline BallComplex ball_div(const BallComplex& x, const BallComplex& y,
                            const PrecisionContext& ctx) {
    Real ylo = ball_abs_lower(y);
    if (ylo.sign() <= 0)
        throw Error("numerics", "division", "divisor ball contains zero");
    // Centers: standard complex division, two roundings per component after
    // the denominator, bounded below.
    Real den(ctx.bits);
    int td = mpfr_fmma(den.raw(), y.re.raw(), y.re.raw(), y.im.raw(), y.im.raw(), MPFR_RNDN);
    Real re(ctx.bits), im(ctx.bits);
    int tr1 = mpfr_fmma(re.raw(), x.re.raw(), y.re.raw(), x.im.raw(), y.im.raw(), MPFR_RNDN);
    int ti1 = mpfr_fmms(im.raw(), x.im.raw(), y.re.raw(), x.re.raw(), y.im.raw(), MPFR_RNDN);
    int tr2 = mpfr_div(re.raw(), re.raw(), den.raw(), MPFR_RNDN);
    int ti2 = mpfr_div(im.raw(), im.raw(), den.raw(), MPFR_RNDN);
    detail::require_number(re);
    detail::require_number(im);
    BallComplex b = ball_exact(std::move(re), std::move(im));
    // |x/y - xc/yc| <= (rx |yc| + |xc| ry) / (|y| |yc|), |y| >= |yc| - ry.
    Mag ycu = ball_center_abs_upper(y);
    Mag xcu = ball_center_abs_upper(x);
    Mag top = ycu * x.rad + xcu * y.rad;
    Mag inv_den;
    {
        // upper bound of 1 / (|yc|_lower * ylo)
        Real ycl(Mag::kPrec * 2);
        mpfr_hypot(ycl.raw(), y.re.raw(), y.im.raw(), MPFR_RNDD);
        Real prod(Mag::kPrec * 2);
        mpfr_mul(prod.raw(), ycl.raw(), ylo.raw(), MPFR_RNDD);
        mpfr_ui_div(inv_den.raw(), 1, prod.raw(), MPFR_RNDU);
    }
    b.rad = top * inv_den;
    // Up to three roundings per component; each is within a few ulps of the
    // quotient's own scale, bounded by |x| / |y|_lower.
    mpfr_exp_t fb;
    {
        Real bound(Mag::kPrec * 2);
        mpfr_div(bound.raw(), ball_abs_upper(x).raw(), ylo.raw(), MPFR_RNDU);
        fb = bound.is_zero() || !bound.is_number() ? mpfr_get_emin() : bound.exponent() + 1;
    }
    detail::bump_rounding(b.rad, b.re, tr1 | tr2 | td, fb, 2);
    detail::bump_rounding(b.rad, b.im, ti1 | ti2 | td, fb, 2);
    return b;
}

inline BallComplex ball_exp(const BallComplex& x, const PrecisionContext& ctx) {
    Real ex(ctx.bits), c(ctx.bits), s(ctx.bits);
    int te = mpfr_exp(ex.raw(), x.re.raw(), MPFR_RNDN);
    detail::require_number(ex);
    int ts = mpfr_sin_cos(s.raw(), c.raw(), x.im.raw(), MPFR_RNDN);
    Real re(ctx.bits), im(ctx.bits);
    int tr = mpfr_mul(re.raw(), ex.raw(), c.raw(), MPFR_RNDN);
    int ti = mpfr_mul(im.raw(), ex.raw(), s.raw(), MPFR_RNDN);
    detail::require_number(re);
    detail::require_number(im);
    BallComplex b = ball_exact(std::move(re), std::move(im));
    // Propagation: |e^z - e^zc| <= e^{Re zc} (e^rad - 1).
    if (!x.rad.is_zero()) {
        Mag mag_ez;
        mpfr_exp(mag_ez.raw(), x.re.raw(), MPFR_RNDU);
        Mag grow;
        mpfr_expm1(grow.raw(), x.rad.raw(), MPFR_RNDU);
        b.rad = mag_ez * grow;
    }
    // Up to three roundings (exp, trig, product) per component, all at the
    // scale of e^{Re z} or below.
    mpfr_exp_t fb = ex.is_zero() ? mpfr_get_emin() : ex.exponent() + 1;
    detail::bump_rounding(b.rad, b.re, te | ts | tr, fb, 2);
    detail::bump_rounding(b.rad, b.im, te | ts | ti, fb, 2);
    return b;
}

// exp(2*pi*i*t) for an exact rational t; the argument is reduced mod 1
// exactly before any rounding, so huge t loses no accuracy.
inline BallComplex ball_exp_2pi_i(const mpq_class& t, const PrecisionContext& ctx) {
    mpq_class frac = t - mpz_class(mpz_class(t.get_num() / t.get_den()));
    if (frac < 0) frac += 1;
    BallComplex pi = ball_pi(ctx);
    BallComplex arg = ball_mul(ball_from(2 * frac, ctx), pi, ctx);
    return ball_exp(ball_mul_i(arg), ctx);
}

// Does ball x contain the whole of ball y?
inline bool ball_contains(const BallComplex& x, const BallComplex& y) {
    Mag dist;
    Real dr = x.re - y.re, di = x.im - y.im;
    mpfr_hypot(dist.raw(), dr.raw(), di.raw(), MPFR_RNDU);
    dist.add(y.rad);
    return dist <= x.rad || (dist.is_zero() && x.rad.is_zero());
}

inline bool ball_overlaps(const BallComplex& x, const BallComplex& y) {
    Mag dist;
    Real dr = x.re - y.re, di = x.im - y.im;
    mpfr_hypot(dist.raw(), dr.raw(), di.raw(), MPFR_RNDU);
    return dist <= x.rad + y.rad;
}

// |x - y| as an upper bound (center distance plus both radii).
inline Mag ball_distance_upper(const BallComplex& x, const BallComplex& y) {
    Mag dist;
    Real dr = x.re - y.re, di = x.im - y.im;
    mpfr_hypot(dist.raw(), dr.raw(), di.raw(), MPFR_RNDU);
    dist.add(x.rad);
    dist.add(y.rad);
    return dist;
}

inline BallComplex ball_inflate(const BallComplex& x, const Mag& extra) {
    BallComplex b = x;
    b.rad.add(extra);
    return b;
}

}  // namespace heegner
