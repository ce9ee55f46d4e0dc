#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "heegner/arith.hpp"
#include "heegner/errors.hpp"
#include "heegner/numerics.hpp"

namespace heegner {

enum class MajorantMode { deligne, explicit_c };

// A normalised newform given by its level, weight and q-expansion.
struct Newform {
    long level = 0;
    long weight = 0;
    std::string label;
    std::optional<int> fricke;
    std::vector<mpq_class> coeffs;  // a_1 .. a_M
    MajorantMode majorant_mode = MajorantMode::deligne;
    double explicit_c = 0;

    long M() const { return static_cast<long>(coeffs.size()); }
    long r() const { return (weight - 2) / 2; }
    const mpq_class& a(long n) const { return coeffs.at(static_cast<size_t>(n - 1)); }

    Newform with_explicit_majorant(double c) const {
        Newform g = *this;
        g.majorant_mode = MajorantMode::explicit_c;
        g.explicit_c = c;
        return g;
    }
};

namespace detail {

inline mpq_class parse_decimal(const std::string& s, long index) {
    auto fail = [&](const std::string& why) -> ParseError {
        return ParseError("modforms", "parse",
                          "coefficients[" + std::to_string(index) + "]: " + why);
    };
    if (s.empty()) throw fail("empty string");
    size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') {
        neg = s[i] == '-';
        ++i;
    }
    std::string digits;
    long frac_digits = 0;
    bool seen_dot = false, seen_digit = false;
    for (; i < s.size(); ++i) {
        if (s[i] == '.') {
            if (seen_dot) throw fail("two decimal points");
            seen_dot = true;
        } else if (s[i] >= '0' && s[i] <= '9') {
            digits.push_back(s[i]);
            seen_digit = true;
            if (seen_dot) ++frac_digits;
        } else {
            throw fail(std::string("unexpected character '") + s[i] + "'");
        }
    }
    if (!seen_digit) throw fail("no digits");
    mpz_class num(digits, 10);
    mpz_class den = arith::pow_z(10, static_cast<unsigned long>(frac_digits));
    mpq_class q(neg ? -num : num, den);
    q.canonicalize();
    return q;
}

inline long line_of_offset(const std::string& text, size_t byte) {
    long line = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace detail

// Deligne-style coefficient bound d_0(n) n^{(w-1)/2}, or the explicit
// c n^{(w-1)/2} variant.
inline Real coefficient_majorant(const Newform& f, long n, long prec = 64) {
    if (n < 1)
        throw PreconditionError("modforms", "majorant", "n must be >= 1");
    Real nw = sqrt(pow_si(Real::of(n, prec), f.weight - 1));
    if (f.majorant_mode == MajorantMode::explicit_c)
        return Real::of(f.explicit_c, prec) * nw;
    return Real::of(static_cast<long>(arith::divisor_count(mpz_class(n))), prec) * nw;
}

// Smooth dominating majorant used for truncation: 2 n^{w/2} >= d_0(n) n^{(w-1)/2}
// (divisor pairing gives d_0(n) <= 2 sqrt(n)); its term ratio is monotone.
namespace detail {

inline void smooth_majorant_upper(Mag& out, const Newform& f, long n) {
    Real t(64);
    if (f.majorant_mode == MajorantMode::explicit_c) {
        mpfr_set_si(t.raw(), n, MPFR_RNDU);
        mpfr_pow_si(t.raw(), t.raw(), f.weight - 1, MPFR_RNDU);
        mpfr_sqrt(t.raw(), t.raw(), MPFR_RNDU);
        mpfr_mul_d(t.raw(), t.raw(), f.explicit_c, MPFR_RNDU);
    } else {
        mpfr_set_si(t.raw(), n, MPFR_RNDU);
        mpfr_pow_si(t.raw(), t.raw(), f.weight / 2, MPFR_RNDU);
        mpfr_mul_ui(t.raw(), t.raw(), 2, MPFR_RNDU);
    }
    mpfr_set(out.raw(), t.raw(), MPFR_RNDU);
}

// Upper bound of the majorant-term ratio between indices n and n+1 at height
// y_lo: (1 + 1/n)^{pow} e^{-2 pi y_lo}.
inline Mag majorant_ratio_upper(const Newform& f, long n, const Real& y_lo) {
    long pw2 = f.majorant_mode == MajorantMode::explicit_c ? f.weight - 1 : f.weight;
    Mag m;
    Real t(64);
    mpfr_set_ui(t.raw(), 1, MPFR_RNDU);
    mpfr_div_si(t.raw(), t.raw(), n, MPFR_RNDU);
    mpfr_add_ui(t.raw(), t.raw(), 1, MPFR_RNDU);
    mpfr_pow_si(t.raw(), t.raw(), pw2, MPFR_RNDU);  // (1+1/n)^{2 pow} over 2: see below
    mpfr_sqrt(t.raw(), t.raw(), MPFR_RNDU);          // exponent pow = pw2 / 2
    Real e(64);
    mpfr_const_pi(e.raw(), MPFR_RNDD);
    mpfr_mul_si(e.raw(), e.raw(), 2, MPFR_RNDD);
    mpfr_mul(e.raw(), e.raw(), y_lo.raw(), MPFR_RNDD);
    mpfr_neg(e.raw(), e.raw(), MPFR_RNDU);
    mpfr_exp(e.raw(), e.raw(), MPFR_RNDU);
    mpfr_mul(t.raw(), t.raw(), e.raw(), MPFR_RNDU);
    mpfr_set(m.raw(), t.raw(), MPFR_RNDU);
    return m;
}

// Upper bound of majorant(n) e^{-2 pi n y_lo}.
inline Mag majorant_term_upper(const Newform& f, long n, const Real& y_lo) {
    Mag u;
    smooth_majorant_upper(u, f, n);
    Real e(64);
    mpfr_const_pi(e.raw(), MPFR_RNDD);
    mpfr_mul_si(e.raw(), e.raw(), 2 * n, MPFR_RNDD);
    mpfr_mul(e.raw(), e.raw(), y_lo.raw(), MPFR_RNDD);
    mpfr_neg(e.raw(), e.raw(), MPFR_RNDU);
    mpfr_exp(e.raw(), e.raw(), MPFR_RNDU);
    Mag ee;
    mpfr_set(ee.raw(), e.raw(), MPFR_RNDU);
    u.mul(ee);
    return u;
}

// Bounds the whole series tail whose first omitted term is at most `first`
// and whose term ratios are at most `rho`: first / (1 - rho).  Succeeds only
// when rho < 7/8 and the bound fits below eps / 2; for rho <= 1/2 the bound
// is twice the first omitted term.
inline bool geometric_tail(const Mag& first, const Mag& rho, double eps, Mag& tail) {
    if (!(rho < Mag::of(0.875))) return false;
    Real denom(64);
    mpfr_ui_sub(denom.raw(), 1, rho.raw(), MPFR_RNDD);
    Mag t;
    mpfr_div(t.raw(), first.raw(), denom.raw(), MPFR_RNDU);
    if (!(t.to_double() < eps / 2)) return false;
    tail = t;
    return true;
}

}  // namespace detail

// Parses the normative newform JSON document.  Unknown top-level keys are
// rejected; coefficients may be exact integers or decimal strings.
inline Newform parse_newform(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("modforms", "parse", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("modforms", "parse",
                         path + ":" + std::to_string(detail::line_of_offset(text, e.byte)) +
                             ": " + e.what());
    }

    if (!j.is_object()) throw ParseError("modforms", "parse", path + ": not a JSON object");
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (key != "level" && key != "weight" && key != "label" && key != "fricke" &&
            key != "coefficients")
            throw ParseError("modforms", "parse", path + ": unknown key \"" + key + "\"");
    }
    for (const char* key : {"level", "weight", "label", "coefficients"})
        if (!j.contains(key))
            throw ParseError("modforms", "parse", path + ": missing key \"" + key + "\"");

    Newform f;
    if (!j["level"].is_number_integer() || j["level"].get<long>() < 5)
        throw ParseError("modforms", "parse", path + ": level must be an integer >= 5");
    f.level = j["level"].get<long>();
    if (!j["weight"].is_number_integer())
        throw ParseError("modforms", "parse", path + ": weight must be an integer");
    f.weight = j["weight"].get<long>();
    if (f.weight % 2 != 0)
        throw ParseError("modforms", "parse", path + ": weight must be even");
    if (f.weight < 4)
        throw ParseError("modforms", "parse", path + ": weight must be >= 4");
    if (!j["label"].is_string())
        throw ParseError("modforms", "parse", path + ": label must be a string");
    f.label = j["label"].get<std::string>();
    if (j.contains("fricke") && !j["fricke"].is_null()) {
        if (!j["fricke"].is_number_integer() ||
            (j["fricke"].get<int>() != 1 && j["fricke"].get<int>() != -1))
            throw ParseError("modforms", "parse", path + ": fricke must be 1, -1 or null");
        f.fricke = j["fricke"].get<int>();
    }
    if (!j["coefficients"].is_array() || j["coefficients"].size() < 10)
        throw ParseError("modforms", "parse", path + ": need at least 10 coefficients");
    long idx = 0;
    for (const auto& item : j["coefficients"]) {
        if (item.is_number_integer())
            f.coeffs.emplace_back(static_cast<long>(item.get<long long>()));
        else if (item.is_string())
            f.coeffs.push_back(detail::parse_decimal(item.get<std::string>(), idx));
        else
            throw ParseError("modforms", "parse",
                             path + ": coefficients[" + std::to_string(idx) +
                                 "] must be an integer or decimal string");
        ++idx;
    }
    if (f.coeffs[0] != 1)
        throw ParseError("modforms", "parse", path + ": a_1 must be 1 (normalised form)");

    // Spot-check the Deligne bound a_n^2 <= d_0(n)^2 n^{w-1} on everything
    // stored, exactly.
    for (long n = 1; n <= f.M(); ++n) {
        mpq_class a2 = f.a(n) * f.a(n);
        mpz_class d0(static_cast<long>(arith::divisor_count(mpz_class(n))));
        mpz_class bound = d0 * d0 * arith::pow_z(mpz_class(n), f.weight - 1);
        if (a2 > bound)
            throw ParseError("modforms", "parse",
                             path + ": coefficient a_" + std::to_string(n) +
                                 " exceeds its Deligne majorant");
    }
    return f;
}

// Truncation index for target eps at height y_lo, ignoring the stored
// coefficient count (used to report how many terms would be needed).
inline long required_terms(const Newform& f, const Real& y_lo, double eps) {
    for (long n = 1; n < 4000000; ++n) {
        Mag tail;
        if (detail::geometric_tail(detail::majorant_term_upper(f, n + 1, y_lo),
                                   detail::majorant_ratio_upper(f, n + 1, y_lo), eps, tail))
            return n;
    }
    throw ToleranceError("modforms", "cannot satisfy tolerance at this height", eps);
}

// f(z) = sum a_n e^{2 pi i n z}, truncated at the least index whose majorant
// tail fits in target_eps; the tail bound is charged to the radius.
inline BallComplex eval_newform(const Newform& f, const BallComplex& z,
                                const PrecisionContext& ctx, double y_min = 0.05) {
    Real y_lo(64);
    mpfr_sub(y_lo.raw(), z.im.raw(), z.rad.raw(), MPFR_RNDD);
    if (mpfr_cmp_d(y_lo.raw(), y_min) < 0)
        throw PreconditionError("modforms", "height",
                                "Im z must be at least the configured minimum height");

    long terms = required_terms(f, y_lo, ctx.target_eps);
    if (terms > f.M())
        throw Error("modforms", "insufficient_coefficients",
                    "have " + std::to_string(f.M()) + " coefficients, need about " +
                        std::to_string(terms));

    BallComplex two_pi_i_z = ball_mul_i(ball_mul(
        ball_mul(ball_from(2L, ctx), ball_pi(ctx), ctx), z, ctx));
    BallComplex q = ball_exp(two_pi_i_z, ctx);
    BallComplex qn = q;
    BallComplex acc = ball_from(0L, ctx);
    for (long n = 1; n <= terms; ++n) {
        acc = ball_add(acc, ball_mul(ball_from(f.a(n), ctx), qn, ctx), ctx);
        if (n < terms) qn = ball_mul(qn, q, ctx);
    }
    Mag tail;
    detail::geometric_tail(detail::majorant_term_upper(f, terms + 1, y_lo),
                           detail::majorant_ratio_upper(f, terms + 1, y_lo), ctx.target_eps,
                           tail);
    acc.rad.add(tail);
    return acc;
}

// Computable constant c with |f(z) - e^{2 pi i z}| <= c e^{-4 pi Im z} for
// all Im z >= y0: sum the majorant of |a_n| e^{-2 pi n y} against e^{-4 pi y}.
inline Real cusp_bound_constant(const Newform& f, const Real& y0, long prec = 64) {
    Real acc(prec);
    mpfr_set_zero(acc.raw(), 1);
    // term(n) = majorant(n) e^{-2 pi (n-2) y0}, summed with upward rounding.
    for (long n = 2; n < 2000000; ++n) {
        Mag u;
        detail::smooth_majorant_upper(u, f, n);
        Real e(prec);
        mpfr_const_pi(e.raw(), MPFR_RNDD);
        mpfr_mul_si(e.raw(), e.raw(), 2 * (n - 2), MPFR_RNDD);
        mpfr_mul(e.raw(), e.raw(), y0.raw(), MPFR_RNDD);
        mpfr_neg(e.raw(), e.raw(), MPFR_RNDU);
        mpfr_exp(e.raw(), e.raw(), MPFR_RNDU);
        Real term(prec);
        mpfr_mul(term.raw(), u.raw(), e.raw(), MPFR_RNDU);
        mpfr_add(acc.raw(), acc.raw(), term.raw(), MPFR_RNDU);
        if (n >= 4 && detail::majorant_ratio_upper(f, n, y0) < Mag::of(0.5)) {
            Real next(prec);
            mpfr_mul_2si(next.raw(), term.raw(), 1, MPFR_RNDU);
            // remaining tail <= 2 * next term <= 2 * current term
            if (mpfr_cmp_d(term.raw(), 1e-40) < 0 || term < acc * Real::of(1e-30, prec)) {
                mpfr_add(acc.raw(), acc.raw(), next.raw(), MPFR_RNDU);
                return acc;
            }
        }
    }
    throw ToleranceError("modforms", "cusp bound constant did not converge", 0.0);
}

}  // namespace heegner
