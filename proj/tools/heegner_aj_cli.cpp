// Command-line front end: evaluates Abel-Jacobi representatives of Heegner
// cycles at explicit CM points, enumerates the isogeny data, generates the
// prime index set, and computes period functionals.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "heegner/heegner.hpp"

namespace {

using namespace heegner;

struct GlobalOpts {
    long prec = 128;
    double eps = 1e-25;
    int jobs = 1;
    std::string out;
    std::string format = "csv";
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmt_real(const Real& x, int digits = 24) {
    return x.to_string(digits);
}

std::string fmt_mag(const Mag& m) {
    // Inflate slightly so the printed two-digit radius stays an upper bound.
    Mag out = m;
    out.mul(Mag::of(1.0625));
    return out.to_string();
}

// Radius to report for a printed center: the ball radius plus the print
// round-off of a 24-digit mantissa.
Mag printed_radius(const BallComplex& b) {
    Mag m = b.rad;
    Mag c = ball_center_abs_upper(b);
    c.mul_2si(-78);
    m.add(c);
    return m;
}

struct Output {
    std::ostream* os = &std::cout;
    std::ofstream file;

    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file)
            throw ParseError("cli", "output", "cannot open output file " + path);
        os = &file;
    }
};

P1 parse_beta(const std::string& s, long q) {
    if (s == "inf" || s == "oo" || s == "infinity") return P1::infinity();
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return P1::of(v, q);
    } catch (const std::exception&) {
        throw ParseError("cli", "beta", "beta must be an integer or 'inf'");
    }
}

std::string config_line(const std::string& sub, const std::string& params,
                        const GlobalOpts& g) {
    std::ostringstream canon;
    canon << sub << "|prec=" << g.prec << "|eps=" << g.eps << "|format=" << g.format << "|"
          << params;
    std::ostringstream line;
    line << "# heegner-aj " << sub << " config=" << std::hex << fnv1a(canon.str()) << std::dec
         << " prec=" << g.prec << " eps=" << g.eps << " " << params;
    return line.str();
}

// Chooses a per-row context reaching `rel` relative accuracy on a quantity
// whose magnitude has binary exponent `scale_exp`.
PrecisionContext row_context(const GlobalOpts& g, long scale_exp, double rel) {
    double log2rel = std::log2(rel);
    double eps_log2 = static_cast<double>(scale_exp) + log2rel;
    double eps = eps_log2 < -980 ? std::ldexp(1.0, -980) : std::ldexp(1.0, (int)eps_log2);
    long bits = std::max(g.prec, static_cast<long>(-eps_log2) + 48);
    return PrecisionContext(bits, eps);
}

// ---------------------------------------------------------------------- aj
int cmd_aj(const GlobalOpts& g, const std::string& newform_path, long dk, long N_opt, long c,
           long d, long p, long q, const std::string& beta_str, bool unnormalized,
           Output& out) {
    Newform f = parse_newform(newform_path);
    long N = N_opt > 0 ? N_opt : f.level;
    if (N != f.level)
        throw PreconditionError("cli", "level", "newform level does not match --N");
    ImagQuadField K(dk);
    if (!heegner_hypothesis(dk, N))
        throw PreconditionError("cli", "heegner", "Heegner hypothesis fails for this (d_K, N)");
    LevelStructure ls = level_structure_from_t(c, d, N);
    P1 beta = parse_beta(beta_str, q);
    CMPoint pt = tau_pq_t(K, ls, p, q, beta);
    if (unnormalized) {
        pt.p.reset();  // skip the p = q = 1 (mod N) normalization check
    }
    PrecisionContext ctx(g.prec, g.eps);
    AJResult res = aj_representative(f, pt, ctx);

    std::ostringstream params;
    params << "newform=" << f.label << " dK=" << dk << " N=" << N << " c=" << c << " d=" << d
           << " p=" << p << " q=" << q << " beta=" << beta.str();
    *out.os << config_line("aj", params.str(), g) << "\n";
    if (g.format == "table") {
        *out.os << "label          " << res.label << "\n"
                << "point          " << pt.value.str() << "\n"
                << "degree         " << pt.degree << "\n"
                << "conductor      " << pt.conductor.get_str() << "\n"
                << "r              " << res.r << "\n"
                << "m_kk           " << res.m_kk.get_str() << "\n"
                << "integral.re    " << fmt_real(res.integral.re) << "\n"
                << "integral.im    " << fmt_real(res.integral.im) << "\n"
                << "integral.rad   " << fmt_mag(printed_radius(res.integral)) << "\n"
                << "constant       " << res.constant.rational.get_str() << " * (2pi)^"
                << res.constant.pi_power << " * i^" << res.constant.i_power << "\n"
                << "value.re       " << fmt_real(res.representative.re) << "\n"
                << "value.im       " << fmt_real(res.representative.im) << "\n"
                << "value.rad      " << fmt_mag(printed_radius(res.representative)) << "\n";
    } else {
        *out.os << "label,p,q,beta,r,re,im,radius,abs\n";
        *out.os << res.label << "," << p << "," << q << "," << beta.str() << "," << res.r << ","
                << fmt_real(res.representative.re) << "," << fmt_real(res.representative.im)
                << "," << fmt_mag(printed_radius(res.representative)) << ","
                << fmt_mag(ball_abs_upper(res.representative)) << "\n";
    }
    return 0;
}

// -------------------------------------------------------------------- isog
int cmd_isog(const GlobalOpts& g, long dk, long q, long N, long c, long d, bool with_ls,
             Output& out) {
    ImagQuadField K(dk);
    std::ostringstream params;
    params << "dK=" << dk << " q=" << q;
    if (with_ls) params << " N=" << N << " c=" << c << " d=" << d;
    *out.os << config_line("isog", params.str(), g) << "\n";
    *out.os << "q,beta,conductor,beta_prime,u,v\n";

    std::optional<LevelStructure> ls;
    if (with_ls) ls = level_structure_from_t(c, d, N);

    std::vector<P1> betas{P1::infinity()};
    for (long b = 0; b < q; ++b) betas.push_back(P1::of(b, q));
    for (const P1& beta : betas) {
        CMPoint pt = ls ? tau_t(K, *ls, q, beta) : tau_q_beta(K, q, beta);
        std::string bp = ls ? kernel_match(*ls, q, beta).str() : "-";
        *out.os << q << "," << beta.str() << "," << pt.conductor.get_str() << "," << bp << ","
                << pt.value.u.get_str() << "," << pt.value.v.get_str() << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ primes
int cmd_primes(const GlobalOpts& g, long dk, long N, long c, long d, std::int64_t limit,
               std::int64_t ell, int count, Output& out) {
    ImagQuadField K(dk);
    LevelStructure ls = level_structure_from_t(c, d, N);
    std::ostringstream params;
    params << "dK=" << dk << " N=" << N << " c=" << c << " d=" << d;
    if (ell > 0)
        params << " ell=" << ell << " count=" << count;
    else
        params << " limit=" << limit;
    *out.os << config_line("primes", params.str(), g) << "\n";
    if (ell > 0) {
        for (std::int64_t qq : theorem_q_search(K, ls, N, ell, count)) *out.os << qq << "\n";
    } else {
        for (const IndexPair& pr : index_stream(K, ls, N, limit))
            *out.os << pr.p << " " << pr.q << "\n";
    }
    return 0;
}

// ----------------------------------------------------------------- periods
int cmd_periods(const GlobalOpts& g, const std::string& newform_path, const std::string& poly,
                Output& out) {
    Newform f = parse_newform(newform_path);
    std::vector<mpz_class> P;
    std::stringstream ss(poly);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty())
            throw ParseError("cli", "poly", "empty coefficient in --poly");
        try {
            P.emplace_back(tok);
        } catch (const std::exception&) {
            throw ParseError("cli", "poly", "bad integer coefficient \"" + tok + "\"");
        }
    }
    if (P.empty()) throw ParseError("cli", "poly", "--poly needs at least one coefficient");

    PrecisionContext ctx(g.prec, g.eps);
    CuspFunctional J = j_functional(f, P, ctx);

    std::ostringstream params;
    params << "newform=" << f.label << " poly=" << poly;
    *out.os << config_line("periods", params.str(), g) << "\n";
    *out.os << "re,im,radius\n";
    *out.os << fmt_real(J.value.re) << "," << fmt_real(J.value.im) << ","
            << fmt_mag(printed_radius(J.value)) << "\n";
    return 0;
}

// ------------------------------------------------------------------- sweep
struct SweepRow {
    long p = 0;
    std::string text;
};

int cmd_sweep(const GlobalOpts& g, const std::string& newform_path, long dk, long c, long d,
              long q_opt, const std::string& beta_str, double gamma_min, double gamma_max,
              Output& out) {
    Newform f = parse_newform(newform_path);
    long N = f.level;
    ImagQuadField K(dk);
    if (!heegner_hypothesis(dk, N))
        throw PreconditionError("cli", "heegner", "Heegner hypothesis fails for this (d_K, N)");
    LevelStructure ls = level_structure_from_t(c, d, N);
    long r = f.r();

    // q: explicit, or the smallest prime meeting the index-set conditions.
    long q = q_opt;
    if (q <= 0) {
        for (long cand = 3;; cand += 2) {
            if (!is_prime_u64(cand) || cand % N != 1) continue;
            if (K.d_K() % cand == 0 || ls.c % cand == 0) continue;
            mpz_class M = ls.ctd_norm(K);
            if (mpz_divisible_ui_p(M.get_mpz_t(), cand)) continue;
            if (splitting_type(cand, K) != SplittingType::inert) continue;
            q = cand;
            break;
        }
    }
    P1 beta = parse_beta(beta_str, q);
    if (beta.inf)
        throw PreconditionError("cli", "sweep", "sweep varies gamma = p/q; beta must be finite");

    // p with gamma = p/q in [gamma_min, gamma_max], p = 1 mod N, coprime.
    std::vector<long> ps;
    {
        mpz_class M = ls.ctd_norm(K);
        for (long p = std::max(q + 1, (long)std::ceil(gamma_min * q)); p <= (long)(gamma_max * q);
             ++p) {
            if (!is_prime_u64(p) || p % N != 1 || p == q) continue;
            if (K.d_K() % p == 0 || ls.c % p == 0) continue;
            if (mpz_divisible_ui_p(M.get_mpz_t(), (unsigned long)p)) continue;
            ps.push_back(p);
        }
    }
    if (ps.empty())
        throw PreconditionError("cli", "sweep", "no valid p in the requested gamma range");

    // One cusp-bound constant for the whole sweep, at the smallest height.
    PrecisionContext base(g.prec, g.eps);
    Real y0_min(64);
    {
        mpq_class gmin(ps.front(), q);
        mpq_class yc = gmin / (2 * mpq_class(ls.ctd_norm(K)));
        Real t = Real::of(yc, 64) * sqrt(Real::of(mpz_class(dk), 64));
        mpfr_set(y0_min.raw(), t.raw(), MPFR_RNDD);
    }
    Real c_const = cusp_bound_constant(f, y0_min);

    std::ostringstream params;
    params << "newform=" << f.label << " dK=" << dk << " N=" << N << " c=" << c << " d=" << d
           << " q=" << q << " beta=" << beta.str() << " gamma=[" << gamma_min << ","
           << gamma_max << "]";
    *out.os << config_line("sweep", params.str(), g) << "\n";
    *out.os << "p,q,beta,gamma,kappa,X,Y,I,absJ,absAJ,rel_err,bound\n";

    std::vector<SweepRow> rows(ps.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= ps.size()) return;
            long p = ps[i];
            AsymptoticDatum d0 = datum(K, ls, r, p, q, beta, base);
            // Scale of the line integral = |J| / |constant|, driving the
            // per-row precision bump.
            AJConstant cst = aj_constant(N, p * q, r, mpq_class(p, q) * gamma_tau(K, ls).v);
            Mag cabs = ball_center_abs_upper(cst.value(base));
            long scale_exp = -60;
            if (!d0.J_mag.re.is_zero() && !cabs.is_zero())
                scale_exp = d0.J_mag.re.exponent() - mpfr_get_exp(cabs.raw());
            PrecisionContext ctx = row_context(g, scale_exp, g.eps);
            AsymptoticDatum dd = datum(K, ls, r, p, q, beta, ctx);
            CMPoint pt = tau_pq_t(K, ls, p, q, beta);
            AJResult aj = aj_representative(f, pt, ctx);
            Mag dist = ball_distance_upper(aj.representative, dd.J);
            Real jlo = ball_abs_lower(dd.J);
            Real rel(64);
            mpfr_div(rel.raw(), dist.raw(), jlo.raw(), MPFR_RNDU);
            Real bound = lem_est_bound(K, ls, p, q, beta, c_const);

            std::ostringstream line;
            line << p << "," << q << "," << beta.str() << "," << dd.gamma.get_str() << ","
                 << dd.kappa << "," << fmt_real(dd.X) << "," << fmt_real(dd.Y) << ","
                 << fmt_real(dd.I.re) << "," << fmt_real(dd.J_mag.re) << ","
                 << fmt_real(hypot(aj.representative.re, aj.representative.im)) << ","
                 << rel.to_string(6) << "," << bound.to_string(6) << "\n";
            rows[i] = {p, line.str()};
        }
    };
    int jobs = std::max(1, g.jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs - 1; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& row : rows) *out.os << row.text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Abel-Jacobi evaluation of Heegner cycle data at explicit CM points"};
    app.require_subcommand(1);

    GlobalOpts g;
    if (const char* env = std::getenv("HEEGNER_AJ_PREC")) g.prec = std::atol(env);
    app.add_option("--prec", g.prec, "working precision in bits");
    app.add_option("--eps", g.eps, "target accuracy (absolute; relative per row for sweep)");
    app.add_option("--jobs", g.jobs, "worker threads for sweeps");
    app.add_option("--out", g.out, "output path (default stdout)");
    app.add_option("--format", g.format, "csv or table")
        ->check(CLI::IsMember({"csv", "table"}));

    auto* aj = app.add_subcommand("aj", "Abel-Jacobi representative at one CM point");
    aj->fallthrough();
    std::string nf_path, beta_str = "inf";
    long dk = 11, N_opt = 0, c = 1, d = 1, p = 0, q = 0, ell = 0;
    std::int64_t limit = 500;
    int count = 3;
    bool unnormalized = false, with_ls = false;
    double gamma_min = 10, gamma_max = 40;
    std::string poly;
    aj->add_option("--newform", nf_path)->required();
    aj->add_option("--dk", dk)->required();
    aj->add_option("--N", N_opt);
    aj->add_option("--c", c);
    aj->add_option("--d", d);
    aj->add_option("--p", p)->required();
    aj->add_option("--q", q)->required();
    aj->add_option("--beta", beta_str);
    aj->add_flag("--unnormalized", unnormalized,
                 "evaluate even when p, q are not 1 mod N");

    auto* isog = app.add_subcommand("isog", "enumerate CM points above one prime");
    isog->fallthrough();
    isog->add_option("--dk", dk)->required();
    isog->add_option("--q", q)->required();
    isog->add_option("--N", N_opt);
    isog->add_option("--c", c);
    isog->add_option("--d", d);
    isog->add_flag("--level-structure", with_ls, "twist by the level structure (c, d)");

    auto* primes = app.add_subcommand("primes", "index pairs (p, q), or the q-search with --ell");
    primes->fallthrough();
    primes->add_option("--dk", dk)->required();
    primes->add_option("--N", N_opt)->required();
    primes->add_option("--c", c);
    primes->add_option("--d", d);
    primes->add_option("--limit", limit);
    primes->add_option("--ell", ell);
    primes->add_option("--count", count);

    auto* periods = app.add_subcommand("periods", "lattice functional J_{0,ioo,P}");
    periods->fallthrough();
    periods->add_option("--newform", nf_path)->required();
    periods->add_option("--poly", poly, "integer coefficients c0,c1,...")->required();

    auto* sweep = app.add_subcommand("sweep", "decay sweep over p at fixed q");
    sweep->fallthrough();
    sweep->add_option("--newform", nf_path)->required();
    sweep->add_option("--dk", dk)->required();
    sweep->add_option("--c", c);
    sweep->add_option("--d", d);
    sweep->add_option("--q", q, "inert prime (0 = smallest valid)");
    sweep->add_option("--beta", beta_str, "finite beta (default 0)");
    sweep->add_option("--gamma-min", gamma_min);
    sweep->add_option("--gamma-max", gamma_max);

    CLI11_PARSE(app, argc, argv);

    try {
        Output out;
        out.open(g.out);
        if (app.got_subcommand(aj))
            return cmd_aj(g, nf_path, dk, N_opt, c, d, p, q, beta_str, unnormalized, out);
        if (app.got_subcommand(isog))
            return cmd_isog(g, dk, q, N_opt > 0 ? N_opt : 5, c, d, with_ls, out);
        if (app.got_subcommand(primes))
            return cmd_primes(g, dk, N_opt, c, d, limit, ell, count, out);
        if (app.got_subcommand(periods)) return cmd_periods(g, nf_path, poly, out);
        if (app.got_subcommand(sweep)) {
            if (beta_str == "inf") beta_str = "0";
            return cmd_sweep(g, nf_path, dk, c, d, q, beta_str, gamma_min, gamma_max, out);
        }
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const ToleranceError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "E:cli:unexpected:" << e.what() << "\n";
        return 1;
    }
    return 0;
}
