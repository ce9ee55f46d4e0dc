#include "catch_amalgamated.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heegner/heegner.hpp"

namespace {

const char* kCli = HEEGNER_CLI;
const char* kFixture = HEEGNER_FIXTURE;

struct RunResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    std::string out = "/tmp/heegner_cli_out.txt", err = "/tmp/heegner_cli_err.txt";
    std::string cmd = std::string(kCli) + " " + args + " >" + out + " 2>" + err;
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = WEXITSTATUS(rc);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> body_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    return lines;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

TEST_CASE("aj subcommand end to end") {
    RunResult r = run(std::string("aj --newform ") + kFixture +
                      " --dk 11 --c 1 --d 1 --p 61 --q 41 --beta 0");
    CHECK(r.code == 0);
    auto lines = body_lines(r.out);
    REQUIRE(lines.size() == 2);  // header + row
    auto cols = split(lines[1], ',');
    REQUIRE(cols.size() == 9);
    CHECK(cols[0] == "5.4.a.a");
    CHECK(cols[1] == "61");
    CHECK(cols[3] == "0");
    double rad = std::stod(cols[7]), absv = std::stod(cols[8]);
    CHECK(rad > 0);  // finite radius
    CHECK(rad < 1e-15 * absv);
}

TEST_CASE("aj CSV row parses back within its printed radius") {
    RunResult r = run(std::string("aj --newform ") + kFixture +
                      " --dk 11 --c 1 --d 1 --p 101 --q 41 --beta 0");
    REQUIRE(r.code == 0);
    auto cols = split(body_lines(r.out)[1], ',');
    double re = std::stod(cols[5]), im = std::stod(cols[6]), rad = std::stod(cols[7]);

    using namespace heegner;
    PrecisionContext ctx(128, 1e-25);
    Newform f = parse_newform(kFixture);
    ImagQuadField K(11);
    LevelStructure ls = level_structure_from_t(1, 1, 5);
    AJResult res = aj_representative(f, tau_pq_t(K, ls, 101, 41, P1::of(0, 41)), ctx);
    CHECK(std::abs(re - res.representative.re.to_double()) <= rad);
    CHECK(std::abs(im - res.representative.im.to_double()) <= rad);
}

TEST_CASE("missing file and unnormalized primes map to documented exits") {
    RunResult missing = run("aj --newform /nonexistent.json --dk 11 --p 61 --q 41");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("E:modforms:parse") == 0);

    RunResult badp = run(std::string("aj --newform ") + kFixture +
                         " --dk 11 --p 29 --q 7 --beta inf");
    CHECK(badp.code == 3);
    CHECK(badp.err.find("E:aj:normalization") == 0);

    RunResult forced = run(std::string("aj --newform ") + kFixture +
                           " --dk 11 --p 29 --q 7 --beta inf --unnormalized");
    CHECK(forced.code == 0);
}

TEST_CASE("isog emits q + 1 rows with the right conductors") {
    RunResult r = run("isog --dk 11 --q 7");
    CHECK(r.code == 0);
    auto lines = body_lines(r.out);
    REQUIRE(lines.size() == 9);  // column header + 8 rows
    CHECK(lines[0] == "q,beta,conductor,beta_prime,u,v");
    for (size_t i = 1; i < lines.size(); ++i) {
        auto cols = split(lines[i], ',');
        REQUIRE(cols.size() == 6);
        CHECK(cols[0] == "7");
        CHECK(cols[2] == "7");
    }
    // With the level structure, beta' fills in and stays a bijection.
    RunResult rt = run("isog --dk 11 --q 7 --N 5 --c 1 --d 1 --level-structure");
    CHECK(rt.code == 0);
    auto tl = body_lines(rt.out);
    std::set<std::string> betas;
    for (size_t i = 1; i < tl.size(); ++i) betas.insert(split(tl[i], ',')[3]);
    CHECK(betas.size() == 8);
}

TEST_CASE("primes subcommand, both modes") {
    RunResult pairs = run("primes --dk 11 --N 5 --limit 700");
    CHECK(pairs.code == 0);
    auto pl = body_lines(pairs.out);
    REQUIRE(!pl.empty());
    for (const auto& line : pl) {
        auto cols = split(line, ' ');
        REQUIRE(cols.size() == 2);
        long p = std::stol(cols[0]), q = std::stol(cols[1]);
        CHECK(p > q);
        CHECK(heegner::is_prime_u64(p));
        CHECK(heegner::is_prime_u64(q));
    }

    RunResult qs = run("primes --dk 11 --N 5 --ell 13 --count 3");
    CHECK(qs.code == 0);
    auto ql = body_lines(qs.out);
    REQUIRE(ql.size() == 3);
    for (const auto& line : ql) {
        long q = std::stol(line);
        CHECK(q % 13 == 12);
        CHECK(q % 5 == 1);
    }
}

TEST_CASE("periods subcommand emits a value") {
    RunResult r = run(std::string("periods --newform ") + kFixture + " --poly 1,0,2");
    CHECK(r.code == 0);
    auto lines = body_lines(r.out);
    REQUIRE(lines.size() == 2);
    auto cols = split(lines[1], ',');
    REQUIRE(cols.size() == 3);
    CHECK(std::isfinite(std::stod(cols[0])));
    CHECK(std::stod(cols[2]) < 1e-9);
}

TEST_CASE("sweep output is byte-identical across runs and thread counts") {
    std::string base = std::string("sweep --newform ") + kFixture +
                       " --dk 11 --c 1 --d 1 --gamma-min 10 --gamma-max 13 --eps 1e-18";
    RunResult a = run(base + " --jobs 1");
    RunResult b = run(base + " --jobs 1");
    RunResult c = run(base + " --jobs 3");
    CHECK(a.code == 0);
    REQUIRE(body_lines(a.out).size() > 1);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("sweep rows respect the error bound") {
    RunResult r = run(std::string("sweep --newform ") + kFixture +
                      " --dk 11 --c 1 --d 1 --gamma-min 10 --gamma-max 14 --eps 1e-30");
    REQUIRE(r.code == 0);
    auto lines = body_lines(r.out);
    REQUIRE(lines.size() > 2);
    for (size_t i = 2; i < lines.size(); ++i) {
        auto cols = split(lines[i], ',');
        REQUIRE(cols.size() == 12);
        double rel = std::stod(cols[10]), bound = std::stod(cols[11]);
        CHECK(rel <= bound);
    }
}
