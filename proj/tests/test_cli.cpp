#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "slk/problems.hpp"

using namespace slk;
using std::numbers::pi;

namespace {
std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Complex q_at(const std::string& builtin, double x) { return builtin_problem(builtin).q(x); }
} // namespace

TEST_CASE("builtin catalog golden values") {
    CHECK(std::abs(q_at("paine1", 0.0) - 1.0) < 1e-16);
    CHECK(std::abs(q_at("paine1", 1.0) - 2.7182818284590451) < 1e-15);
    CHECK(std::abs(q_at("paine1", pi) - 23.140692632779267) < 1e-13);

    CHECK(std::abs(q_at("paine2", 0.0) - 100.0) < 1e-12);
    CHECK(std::abs(q_at("paine2", 0.9) - 1.0) < 1e-15);
    CHECK(std::abs(q_at("paine2", pi / 2) - 0.35822259561771908) < 1e-15);

    CHECK(std::abs(q_at("coffey_evans(50)", 0.0) - (-100.0)) < 1e-12);
    CHECK(std::abs(q_at("coffey_evans(50)", pi / 4) - 2500.0) < 1e-10);
    CHECK(std::abs(q_at("coffey_evans(50)", pi / 2) - 100.0) < 1e-12);

    CHECK(std::abs(q_at("complex_const", 0.3) - Complex(3, 4)) == 0.0);
    CHECK(std::abs(q_at("complex_const(1-2*i)", 0.7) - Complex(1, -2)) == 0.0);

    CHECK(std::abs(q_at("chanane", 0.0) - 1.0) < 1e-16);
    CHECK(std::abs(q_at("chanane", 0.25) -
                   Complex(0.87758256189037276, 0.47942553860420301)) < 1e-16);
    CHECK(std::abs(q_at("chanane", 1.0) -
                   Complex(-0.41614683654714241, 0.90929742682568171)) < 1e-16);

    for (double x : {0.5, 1.0, 1.5}) CHECK(q_at("square_well", x) == Complex(-15.0));
    CHECK(builtin_problem("square_well").well);

    CHECK(std::abs(q_at("sech2", 5.0) - (-12.0)) < 1e-14);
    CHECK(std::abs(q_at("sech2", 5.0 + 1.3169578969248166) - (-3.0)) < 1e-13);
    CHECK(std::abs(q_at("sech2", 0.0) - (-0.0021789987713256801)) < 1e-17);

    CHECK_THROWS_AS(builtin_problem("nosuch"), config_error);
    CHECK_THROWS_AS(builtin_problem("square_well(1)"), config_error);
    CHECK(builtin_names().size() == 7);
}

TEST_CASE("run config validation") {
    RunConfig r;
    CHECK_NOTHROW(r.validate());
    r.N = 0;
    CHECK_THROWS_AS(r.validate(), config_error);
    r.N = 30;
    r.M = 60;
    CHECK_THROWS_AS(r.validate(), config_error);
    r.M = 68;
    CHECK_NOTHROW(r.validate());
    r.format = "xml";
    CHECK_THROWS_AS(r.validate(), config_error);
}

TEST_CASE("interval and boundary parsing") {
    auto iv = parse_interval("0, pi");
    CHECK(iv.lo == 0.0);
    CHECK(iv.hi == doctest::Approx(pi).epsilon(1e-16));
    CHECK_THROWS_AS(parse_interval("1,1"), config_error);
    CHECK_THROWS_AS(parse_interval("0"), config_error);

    auto robin = parse_boundary("2, omega");
    CHECK(robin.alpha(Complex(5)) == Complex(2));
    CHECK(robin.beta(Complex(5)) == Complex(5));
    auto d = parse_boundary("dirichlet");
    CHECK(d.beta(1.0) == Complex(0));
    CHECK_THROWS_AS(parse_boundary("cauchy"), config_error);
}

TEST_CASE("config file parsing") {
    std::istringstream in(R"(# free problem
[problem]
interval = "0, pi"
expression = "0"
bc_left = dirichlet
bc_right = dirichlet

[run]
n = 10
m = 64
count = 5

[output]
format = json
)");
    auto job = parse_config(in);
    CHECK(job.expression == "0");
    CHECK(job.run.N == 10);
    CHECK(job.run.M == 64);
    CHECK(job.run.count == 5);
    CHECK(job.run.format == "json");

    SUBCASE("unknown key reports the line") {
        std::istringstream bad("[problem]\nexpression = \"0\"\nfoo = 1\n");
        try {
            parse_config(bad);
            FAIL("expected a throw");
        } catch (const config_error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("potential source is mandatory and unique") {
        std::istringstream none("[run]\nn = 10\nm = 64\n");
        CHECK_THROWS_AS(parse_config(none), config_error);
        std::istringstream both("[problem]\nexpression = \"0\"\nbuiltin = paine1\n");
        CHECK_THROWS_AS(parse_config(both), config_error);
    }
}

TEST_CASE("sampled potential interpolation") {
    // Samples of x^3 on [0,2]; a cubic spline with natural ends is not
    // exact for cubics, so compare against a dense-grid tolerance.
    std::ostringstream rows;
    for (int i = 0; i <= 40; ++i) {
        double x = 2.0 * i / 40;
        rows << g17(x) << ' ' << g17(x * x * x) << '\n';
    }
    std::istringstream in(rows.str());
    auto qe = potential_from_samples(in, 64);
    for (double x : {0.3, 1.0, 1.77})
        CHECK(std::abs(qe(x) - x * x * x) < 1e-3);

    std::istringstream bad("0 1\n0 2\n1 3\n2 4\n");
    CHECK_THROWS_AS(potential_from_samples(bad, 16), config_error);
    std::istringstream nan("0 1\n1 nan\n2 3\n3 4\n");
    CHECK_THROWS_AS(potential_from_samples(nan, 16), config_error);
}

TEST_CASE("assembly shifts the interval to start at zero") {
    JobConfig job;
    job.expression = "x";
    job.interval = {1, 1 + pi};
    job.run.N = 10;
    job.run.M = 64;
    auto a = assemble(job);
    CHECK(a.problem.basis->interval().lo == 0.0);
    CHECK(a.problem.basis->interval().hi == doctest::Approx(pi));
    // Shifted potential q(x+1) = x+1 at internal x = 0.5.
    CHECK(std::abs(a.problem.q(0.5) - 1.5) < 1e-12);
}

TEST_CASE("result tables round trip at 17 significant digits") {
    JobConfig job;
    job.builtin = "paine1";
    job.run.N = 16;
    job.run.M = 64;
    job.run.count = 4;
    auto a = assemble(job);
    auto r = find_eigenvalues(a.problem, a.run.count, ScanMode::RealScan);
    REQUIRE(r.eigenvalues.size() == 4);

    SUBCASE("csv") {
        auto csv = format_csv(r);
        std::istringstream lines(csv);
        std::string header;
        std::getline(lines, header);
        CHECK(header == "index,lambda_re,lambda_im,omega_re,omega_im,residual,method");
        std::string row;
        size_t i = 0;
        while (std::getline(lines, row)) {
            std::istringstream fields(row);
            std::string cell;
            std::getline(fields, cell, ',');
            CHECK(cell == std::to_string(i + 1));
            std::getline(fields, cell, ',');
            CHECK(g17(std::strtod(cell.c_str(), nullptr)) == cell);
            CHECK(std::strtod(cell.c_str(), nullptr) == r.eigenvalues[i].real());
            ++i;
        }
        CHECK(i == 4);
    }
    SUBCASE("json") {
        auto text = format_json(r, a.run, a.problem.q.degree(), 12.5);
        auto j = nlohmann::json::parse(text);
        CHECK(j["meta"]["N"] == 16);
        CHECK(j["meta"]["eps1"].get<double>() == r.eps1);
        REQUIRE(j["eigenvalues"].size() == 4);
        for (size_t i = 0; i < 4; ++i) {
            double re = j["eigenvalues"][i]["lambda_re"].get<double>();
            CHECK(re == r.eigenvalues[i].real());
            CHECK(g17(re) == g17(r.eigenvalues[i].real()));
        }
        // Re-serialization is bit-for-bit stable.
        CHECK(nlohmann::json::parse(j.dump()).dump() == j.dump());
    }
}

#ifdef SLK_CLI_PATH
namespace {
int run_cli(const std::string& args, std::string* out = nullptr) {
    std::string cmd = std::string(SLK_CLI_PATH) + " " + args;
    if (out) {
        cmd += " > cli_test_output.tmp 2>/dev/null";
        int rc = std::system(cmd.c_str());
        std::ifstream f("cli_test_output.tmp");
        std::stringstream ss;
        ss << f.rdbuf();
        *out = ss.str();
        std::remove("cli_test_output.tmp");
        return WEXITSTATUS(rc);
    }
    cmd += " >/dev/null 2>/dev/null";
    return WEXITSTATUS(std::system(cmd.c_str()));
}
} // namespace

TEST_CASE("command line end to end") {
    std::string out;
    int rc = run_cli("eigs --potential 0 --interval 0,pi --bc-left dirichlet "
                     "--bc-right dirichlet --count 5 --n 10 --m 64",
                     &out);
    CHECK(rc == 0);
    std::istringstream lines(out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "index,lambda_re,lambda_im,omega_re,omega_im,residual,method");
    int k = 0;
    while (std::getline(lines, line)) {
        ++k;
        double lam = std::strtod(line.substr(line.find(',') + 1).c_str(), nullptr);
        CHECK(lam == doctest::Approx(k * k).epsilon(1e-10));
    }
    CHECK(k == 5);

    CHECK(run_cli("eigs --potential 0") == 2);                  // missing interval
    CHECK(run_cli("eigs") == 2);                                // no potential source
    CHECK(run_cli("eigs --potential 'sin(' --interval 0,1") == 2);
    CHECK(run_cli("nosuchcommand") == 2);
    CHECK(run_cli("eigs --potential 0 --interval 0,pi --n 30 --m 32") == 2);
}
#endif
