#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "skyrmion");
    std::vector<const char*> argv;
    for (auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = skyrmion::cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        v.push_back(l);
    return v;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "skyrmion_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("number formatting") {
    CHECK(skyrmion::cli::num(0.1) == "0.10000000000000001");
    CHECK(skyrmion::cli::num(-2.0) == "-2");
    CHECK(skyrmion::cli::num(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("beta lists") {
    skyrmion::cli::RunConfig c;
    c.beta_min = 0.05;
    c.beta_max = 0.4;
    c.beta_count = 8;
    auto b = skyrmion::cli::beta_list(c);
    REQUIRE(b.size() == 8);
    CHECK(b.front() == 0.4);
    CHECK(b.back() == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(b[1] / b[0] == doctest::Approx(b[7] / b[6]));
    c.beta = {0.3};
    CHECK_THROWS(skyrmion::cli::beta_list(c));
}

TEST_CASE("usage and validation errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"solve", "--r", "1", "--beta", "0"}).code == 2);
    CHECK(run({"solve", "--r", "1", "--beta", "-1"}).code == 2);
    CHECK(run({"solve", "--r", "x", "--beta", "1"}).code == 2);
    CHECK(run({"spectrum", "--beta", "0.5", "--modes", ""}).code == 2);
    CHECK(run({"spectrum", "--beta", "0.5", "--modes", "0,12"}).code == 2);
    CHECK(run({"verify", "--suite", "bogus"}).code == 2);
    CHECK(run({"solve", "--beta", "1", "--format", "xml"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("solve writes the profile table and a sidecar") {
    auto r = run({"solve", "--r", "1", "--beta", "3", "--grid-points", "1024"});
    REQUIRE(r.code == 0);
    auto l = lines(r.out);
    REQUIRE(l.size() == 1025);
    CHECK(l[0] == "rho,f,fprime,theta,Q,Qbar,N,F,P");
    CHECK(r.out.find('\r') == std::string::npos);
    auto side = json::parse(r.err);
    CHECK(side["converged"] == true);
    CHECK(side["degree"].get<double>() == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(side["energy"]["total"].get<double>() < 2.0);
    CHECK(side["residual"].get<double>() <= 1e-10);
    CHECK(side.contains("decay_fit"));
    CHECK(side.contains("origin_derivative"));
}

TEST_CASE("solve in the monotone regime reports the flag") {
    auto r = run({"solve", "--r", "0.5", "--beta", "0.5", "--grid-points", "2048"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.err)["monotone"] == true);
}

TEST_CASE("output to a file puts the sidecar next to it") {
    auto csv = scratch("profile.csv");
    auto r = run({"solve", "--r", "1", "--beta", "1", "--grid-points", "1024", "--out", csv.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    CHECK(fs::exists(csv));
    auto side = csv;
    side.replace_extension(".json");
    REQUIRE(fs::exists(side));
    std::ifstream in(side);
    CHECK(json::parse(in)["converged"] == true);
}

TEST_CASE("identical runs produce identical bytes") {
    std::vector<std::string> args{"solve", "--r", "1", "--beta", "0.7", "--grid-points", "1024"};
    auto a = run(args), b = run(args);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
    std::vector<std::string> sp{"spectrum", "--r", "0.5", "--beta", "0.5", "--grid-points", "1024", "--seed", "7"};
    CHECK(run(sp).out == run(sp).out);
}

TEST_CASE("config file sets defaults and flags override it") {
    auto cfg = scratch("run.cfg");
    {
        std::ofstream f(cfg);
        f << "r=0.5\nbeta=0.5\ngrid-points=1024\n";
    }
    auto a = run({"solve", "--config", cfg.string()});
    REQUIRE(a.code == 0);
    auto sa = json::parse(a.err);
    CHECK(sa["r"].get<double>() == 0.5);
    CHECK(sa["grid_points"].get<int>() == 1024);
    auto b = run({"solve", "--config", cfg.string(), "--beta", "1"});
    REQUIRE(b.code == 0);
    CHECK(json::parse(b.err)["beta"].get<double>() == 1.0);
}

TEST_CASE("sweep with a single beta skips the fit but writes the row") {
    auto r = run({"sweep-beta", "--r", "1", "--beta", "0.3", "--grid-points", "1024"});
    REQUIRE(r.code == 0);
    auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    CHECK(l[0] == "beta,xnorm_diff,decay_rate,D,H,Vminus,Vplus,total");
    CHECK(json::parse(r.err)["fit"].is_null());
}

TEST_CASE("sweep fits an exponent") {
    auto r = run({"sweep-beta", "--r", "1", "--beta-min", "0.05", "--beta-max", "0.4", "--beta-count", "8",
                  "--grid-points", "2048"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 9);
    double e = json::parse(r.err)["exponent"].get<double>();
    CHECK(e >= 0.85);
    CHECK(e <= 1.15);
}

TEST_CASE("spectrum verdicts") {
    auto s = run({"spectrum", "--r", "0.5", "--beta", "0.5", "--modes", "0,1,2,3"});
    REQUIRE(s.code == 0);
    auto j = json::parse(s.out);
    CHECK(j["verdict"] == "stable");
    CHECK(j["modes"].size() == 4);
    CHECK(j["modes"][1]["zero_mode_residual"].is_number());
    auto u = run({"spectrum", "--r", "1.5", "--beta", "0.05"});
    REQUIRE(u.code == 0);
    CHECK(json::parse(u.out)["verdict"] == "unstable");
}

TEST_CASE("phase diagram rows in row-major order") {
    auto r = run({"phase-diagram", "--r", "1,0.5", "--beta", "1,0.6", "--grid-points", "2048", "--modes", "0,1,2"});
    REQUIRE(r.code == 0);
    auto l = lines(r.out);
    REQUIRE(l.size() == 5);
    CHECK(l[0] == "r,beta,h,k,converged,monotone,lambda_min,verdict");
    CHECK(l[1].rfind("1,1,2,0,true,true,", 0) == 0);
    CHECK(l[2].rfind("1,0.59999999999999998,", 0) == 0);
    CHECK(l[3].rfind("0.5,1,", 0) == 0);
    CHECK(l[3].substr(l[3].rfind(',') + 1) == "stable");
}

TEST_CASE("resolvent command") {
    auto r = run({"resolvent", "--r", "1", "--beta", "0.3,0.1,0.03", "--s", "1", "--grid-points", "1024"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 4);
    CHECK(json::parse(r.err)["exponent"].get<double>() <= 0.1);
    CHECK(run({"resolvent", "--beta", "0.3,0.1", "--xi", "other"}).code == 2);
}

TEST_CASE("verify exit code reflects the checks") {
    auto r = run({"verify", "--suite", "identities"});
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["pass"] == true);
    CHECK(j["criteria"][0]["checks"].size() > 0);
    auto c = j["criteria"][0]["checks"][0];
    CHECK(c.contains("name"));
    CHECK(c.contains("value"));
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("pass"));
}

}
