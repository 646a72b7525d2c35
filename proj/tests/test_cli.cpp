#include "ecred/cli.hpp"
#include "schema_check.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace ecred;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

const nlohmann::json& schema() {
    static const nlohmann::json s = [] {
        std::ifstream in(ECRED_SCHEMA_PATH);
        return nlohmann::json::parse(in);
    }();
    return s;
}

void check_schema(const CliResult& r) {
    auto j = nlohmann::json::parse(r.out);
    auto errors = schema_check::validate_report(schema(), j);
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());
}

const std::string kMod12 = "[0,0,0,-12,-11]";

}  // namespace

TEST_CASE("survey prints the grouped two-row table") {
    auto r = cli({"survey", "--curve", kMod12, "--mod", "12", "--class-mod", "20", "--max-prime", "10000"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out ==
          "| \\|E_p(F_p)\\| mod m | p                      | primes |\n"
          "|--------------------|------------------------|--------|\n"
          "| 0 mod 12           | 1,9,11,13,17,19 mod 20 | 915    |\n"
          "| 6 mod 12           | 3,7 mod 20             | 311    |\n"
          "\n"
          "primes <= 10000: 1226 surveyed, 0 bad, 3 excluded\n");
}

TEST_CASE("survey --expect reports pass and failure through the exit code") {
    auto ok = cli({"survey", "--id", "mod12", "--mod", "12", "--class-mod", "20", "--max-prime", "5000", "--expect",
                   "1,9,11,13,17,19:0;3,7:6"});
    CHECK(ok.code == kExitOk);
    auto bad = cli({"survey", "--id", "mod12", "--mod", "12", "--class-mod", "20", "--max-prime", "5000", "--expect",
                    "1,9,11,13,17,19:0;3,7:0"});
    CHECK(bad.code == kExitVerificationFailed);
    CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("gcd of the order-2 example") {
    auto r = cli({"gcd", "--curve", "[1,-1,1,-199,510]"});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "2\n");
    // the coefficient list as printed has trivial gcd
    CHECK(cli({"gcd", "--curve", "[1,1,1,-199,510]"}).out == "1\n");
}

TEST_CASE("corpus-verify offline") {
    auto r = cli({"corpus-verify", "--offline", "--max-prime", "10000"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("primes <= 10000: PASS") != std::string::npos);

    auto neg = cli({"corpus-verify", "--offline", "--max-prime", "2000", "--perturb", "50a3"});
    CHECK(neg.code == kExitVerificationFailed);
    CHECK(neg.out.find("| 50a3    | 15  | 5   |") != std::string::npos);

    auto smoke = cli({"corpus-verify", "--offline", "--max-prime", "100"});
    CHECK(smoke.code == kExitOk);

    CHECK(cli({"corpus-verify", "--offline", "--perturb", "11a1"}).code == kExitUsage);
}

TEST_CASE("output is identical across thread counts") {
    std::vector<std::string> base{"survey", "--id", "z16", "--mod", "16", "--class-mod", "15", "--max-prime", "20000",
                                  "--format", "json"};
    auto one = cli(base);
    for (const char* t : {"2", "5"}) {
        auto args = base;
        args.insert(args.end(), {"--threads", t});
        CHECK(cli(args).out == one.out);
    }
    auto c1 = cli({"corpus-verify", "--offline", "--max-prime", "3000", "--format", "json"});
    auto c4 = cli({"corpus-verify", "--offline", "--max-prime", "3000", "--format", "json", "--threads", "4"});
    CHECK(c1.out == c4.out);
}

TEST_CASE("every subcommand emits a schema-valid json report") {
    const std::vector<std::vector<std::string>> cases{
        {"count", "--curve", "[0,-1,1,-10,-20]", "--max-prime", "50"},
        {"count", "--curve", "[0,-1,1,-10,-20]", "--prime", "11"},
        {"local", "--curve", "[0,-1,1,-10,-20]"},
        {"local", "--label", "50a3", "--offline"},
        {"extension", "--curve", "[0,-1,1,-10,-20]", "--prime", "7", "--degree", "3"},
        {"torsion", "--curve", "[1,0,1,-76,298]", "--d", "5"},
        {"twist", "--curve", "[0,-1,1,-10,-20]", "--d", "-3", "--prime", "13"},
        {"survey", "--id", "mod12", "--mod", "12", "--class-mod", "20", "--max-prime", "2000", "--expect",
         "1,9,11,13,17,19:0;3,7:6"},
        {"gcd", "--curve", "[1,-1,1,-199,510]", "--exclude-bad"},
        {"gcd-quadratic", "--id", "quad-sqrt33", "--max-prime", "500"},
        {"gcd-quadratic", "--curve", "[1,0,1,-76,298]", "--d", "5", "--max-prime", "500"},
        {"supersingular", "--curve", "[0,-6,0,-3,0]", "--max-prime", "200", "--mod", "3", "--mod", "4"},
        {"anomalous", "--label", "175b2", "--offline", "--max-prime", "2000", "--mod", "5"},
        {"family", "--family", "family3", "--t", "1..3", "--max-prime", "500"},
        {"family", "--family", "e1k", "--k", "2", "--eps", "-1", "--max-prime", "500"},
        {"kubert-check", "--coeffs", "6,5,5,0,0", "--T", "0", "--prime", "7", "--order", "5"},
        {"kubert-check", "--coeffs", "0,0,0,0,0", "--T", "0", "--prime", "5"},
        {"resolve", "--label", "50A3", "--offline"},
        {"corpus-verify", "--offline", "--max-prime", "200"},
    };
    for (auto args : cases) {
        args.insert(args.end(), {"--format", "json"});
        std::string what = args[0] + " " + args[1] + " " + args[2];
        INFO(what);
        auto r = cli(args);
        CHECK(r.code == kExitOk);
        check_schema(r);
    }
}

TEST_CASE("csv output") {
    auto r = cli({"survey", "--curve", kMod12, "--mod", "12", "--class-mod", "20", "--max-prime", "200", "--format",
                  "csv"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("p_mod_N,", 0) == 0);
    auto g = cli({"gcd", "--curve", "[0,1,0,-333,-3537]", "--format", "csv"});
    CHECK(g.out == "gcd\n3\n");
}

TEST_CASE("exit codes for bad input and missing resources") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"survey", "--curve", kMod12}).code == kExitUsage);  // --mod required
    CHECK(cli({"survey", "--curve", kMod12, "--mod", "0"}).code == kExitUsage);
    CHECK(cli({"gcd", "--curve", "[1,2"}).code == kExitUsage);
    CHECK(cli({"gcd", "--curve", "[0,0,0,0,0]"}).code == kExitUsage);  // singular
    CHECK(cli({"gcd"}).code == kExitUsage);
    CHECK(cli({"gcd", "--curve", kMod12, "--label", "11a1"}).code == kExitUsage);
    CHECK(cli({"gcd", "--id", "no-such-entry"}).code == kExitUsage);
    CHECK(cli({"extension", "--curve", kMod12, "--prime", "9"}).code == kExitUsage);
    CHECK(cli({"gcd", "--curve", kMod12, "--format", "xml"}).code == kExitUsage);
    CHECK(cli({"family", "--family", "nope", "--t", "1"}).code == kExitUsage);
    auto miss = cli({"gcd", "--label", "37a1", "--offline", "--cache-dir", "/nonexistent-ecred-cache"});
    CHECK(miss.code == kExitResource);
    CHECK(miss.err.find("37a1") != std::string::npos);
    CHECK(cli({"gcd", "--label", "not a label", "--offline"}).code == kExitUsage);
    auto help = cli({"--help"});
    CHECK(help.code == kExitOk);
    CHECK(help.out.find("corpus-verify") != std::string::npos);
}

TEST_CASE("gcd over a table row with --label matches the divisibility") {
    auto r = cli({"gcd", "--label", "50a3", "--offline", "--exclude-bad"});
    CHECK(r.code == kExitOk);
    CHECK(r.out == "3\n");
}
